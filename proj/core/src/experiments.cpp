#include "ppd/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>

#include "ppd/coins.hpp"
#include "ppd/csv.hpp"
#include "ppd/gp.hpp"
#include "ppd/logmath.hpp"
#include "ppd/mlp.hpp"
#include "ppd/posterior.hpp"
#include "ppd/prior.hpp"

#ifndef PPD_VERSION_STRING
#define PPD_VERSION_STRING "unknown"
#endif

namespace ppd {

using nlohmann::json;

namespace {

// ---------------------------------------------------------------------------
// Shared helpers
// ---------------------------------------------------------------------------

struct Context {
  const json& cfg;
  std::uint64_t seed;
  std::filesystem::path out;
  unsigned jobs;
  ExperimentReport& report;

  std::filesystem::path file(const std::string& name) {
    const auto p = out / name;
    report.files.push_back(p);
    return p;
  }
};

std::vector<double> query_grid(const json& cfg) {
  return linspace(0.0, 1.0, cfg.at("query_points").get<std::size_t>());
}

void write_context_csv(const std::filesystem::path& path, std::span<const Example> data) {
  CsvWriter w(path, {"x", "y"});
  for (const auto& e : data) w.cell(e.x).cell(e.y).end_row();
  w.close();
}

Dataset dataset_from_json(const json& j) {
  Dataset d;
  for (const auto& row : j) {
    if (!row.is_array() || row.size() != 2) {
      throw std::invalid_argument("context entries must be [x, y] pairs");
    }
    d.push_back({row[0].get<double>(), row[1].get<double>()});
  }
  validate_dataset(d);
  return d;
}

/// Longest run of query points whose PPD mean lies strictly inside the
/// 10%..90% band of its own range, and the longest run strictly inside
/// (min, max) up to 1e-3 of the range.
json transition_stats(const PPDResult& r) {
  const auto [lo_it, hi_it] = std::minmax_element(r.mean.begin(), r.mean.end());
  const double lo = *lo_it;
  const double hi = *hi_it;
  auto longest_run = [&](double a, double b) {
    std::size_t best_begin = 0, best_len = 0, run_begin = 0, run_len = 0;
    for (std::size_t i = 0; i < r.size(); ++i) {
      if (r.mean[i] > a && r.mean[i] < b) {
        if (run_len == 0) run_begin = i;
        if (++run_len > best_len) {
          best_len = run_len;
          best_begin = run_begin;
        }
      } else {
        run_len = 0;
      }
    }
    return std::pair{best_begin, best_len};
  };
  const double range = hi - lo;
  const auto [b10, n10] = longest_run(lo + 0.1 * range, lo + 0.9 * range);
  const auto [bin, nin] = longest_run(lo + 1e-3 * range, hi - 1e-3 * range);
  const double width = n10 > 0 ? r.query_xs[b10 + n10 - 1] - r.query_xs[b10] : 0.0;
  return {{"mean_min", lo},
          {"mean_max", hi},
          {"transition_points", n10},
          {"transition_width", width},
          {"intermediate_points", nin},
          {"intermediate_begin_x", nin > 0 ? r.query_xs[bin] : 0.0}};
}

std::string fixed(double v, int digits) {
  std::ostringstream s;
  s.setf(std::ios::fixed);
  s.precision(digits);
  s << v;
  return s.str();
}

double max_abs_deviation_from_average(std::span<const double> v) {
  double avg = 0.0;
  for (double x : v) avg += x;
  avg /= static_cast<double>(v.size());
  double dev = 0.0;
  for (double x : v) dev = std::max(dev, std::abs(x - avg));
  return dev;
}

// ---------------------------------------------------------------------------
// Experiments
// ---------------------------------------------------------------------------

void run_fig1(Context& c) {
  const auto& cfg = c.cfg;
  const FinitePrior prior = step_prior(cfg.at("noise_sigma").get<double>());
  Dataset data;
  if (!cfg.at("context").is_null()) {
    data = dataset_from_json(cfg.at("context"));
  } else {
    const auto n = cfg.at("n_context").get<std::size_t>();
    const double slope = cfg.at("slope").get<double>();
    const double intercept = cfg.at("intercept").get<double>();
    std::mt19937_64 rng(c.seed);
    std::normal_distribution<double> noise(0.0, prior.noise_sigma());
    for (std::size_t i = 0; i < n; ++i) {
      const double x = (static_cast<double>(i) + 0.5) / static_cast<double>(n);
      data.push_back({x, intercept + slope * x + noise(rng)});
    }
  }
  const EngineOptions eo{c.jobs};
  const PosteriorWeights w = posterior(prior, data, eo);
  PPDOptions po;
  po.jobs = c.jobs;
  po.density = cfg.at("density").get<bool>();
  const auto xs = query_grid(cfg);
  const PPDResult r = ppd(prior, w, xs, po);

  write_context_csv(c.file("context.csv"), data);
  write_ppd_csv(c.file("ppd.csv"), r);
  if (po.density) write_density_csv(c.file("density.csv"), r);
  write_posterior_csv(c.file("posterior_top.csv"), prior, w, cfg.at("top_k").get<std::size_t>());

  json s = transition_stats(r);
  s["log_evidence"] = w.log_evidence;
  s["n_context"] = data.size();
  c.report.summary = s;
}

void run_fig2(Context& c) {
  const auto& cfg = c.cfg;
  const FinitePrior prior = sine_prior(cfg.at("noise_sigma").get<double>());
  const auto n = cfg.at("n_context").get<std::size_t>();
  const double amp = cfg.at("amplitude").get<double>();
  const double freq = cfg.at("frequency").get<double>();
  std::mt19937_64 rng(c.seed);
  std::uniform_real_distribution<double> ux(0.0, 1.0);
  std::normal_distribution<double> noise(0.0, prior.noise_sigma());
  Dataset data;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = ux(rng);
    data.push_back({x, amp * std::sin(freq * std::numbers::pi * x) + noise(rng)});
  }
  const PosteriorWeights w = posterior(prior, data, {c.jobs});
  PPDOptions po;
  po.jobs = c.jobs;
  const PPDResult r = ppd(prior, w, query_grid(cfg), po);
  write_context_csv(c.file("context.csv"), data);
  write_ppd_csv(c.file("ppd.csv"), r);
  write_posterior_csv(c.file("posterior_top.csv"), prior, w, prior.size());

  double max_w = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) max_w = std::max(max_w, w.probability(i));
  c.report.summary = {{"max_abs_deviation", max_abs_deviation_from_average(r.mean)},
                      {"amplitude", amp},
                      {"max_posterior_weight", max_w},
                      {"log_evidence", w.log_evidence}};
}

void run_fig3(Context& c) {
  const auto& cfg = c.cfg;
  PriorSpec spec;
  spec.family = "sine+line";
  spec.noise_sigma = cfg.at("noise_sigma").get<double>();
  spec.sine_class_weight = cfg.at("sine_weight").get<double>();
  spec.line_class_weight = cfg.at("line_weight").get<double>();
  const FinitePrior prior = build_prior(spec);

  const auto n = cfg.at("n_context").get<std::size_t>();
  const double amp = cfg.at("amplitude").get<double>();
  const double slope = cfg.at("slope").get<double>();
  std::mt19937_64 rng(c.seed);
  std::normal_distribution<double> noise(0.0, prior.noise_sigma());
  Dataset data;
  const auto xs_ctx = linspace(0.0, 1.0, n);
  for (double x : xs_ctx) {
    data.push_back({x, amp * std::sin(3.0 * std::numbers::pi * x) + slope * x + noise(rng)});
  }
  const PosteriorWeights w = posterior(prior, data, {c.jobs});
  PPDOptions po;
  po.jobs = c.jobs;
  const PPDResult r = ppd(prior, w, query_grid(cfg), po);
  write_context_csv(c.file("context.csv"), data);
  write_ppd_csv(c.file("ppd.csv"), r);
  write_posterior_csv(c.file("posterior_top.csv"), prior, w, cfg.at("top_k").get<std::size_t>());

  json s{{"sine_class_mass", family_mass(prior, w, Family::Sine)},
         {"line_class_mass", family_mass(prior, w, Family::Line)},
         {"log_evidence", w.log_evidence}};
  const auto n_eval = cfg.at("nll_eval").get<std::size_t>();
  if (n_eval > 0) {
    const NllEstimate nll =
        bayes_optimal_nll(prior, cfg.at("nll_context").get<std::size_t>(), n_eval, c.seed, {c.jobs});
    s["bayes_optimal_nll"] = nll.mean;
    s["bayes_optimal_nll_se"] = nll.standard_error;
    CsvWriter nw(c.file("bayes_nll.csv"), {"n_context", "nll", "standard_error", "samples"});
    nw.cell(cfg.at("nll_context").get<std::size_t>()).cell(nll.mean).cell(nll.standard_error)
        .cell(nll.samples).end_row();
    nw.close();
  }
  c.report.summary = s;
}

struct RepresentabilityPair {
  FunctionLatent up;
  FunctionLatent down;
};

RepresentabilityPair optimal_pair(double left, double right, double height) {
  // up: -height before `left`, +height after; down: +height before `right`,
  // -height after. Their average is 0, height, 0.
  return {FunctionLatent::step(left, -height, 2.0 * height),
          FunctionLatent::step(right, height, -2.0 * height)};
}

std::size_t find_latent(const FinitePrior& prior, const FunctionLatent& target) {
  const auto latents = prior.latents();
  for (std::size_t i = 0; i < latents.size(); ++i) {
    const auto& l = latents[i];
    if (l.family != target.family) continue;
    bool same = true;
    for (std::size_t p = 0; p < l.param_count(); ++p) {
      same = same && std::abs(l.params[p] - target.params[p]) < 1e-9;
    }
    if (same) return i;
  }
  throw std::invalid_argument("latent is not on the prior grid");
}

void run_fig5(Context& c) {
  const auto& cfg = c.cfg;
  const FinitePrior prior = step_extended_prior(cfg.at("noise_sigma").get<double>());
  const double left = cfg.at("left").get<double>();
  const double right = cfg.at("right").get<double>();
  const double height = cfg.at("height").get<double>();
  const auto pair = optimal_pair(left, right, height);
  const std::size_t iu = find_latent(prior, pair.up);
  const std::size_t id = find_latent(prior, pair.down);

  CsvWriter table(c.file("representability.csv"),
                  {"n", "optimal_pair_mass", "ppd_amplitude", "optimal_amplitude"});
  json rows = json::array();
  const auto xs = query_grid(cfg);
  for (std::size_t n : cfg.at("n_values").get<std::vector<std::size_t>>()) {
    std::mt19937_64 rng(c.seed + n);
    std::normal_distribution<double> noise(0.0, prior.noise_sigma());
    Dataset data;
    for (std::size_t i = 0; i < n; ++i) {
      const double x = (static_cast<double>(i) + 0.5) / static_cast<double>(n);
      const double f = i % 2 == 0 ? pair.up(x) : pair.down(x);
      data.push_back({x, f + noise(rng)});
    }
    const PosteriorWeights w = posterior(prior, data, {c.jobs});
    PPDOptions po;
    po.jobs = c.jobs;
    const PPDResult r = ppd(prior, w, xs, po);
    const double mass = w.probability(iu) + w.probability(id);
    const auto [lo, hi] = std::minmax_element(r.mean.begin(), r.mean.end());
    double opt_lo = 1e300, opt_hi = -1e300;
    for (double x : xs) {
      const double m = 0.5 * (pair.up(x) + pair.down(x));
      opt_lo = std::min(opt_lo, m);
      opt_hi = std::max(opt_hi, m);
    }
    table.cell(n).cell(mass).cell(*hi - *lo).cell(opt_hi - opt_lo).end_row();
    write_context_csv(c.file("context_n" + std::to_string(n) + ".csv"), data);
    write_ppd_csv(c.file("ppd_n" + std::to_string(n) + ".csv"), r);
    rows.push_back({{"n", n},
                    {"optimal_pair_mass", mass},
                    {"ppd_amplitude", *hi - *lo},
                    {"optimal_amplitude", opt_hi - opt_lo}});
  }
  table.close();
  c.report.summary = {{"rows", rows}, {"up_index", iu}, {"down_index", id}};
}

void run_fig4(Context& c) {
  const auto& cfg = c.cfg;
  const coins::CoinPrior prior(cfg.at("head_probs").get<std::vector<double>>());
  const double true_p = cfg.at("true_p").get<double>();
  const auto ns = cfg.at("n_values").get<std::vector<std::uint64_t>>();
  const auto r = coins::misspecified_sweep(prior, true_p, ns);

  CsvWriter pred(c.file("coin_predictive.csv"), {"n", "avg_predictive"});
  CsvWriter lat(c.file("coin_latents.csv"),
                {"n", "latent_p", "expected_log_likelihood", "expected_posterior_mass"});
  std::ostringstream t;
  t << "n      avg_predictive";
  for (double p : prior.head_probs) t << "   E[loglik|p=" << fixed(p, 2) << "]";
  t << '\n';
  for (std::size_t i = 0; i < ns.size(); ++i) {
    pred.cell(static_cast<std::size_t>(ns[i])).cell(r.avg_predictive[i]).end_row();
    t << ns[i] << std::string(7 - std::min<std::size_t>(6, std::to_string(ns[i]).size()), ' ')
      << fixed(r.avg_predictive[i], 12);
    for (std::size_t j = 0; j < prior.size(); ++j) {
      lat.cell(static_cast<std::size_t>(ns[i])).cell(prior.head_probs[j])
          .cell(r.expected_log_likelihood[i][j]).cell(r.avg_posterior_mass[i][j]).end_row();
      t << "   " << fixed(r.expected_log_likelihood[i][j], 6);
    }
    t << '\n';
  }
  pred.close();
  lat.close();
  c.report.table = t.str();
  c.report.summary = {{"n_values", ns}, {"avg_predictive", r.avg_predictive}};
}

void run_fig7(Context& c) {
  const auto& cfg = c.cfg;
  const FinitePrior prior = step_extended_prior(cfg.at("noise_sigma").get<double>());
  const auto per_line = cfg.at("points_per_line").get<std::size_t>();
  const auto seps = cfg.at("separations").get<std::vector<double>>();
  CsvWriter ev(c.file("evidence.csv"), {"separation", "log_evidence"});
  json values = json::array();
  const auto xs = query_grid(cfg);
  for (std::size_t k = 0; k < seps.size(); ++k) {
    const double d = seps[k];
    Dataset data;
    for (std::size_t i = 0; i < per_line; ++i) {
      const double base = static_cast<double>(i) / static_cast<double>(per_line);
      const double step = 1.0 / static_cast<double>(per_line);
      data.push_back({base + 0.25 * step, 0.5 * d});
      data.push_back({base + 0.75 * step, -0.5 * d});
    }
    const PosteriorWeights w = posterior(prior, data, {c.jobs});
    PPDOptions po;
    po.jobs = c.jobs;
    write_context_csv(c.file("context_sep" + std::to_string(k) + ".csv"), data);
    write_ppd_csv(c.file("ppd_sep" + std::to_string(k) + ".csv"), ppd(prior, w, xs, po));
    ev.cell(d).cell(w.log_evidence).end_row();
    values.push_back(w.log_evidence);
  }
  ev.close();
  c.report.summary = {{"separations", seps}, {"log_evidence", values}};
}

void run_fig8(Context& c) {
  const auto& cfg = c.cfg;
  const auto probs = cfg.at("head_probs");
  const coins::CoinPrior prior = probs.is_null()
                                     ? coins::CoinPrior::percent_grid()
                                     : coins::CoinPrior(probs.get<std::vector<double>>());
  const auto ks = cfg.at("ks").get<std::vector<std::uint64_t>>();
  const auto curve = coins::counting_curve(prior, ks);
  CsvWriter w(c.file("counting.csv"), {"k", "posterior_predictive"});
  std::ostringstream t;
  t << "k      posterior_predictive\n";
  for (std::size_t i = 0; i < ks.size(); ++i) {
    w.cell(static_cast<std::size_t>(ks[i])).cell(curve[i]).end_row();
    t << ks[i] << std::string(7 - std::min<std::size_t>(6, std::to_string(ks[i]).size()), ' ')
      << fixed(curve[i], 6) << '\n';
  }
  w.close();
  c.report.table = t.str();
  c.report.summary = {{"ks", ks}, {"posterior_predictive", curve}};
}

double linear_fit_r2(std::span<const double> xs, std::span<const double> ys, double* slope_out) {
  const double n = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  const double slope = sxy / sxx;
  if (slope_out) *slope_out = slope;
  return syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
}

void run_fig9(Context& c) {
  const auto& cfg = c.cfg;
  PriorSpec spec;
  spec.family = "sine+line";
  spec.noise_sigma = cfg.at("noise_sigma").get<double>();
  spec.sine_class_weight = cfg.at("sine_weight").get<double>();
  spec.line_class_weight = cfg.at("line_weight").get<double>();
  const FinitePrior prior = build_prior(spec);

  auto ns = cfg.at("n_values").get<std::vector<std::size_t>>();
  if (ns.empty() || !std::is_sorted(ns.begin(), ns.end())) {
    throw std::invalid_argument("n_values must be non-empty and ascending");
  }
  const double amp = cfg.at("amplitude").get<double>();
  const double slope = cfg.at("slope").get<double>();
  std::mt19937_64 rng(c.seed);
  std::uniform_real_distribution<double> ux(0.0, 1.0);
  std::normal_distribution<double> noise(0.0, prior.noise_sigma());
  Dataset all;
  for (std::size_t i = 0; i < ns.back(); ++i) {
    const double x = ux(rng);
    all.push_back({x, amp * std::sin(3.0 * std::numbers::pi * x) + slope * x + noise(rng)});
  }
  write_context_csv(c.file("context.csv"), all);

  CsvWriter table(c.file("degradation.csv"), {"n", "line_class_mass", "line_log_odds",
                                              "best_line_minus_best_sine", "log_evidence"});
  PosteriorWeights w = posterior(prior, std::span<const Example>(), {c.jobs});
  std::size_t seen = 0;
  std::vector<double> nd, gaps, odds, masses;
  const auto xs = query_grid(cfg);
  for (std::size_t n : ns) {
    w = posterior_update(prior, w, std::span<const Example>(all).subspan(seen, n - seen), {c.jobs});
    seen = n;
    const std::size_t bl = argmax_latent(prior, w, Family::Line);
    const std::size_t bs = argmax_latent(prior, w, Family::Sine);
    // Log-odds from per-class log-sum-exp so that it stays finite when the
    // class mass rounds to 1.
    LogSumAccumulator line_acc, sine_acc;
    for (std::size_t i = 0; i < prior.size(); ++i) {
      (prior.latent(i).family == Family::Line ? line_acc : sine_acc).add(w.log_weights[i]);
    }
    const double log_odds = line_acc.value() - sine_acc.value();
    const double line_mass = 1.0 / (1.0 + std::exp(-log_odds));
    const double gap = w.log_weights[bl] - w.log_weights[bs];
    table.cell(n).cell(line_mass).cell(log_odds).cell(gap).cell(w.log_evidence).end_row();
    PPDOptions po;
    po.jobs = c.jobs;
    write_ppd_csv(c.file("ppd_n" + std::to_string(n) + ".csv"), ppd(prior, w, xs, po));
    nd.push_back(static_cast<double>(n));
    gaps.push_back(gap);
    odds.push_back(log_odds);
    masses.push_back(line_mass);
  }
  table.close();
  double gap_slope = 0.0;
  const double r2 = ns.size() >= 2 ? linear_fit_r2(nd, gaps, &gap_slope) : 1.0;
  c.report.summary = {{"n_values", ns},          {"line_class_mass", masses},
                      {"line_log_odds", odds},   {"best_line_minus_best_sine", gaps},
                      {"gap_fit_slope", gap_slope}, {"gap_fit_r2", r2}};
}

void run_fig10(Context& c) {
  const auto& cfg = c.cfg;
  gp::GPConfig g;
  g.lengthscale = cfg.at("lengthscale").get<double>();
  g.outputscale = cfg.at("outputscale").get<double>();
  g.noise_sigma = cfg.at("noise_sigma").get<double>();
  g.constant_mean = cfg.at("constant_mean").get<double>();
  const auto ns = cfg.at("n_values").get<std::vector<std::size_t>>();
  const auto grid = cfg.at("grid_points").get<std::size_t>();
  const gp::StepTarget step{cfg.at("step_location").get<double>(), cfg.at("step_low").get<double>(),
                            cfg.at("step_high").get<double>()};
  const double control_value = cfg.at("control_value").get<double>();
  const gp::StepTarget control{0.5, control_value, control_value};

  const auto rows = gp::gp_step_experiment(g, ns, step, grid);
  const auto ctrl = gp::gp_step_experiment(g, ns, control, grid);

  auto write_table = [&](const std::string& name, const std::vector<gp::CoverageRow>& rs) {
    CsvWriter w(c.file(name), {"n_context", "coverage_95", "mean_abs_error"});
    for (const auto& r : rs) w.cell(r.n_context).cell(r.coverage_95).cell(r.mean_abs_error).end_row();
    w.close();
  };
  write_table("gp_coverage.csv", rows);
  write_table("gp_control.csv", ctrl);
  json cov = json::array(), ctrl_cov = json::array(), jit = json::array();
  for (const auto& r : rows) {
    CsvWriter w(c.file("gp_predictions_n" + std::to_string(r.n_context) + ".csv"),
                {"x", "mean", "variance"});
    for (std::size_t i = 0; i < r.grid.size(); ++i) {
      w.cell(r.grid[i]).cell(r.mean[i]).cell(r.latent_variance[i]).end_row();
    }
    w.close();
    cov.push_back(r.coverage_95);
    jit.push_back(r.jitter);
  }
  for (const auto& r : ctrl) ctrl_cov.push_back(r.coverage_95);
  c.report.summary = {{"n_values", ns}, {"coverage_95", cov}, {"control_coverage_95", ctrl_cov},
                      {"jitter", jit}};
}

void run_fig6(Context& c) {
  const auto& cfg = c.cfg;
  mlp::TrainConfig tc;
  tc.arch.hidden_layers = cfg.at("hidden_layers").get<std::size_t>();
  tc.arch.width = cfg.at("width").get<std::size_t>();
  tc.learning_rate = cfg.at("learning_rate").get<double>();
  tc.batch_size = cfg.at("batch_size").get<std::size_t>();
  tc.steps = cfg.at("steps").get<std::size_t>();
  tc.seed = c.seed;
  const auto n_seeds = cfg.at("n_seeds").get<std::size_t>();
  const auto grid = cfg.at("grid_points").get<std::size_t>();

  tc.input_noise_sigma = 0.0;
  const auto det = mlp::seed_sweep(n_seeds, tc, c.jobs, grid);
  tc.input_noise_sigma = cfg.at("input_noise_sigma").get<double>();
  const auto noisy = mlp::seed_sweep(n_seeds, tc, c.jobs, grid);

  auto write_matrix = [&](const std::string& name, const mlp::SweepResult& s) {
    std::vector<std::string> header{"seed"};
    for (double x : s.grid) header.push_back(format_double(x));
    CsvWriter w(c.file(name), header);
    for (std::size_t i = 0; i < s.seeds.size(); ++i) {
      w.cell(static_cast<std::size_t>(s.seeds[i]));
      for (double p : s.predictions[i]) w.cell(p);
      w.end_row();
    }
    w.close();
  };
  write_matrix("mlp_predictions_deterministic.csv", det);
  write_matrix("mlp_predictions_noisy.csv", noisy);
  CsvWriter sum(c.file("mlp_summary.csv"), {"x", "std_deterministic", "std_noisy"});
  for (std::size_t g = 0; g < det.grid.size(); ++g) {
    sum.cell(det.grid[g]).cell(det.std_per_x[g]).cell(noisy.std_per_x[g]).end_row();
  }
  sum.close();

  auto support = [](const mlp::SweepResult& s) {
    double worst0 = 0.0, worst1 = 1.0;
    for (const auto& row : s.predictions) {
      worst0 = std::max(worst0, row.front());
      worst1 = std::min(worst1, row.back());
    }
    return std::pair{worst0, worst1};
  };
  const auto [d0, d1] = support(det);
  const auto [n0, n1] = support(noisy);
  c.report.summary = {{"interior_std_deterministic", mlp::mean_std_between(det, 0.2, 0.8)},
                      {"interior_std_noisy", mlp::mean_std_between(noisy, 0.2, 0.8)},
                      {"max_prediction_at_0", std::max(d0, n0)},
                      {"min_prediction_at_1", std::min(d1, n1)},
                      {"steps", tc.steps}};
}

// ---------------------------------------------------------------------------
// Registry
// ---------------------------------------------------------------------------

struct Entry {
  ExperimentInfo info;
  std::function<void(Context&)> run;
};

json pow2_list(std::uint64_t from, std::uint64_t to) {
  json a = json::array();
  for (std::uint64_t v = from; v <= to; v *= 2) a.push_back(v);
  return a;
}

const std::vector<Entry>& entries() {
  static const std::vector<Entry> all = [] {
    std::vector<Entry> e;
    e.push_back({{"fig1-step-smooth", "Fig. 1",
                  "Exact PPD of the 1,030,301-latent step prior on a noisy ramp; averaging many "
                  "steps gives a smooth mean.",
                  {{"n_context", 50}, {"slope", 1.0}, {"intercept", 0.0}, {"noise_sigma", 0.1},
                   {"query_points", 1001}, {"density", false}, {"top_k", 10000},
                   {"context", nullptr}},
                  {"context.csv", "ppd.csv", "posterior_top.csv", "[density.csv]"}},
                 run_fig1});
    e.push_back({{"fig2-sine-flat", "Fig. 2",
                  "Sine-offset prior conditioned on samples of a sine with another frequency.",
                  {{"n_context", 50}, {"amplitude", 0.2}, {"frequency", 2.0}, {"noise_sigma", 0.1},
                   {"query_points", 1001}},
                  {"context.csv", "ppd.csv", "posterior_top.csv"}},
                 run_fig2});
    e.push_back({{"fig3-sloped-sine", "Fig. 3",
                  "Sine+line mixture prior conditioned on a slightly sloped sine; also reports "
                  "the Bayes-optimal NLL of the prior.",
                  {{"n_context", 30}, {"amplitude", 0.2}, {"slope", 0.05}, {"noise_sigma", 0.1},
                   {"sine_weight", 0.5}, {"line_weight", 0.5}, {"query_points", 1001},
                   {"top_k", 10000}, {"nll_context", 50}, {"nll_eval", 200}},
                  {"context.csv", "ppd.csv", "posterior_top.csv", "bayes_nll.csv"}},
                 run_fig3});
    e.push_back({{"fig5-representability", "Fig. 5",
                  "Extended step prior on a two-line dataset: the latent pair whose average "
                  "fits best gets little posterior mass.",
                  {{"n_values", {50, 200}}, {"left", 0.3}, {"right", 0.7}, {"height", 0.5},
                   {"noise_sigma", 0.1}, {"query_points", 1001}},
                  {"representability.csv", "context_n<n>.csv", "ppd_n<n>.csv"}},
                 run_fig5});
    e.push_back({{"fig4-coin-misspec", "Fig. 4",
                  "Two-coin prior {0.3, 0.6} on fair flips, averaged exactly over outcomes.",
                  {{"head_probs", {0.3, 0.6}}, {"true_p", 0.5}, {"n_values", pow2_list(1, 1024)}},
                  {"coin_predictive.csv", "coin_latents.csv"}},
                 run_fig4});
    e.push_back({{"fig7-likelihood-threshold", "Fig. 7",
                  "Marginal evidence of two interleaved horizontal lines as they move apart.",
                  {{"separations", {0.5, 1.0, 1.5, 2.0}}, {"points_per_line", 10},
                   {"noise_sigma", 0.1}, {"query_points", 1001}},
                  {"evidence.csv", "context_sep<i>.csv", "ppd_sep<i>.csv"}},
                 run_fig7});
    e.push_back({{"fig8-counting", "Fig. 8",
                  "Posterior head probability after k heads under the 99-coin prior.",
                  {{"head_probs", nullptr}, {"ks", pow2_list(1, 64)}},
                  {"counting.csv"}},
                 run_fig8});
    e.push_back({{"fig9-mixture-degradation", "Fig. 9",
                  "Sine+line prior on a sloped sine: the posterior drifts to lines as n grows.",
                  {{"n_values", {10, 25, 50, 100}}, {"amplitude", 0.2}, {"slope", 0.5},
                   {"noise_sigma", 0.1}, {"sine_weight", 0.5}, {"line_weight", 0.5},
                   {"query_points", 1001}},
                  {"context.csv", "degradation.csv", "ppd_n<n>.csv"}},
                 run_fig9});
    e.push_back({{"fig10-gp-step", "Fig. 10",
                  "RBF Gaussian process on noiseless step data: 95% band coverage vs n.",
                  {{"n_values", {10, 20, 50, 100, 200, 400}}, {"lengthscale", 0.4},
                   {"outputscale", 1.0}, {"noise_sigma", 0.1}, {"constant_mean", 0.5},
                   {"step_location", 0.5}, {"step_low", 0.0}, {"step_high", 1.0},
                   {"control_value", 1.0}, {"grid_points", 1001}},
                  {"gp_coverage.csv", "gp_control.csv", "gp_predictions_n<n>.csv"}},
                 run_fig10});
    e.push_back({{"fig6-mlp-sweep", "Fig. 6",
                  "100 seeds of a 3x64 ReLU MLP on the 0/1 task, with and without input noise.",
                  {{"n_seeds", 100}, {"steps", 2000}, {"learning_rate", 1e-3}, {"batch_size", 1024},
                   {"hidden_layers", 3}, {"width", 64}, {"input_noise_sigma", 0.1},
                   {"grid_points", 1001}},
                  {"mlp_predictions_deterministic.csv", "mlp_predictions_noisy.csv",
                   "mlp_summary.csv"}},
                 run_fig6});
    return e;
  }();
  return all;
}

const Entry& find_entry(const std::string& id) {
  for (const auto& e : entries()) {
    if (e.info.id == id) return e;
  }
  throw std::invalid_argument("unknown experiment id '" + id + "'");
}

json merge_config(const json& defaults, const json& overrides) {
  if (overrides.is_null()) return defaults;
  if (!overrides.is_object()) throw std::invalid_argument("experiment config must be a JSON object");
  json merged = defaults;
  for (const auto& [key, value] : overrides.items()) {
    if (!defaults.contains(key)) throw std::invalid_argument("unknown config key '" + key + "'");
    const json& d = defaults.at(key);
    const bool compatible = d.is_null() || value.is_null() || (d.is_number() && value.is_number()) ||
                            d.type() == value.type();
    if (!compatible) {
      throw std::invalid_argument("config key '" + key + "' expects " + std::string(d.type_name()));
    }
    merged[key] = value;
  }
  return merged;
}

std::string compiler_id() {
#if defined(__clang__)
  return std::string("clang ") + __clang_version__;
#elif defined(__GNUC__)
  return std::string("gcc ") + __VERSION__;
#else
  return "unknown";
#endif
}

}  // namespace

std::string library_version() { return PPD_VERSION_STRING; }

const std::vector<ExperimentInfo>& experiment_registry() {
  static const std::vector<ExperimentInfo> infos = [] {
    std::vector<ExperimentInfo> v;
    for (const auto& e : entries()) v.push_back(e.info);
    return v;
  }();
  return infos;
}

const ExperimentInfo& find_experiment(const std::string& id) { return find_entry(id).info; }

ExperimentReport run_experiment(const ExperimentSpec& spec) {
  const Entry& entry = find_entry(spec.id);
  const json cfg = merge_config(entry.info.defaults, spec.config);

  std::error_code ec;
  std::filesystem::create_directories(spec.out_dir, ec);
  if (ec) {
    throw std::runtime_error("cannot create output directory " + spec.out_dir.string() + ": " +
                             ec.message());
  }

  ExperimentReport report;
  Context ctx{cfg, spec.seed, spec.out_dir, spec.jobs, report};
  const auto start = std::chrono::steady_clock::now();
  entry.run(ctx);
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  json files = json::array();
  for (const auto& f : report.files) files.push_back(f.filename().string());
  report.metadata = {{"experiment", spec.id},
                     {"figure", entry.info.figure},
                     {"seed", spec.seed},
                     {"config", cfg},
                     {"version", library_version()},
                     {"compiler", compiler_id()},
                     {"jobs", spec.jobs},
                     {"wall_time_s", seconds},
                     {"files", files},
                     {"summary", report.summary}};
  const auto meta_path = spec.out_dir / "metadata.json";
  std::ofstream meta(meta_path, std::ios::trunc);
  if (!meta) throw std::runtime_error("cannot write " + meta_path.string());
  meta << report.metadata.dump(2) << '\n';
  if (!meta) throw std::runtime_error("failed writing " + meta_path.string());
  report.files.push_back(meta_path);
  return report;
}

ExperimentSpec spec_from_metadata(const json& metadata) {
  ExperimentSpec spec;
  spec.id = metadata.at("experiment").get<std::string>();
  spec.seed = metadata.at("seed").get<std::uint64_t>();
  spec.config = metadata.at("config");
  spec.jobs = metadata.value("jobs", 0u);
  find_entry(spec.id);
  return spec;
}

}  // namespace ppd
