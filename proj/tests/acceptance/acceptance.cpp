// Acceptance suite: one PASS/FAIL line per criterion, with the measured
// numbers next to the thresholds. Exit status is the number of failures.
//
//   acceptance [--out DIR] [--only N[,N...]] [--jobs N]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "../unit/oracles.hpp"
#include "ppd/coins.hpp"
#include "ppd/csv.hpp"
#include "ppd/experiments.hpp"
#include "ppd/gp.hpp"
#include "ppd/logmath.hpp"
#include "ppd/mlp.hpp"
#include "ppd/parallel.hpp"
#include "ppd/posterior.hpp"

namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Env {
  fs::path out;
  unsigned jobs = 0;
};

ppd::ExperimentReport run_default(const Env& env, const std::string& id, json config = json::object()) {
  ppd::ExperimentSpec spec;
  spec.id = id;
  spec.config = std::move(config);
  spec.out_dir = env.out / id;
  spec.jobs = env.jobs;
  return ppd::run_experiment(spec);
}

std::vector<std::vector<double>> read_csv_numeric(const fs::path& p) {
  std::ifstream in(p);
  std::string line;
  std::getline(in, line);
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    std::vector<double> row;
    for (const auto& c : ppd::split_csv_line(line)) row.push_back(c.empty() ? NAN : std::stod(c));
    rows.push_back(std::move(row));
  }
  return rows;
}

// 1 -------------------------------------------------------------------------
void counting(const Env&, Outcome& o) {
  const auto t0 = Clock::now();
  const std::vector<std::uint64_t> ks{1, 2, 4, 8, 16, 32, 64};
  const std::vector<double> table{0.6634, 0.7463, 0.8292, 0.8955, 0.9397, 0.9656, 0.9795};
  const auto curve = ppd::coins::counting_curve(ppd::coins::CoinPrior::percent_grid(), ks);
  const double dt = seconds_since(t0);
  double worst = 0.0;
  for (std::size_t i = 0; i < ks.size(); ++i) worst = std::max(worst, std::abs(curve[i] - table[i]));
  o.require(worst <= 1e-3, "max |curve - table| <= 1e-3");
  o.require(dt < 1.0, "runtime < 1 s");
  o.detail << "max|err|=" << worst << " t=" << dt << "s";
}

// 2 -------------------------------------------------------------------------
void coin_misspec(const Env&, Outcome& o) {
  const auto t0 = Clock::now();
  const ppd::coins::CoinPrior prior({0.3, 0.6});
  std::vector<std::uint64_t> ns;
  for (std::uint64_t n = 1; n <= 1024; ++n) ns.push_back(n);
  const auto r = ppd::coins::misspecified_sweep(prior, 0.5, ns);

  const double at1024 = r.avg_predictive.back();
  bool monotone = true;
  for (std::size_t i = 4; i < ns.size(); ++i) monotone = monotone && r.avg_predictive[i] > r.avg_predictive[i - 1];
  const double per_flip = 0.5 * std::log(0.6 / 0.3) + 0.5 * std::log(0.4 / 0.7);
  double gap_err = 0.0;
  for (std::size_t i = 0; i < ns.size(); ++i) {
    const double gap = r.expected_log_likelihood[i][1] - r.expected_log_likelihood[i][0];
    gap_err = std::max(gap_err, std::abs(gap - per_flip * static_cast<double>(ns[i])));
  }

  // Every one of the 2^n sequences for n <= 12.
  double brute_err = 0.0;
  for (std::uint64_t n = 1; n <= 12; ++n) {
    long double pred = 0.0L;
    for (std::uint64_t seq = 0; seq < (1ull << n); ++seq) {
      const int h = __builtin_popcountll(seq);
      const int t = static_cast<int>(n) - h;
      const long double pseq = std::pow(0.5L, static_cast<long double>(n));
      const long double w3 = std::pow(0.3L, h) * std::pow(0.7L, t);
      const long double w6 = std::pow(0.6L, h) * std::pow(0.4L, t);
      pred += pseq * (0.3L * w3 + 0.6L * w6) / (w3 + w6);
    }
    const std::vector<std::uint64_t> one{n};
    const double got = ppd::coins::misspecified_sweep(prior, 0.5, one).avg_predictive[0];
    brute_err = std::max(brute_err, std::abs(got - static_cast<double>(pred)));
  }
  const double dt = seconds_since(t0);
  o.require(std::abs(at1024 - 0.6) <= 1e-6, "|avg(1024) - 0.6| <= 1e-6");
  o.require(monotone, "monotone increasing for n >= 4");
  o.require(gap_err <= 1e-9, "gap = 0.0668 n within 1e-9");
  o.require(brute_err <= 1e-12, "2^n enumeration within 1e-12");
  o.require(dt < 5.0, "runtime < 5 s");
  o.detail << "avg(1024)=" << at1024 << " gap_err=" << gap_err << " brute_err=" << brute_err << " t=" << dt
           << "s";
}

// 3 -------------------------------------------------------------------------
void oracle_suite(const Env&, Outcome& o) {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(20240601);
  std::uniform_int_distribution<std::size_t> n_ex(0, 20);
  double max_err = 0.0, max_seq = 0.0;
  bool perm_exact = true;
  for (int trial = 0; trial < 50; ++trial) {
    const auto prior = oracle::random_small_prior(rng);
    auto d = oracle::random_dataset(rng, n_ex(rng));
    const auto w = ppd::posterior(prior, d);
    const auto ref = oracle::log_posterior(prior, d);
    for (std::size_t l = 0; l < prior.size(); ++l) {
      max_err = std::max(max_err, std::abs(w.log_weights[l] - static_cast<double>(ref[l])));
    }
    const std::span<const ppd::Example> all(d);
    const auto half = ppd::posterior(prior, all.first(d.size() / 2));
    const auto seq = ppd::posterior_update(prior, half, all.subspan(d.size() / 2));
    for (std::size_t l = 0; l < prior.size(); ++l) {
      max_seq = std::max(max_seq, std::abs(seq.log_weights[l] - w.log_weights[l]));
    }
    std::shuffle(d.begin(), d.end(), rng);
    const auto p = ppd::posterior(prior, d, {3});
    perm_exact = perm_exact && p.log_weights == w.log_weights && p.log_evidence == w.log_evidence;
  }
  const double dt = seconds_since(t0);
  o.require(max_err <= 1e-10, "oracle within 1e-10");
  o.require(max_seq <= 1e-10, "sequential within 1e-10");
  o.require(perm_exact, "permutation bit-exact");
  o.require(dt < 10.0, "runtime < 10 s");
  o.detail << "oracle_err=" << max_err << " seq_err=" << max_seq << " perm_exact=" << perm_exact
           << " t=" << dt << "s";
}

// 4 -------------------------------------------------------------------------
void step_smooth(const Env& env, Outcome& o) {
  const auto t0 = Clock::now();
  const auto report = run_default(env, "fig1-step-smooth");
  const double dt = seconds_since(t0);
  const fs::path dir = env.out / "fig1-step-smooth";

  // Hull over latents that keep posterior mass.
  ppd::Dataset data;
  for (const auto& r : read_csv_numeric(dir / "context.csv")) data.push_back({r[0], r[1]});
  const auto prior = ppd::step_prior();
  const auto w = ppd::posterior(prior, data, {env.jobs});
  const auto rows = read_csv_numeric(dir / "ppd.csv");
  std::vector<double> lo(rows.size(), INFINITY), hi(rows.size(), -INFINITY);
  for (std::size_t l = 0; l < prior.size(); ++l) {
    if (w.probability(l) == 0.0) continue;
    const auto& f = prior.latent(l);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const double v = f(rows[i][0]);
      lo[i] = std::min(lo[i], v);
      hi[i] = std::max(hi[i], v);
    }
  }
  bool in_hull = true;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    in_hull = in_hull && rows[i][1] >= lo[i] - 1e-12 && rows[i][1] <= hi[i] + 1e-12;
  }
  const auto transition = report.summary.at("transition_points").get<std::size_t>();
  o.require(in_hull, "mean inside latent hull");
  o.require(transition >= 10, ">= 10 strictly intermediate grid cells");
  o.require(dt < 60.0, "full run < 60 s");
  o.detail << "transition_cells=" << transition << " (10%..90% band, width "
           << report.summary.at("transition_width").get<double>() << ") in_hull=" << in_hull
           << " t=" << dt << "s on " << std::thread::hardware_concurrency() << " core(s)";
}

// 5 -------------------------------------------------------------------------
void sine_flat(const Env& env, Outcome& o) {
  const auto report = run_default(env, "fig2-sine-flat");
  const double dev = report.summary.at("max_abs_deviation").get<double>();
  o.require(dev < 0.05, "max deviation < 0.05");
  o.detail << "max_abs_deviation=" << dev << " (threshold 0.05)";
}

// 6 -------------------------------------------------------------------------
void mixture_degradation(const Env& env, Outcome& o) {
  const auto report = run_default(env, "fig9-mixture-degradation");
  const auto mass = report.summary.at("line_class_mass").get<std::vector<double>>();
  const auto odds = report.summary.at("line_log_odds").get<std::vector<double>>();
  const double r2 = report.summary.at("gap_fit_r2").get<double>();
  bool mass_up = true, odds_up = true;
  for (std::size_t i = 1; i < mass.size(); ++i) {
    mass_up = mass_up && mass[i] >= mass[i - 1];
    odds_up = odds_up && odds[i] > odds[i - 1];
  }
  o.require(mass_up && odds_up, "line class mass increasing (log-odds strictly)");
  o.require(r2 > 0.95, "gap linear fit R^2 > 0.95");
  o.detail << "log_odds=" << json(odds).dump() << " R2=" << r2;
}

// 7 -------------------------------------------------------------------------
void representability(const Env& env, Outcome& o) {
  const auto report = run_default(env, "fig5-representability");
  for (const auto& row : report.summary.at("rows")) {
    const double m = row.at("optimal_pair_mass").get<double>();
    const double amp = row.at("ppd_amplitude").get<double>();
    const double opt = row.at("optimal_amplitude").get<double>();
    o.require(m < 0.5, "pair mass < 0.5 at n=" + std::to_string(row.at("n").get<int>()));
    o.require(amp < opt, "PPD flatter than optimum");
    o.detail << "n=" << row.at("n") << ": mass=" << m << " amp=" << amp << "/" << opt << "  ";
  }
}

// 8 -------------------------------------------------------------------------
void evidence_monotone(const Env& env, Outcome& o) {
  const auto report = run_default(env, "fig7-likelihood-threshold", json{{"query_points", 101}});
  const auto ev = report.summary.at("log_evidence").get<std::vector<double>>();
  bool dec = true;
  for (std::size_t i = 1; i < ev.size(); ++i) dec = dec && ev[i] < ev[i - 1];
  o.require(ev.size() == 4 && dec, "strictly decreasing over 4 separations");
  o.detail << "log_evidence=" << json(ev).dump();
}

// 9 -------------------------------------------------------------------------
void gp_overconfidence(const Env& env, Outcome& o) {
  const auto t0 = Clock::now();
  const auto report = run_default(env, "fig10-gp-step");
  const double dt = seconds_since(t0);
  const auto cov = report.summary.at("coverage_95").get<std::vector<double>>();
  const auto ctrl = report.summary.at("control_coverage_95").get<std::vector<double>>();
  const double min_ctrl = *std::min_element(ctrl.begin(), ctrl.end());

  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double brute_err = 0.0;
  for (std::size_t n = 1; n <= 8; ++n) {
    ppd::Dataset d;
    for (std::size_t i = 0; i < n; ++i) d.push_back({u(rng), u(rng)});
    ppd::gp::GPConfig c;
    c.constant_mean = 0.5;
    const auto gp = ppd::gp::GPPosterior::fit(c, d);
    const oracle::BruteGP ref(c, d);
    for (double x = -0.25; x <= 1.25; x += 0.05) {
      brute_err = std::max(brute_err, std::abs(gp.mean(x) - static_cast<double>(ref.mean(x))));
      brute_err = std::max(brute_err, std::abs(gp.latent_variance(x) - static_cast<double>(ref.latent_var(x))));
    }
  }
  o.require(cov.front() - cov.back() >= 0.1, "coverage(10) - coverage(400) >= 0.1");
  o.require(min_ctrl >= 0.99, "control coverage >= 0.99");
  o.require(brute_err <= 1e-8, "brute-force solve within 1e-8");
  o.require(dt < 30.0, "runtime < 30 s");
  o.detail << "coverage(10)=" << cov.front() << " coverage(400)=" << cov.back() << " control_min=" << min_ctrl
           << " brute_err=" << brute_err << " t=" << dt << "s";
}

// 10 ------------------------------------------------------------------------
void mlp_sweep(const Env& env, Outcome& o) {
  std::mt19937_64 rng(42);
  auto net = ppd::mlp::MLP::initialized({}, rng);
  std::vector<double> xs, ys, ws;
  std::normal_distribution<double> noise(0.0, 0.1);
  for (int i = 0; i < 32; ++i) {
    ys.push_back(i % 2);
    xs.push_back(ys.back() + noise(rng));
    ws.push_back(1.0 / 32.0);
  }
  std::vector<double> grad(net.parameter_count());
  net.loss_and_gradient(xs, ys, ws, grad);
  std::uniform_int_distribution<std::size_t> pick(0, net.parameter_count() - 1);
  double worst_rel = 0.0;
  for (int t = 0; t < 100; ++t) {
    const std::size_t i = pick(rng);
    auto p = net.parameters();
    const double saved = p[i];
    p[i] = saved + 1e-5;
    const double up = net.loss_and_gradient(xs, ys, ws, {});
    p[i] = saved - 1e-5;
    const double down = net.loss_and_gradient(xs, ys, ws, {});
    p[i] = saved;
    const double fd = (up - down) / 2e-5;
    worst_rel = std::max(worst_rel, std::abs(fd - grad[i]) / std::max({std::abs(fd), std::abs(grad[i]), 1e-6}));
  }

  const auto t0 = Clock::now();
  const auto report = run_default(env, "fig6-mlp-sweep");
  const double dt = seconds_since(t0);
  const double sd_det = report.summary.at("interior_std_deterministic").get<double>();
  const double sd_noisy = report.summary.at("interior_std_noisy").get<double>();
  const double at0 = report.summary.at("max_prediction_at_0").get<double>();
  const double at1 = report.summary.at("min_prediction_at_1").get<double>();
  const unsigned workers = ppd::resolve_jobs(env.jobs);
  o.require(sd_det > sd_noisy, "interior std larger without noise");
  o.require(at0 < 0.1 && at1 > 0.9, "all 200 models fit the support");
  o.require(worst_rel < 1e-4, "gradient check < 1e-4");
  o.require(dt < (workers > 1 ? 120.0 : 600.0), workers > 1 ? "runtime < 2 min" : "runtime < 10 min");
  o.detail << "std_det=" << sd_det << " std_noisy=" << sd_noisy << " max_p(0)=" << at0 << " min_p(1)=" << at1
           << " grad_rel=" << worst_rel << " t=" << dt << "s (" << workers << " worker(s))";
}

// 11 ------------------------------------------------------------------------
void bayes_nll(const Env& env, Outcome& o) {
  const ppd::FinitePrior single({ppd::FunctionLatent::line(0.0, 0.5)}, {}, 0.1);
  const auto nll = ppd::bayes_optimal_nll(single, 50, 100'000, 11, {env.jobs});
  const double target = 0.5 * std::log(2.0 * M_PI * 0.01) + 0.5;
  o.require(std::abs(nll.mean - target) <= 0.01, "single-latent NLL within 0.01 of -0.8836");
  o.detail << "single=" << nll.mean << " (target " << target << ")";

  struct Named {
    const char* name;
    ppd::FinitePrior prior;
    std::size_t evals;
  };
  const std::vector<Named> priors{{"step", ppd::step_prior(), 100},
                                  {"step-extended", ppd::step_extended_prior(), 100},
                                  {"sine", ppd::sine_prior(), 2000},
                                  {"line", ppd::line_prior(), 1000},
                                  {"sine+line", ppd::sine_line_prior(), 1000}};
  for (const auto& p : priors) {
    const auto e = ppd::bayes_optimal_nll(p.prior, 50, p.evals, 5, {env.jobs});
    o.require(e.mean < 0.0, std::string("NLL < 0 for ") + p.name);
    o.detail << " " << p.name << "=" << e.mean << "+-" << e.standard_error;
  }
}

}  // namespace

int main(int argc, char** argv) {
  Env env;
  env.out = fs::temp_directory_path() / "ppd_acceptance";
  std::set<int> only;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--out" && i + 1 < argc) {
      env.out = argv[++i];
    } else if (a == "--jobs" && i + 1 < argc) {
      env.jobs = static_cast<unsigned>(std::stoul(argv[++i]));
    } else if (a == "--only" && i + 1 < argc) {
      std::stringstream s(argv[++i]);
      std::string tok;
      while (std::getline(s, tok, ',')) only.insert(std::stoi(tok));
    } else {
      std::cerr << "usage: acceptance [--out DIR] [--jobs N] [--only N[,N...]]\n";
      return 2;
    }
  }
  fs::create_directories(env.out);

  const std::vector<std::pair<const char*, std::function<void(const Env&, Outcome&)>>> criteria{
      {"counting posterior", counting},
      {"coin misspecification asymptote", coin_misspec},
      {"posterior engine oracle suite", oracle_suite},
      {"step prior smoothness", step_smooth},
      {"sine prior flat line", sine_flat},
      {"mixture degradation", mixture_degradation},
      {"representability", representability},
      {"evidence monotonicity", evidence_monotone},
      {"GP over-confidence", gp_overconfidence},
      {"MLP seed sweep", mlp_sweep},
      {"Bayes-optimal NLL", bayes_nll},
  };

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i + 1);
    if (!only.empty() && !only.contains(id)) continue;
    Outcome o;
    try {
      criteria[i].second(env, o);
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << " [exception: " << e.what() << "]";
    }
    failures += o.pass ? 0 : 1;
    std::printf("%s  %2d  %-34s %s\n", o.pass ? "PASS" : "FAIL", id, criteria[i].first, o.detail.str().c_str());
    std::fflush(stdout);
  }
  std::printf("%d failure(s)\n", failures);
  return failures;
}
