#include "ppd/prior.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

#include "ppd/logmath.hpp"

namespace ppd {

void validate_dataset(std::span<const Example> data) {
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (!std::isfinite(data[i].x) || !std::isfinite(data[i].y)) {
      throw std::invalid_argument("dataset example " + std::to_string(i) + " is not finite");
    }
  }
}

Dataset canonical_order(std::span<const Example> data) {
  Dataset sorted(data.begin(), data.end());
  std::sort(sorted.begin(), sorted.end(), [](const Example& a, const Example& b) {
    return a.x < b.x || (a.x == b.x && a.y < b.y);
  });
  return sorted;
}

std::string_view family_name(Family f) {
  switch (f) {
    case Family::Step:
      return "step";
    case Family::Sine:
      return "sine";
    case Family::Line:
      return "line";
  }
  return "unknown";
}

Family parse_family(std::string_view name) {
  if (name == "step") return Family::Step;
  if (name == "sine") return Family::Sine;
  if (name == "line") return Family::Line;
  throw std::invalid_argument("unknown latent family '" + std::string(name) + "'");
}

// ---------------------------------------------------------------------------

double Grid::operator[](std::size_t i) const {
  if (count <= 1 || i == 0) return lo;
  if (i + 1 == count) return hi;
  return lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
}

std::vector<double> Grid::values() const {
  if (count == 0) throw std::invalid_argument("grid must contain at least one point");
  std::vector<double> out(count);
  for (std::size_t i = 0; i < count; ++i) out[i] = (*this)[i];
  return out;
}

double UniformInput::log_density() const { return -std::log(hi - lo); }

double UniformInput::sample(std::mt19937_64& rng) const {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

FinitePrior::FinitePrior(std::vector<FunctionLatent> latents, std::vector<double> log_prior,
                         double noise_sigma, UniformInput input)
    : latents_(std::move(latents)),
      log_prior_(std::move(log_prior)),
      noise_sigma_(noise_sigma),
      input_(input) {
  if (latents_.empty()) throw std::invalid_argument("prior needs at least one latent");
  if (!(noise_sigma_ > 0.0) || !std::isfinite(noise_sigma_)) {
    throw std::invalid_argument("noise_sigma must be positive");
  }
  if (!(input_.hi > input_.lo)) throw std::invalid_argument("input range must be non-empty");
  if (log_prior_.empty()) {
    log_prior_.assign(latents_.size(), -std::log(static_cast<double>(latents_.size())));
  }
  if (log_prior_.size() != latents_.size()) {
    throw std::invalid_argument("log_prior has " + std::to_string(log_prior_.size()) +
                                " entries for " + std::to_string(latents_.size()) + " latents");
  }
  for (double v : log_prior_) {
    if (std::isnan(v) || v == std::numeric_limits<double>::infinity()) {
      throw std::invalid_argument("log_prior entries must be finite or -inf");
    }
  }
  const double log_z = log_sum_exp_blocked(log_prior_, 1);
  if (!std::isfinite(log_z)) throw std::invalid_argument("prior has no mass");
  for (double& v : log_prior_) v -= log_z;
}

double FinitePrior::family_mass(Family f) const {
  double mass = 0.0;
  for (std::size_t i = 0; i < latents_.size(); ++i) {
    if (latents_[i].family == f) mass += std::exp(log_prior_[i]);
  }
  return mass;
}

// ---------------------------------------------------------------------------

Grid default_step_position_grid() { return {-1.0, 1.0, 101}; }
Grid default_step_height_grid() { return {-1.0, 1.0, 101}; }
Grid default_step_size_grid() { return {0.0, 2.0, 101}; }
Grid extended_step_size_grid() { return {-1.0, 1.0, 101}; }
Grid default_sine_offset_grid() { return {0.0, 2.0 * std::numbers::pi, 101}; }
Grid default_line_offset_grid() { return {-1.0, 1.0, 101}; }
Grid default_line_slope_grid() { return {-1.0, 1.0, 101}; }

namespace {

void append_steps(std::vector<FunctionLatent>& out, const Grid& dx, const Grid& dy, const Grid& h) {
  const auto xs = dx.values();
  const auto ys = dy.values();
  const auto hs = h.values();
  out.reserve(out.size() + xs.size() * ys.size() * hs.size());
  for (double a : xs)
    for (double b : ys)
      for (double c : hs) out.push_back(FunctionLatent::step(a, b, c));
}

void append_sines(std::vector<FunctionLatent>& out, const Grid& dx, bool dedupe) {
  auto offsets = dx.values();
  if (dedupe && offsets.size() > 1 &&
      std::abs(offsets.back() - offsets.front() - 2.0 * std::numbers::pi) < 1e-12) {
    offsets.pop_back();
  }
  for (double a : offsets) out.push_back(FunctionLatent::sine(a));
}

void append_lines(std::vector<FunctionLatent>& out, const Grid& dy, const Grid& m) {
  const auto ys = dy.values();
  const auto ms = m.values();
  for (double a : ys)
    for (double b : ms) out.push_back(FunctionLatent::line(a, b));
}

}  // namespace

FinitePrior build_prior(const PriorSpec& spec) {
  if (!(spec.noise_sigma > 0.0)) throw std::invalid_argument("noise_sigma must be positive");
  std::vector<FunctionLatent> latents;
  std::vector<double> log_prior;

  const std::string& fam = spec.family;
  if (fam == "step" || fam == "step-extended") {
    const Grid h_default = fam == "step" ? default_step_size_grid() : extended_step_size_grid();
    append_steps(latents, spec.step_dx.value_or(default_step_position_grid()),
                 spec.step_dy.value_or(default_step_height_grid()), spec.step_h.value_or(h_default));
  } else if (fam == "sine") {
    append_sines(latents, spec.sine_dx.value_or(default_sine_offset_grid()), spec.dedupe_sine);
  } else if (fam == "line") {
    append_lines(latents, spec.line_dy.value_or(default_line_offset_grid()),
                 spec.line_m.value_or(default_line_slope_grid()));
  } else if (fam == "sine+line") {
    if (spec.sine_class_weight < 0.0 || spec.line_class_weight < 0.0 ||
        !(spec.sine_class_weight + spec.line_class_weight > 0.0)) {
      throw std::invalid_argument("mixture weights must be non-negative with a positive sum");
    }
    append_sines(latents, spec.sine_dx.value_or(default_sine_offset_grid()), spec.dedupe_sine);
    const std::size_t n_sines = latents.size();
    append_lines(latents, spec.line_dy.value_or(default_line_offset_grid()),
                 spec.line_m.value_or(default_line_slope_grid()));
    const std::size_t n_lines = latents.size() - n_sines;
    const double total = spec.sine_class_weight + spec.line_class_weight;
    const double log_sine = std::log(spec.sine_class_weight / total) - std::log(double(n_sines));
    const double log_line = std::log(spec.line_class_weight / total) - std::log(double(n_lines));
    log_prior.assign(n_sines, log_sine);
    log_prior.insert(log_prior.end(), n_lines, log_line);
  } else if (fam == "custom") {
    if (spec.custom_latents.empty()) throw std::invalid_argument("custom prior has no latents");
    latents = spec.custom_latents;
    log_prior = spec.custom_log_prior;
  } else {
    throw std::invalid_argument("unknown prior family '" + fam + "'");
  }
  return FinitePrior(std::move(latents), std::move(log_prior), spec.noise_sigma);
}

FinitePrior step_prior(double noise_sigma) {
  PriorSpec s;
  s.family = "step";
  s.noise_sigma = noise_sigma;
  return build_prior(s);
}

FinitePrior step_extended_prior(double noise_sigma) {
  PriorSpec s;
  s.family = "step-extended";
  s.noise_sigma = noise_sigma;
  return build_prior(s);
}

FinitePrior sine_prior(double noise_sigma) {
  PriorSpec s;
  s.family = "sine";
  s.noise_sigma = noise_sigma;
  return build_prior(s);
}

FinitePrior line_prior(double noise_sigma) {
  PriorSpec s;
  s.family = "line";
  s.noise_sigma = noise_sigma;
  return build_prior(s);
}

FinitePrior sine_line_prior(double noise_sigma) {
  PriorSpec s;
  s.family = "sine+line";
  s.noise_sigma = noise_sigma;
  return build_prior(s);
}

// ---------------------------------------------------------------------------

DatasetSampler::DatasetSampler(const FinitePrior& prior) : prior_(&prior) {
  cumulative_.resize(prior.size());
  double acc = 0.0;
  const auto lp = prior.log_prior();
  for (std::size_t i = 0; i < lp.size(); ++i) {
    acc += std::exp(lp[i]);
    cumulative_[i] = acc;
  }
}

std::size_t DatasetSampler::sample_latent(std::mt19937_64& rng) const {
  const double u = std::uniform_real_distribution<double>(0.0, cumulative_.back())(rng);
  const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
  const auto idx = static_cast<std::size_t>(it - cumulative_.begin());
  return std::min(idx, cumulative_.size() - 1);
}

Dataset DatasetSampler::sample_from(std::size_t latent_index, std::size_t n,
                                    std::mt19937_64& rng) const {
  const FunctionLatent& l = prior_->latent(latent_index);
  std::normal_distribution<double> noise(0.0, prior_->noise_sigma());
  Dataset data;
  data.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = prior_->input().sample(rng);
    data.push_back({x, l(x) + noise(rng)});
  }
  return data;
}

SampledDataset DatasetSampler::sample(std::mt19937_64& rng, std::optional<std::size_t> n) const {
  SampledDataset out;
  out.latent_index = sample_latent(rng);
  const std::size_t size =
      n ? *n : static_cast<std::size_t>(std::uniform_int_distribution<int>(1, 100)(rng));
  out.data = sample_from(out.latent_index, size, rng);
  return out;
}

SampledDataset sample_dataset(const FinitePrior& prior, std::optional<std::size_t> n,
                              std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return DatasetSampler(prior).sample(rng, n);
}

double log_likelihood_ordered(const FunctionLatent& latent, std::span<const Example> data,
                              double noise_sigma) {
  double sq = 0.0;
  for (const Example& e : data) {
    const double r = e.y - latent(e.x);
    sq += r * r;
  }
  const double n = static_cast<double>(data.size());
  return -0.5 * sq / (noise_sigma * noise_sigma) - n * (std::log(noise_sigma) + kLogSqrtTwoPi);
}

double log_likelihood(const FinitePrior& prior, std::size_t latent_index,
                      std::span<const Example> data) {
  if (latent_index >= prior.size()) {
    throw std::out_of_range("latent index " + std::to_string(latent_index) + " out of range [0, " +
                            std::to_string(prior.size()) + ")");
  }
  validate_dataset(data);
  const Dataset sorted = canonical_order(data);
  return log_likelihood_ordered(prior.latent(latent_index), sorted, prior.noise_sigma());
}

double sup_distance(const FunctionLatent& a, const FunctionLatent& b, std::size_t points) {
  double best = 0.0;
  for (std::size_t i = 0; i < points; ++i) {
    const double x = points == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(points - 1);
    best = std::max(best, std::abs(a(x) - b(x)));
  }
  return best;
}

}  // namespace ppd
