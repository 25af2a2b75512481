#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ppd {

// ---------------------------------------------------------------------------
// Data
// ---------------------------------------------------------------------------

struct Example {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Example&, const Example&) = default;
};

/// An in-context dataset. Consumers treat it as an unordered multiset.
using Dataset = std::vector<Example>;

/// Throws std::invalid_argument if any coordinate is NaN or infinite.
void validate_dataset(std::span<const Example> data);

/// Copy of `data` sorted by (x, y). All likelihood reductions run over this
/// order, which makes them exactly invariant to permutations of the input.
Dataset canonical_order(std::span<const Example> data);

// ---------------------------------------------------------------------------
// Latent mean functions
// ---------------------------------------------------------------------------

enum class Family : std::uint8_t { Step, Sine, Line };

std::string_view family_name(Family f);
/// Accepts "step", "sine", "line" (case-sensitive). Throws on anything else.
Family parse_family(std::string_view name);

inline constexpr double kSineAmplitude = 0.2;
inline constexpr double kSineAngularFrequency = 3.0 * 3.14159265358979323846;

/// One latent of a function prior. Parameter layout per family:
///   Step: {dx, dy, h}   f(x) = dy if x < dx, dy + h otherwise
///   Sine: {dx, -, -}    f(x) = 0.2 sin(3 pi x + dx)
///   Line: {dy, m, -}    f(x) = m x + dy
struct FunctionLatent {
  Family family = Family::Line;
  std::array<double, 3> params{};

  static FunctionLatent step(double dx, double dy, double h) { return {Family::Step, {dx, dy, h}}; }
  static FunctionLatent sine(double dx) { return {Family::Sine, {dx, 0.0, 0.0}}; }
  static FunctionLatent line(double dy, double m) { return {Family::Line, {dy, m, 0.0}}; }
  static FunctionLatent constant(double c) { return line(c, 0.0); }

  double operator()(double x) const {
    switch (family) {
      case Family::Step:
        return x < params[0] ? params[1] : params[1] + params[2];
      case Family::Sine:
        return kSineAmplitude * std::sin(kSineAngularFrequency * x + params[0]);
      case Family::Line:
        return params[1] * x + params[0];
    }
    return 0.0;
  }

  std::size_t param_count() const { return family == Family::Step ? 3 : family == Family::Sine ? 1 : 2; }

  friend bool operator==(const FunctionLatent&, const FunctionLatent&) = default;
};

inline double eval_latent(const FunctionLatent& l, double x) { return l(x); }

// ---------------------------------------------------------------------------
// Grids and priors
// ---------------------------------------------------------------------------

/// Inclusive evenly spaced grid. Values are generated from the index, so
/// both endpoints are exact and there is no accumulated drift.
struct Grid {
  double lo = 0.0;
  double hi = 0.0;
  std::size_t count = 1;

  double operator[](std::size_t i) const;
  std::vector<double> values() const;
};

/// Uniform input density on [lo, hi]. Its log density is the per-example
/// term that the likelihood omits and the evidence adds back.
struct UniformInput {
  double lo = 0.0;
  double hi = 1.0;

  double log_density() const;
  double sample(std::mt19937_64& rng) const;
};

/// An enumerated latent set with log prior weights. Immutable once built.
class FinitePrior {
 public:
  /// Normalizes `log_prior` (so callers may pass unnormalized weights).
  /// An empty `log_prior` means uniform. Throws std::invalid_argument on an
  /// empty latent list, misaligned weights or non-positive noise.
  FinitePrior(std::vector<FunctionLatent> latents, std::vector<double> log_prior,
              double noise_sigma = 0.1, UniformInput input = {});

  std::size_t size() const { return latents_.size(); }
  const FunctionLatent& latent(std::size_t i) const { return latents_.at(i); }
  std::span<const FunctionLatent> latents() const { return latents_; }
  std::span<const double> log_prior() const { return log_prior_; }
  double noise_sigma() const { return noise_sigma_; }
  const UniformInput& input() const { return input_; }

  /// Total prior mass of the latents belonging to `f`.
  double family_mass(Family f) const;

 private:
  std::vector<FunctionLatent> latents_;
  std::vector<double> log_prior_;
  double noise_sigma_;
  UniformInput input_;
};

/// Grids of the built-in families.
Grid default_step_position_grid();   // dx: {-1, -0.98, ..., 1}
Grid default_step_height_grid();     // dy: {-1, -0.98, ..., 1}
Grid default_step_size_grid();       // h:  {0, 0.02, ..., 2}
Grid extended_step_size_grid();      // h:  {-1, -0.98, ..., 1}
Grid default_sine_offset_grid();     // dx: {0, 2pi/100, ..., 2pi}
Grid default_line_offset_grid();     // dy: {-1, ..., 1}
Grid default_line_slope_grid();      // m:  {-1, ..., 1}

/// Declarative description of a prior, usually read from JSON (see
/// prior_config.hpp). Unset grids fall back to the family defaults.
struct PriorSpec {
  std::string family = "step";  // step | step-extended | sine | line | sine+line | custom
  std::optional<Grid> step_dx, step_dy, step_h;
  std::optional<Grid> sine_dx;
  std::optional<Grid> line_dy, line_m;
  double noise_sigma = 0.1;
  double sine_class_weight = 0.5;  // sine+line only
  double line_class_weight = 0.5;
  /// Drops the last sine offset when it coincides with the first modulo 2pi.
  bool dedupe_sine = false;
  std::vector<FunctionLatent> custom_latents;
  std::vector<double> custom_log_prior;  // optional, aligned with custom_latents
};

/// Enumerates latents lexicographically over the parameter grids (first
/// parameter outermost). For sine+line the sines come first, then lines;
/// each class gets its class weight spread uniformly inside it.
FinitePrior build_prior(const PriorSpec& spec);

FinitePrior step_prior(double noise_sigma = 0.1);
FinitePrior step_extended_prior(double noise_sigma = 0.1);
FinitePrior sine_prior(double noise_sigma = 0.1);
FinitePrior line_prior(double noise_sigma = 0.1);
FinitePrior sine_line_prior(double noise_sigma = 0.1);

// ---------------------------------------------------------------------------
// Sampling and likelihood
// ---------------------------------------------------------------------------

struct SampledDataset {
  std::size_t latent_index = 0;
  Dataset data;
};

/// Draws latents and datasets from a prior. Holds the cumulative prior so
/// that repeated draws from a large prior stay cheap.
class DatasetSampler {
 public:
  explicit DatasetSampler(const FinitePrior& prior);

  std::size_t sample_latent(std::mt19937_64& rng) const;
  /// `n` unset draws the size uniformly from {1, ..., 100}.
  SampledDataset sample(std::mt19937_64& rng, std::optional<std::size_t> n = std::nullopt) const;
  Dataset sample_from(std::size_t latent_index, std::size_t n, std::mt19937_64& rng) const;

 private:
  const FinitePrior* prior_;
  std::vector<double> cumulative_;
};

SampledDataset sample_dataset(const FinitePrior& prior, std::optional<std::size_t> n,
                              std::uint64_t seed);

/// Sum over examples of log Normal(y; f(x), sigma^2), with the uniform input
/// density omitted. The squared residuals are accumulated in the given
/// order; `log_likelihood` below canonicalizes first.
double log_likelihood_ordered(const FunctionLatent& latent, std::span<const Example> data,
                              double noise_sigma);

/// Throws std::out_of_range on a bad index.
double log_likelihood(const FinitePrior& prior, std::size_t latent_index,
                      std::span<const Example> data);

/// Largest |f_a(x) - f_b(x)| over `points` evenly spaced inputs on [0, 1].
double sup_distance(const FunctionLatent& a, const FunctionLatent& b, std::size_t points = 1001);

}  // namespace ppd
