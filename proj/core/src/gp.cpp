#include "ppd/gp.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <cmath>
#include <sstream>

namespace ppd::gp {

void GPConfig::validate() const {
  if (!(lengthscale > 0.0) || !(outputscale > 0.0) || !(noise_sigma > 0.0)) {
    throw std::invalid_argument("GP lengthscale, outputscale and noise_sigma must be positive");
  }
  if (!std::isfinite(constant_mean)) throw std::invalid_argument("GP constant mean must be finite");
}

double GPConfig::kernel(double a, double b) const {
  const double d = a - b;
  return outputscale * std::exp(-d * d / (2.0 * lengthscale * lengthscale));
}

CholeskyError::CholeskyError(const std::string& what, std::vector<double> attempted_jitter)
    : std::runtime_error(what), attempted_jitter_(std::move(attempted_jitter)) {}

struct GPPosterior::Factor {
  Eigen::VectorXd xs;
  Eigen::LLT<Eigen::MatrixXd> llt;
  Eigen::VectorXd alpha;  // (K + s^2 I)^-1 (y - m)
};

GPPosterior::GPPosterior(GPConfig config, std::unique_ptr<Factor> factor, double jitter)
    : config_(config), factor_(std::move(factor)), jitter_(jitter) {}
GPPosterior::GPPosterior(GPPosterior&&) noexcept = default;
GPPosterior& GPPosterior::operator=(GPPosterior&&) noexcept = default;
GPPosterior::~GPPosterior() = default;

std::size_t GPPosterior::size() const { return static_cast<std::size_t>(factor_->xs.size()); }

GPPosterior GPPosterior::fit(const GPConfig& config, std::span<const Example> data) {
  config.validate();
  if (data.empty()) throw std::invalid_argument("GP needs at least one context point");
  validate_dataset(data);

  const auto n = static_cast<Eigen::Index>(data.size());
  auto factor = std::make_unique<Factor>();
  factor->xs.resize(n);
  Eigen::VectorXd centered(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    factor->xs[i] = data[i].x;
    centered[i] = data[i].y - config.constant_mean;
  }
  Eigen::MatrixXd k(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j <= i; ++j) k(i, j) = k(j, i) = config.kernel(factor->xs[i], factor->xs[j]);
  k.diagonal().array() += config.noise_sigma * config.noise_sigma;

  std::vector<double> attempted;
  const double levels[] = {0.0, 1e-10, 1e-9, 1e-8, 1e-7, 1e-6};
  for (double jitter : levels) {
    attempted.push_back(jitter);
    Eigen::MatrixXd kj = k;
    kj.diagonal().array() += jitter;
    factor->llt.compute(kj);
    if (factor->llt.info() == Eigen::Success) {
      factor->alpha = factor->llt.solve(centered);
      return GPPosterior(config, std::move(factor), jitter);
    }
  }
  std::ostringstream msg;
  msg << "Cholesky factorization of the " << n << "x" << n << " GP kernel failed at jitter levels";
  for (double j : attempted) msg << ' ' << j;
  throw CholeskyError(msg.str(), std::move(attempted));
}

double GPPosterior::mean(double x) const {
  double acc = config_.constant_mean;
  for (Eigen::Index i = 0; i < factor_->xs.size(); ++i) {
    acc += config_.kernel(x, factor_->xs[i]) * factor_->alpha[i];
  }
  return acc;
}

double GPPosterior::latent_variance(double x) const {
  const auto n = factor_->xs.size();
  Eigen::VectorXd kx(n);
  for (Eigen::Index i = 0; i < n; ++i) kx[i] = config_.kernel(x, factor_->xs[i]);
  const Eigen::VectorXd v = factor_->llt.matrixL().solve(kx);
  return std::max(config_.kernel(x, x) - v.squaredNorm(), 0.0);
}

double GPPosterior::predictive_variance(double x) const {
  return latent_variance(x) + config_.noise_sigma * config_.noise_sigma;
}

std::vector<CoverageRow> gp_step_experiment(const GPConfig& config,
                                            std::span<const std::size_t> n_context_values,
                                            const StepTarget& target, std::size_t grid_points) {
  if (grid_points < 2) throw std::invalid_argument("coverage grid needs at least two points");
  std::vector<CoverageRow> rows;
  for (std::size_t n : n_context_values) {
    if (n == 0) throw std::invalid_argument("GP experiment needs n_context >= 1");
    Dataset context(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double x = n == 1 ? 0.5 : static_cast<double>(i) / static_cast<double>(n - 1);
      context[i] = {x, target(x)};
    }
    const GPPosterior gp = GPPosterior::fit(config, context);

    CoverageRow row;
    row.n_context = n;
    row.jitter = gp.jitter();
    std::size_t covered = 0;
    double abs_err = 0.0;
    for (std::size_t g = 0; g < grid_points; ++g) {
      const double x = static_cast<double>(g) / static_cast<double>(grid_points - 1);
      const double m = gp.mean(x);
      const double v = gp.latent_variance(x);
      const double truth = target(x);
      if (std::abs(truth - m) <= 1.96 * std::sqrt(v)) ++covered;
      abs_err += std::abs(truth - m);
      row.grid.push_back(x);
      row.mean.push_back(m);
      row.latent_variance.push_back(v);
    }
    row.coverage_95 = static_cast<double>(covered) / static_cast<double>(grid_points);
    row.mean_abs_error = abs_err / static_cast<double>(grid_points);
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace ppd::gp
