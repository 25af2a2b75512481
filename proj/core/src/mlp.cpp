#include "ppd/mlp.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "ppd/parallel.hpp"

namespace ppd::mlp {

namespace {

using Matrix = Eigen::MatrixXd;
using RowVector = Eigen::RowVectorXd;
using MatrixMap = Eigen::Map<Eigen::MatrixXd>;
using ConstMatrixMap = Eigen::Map<const Eigen::MatrixXd>;
using VectorMap = Eigen::Map<Eigen::VectorXd>;
using ConstVectorMap = Eigen::Map<const Eigen::VectorXd>;

struct LayerShape {
  Eigen::Index in;
  Eigen::Index out;
  std::size_t weight_offset;
  std::size_t bias_offset;
};

std::vector<LayerShape> layer_shapes(const Architecture& arch) {
  std::vector<LayerShape> shapes;
  std::size_t offset = 0;
  Eigen::Index in = 1;
  for (std::size_t l = 0; l <= arch.hidden_layers; ++l) {
    const Eigen::Index out = l == arch.hidden_layers ? 1 : static_cast<Eigen::Index>(arch.width);
    LayerShape s{in, out, offset, offset + static_cast<std::size_t>(in * out)};
    offset = s.bias_offset + static_cast<std::size_t>(out);
    shapes.push_back(s);
    in = out;
  }
  return shapes;
}

std::size_t total_parameters(const Architecture& arch) {
  const auto shapes = layer_shapes(arch);
  return shapes.back().bias_offset + static_cast<std::size_t>(shapes.back().out);
}

double softplus(double z) { return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))); }

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

}  // namespace

struct MLP::Workspace::Buffers {
  std::vector<Matrix> act;
  Matrix delta;
  Matrix grad_a;
  Matrix grad_b;
};

MLP::Workspace::Workspace() : buffers_(std::make_unique<Buffers>()) {}
MLP::Workspace::Workspace(Workspace&&) noexcept = default;
MLP::Workspace& MLP::Workspace::operator=(Workspace&&) noexcept = default;
MLP::Workspace::~Workspace() = default;

MLP::MLP(Architecture arch) : arch_(arch), params_(total_parameters(arch), 0.0) {
  if (arch.width == 0) throw std::invalid_argument("MLP width must be positive");
}

MLP MLP::initialized(Architecture arch, std::mt19937_64& rng) {
  MLP net(arch);
  for (const LayerShape& s : layer_shapes(arch)) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(s.in));
    std::uniform_real_distribution<double> u(-bound, bound);
    const std::size_t end = s.bias_offset + static_cast<std::size_t>(s.out);
    for (std::size_t i = s.weight_offset; i < end; ++i) net.params_[i] = u(rng);
  }
  return net;
}

double MLP::logit(double x) const {
  const double xs[] = {x};
  return logits(std::span<const double>(xs))[0];
}

double MLP::predict(double x) const { return sigmoid(logit(x)); }

std::vector<double> MLP::predict(std::span<const double> xs) const {
  std::vector<double> out = logits(xs);
  for (double& z : out) z = sigmoid(z);
  return out;
}

std::vector<double> MLP::logits(std::span<const double> xs) const {
  const auto shapes = layer_shapes(arch_);
  const auto batch = static_cast<Eigen::Index>(xs.size());
  Matrix act = ConstMatrixMap(xs.data(), 1, batch);
  for (std::size_t l = 0; l < shapes.size(); ++l) {
    const LayerShape& s = shapes[l];
    ConstMatrixMap w(params_.data() + s.weight_offset, s.out, s.in);
    ConstVectorMap b(params_.data() + s.bias_offset, s.out);
    Matrix z = w * act;
    z.colwise() += b;
    if (l + 1 < shapes.size()) z = z.cwiseMax(0.0);
    act = std::move(z);
  }
  return std::vector<double>(act.data(), act.data() + batch);
}

double MLP::loss_and_gradient(std::span<const double> xs, std::span<const double> labels,
                              std::span<const double> weights, std::span<double> gradient) const {
  Workspace ws;
  return loss_and_gradient(xs, labels, weights, gradient, ws);
}

double MLP::loss_and_gradient(std::span<const double> xs, std::span<const double> labels,
                              std::span<const double> weights, std::span<double> gradient,
                              Workspace& workspace) const {
  if (xs.size() != labels.size() || xs.size() != weights.size() || xs.empty()) {
    throw std::invalid_argument("batch inputs, labels and weights must be non-empty and aligned");
  }
  if (!gradient.empty() && gradient.size() != params_.size()) {
    throw std::invalid_argument("gradient buffer has the wrong size");
  }
  const auto shapes = layer_shapes(arch_);
  const auto batch = static_cast<Eigen::Index>(xs.size());
  Workspace::Buffers& ws = *workspace.buffers_;

  // Forward, keeping every layer's activation (post-ReLU) in ws.act[l + 1].
  // Buffers keep their capacity between calls, so steady-state training
  // does not allocate.
  ws.act.resize(shapes.size());
  ws.act[0] = ConstMatrixMap(xs.data(), 1, batch);
  for (std::size_t l = 0; l < shapes.size(); ++l) {
    const LayerShape& s = shapes[l];
    ConstMatrixMap w(params_.data() + s.weight_offset, s.out, s.in);
    ConstVectorMap b(params_.data() + s.bias_offset, s.out);
    Matrix& z = l + 1 < shapes.size() ? ws.act[l + 1] : ws.delta;
    z.resize(s.out, batch);
    z.noalias() = w * ws.act[l];
    z.colwise() += b;
    if (l + 1 < shapes.size()) z = z.cwiseMax(0.0);
  }

  double loss = 0.0;
  Matrix& delta = ws.delta;  // holds the output logits until overwritten
  for (Eigen::Index i = 0; i < batch; ++i) {
    const auto k = static_cast<std::size_t>(i);
    const double z = delta(0, i);
    loss += weights[k] * (softplus(z) - labels[k] * z);
    delta(0, i) = weights[k] * (sigmoid(z) - labels[k]);
  }
  if (gradient.empty()) return loss;

  // Reverse pass. A ReLU unit's output is positive exactly when its
  // pre-activation was, so the stored activation doubles as the mask.
  Matrix* upstream = &ws.delta;
  for (std::size_t l = shapes.size(); l-- > 0;) {
    const LayerShape& s = shapes[l];
    if (l + 1 < shapes.size()) {
      *upstream = (ws.act[l + 1].array() > 0.0).select(upstream->array(), 0.0);
    }
    MatrixMap gw(gradient.data() + s.weight_offset, s.out, s.in);
    VectorMap gb(gradient.data() + s.bias_offset, s.out);
    gw.noalias() = *upstream * ws.act[l].transpose();
    gb = upstream->rowwise().sum();
    if (l > 0) {
      ConstMatrixMap w(params_.data() + s.weight_offset, s.out, s.in);
      Matrix* next = upstream == &ws.grad_a ? &ws.grad_b : &ws.grad_a;
      next->resize(s.in, batch);
      next->noalias() = w.transpose() * *upstream;
      upstream = next;
    }
  }
  return loss;
}

// ---------------------------------------------------------------------------

void TrainConfig::validate() const {
  if (batch_size < 2 || batch_size % 2 != 0) {
    throw std::invalid_argument("batch_size must be a positive even number (balanced classes)");
  }
  if (!(learning_rate > 0.0)) throw std::invalid_argument("learning_rate must be positive");
  if (input_noise_sigma < 0.0) throw std::invalid_argument("input_noise_sigma must be >= 0");
  if (arch.width == 0) throw std::invalid_argument("hidden width must be positive");
}

TrainingDivergedError::TrainingDivergedError(std::size_t step, std::uint64_t seed)
    : std::runtime_error("training diverged (non-finite loss) at step " + std::to_string(step) +
                         " for seed " + std::to_string(seed)),
      step_(step),
      seed_(seed) {}

TrainResult train_mlp(const TrainConfig& config) {
  config.validate();
  std::mt19937_64 rng(config.seed);
  TrainResult result;
  result.model = MLP::initialized(config.arch, rng);
  MLP& net = result.model;

  const std::size_t p = net.parameter_count();
  std::vector<double> grad(p), m(p, 0.0), v(p, 0.0);
  MLP::Workspace ws;

  const std::size_t half = config.batch_size / 2;
  std::vector<double> xs, labels, weights;
  if (config.input_noise_sigma == 0.0) {
    xs = {0.0, 1.0};
    labels = {0.0, 1.0};
    weights = {0.5, 0.5};
  } else {
    labels.assign(config.batch_size, 0.0);
    std::fill(labels.begin() + static_cast<std::ptrdiff_t>(half), labels.end(), 1.0);
    weights.assign(config.batch_size, 1.0 / static_cast<double>(config.batch_size));
    xs.resize(config.batch_size);
  }
  std::normal_distribution<double> noise(0.0, config.input_noise_sigma > 0.0 ? config.input_noise_sigma : 1.0);

  double beta1_t = 1.0;
  double beta2_t = 1.0;
  result.loss_history.reserve(config.steps);
  for (std::size_t step = 0; step < config.steps; ++step) {
    if (config.input_noise_sigma > 0.0) {
      for (std::size_t i = 0; i < xs.size(); ++i) xs[i] = labels[i] + noise(rng);
    }
    const double loss = net.loss_and_gradient(xs, labels, weights, grad, ws);
    if (!std::isfinite(loss)) throw TrainingDivergedError(step, config.seed);
    result.loss_history.push_back(loss);

    beta1_t *= config.beta1;
    beta2_t *= config.beta2;
    const double c1 = 1.0 - beta1_t;
    const double c2 = 1.0 - beta2_t;
    auto params = net.parameters();
    for (std::size_t i = 0; i < p; ++i) {
      m[i] = config.beta1 * m[i] + (1.0 - config.beta1) * grad[i];
      v[i] = config.beta2 * v[i] + (1.0 - config.beta2) * grad[i] * grad[i];
      params[i] -= config.learning_rate * (m[i] / c1) / (std::sqrt(v[i] / c2) + config.epsilon);
    }
  }

  // Loss of the final parameters on the noiseless balanced batch.
  const double eval_x[] = {0.0, 1.0};
  const double eval_y[] = {0.0, 1.0};
  const double eval_w[] = {0.5, 0.5};
  result.final_loss = net.loss_and_gradient(eval_x, eval_y, eval_w, {});
  if (!std::isfinite(result.final_loss)) throw TrainingDivergedError(config.steps, config.seed);
  return result;
}

SweepResult seed_sweep(std::size_t n_seeds, const TrainConfig& config, unsigned jobs,
                       std::size_t grid_points) {
  if (n_seeds < 2) throw std::invalid_argument("seed sweep needs at least two seeds");
  if (grid_points < 2) throw std::invalid_argument("seed sweep grid needs at least two points");
  config.validate();

  SweepResult out;
  out.grid.resize(grid_points);
  for (std::size_t g = 0; g < grid_points; ++g) {
    out.grid[g] = static_cast<double>(g) / static_cast<double>(grid_points - 1);
  }

  std::vector<std::vector<double>> preds(n_seeds);
  std::vector<double> at_half(n_seeds), losses(n_seeds);
  parallel_blocks(n_seeds, 1, jobs, [&](std::size_t, std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      TrainConfig c = config;
      c.seed = config.seed + i;
      const TrainResult r = train_mlp(c);
      preds[i] = r.model.predict(out.grid);
      at_half[i] = r.model.predict(0.5);
      losses[i] = r.final_loss;
    }
  });

  std::vector<std::size_t> order(n_seeds);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return at_half[a] < at_half[b]; });
  for (std::size_t i : order) {
    out.seeds.push_back(config.seed + i);
    out.predictions.push_back(std::move(preds[i]));
    out.final_losses.push_back(losses[i]);
  }

  out.std_per_x.assign(grid_points, 0.0);
  const double n = static_cast<double>(n_seeds);
  for (std::size_t g = 0; g < grid_points; ++g) {
    double mean = 0.0;
    for (const auto& row : out.predictions) mean += row[g];
    mean /= n;
    double ss = 0.0;
    for (const auto& row : out.predictions) ss += (row[g] - mean) * (row[g] - mean);
    out.std_per_x[g] = std::sqrt(ss / n);
  }
  return out;
}

double mean_std_between(const SweepResult& sweep, double lo, double hi) {
  double acc = 0.0;
  std::size_t count = 0;
  for (std::size_t g = 0; g < sweep.grid.size(); ++g) {
    if (sweep.grid[g] >= lo && sweep.grid[g] <= hi) {
      acc += sweep.std_per_x[g];
      ++count;
    }
  }
  if (count == 0) throw std::invalid_argument("no grid points in the requested interval");
  return acc / static_cast<double>(count);
}

}  // namespace ppd::mlp
