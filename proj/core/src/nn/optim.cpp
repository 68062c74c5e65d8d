#include "triplesum/nn/optim.hpp"

#include <cmath>
#include <random>

namespace triplesum::nn {

void rmsprop_step(std::span<Parameter* const> params, double learning_rate, const RmsPropConfig& cfg) {
  for (Parameter* p : params) {
    if (p->accumulator.rows() != p->value.rows() || p->accumulator.cols() != p->value.cols())
      p->accumulator = Matrix::Zero(p->value.rows(), p->value.cols());
    const Matrix g = p->grad + 2.0 * cfg.l2 * p->value;
    p->accumulator = cfg.rho * p->accumulator + (1.0 - cfg.rho) * g.cwiseProduct(g);
    p->value.array() -= learning_rate * g.array() / (p->accumulator.array() + cfg.epsilon).sqrt();
  }
}

double gradient_norm(std::span<Parameter* const> params) {
  double sq = 0.0;
  for (const Parameter* p : params) sq += p->grad.squaredNorm();
  return std::sqrt(sq);
}

double clip_gradients(std::span<Parameter* const> params, double max_norm) {
  const double norm = gradient_norm(params);
  if (!(norm > max_norm) || max_norm <= 0.0) return 1.0;
  const double scale = max_norm / norm;
  for (Parameter* p : params) p->grad *= scale;
  return scale;
}

void init_uniform(std::span<Parameter* const> params, std::uint64_t seed, double low, double high) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(low, high);
  for (Parameter* p : params)
    for (Eigen::Index i = 0; i < p->value.size(); ++i) {
      double v = dist(rng);
      if (v >= high) v = std::nextafter(high, low);  // generate_canonical may round up to `high`
      p->value.data()[i] = v;
    }
}

void zero_grads(std::span<Parameter* const> params) {
  for (Parameter* p : params) p->zero_grad();
}

}  // namespace triplesum::nn
