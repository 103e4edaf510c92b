#include "synthgrid/deepgen/layers.hpp"

#include <cmath>

namespace synthgrid::deepgen {

Var activate(const Var& x, Activation act, double leaky_slope) {
  switch (act) {
    case Activation::kTanh:
      return tanh(x);
    case Activation::kLeakyRelu:
      return leaky_relu(x, leaky_slope);
    case Activation::kSigmoid:
      return sigmoid(x);
    case Activation::kNone:
      break;
  }
  return x;
}

void ConvLayer::collect(const std::string& prefix, NamedParams& out) const {
  out.emplace_back(prefix + ".weight", weight);
  out.emplace_back(prefix + ".bias", bias);
}

ConvLayer make_conv(std::size_t in, std::size_t out, std::size_t taps, std::size_t dilation, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>((in + out) * taps));
  std::uniform_real_distribution<double> u(-limit, limit);
  std::vector<double> w(out * in * taps);
  for (double& v : w) v = u(rng);
  return ConvLayer{parameter({out, in, taps}, std::move(w)), parameter({1, 1, out}, std::vector<double>(out, 0.0)),
                   dilation};
}

std::vector<Var> params_of(const NamedParams& named) {
  std::vector<Var> out;
  out.reserve(named.size());
  for (const auto& [name, v] : named) out.push_back(v);
  return out;
}

Adam::Adam(std::vector<Var> params, double lr, double beta1, double beta2, double eps)
    : params_(std::move(params)), lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {
  for (const auto& p : params_) {
    m_.emplace_back(p->value.size(), 0.0);
    v_.emplace_back(p->value.size(), 0.0);
  }
}

void Adam::step() {
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (std::size_t k = 0; k < params_.size(); ++k) {
    auto& p = *params_[k];
    auto& m = m_[k];
    auto& v = v_[k];
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      const double g = p.grad[i];
      m[i] = beta1_ * m[i] + (1.0 - beta1_) * g;
      v[i] = beta2_ * v[i] + (1.0 - beta2_) * g * g;
      p.value[i] -= lr_ * (m[i] / c1) / (std::sqrt(v[i] / c2) + eps_);
    }
  }
}

void Adam::zero_grad() const { deepgen::zero_grad(params_); }

}  // namespace synthgrid::deepgen
