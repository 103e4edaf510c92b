#pragma once

#include <string>
#include <utility>
#include <vector>

#include "synthgrid/common/rng.hpp"
#include "synthgrid/deepgen/autograd.hpp"

namespace synthgrid::deepgen {

enum class Activation { kNone, kTanh, kLeakyRelu, kSigmoid };

Var activate(const Var& x, Activation act, double leaky_slope = 0.2);

using NamedParams = std::vector<std::pair<std::string, Var>>;

// Causal 1-D convolution, weight [out, in, taps], bias [1, 1, out].
struct ConvLayer {
  Var weight;
  Var bias;
  std::size_t dilation = 1;

  Var forward(const Var& x) const { return causal_conv(x, weight, bias, dilation); }
  std::size_t taps() const { return weight->shape.c; }
  void collect(const std::string& prefix, NamedParams& out) const;
};

// Glorot-uniform weights, zero bias.
ConvLayer make_conv(std::size_t in, std::size_t out, std::size_t taps, std::size_t dilation, Rng& rng);

std::vector<Var> params_of(const NamedParams& named);

// Adaptive-moment gradient descent over one parameter group.
class Adam {
 public:
  Adam() = default;
  Adam(std::vector<Var> params, double lr, double beta1 = 0.5, double beta2 = 0.999, double eps = 1e-8);

  void step();
  void zero_grad() const;
  const std::vector<Var>& params() const { return params_; }

 private:
  std::vector<Var> params_;
  std::vector<std::vector<double>> m_, v_;
  double lr_ = 2e-4, beta1_ = 0.5, beta2_ = 0.999, eps_ = 1e-8;
  long t_ = 0;
};

}  // namespace synthgrid::deepgen
