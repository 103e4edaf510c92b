#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <vector>

namespace synthgrid::deepgen {

// Dense [batch, time, channel] layout; parameters reuse the three slots
// (a conv kernel is [out, in, taps]).
struct Shape {
  std::size_t b = 1;
  std::size_t t = 1;
  std::size_t c = 1;

  std::size_t size() const { return b * t * c; }
  bool operator==(const Shape&) const = default;
};

class Node;
using Var = std::shared_ptr<Node>;

class Node {
 public:
  Shape shape;
  std::vector<double> value;
  std::vector<double> grad;
  bool requires_grad = false;

  double scalar() const { return value.at(0); }

 private:
  friend Var make_node(Shape, std::vector<double>, std::vector<Var>, bool);
  friend void backward(const Var&);
  friend struct OpAccess;
  std::vector<Var> parents_;
  std::function<void()> backward_;
};

Var constant(Shape shape, std::vector<double> value);
Var constant(Shape shape, double fill);
Var parameter(Shape shape, std::vector<double> value);
// Same value, cut from the graph.
Var detach(const Var& v);

// Reverse pass from a scalar; accumulates into every reachable node's grad.
void backward(const Var& loss);
void zero_grad(std::span<const Var> params);

// y[b,t,o] = bias[o] + sum_{i,j} w[o,i,j] * x[b, t - (taps-1-j)*dilation, i],
// zero for negative time (causal padding).
Var causal_conv(const Var& x, const Var& weight, const Var& bias, std::size_t dilation);
// Adds a per-timestep bias [1, T, C] to every batch row.
Var add_time_bias(const Var& x, const Var& bias);
// [B, T, 1] -> [B, 1, 1] weighted sum over time plus scalar bias.
Var time_readout(const Var& x, const Var& weight, const Var& bias);
Var slice_time(const Var& x, std::size_t begin, std::size_t end);

Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);
Var scale(const Var& a, double s);
Var add_scalar(const Var& a, double s);
Var square(const Var& a);
Var exp(const Var& a);
Var tanh(const Var& a);
Var sigmoid(const Var& a);
Var leaky_relu(const Var& a, double slope);
// Mean over all elements -> scalar.
Var mean(const Var& a);
// Mean binary cross-entropy of probabilities against a constant target,
// probabilities clamped to [clamp, 1 - clamp] before the log.
Var bce(const Var& p, double target, double clamp = 1e-7);

}  // namespace synthgrid::deepgen
