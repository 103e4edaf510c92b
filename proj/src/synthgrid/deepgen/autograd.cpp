#include "synthgrid/deepgen/autograd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_set>

#include "synthgrid/common/error.hpp"

namespace synthgrid::deepgen {

struct OpAccess {
  static void set_backward(Node& n, std::function<void()> fn) { n.backward_ = std::move(fn); }
};

Var make_node(Shape shape, std::vector<double> value, std::vector<Var> parents, bool leaf_grad) {
  auto n = std::make_shared<Node>();
  n->shape = shape;
  n->value = std::move(value);
  n->grad.assign(n->value.size(), 0.0);
  n->requires_grad = leaf_grad;
  for (const auto& p : parents) n->requires_grad = n->requires_grad || p->requires_grad;
  n->parents_ = std::move(parents);
  return n;
}

namespace {

Var op_node(Shape shape, std::vector<double> value, std::vector<Var> parents) {
  return make_node(shape, std::move(value), std::move(parents), false);
}

void require_same(const Var& a, const Var& b, const char* op) {
  if (!(a->shape == b->shape)) throw ContractError(std::string("shape mismatch in ") + op);
}

template <typename Fwd, typename Deriv>
Var unary(const Var& a, Fwd fwd, Deriv deriv) {
  std::vector<double> v(a->value.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = fwd(a->value[i]);
  Var out = op_node(a->shape, std::move(v), {a});
  Node* o = out.get();
  Node* pa = a.get();
  OpAccess::set_backward(*out, [o, pa, deriv] {
    if (!pa->requires_grad) return;
    for (std::size_t i = 0; i < o->value.size(); ++i) pa->grad[i] += o->grad[i] * deriv(pa->value[i], o->value[i]);
  });
  return out;
}

}  // namespace

Var constant(Shape shape, std::vector<double> value) {
  if (value.size() != shape.size()) throw ContractError("constant: value size does not match shape");
  return make_node(shape, std::move(value), {}, false);
}

Var constant(Shape shape, double fill) { return constant(shape, std::vector<double>(shape.size(), fill)); }

Var parameter(Shape shape, std::vector<double> value) {
  if (value.size() != shape.size()) throw ContractError("parameter: value size does not match shape");
  return make_node(shape, std::move(value), {}, true);
}

Var detach(const Var& v) { return constant(v->shape, v->value); }

void backward(const Var& loss) {
  if (loss->value.size() != 1) throw ContractError("backward needs a scalar loss");
  std::vector<Node*> order;
  std::unordered_set<Node*> seen;
  // Iterative post-order DFS.
  std::vector<std::pair<Node*, std::size_t>> stack{{loss.get(), 0}};
  seen.insert(loss.get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents_.size()) {
      Node* p = node->parents_[next++].get();
      if (p->requires_grad && seen.insert(p).second) stack.emplace_back(p, 0);
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }
  loss->grad[0] += 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it)
    if ((*it)->backward_) (*it)->backward_();
}

void zero_grad(std::span<const Var> params) {
  for (const auto& p : params) std::fill(p->grad.begin(), p->grad.end(), 0.0);
}

Var causal_conv(const Var& x, const Var& weight, const Var& bias, std::size_t dilation) {
  const Shape xs = x->shape;
  const std::size_t O = weight->shape.b, I = weight->shape.t, K = weight->shape.c;
  if (xs.c != I) throw ContractError("causal_conv: input channels do not match kernel");
  if (bias->shape.size() != O) throw ContractError("causal_conv: bias size does not match outputs");
  const std::size_t B = xs.b, T = xs.t;
  std::vector<double> y(B * T * O);
  const double* xv = x->value.data();
  const double* wv = weight->value.data();
  for (std::size_t b = 0; b < B; ++b)
    for (std::size_t t = 0; t < T; ++t) {
      double* yo = y.data() + (b * T + t) * O;
      for (std::size_t o = 0; o < O; ++o) yo[o] = bias->value[o];
      for (std::size_t j = 0; j < K; ++j) {
        const std::size_t lag = (K - 1 - j) * dilation;
        if (lag > t) continue;
        const double* xi = xv + (b * T + t - lag) * I;
        for (std::size_t o = 0; o < O; ++o) {
          const double* w = wv + (o * I) * K + j;
          double s = 0.0;
          for (std::size_t i = 0; i < I; ++i) s += w[i * K] * xi[i];
          yo[o] += s;
        }
      }
    }
  Var out = op_node({B, T, O}, std::move(y), {x, weight, bias});
  Node* on = out.get();
  Node *xn = x.get(), *wn = weight.get(), *bn = bias.get();
  OpAccess::set_backward(*out, [=] {
    for (std::size_t b = 0; b < B; ++b)
      for (std::size_t t = 0; t < T; ++t) {
        const double* go = on->grad.data() + (b * T + t) * O;
        if (bn->requires_grad)
          for (std::size_t o = 0; o < O; ++o) bn->grad[o] += go[o];
        for (std::size_t j = 0; j < K; ++j) {
          const std::size_t lag = (K - 1 - j) * dilation;
          if (lag > t) continue;
          const std::size_t src = (b * T + t - lag) * I;
          for (std::size_t o = 0; o < O; ++o) {
            const double g = go[o];
            if (g == 0.0) continue;
            const std::size_t wbase = (o * I) * K + j;
            if (wn->requires_grad)
              for (std::size_t i = 0; i < I; ++i) wn->grad[wbase + i * K] += g * xn->value[src + i];
            if (xn->requires_grad)
              for (std::size_t i = 0; i < I; ++i) xn->grad[src + i] += g * wn->value[wbase + i * K];
          }
        }
      }
  });
  return out;
}

Var add_time_bias(const Var& x, const Var& bias) {
  const Shape s = x->shape;
  if (bias->shape.b != 1 || bias->shape.t != s.t || bias->shape.c != s.c)
    throw ContractError("add_time_bias: bias must be [1, T, C]");
  std::vector<double> y(x->value);
  const std::size_t row = s.t * s.c;
  for (std::size_t b = 0; b < s.b; ++b)
    for (std::size_t k = 0; k < row; ++k) y[b * row + k] += bias->value[k];
  Var out = op_node(s, std::move(y), {x, bias});
  Node* on = out.get();
  Node *xn = x.get(), *pn = bias.get();
  OpAccess::set_backward(*out, [=] {
    for (std::size_t b = 0; b < s.b; ++b)
      for (std::size_t k = 0; k < row; ++k) {
        const double g = on->grad[b * row + k];
        if (xn->requires_grad) xn->grad[b * row + k] += g;
        if (pn->requires_grad) pn->grad[k] += g;
      }
  });
  return out;
}

Var time_readout(const Var& x, const Var& weight, const Var& bias) {
  const Shape s = x->shape;
  if (s.c != 1 || weight->shape.size() != s.t || bias->shape.size() != 1)
    throw ContractError("time_readout: expects [B,T,1] input, T weights and one bias");
  std::vector<double> y(s.b);
  for (std::size_t b = 0; b < s.b; ++b) {
    double acc = bias->value[0];
    for (std::size_t t = 0; t < s.t; ++t) acc += weight->value[t] * x->value[b * s.t + t];
    y[b] = acc;
  }
  Var out = op_node({s.b, 1, 1}, std::move(y), {x, weight, bias});
  Node* on = out.get();
  Node *xn = x.get(), *wn = weight.get(), *bn = bias.get();
  OpAccess::set_backward(*out, [=] {
    for (std::size_t b = 0; b < s.b; ++b) {
      const double g = on->grad[b];
      if (bn->requires_grad) bn->grad[0] += g;
      for (std::size_t t = 0; t < s.t; ++t) {
        if (wn->requires_grad) wn->grad[t] += g * xn->value[b * s.t + t];
        if (xn->requires_grad) xn->grad[b * s.t + t] += g * wn->value[t];
      }
    }
  });
  return out;
}

Var slice_time(const Var& x, std::size_t begin, std::size_t end) {
  const Shape s = x->shape;
  if (begin > end || end > s.t) throw ContractError("slice_time: bad range");
  const std::size_t len = end - begin;
  std::vector<double> y(s.b * len * s.c);
  for (std::size_t b = 0; b < s.b; ++b)
    std::copy_n(x->value.begin() + static_cast<std::ptrdiff_t>((b * s.t + begin) * s.c), len * s.c,
                y.begin() + static_cast<std::ptrdiff_t>(b * len * s.c));
  Var out = op_node({s.b, len, s.c}, std::move(y), {x});
  Node* on = out.get();
  Node* xn = x.get();
  OpAccess::set_backward(*out, [=] {
    if (!xn->requires_grad) return;
    for (std::size_t b = 0; b < s.b; ++b)
      for (std::size_t k = 0; k < len * s.c; ++k) xn->grad[(b * s.t + begin) * s.c + k] += on->grad[b * len * s.c + k];
  });
  return out;
}

Var add(const Var& a, const Var& b) {
  require_same(a, b, "add");
  std::vector<double> v(a->value.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = a->value[i] + b->value[i];
  Var out = op_node(a->shape, std::move(v), {a, b});
  Node* on = out.get();
  Node *an = a.get(), *bn = b.get();
  OpAccess::set_backward(*out, [=] {
    for (std::size_t i = 0; i < on->grad.size(); ++i) {
      if (an->requires_grad) an->grad[i] += on->grad[i];
      if (bn->requires_grad) bn->grad[i] += on->grad[i];
    }
  });
  return out;
}

Var sub(const Var& a, const Var& b) {
  require_same(a, b, "sub");
  std::vector<double> v(a->value.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = a->value[i] - b->value[i];
  Var out = op_node(a->shape, std::move(v), {a, b});
  Node* on = out.get();
  Node *an = a.get(), *bn = b.get();
  OpAccess::set_backward(*out, [=] {
    for (std::size_t i = 0; i < on->grad.size(); ++i) {
      if (an->requires_grad) an->grad[i] += on->grad[i];
      if (bn->requires_grad) bn->grad[i] -= on->grad[i];
    }
  });
  return out;
}

Var mul(const Var& a, const Var& b) {
  require_same(a, b, "mul");
  std::vector<double> v(a->value.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = a->value[i] * b->value[i];
  Var out = op_node(a->shape, std::move(v), {a, b});
  Node* on = out.get();
  Node *an = a.get(), *bn = b.get();
  OpAccess::set_backward(*out, [=] {
    for (std::size_t i = 0; i < on->grad.size(); ++i) {
      if (an->requires_grad) an->grad[i] += on->grad[i] * bn->value[i];
      if (bn->requires_grad) bn->grad[i] += on->grad[i] * an->value[i];
    }
  });
  return out;
}

Var scale(const Var& a, double s) {
  return unary(a, [s](double x) { return s * x; }, [s](double, double) { return s; });
}

Var add_scalar(const Var& a, double s) {
  return unary(a, [s](double x) { return x + s; }, [](double, double) { return 1.0; });
}

Var square(const Var& a) {
  return unary(a, [](double x) { return x * x; }, [](double x, double) { return 2.0 * x; });
}

Var exp(const Var& a) {
  return unary(a, [](double x) { return std::exp(x); }, [](double, double y) { return y; });
}

Var tanh(const Var& a) {
  return unary(a, [](double x) { return std::tanh(x); }, [](double, double y) { return 1.0 - y * y; });
}

Var sigmoid(const Var& a) {
  return unary(
      a,
      [](double x) {
        // kept strictly inside (0, 1) even when exp saturates
        constexpr double lo = std::numeric_limits<double>::min();
        constexpr double hi = 1.0 - std::numeric_limits<double>::epsilon() / 2.0;
        if (x >= 0.0) return std::min(hi, 1.0 / (1.0 + std::exp(-x)));
        const double e = std::exp(x);
        return std::max(lo, e / (1.0 + e));
      },
      [](double, double y) { return y * (1.0 - y); });
}

Var leaky_relu(const Var& a, double slope) {
  return unary(a, [slope](double x) { return x > 0.0 ? x : slope * x; },
               [slope](double x, double) { return x > 0.0 ? 1.0 : slope; });
}

Var mean(const Var& a) {
  const auto n = static_cast<double>(a->value.size());
  double s = 0.0;
  for (double v : a->value) s += v;
  Var out = op_node({1, 1, 1}, {s / n}, {a});
  Node* on = out.get();
  Node* an = a.get();
  OpAccess::set_backward(*out, [=] {
    if (!an->requires_grad) return;
    const double g = on->grad[0] / n;
    for (double& x : an->grad) x += g;
  });
  return out;
}

Var bce(const Var& p, double target, double clamp) {
  const auto n = static_cast<double>(p->value.size());
  double s = 0.0;
  for (double v : p->value) {
    if (std::isnan(v)) throw NumericError("bce: probability is NaN");
    if (!(v >= 0.0 && v <= 1.0)) throw ContractError("bce: probability outside [0, 1]");
    const double c = std::clamp(v, clamp, 1.0 - clamp);
    s -= target * std::log(c) + (1.0 - target) * std::log(1.0 - c);
  }
  Var out = op_node({1, 1, 1}, {s / n}, {p});
  Node* on = out.get();
  Node* pn = p.get();
  OpAccess::set_backward(*out, [=] {
    if (!pn->requires_grad) return;
    const double g = on->grad[0] / n;
    for (std::size_t i = 0; i < pn->value.size(); ++i) {
      const double v = pn->value[i];
      if (v < clamp || v > 1.0 - clamp) continue;
      pn->grad[i] += g * (-target / v + (1.0 - target) / (1.0 - v));
    }
  });
  return out;
}

}  // namespace synthgrid::deepgen
