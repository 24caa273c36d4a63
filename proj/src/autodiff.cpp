#include "derwent/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "derwent/error.hpp"
#include "derwent/kernels.hpp"

namespace derwent::ad {

const Matrix& Var::value() const { return tape_->value(*this); }
const Matrix& Var::grad() const { return tape_->grad(*this); }

double Var::item() const {
  const Matrix& v = value();
  if (v.size() != 1) throw DimensionError("item() on non-scalar node " + v.shape_string());
  return v[0];
}

Var Tape::parameter(Matrix value) {
  Node node;
  node.grad = Matrix(value.rows(), value.cols());
  node.value = std::move(value);
  node.requires_grad = true;
  node.leaf = true;
  return push(std::move(node));
}

Var Tape::constant(Matrix value) {
  Node node;
  node.grad = Matrix(value.rows(), value.cols());
  node.value = std::move(value);
  node.leaf = true;
  return push(std::move(node));
}

Var Tape::record(Matrix value, std::initializer_list<Var> parents, Backward backward) {
  return record(std::move(value), std::span<const Var>(parents.begin(), parents.size()),
                std::move(backward));
}

Var Tape::record(Matrix value, std::span<const Var> parents, Backward backward) {
  Node node;
  for (Var p : parents) {
    check_owned(p);
    node.requires_grad = node.requires_grad || nodes_[p.id()].requires_grad;
  }
  node.grad = Matrix(value.rows(), value.cols());
  node.value = std::move(value);
  if (node.requires_grad) node.backward = std::move(backward);
  return push(std::move(node));
}

Var Tape::push(Node node) {
  nodes_.push_back(std::move(node));
  return Var(this, nodes_.size() - 1);
}

void Tape::check_owned(Var v) const {
  if (v.tape() != this || v.id() >= nodes_.size()) {
    throw Error("autodiff: variable does not belong to this tape");
  }
}

void Tape::zero_grad() {
  for (Node& n : nodes_) n.grad.fill(0.0);
}

void Tape::backward(Var root) {
  check_owned(root);
  if (value(root).size() != 1) {
    throw DimensionError("backward: root must be scalar, got " + value(root).shape_string());
  }
  for (std::size_t i = 0; i <= root.id(); ++i) {
    if (!nodes_[i].leaf) nodes_[i].grad.fill(0.0);
  }
  nodes_[root.id()].grad[0] += 1.0;
  last_visits_ = 0;
  for (std::size_t i = root.id() + 1; i-- > 0;) {
    ++last_visits_;
    Node& n = nodes_[i];
    if (n.backward) n.backward(n.value, n.grad);
  }
}

namespace {

void require_same_shape(Var a, Var b, const char* op) {
  if (!a.value().same_shape(b.value())) {
    throw DimensionError(std::string(op) + ": shape mismatch " + a.value().shape_string() +
                         " vs " + b.value().shape_string());
  }
}

void require_finite(const Matrix& m, const char* op) {
  if (!m.all_finite()) throw NumericError(std::string(op) + ": non-finite value");
}

Tape& tape_of(Var a) {
  if (!a.valid()) throw Error("autodiff: operation on an unbound variable");
  return *a.tape();
}

template <typename F>
void accumulate(Var v, F&& f) {
  if (v.tape()->requires_grad(v)) f(v.tape()->grad_mut(v));
}

double stable_sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// Elementwise unary op with derivative expressed through input x and output y.
template <typename Fwd, typename Deriv>
Var unary(Var a, const char* name, Fwd fwd, Deriv deriv) {
  const Matrix& x = a.value();
  require_finite(x, name);
  Matrix y(x.rows(), x.cols());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = fwd(x[i]);
  require_finite(y, name);
  return tape_of(a).record(std::move(y), {a}, [a, deriv](const Matrix& out, const Matrix& g) {
    accumulate(a, [&](Matrix& ga) {
      const Matrix& x = a.value();
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * deriv(x[i], out[i]);
    });
  });
}

}  // namespace

Var matmul(Var a, Var b) {
  Matrix out = kernels::matmul(a.value(), b.value());
  require_finite(out, "matmul");
  return tape_of(a).record(std::move(out), {a, b}, [a, b](const Matrix&, const Matrix& g) {
    accumulate(a, [&](Matrix& ga) { kernels::matmul_add_bt(g, b.value(), ga); });
    accumulate(b, [&](Matrix& gb) { kernels::matmul_add_at(a.value(), g, gb); });
  });
}

Var add(Var a, Var b) {
  require_same_shape(a, b, "add");
  Matrix out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += b.value()[i];
  require_finite(out, "add");
  return tape_of(a).record(std::move(out), {a, b}, [a, b](const Matrix&, const Matrix& g) {
    accumulate(a, [&](Matrix& ga) {
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
    });
    accumulate(b, [&](Matrix& gb) {
      for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i];
    });
  });
}

Var sub(Var a, Var b) {
  require_same_shape(a, b, "sub");
  Matrix out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= b.value()[i];
  require_finite(out, "sub");
  return tape_of(a).record(std::move(out), {a, b}, [a, b](const Matrix&, const Matrix& g) {
    accumulate(a, [&](Matrix& ga) {
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
    });
    accumulate(b, [&](Matrix& gb) {
      for (std::size_t i = 0; i < g.size(); ++i) gb[i] -= g[i];
    });
  });
}

Var mul(Var a, Var b) {
  require_same_shape(a, b, "mul");
  Matrix out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= b.value()[i];
  require_finite(out, "mul");
  return tape_of(a).record(std::move(out), {a, b}, [a, b](const Matrix&, const Matrix& g) {
    accumulate(a, [&](Matrix& ga) {
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * b.value()[i];
    });
    accumulate(b, [&](Matrix& gb) {
      for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * a.value()[i];
    });
  });
}

Var add_n(std::span<const Var> terms) {
  if (terms.empty()) throw DimensionError("add_n: no terms");
  Matrix out = terms[0].value();
  for (std::size_t t = 1; t < terms.size(); ++t) {
    require_same_shape(terms[0], terms[t], "add_n");
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += terms[t].value()[i];
  }
  require_finite(out, "add_n");
  std::vector<Var> parents(terms.begin(), terms.end());
  return tape_of(terms[0]).record(
      std::move(out), std::span<const Var>(parents),
      [parents](const Matrix&, const Matrix& g) {
        for (Var p : parents) {
          accumulate(p, [&](Matrix& gp) {
            for (std::size_t i = 0; i < g.size(); ++i) gp[i] += g[i];
          });
        }
      });
}

Var negate(Var a) {
  return unary(
      a, "negate", [](double x) { return -x; }, [](double, double) { return -1.0; });
}

Var scale(Var a, double c) {
  return unary(
      a, "scale", [c](double x) { return c * x; }, [c](double, double) { return c; });
}

Var tanh(Var a) {
  return unary(
      a, "tanh", [](double x) { return std::tanh(x); },
      [](double, double y) { return 1.0 - y * y; });
}

Var sigmoid(Var a) {
  return unary(
      a, "sigmoid", [](double x) { return stable_sigmoid(x); },
      [](double, double y) { return y * (1.0 - y); });
}

Var log(Var a) {
  return unary(
      a, "log", [](double x) { return std::log(std::max(x, kLogClamp)); },
      [](double x, double) { return x > kLogClamp ? 1.0 / x : 0.0; });
}

Var log_sigmoid(Var a) {
  return unary(
      a, "log_sigmoid",
      [](double x) { return std::min(x, 0.0) - std::log1p(std::exp(-std::abs(x))); },
      [](double x, double) { return stable_sigmoid(-x); });
}

Var scaled_sigmoid(Var a, double alpha) {
  if (!(alpha > 0.0)) throw NumericError("scaled_sigmoid: alpha must be positive");
  return unary(
      a, "scaled_sigmoid", [alpha](double x) { return stable_sigmoid(alpha * x); },
      [alpha](double, double y) { return alpha * y * (1.0 - y); });
}

Var sum(Var a) {
  double s = 0.0;
  for (double v : a.value().values()) s += v;
  Matrix out = Matrix::scalar(s);
  require_finite(out, "sum");
  return tape_of(a).record(std::move(out), {a}, [a](const Matrix&, const Matrix& g) {
    accumulate(a, [&](Matrix& ga) {
      for (double& v : ga.values()) v += g[0];
    });
  });
}

Var cosine(Var a, Var b) {
  require_same_shape(a, b, "cosine");
  const Matrix& x = a.value();
  const Matrix& y = b.value();
  double dot = 0.0, xx = 0.0, yy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    dot += x[i] * y[i];
    xx += x[i] * x[i];
    yy += y[i] * y[i];
  }
  const double nx = std::sqrt(xx), ny = std::sqrt(yy);
  if (!(nx > kNormFloor) || !(ny > kNormFloor)) {
    throw NumericError("cosine: operand norm below floor");
  }
  const double c = dot / (nx * ny);
  require_finite(Matrix::scalar(c), "cosine");
  return tape_of(a).record(
      Matrix::scalar(c), {a, b}, [a, b, nx, ny, c](const Matrix&, const Matrix& g) {
        const Matrix& x = a.value();
        const Matrix& y = b.value();
        const double inv = 1.0 / (nx * ny);
        accumulate(a, [&](Matrix& ga) {
          for (std::size_t i = 0; i < x.size(); ++i) {
            ga[i] += g[0] * (y[i] * inv - c * x[i] / (nx * nx));
          }
        });
        accumulate(b, [&](Matrix& gb) {
          for (std::size_t i = 0; i < y.size(); ++i) {
            gb[i] += g[0] * (x[i] * inv - c * y[i] / (ny * ny));
          }
        });
      });
}

Var l2_norm_diff(Var a, Var b) {
  require_same_shape(a, b, "l2_norm_diff");
  const Matrix& x = a.value();
  const Matrix& y = b.value();
  double ss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) ss += (x[i] - y[i]) * (x[i] - y[i]);
  const double norm = std::sqrt(ss);
  require_finite(Matrix::scalar(norm), "l2_norm_diff");
  return tape_of(a).record(
      Matrix::scalar(norm), {a, b}, [a, b, norm](const Matrix&, const Matrix& g) {
        if (norm == 0.0) return;
        const Matrix& x = a.value();
        const Matrix& y = b.value();
        const double s = g[0] / norm;
        accumulate(a, [&](Matrix& ga) {
          for (std::size_t i = 0; i < x.size(); ++i) ga[i] += s * (x[i] - y[i]);
        });
        accumulate(b, [&](Matrix& gb) {
          for (std::size_t i = 0; i < x.size(); ++i) gb[i] -= s * (x[i] - y[i]);
        });
      });
}

Var concat(Var a, Var b) {
  const Matrix& x = a.value();
  const Matrix& y = b.value();
  if (x.rows() != 1 || y.rows() != 1) {
    throw DimensionError("concat: expects row vectors, got " + x.shape_string() + " and " +
                         y.shape_string());
  }
  Matrix out(1, x.cols() + y.cols());
  std::copy(x.values().begin(), x.values().end(), out.values().begin());
  std::copy(y.values().begin(), y.values().end(), out.values().begin() + x.cols());
  const std::size_t split = x.cols();
  return tape_of(a).record(std::move(out), {a, b}, [a, b, split](const Matrix&, const Matrix& g) {
    accumulate(a, [&](Matrix& ga) {
      for (std::size_t i = 0; i < split; ++i) ga[i] += g[i];
    });
    accumulate(b, [&](Matrix& gb) {
      for (std::size_t i = 0; i < gb.size(); ++i) gb[i] += g[split + i];
    });
  });
}

}  // namespace derwent::ad
