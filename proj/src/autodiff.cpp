#include "trajcast/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_set>

namespace trajcast {

using detail::Node;

namespace {

void check_same_shape(const char* op, const Tensor& a, const Tensor& b) {
  if (!a.same_shape(b)) {
    throw std::invalid_argument(std::string(op) + ": shape mismatch " +
                                Tensor::shape_str(a.shape) + " vs " +
                                Tensor::shape_str(b.shape));
  }
}

Var make_op(Tensor value, std::vector<Var> inputs, std::function<void(Node&)> backprop) {
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  bool needs = false;
  for (const auto& in : inputs) needs = needs || in.requires_grad();
  n->requires_grad = needs;
  if (needs) {
    for (const auto& in : inputs) n->parents.push_back(in.node());
    n->backprop = std::move(backprop);
  }
  return Var::from_node(std::move(n));
}

}  // namespace

void backward(const Var& loss) {
  auto root = loss.node();
  if (loss.value().size() != 1) {
    throw std::invalid_argument("backward: loss must be scalar, got shape " +
                                Tensor::shape_str(loss.value().shape));
  }
  if (root->backward_done) {
    throw std::runtime_error("backward: already called on this graph");
  }
  root->backward_done = true;

  // Iterative post-order DFS over parents.
  std::vector<Node*> topo;
  std::unordered_set<Node*> visited;
  std::vector<std::pair<Node*, size_t>> stack;
  stack.emplace_back(root.get(), 0);
  visited.insert(root.get());
  while (!stack.empty()) {
    auto& [n, idx] = stack.back();
    if (idx < n->parents.size()) {
      Node* p = n->parents[idx++].get();
      if (!visited.count(p)) {
        visited.insert(p);
        stack.emplace_back(p, 0);
      }
    } else {
      topo.push_back(n);
      stack.pop_back();
    }
  }

  root->grad_buf().data[0] = 1.0;
  for (auto it = topo.rbegin(); it != topo.rend(); ++it) {
    Node* n = *it;
    if (n->backprop && !n->grad.data.empty()) n->backprop(*n);
  }
}

Var constant(Tensor t) { return Var(std::move(t), false); }
Var constant_row(std::vector<double> v) { return constant(Tensor::row(std::move(v))); }

Var add(const Var& a, const Var& b) {
  const Tensor& ta = a.value();
  const Tensor& tb = b.value();
  bool row_bcast = ta.shape.size() == 2 && tb.shape.size() == 2 && tb.shape[0] == 1 &&
                   ta.shape[1] == tb.shape[1] && ta.shape[0] != 1;
  Tensor out = ta;
  if (row_bcast) {
    int64_t m = ta.shape[0], n = ta.shape[1];
    for (int64_t r = 0; r < m; ++r)
      for (int64_t c = 0; c < n; ++c) out.data[r * n + c] += tb.data[c];
  } else {
    check_same_shape("add", ta, tb);
    for (size_t i = 0; i < out.data.size(); ++i) out.data[i] += tb.data[i];
  }
  return make_op(std::move(out), {a, b}, [row_bcast](Node& self) {
    auto& pa = *self.parents[0];
    auto& pb = *self.parents[1];
    if (pa.requires_grad) {
      auto& g = pa.grad_buf();
      for (size_t i = 0; i < g.data.size(); ++i) g.data[i] += self.grad.data[i];
    }
    if (pb.requires_grad) {
      auto& g = pb.grad_buf();
      if (row_bcast) {
        int64_t m = self.value.shape[0], n = self.value.shape[1];
        for (int64_t r = 0; r < m; ++r)
          for (int64_t c = 0; c < n; ++c) g.data[c] += self.grad.data[r * n + c];
      } else {
        for (size_t i = 0; i < g.data.size(); ++i) g.data[i] += self.grad.data[i];
      }
    }
  });
}

Var sub(const Var& a, const Var& b) {
  check_same_shape("sub", a.value(), b.value());
  Tensor out = a.value();
  for (size_t i = 0; i < out.data.size(); ++i) out.data[i] -= b.value().data[i];
  return make_op(std::move(out), {a, b}, [](Node& self) {
    auto& pa = *self.parents[0];
    auto& pb = *self.parents[1];
    if (pa.requires_grad) {
      auto& g = pa.grad_buf();
      for (size_t i = 0; i < g.data.size(); ++i) g.data[i] += self.grad.data[i];
    }
    if (pb.requires_grad) {
      auto& g = pb.grad_buf();
      for (size_t i = 0; i < g.data.size(); ++i) g.data[i] -= self.grad.data[i];
    }
  });
}

Var mul(const Var& a, const Var& b) {
  const Tensor& ta = a.value();
  const Tensor& tb = b.value();
  bool scalar_b = tb.size() == 1 && ta.size() != 1;
  Tensor out = ta;
  if (scalar_b) {
    for (auto& v : out.data) v *= tb.data[0];
  } else {
    check_same_shape("mul", ta, tb);
    for (size_t i = 0; i < out.data.size(); ++i) out.data[i] *= tb.data[i];
  }
  return make_op(std::move(out), {a, b}, [scalar_b](Node& self) {
    auto& pa = *self.parents[0];
    auto& pb = *self.parents[1];
    if (pa.requires_grad) {
      auto& g = pa.grad_buf();
      if (scalar_b) {
        double s = pb.value.data[0];
        for (size_t i = 0; i < g.data.size(); ++i) g.data[i] += self.grad.data[i] * s;
      } else {
        for (size_t i = 0; i < g.data.size(); ++i)
          g.data[i] += self.grad.data[i] * pb.value.data[i];
      }
    }
    if (pb.requires_grad) {
      auto& g = pb.grad_buf();
      if (scalar_b) {
        double acc = 0.0;
        for (size_t i = 0; i < self.grad.data.size(); ++i)
          acc += self.grad.data[i] * pa.value.data[i];
        g.data[0] += acc;
      } else {
        for (size_t i = 0; i < g.data.size(); ++i)
          g.data[i] += self.grad.data[i] * pa.value.data[i];
      }
    }
  });
}

Var div(const Var& a, const Var& b) {
  const Tensor& ta = a.value();
  const Tensor& tb = b.value();
  bool scalar_b = tb.size() == 1 && ta.size() != 1;
  Tensor out = ta;
  if (scalar_b) {
    for (auto& v : out.data) v /= tb.data[0];
  } else {
    check_same_shape("div", ta, tb);
    for (size_t i = 0; i < out.data.size(); ++i) out.data[i] /= tb.data[i];
  }
  return make_op(std::move(out), {a, b}, [scalar_b](Node& self) {
    auto& pa = *self.parents[0];
    auto& pb = *self.parents[1];
    if (pa.requires_grad) {
      auto& g = pa.grad_buf();
      if (scalar_b) {
        double inv = 1.0 / pb.value.data[0];
        for (size_t i = 0; i < g.data.size(); ++i) g.data[i] += self.grad.data[i] * inv;
      } else {
        for (size_t i = 0; i < g.data.size(); ++i)
          g.data[i] += self.grad.data[i] / pb.value.data[i];
      }
    }
    if (pb.requires_grad) {
      auto& g = pb.grad_buf();
      if (scalar_b) {
        double s = pb.value.data[0];
        double acc = 0.0;
        for (size_t i = 0; i < self.grad.data.size(); ++i)
          acc += self.grad.data[i] * pa.value.data[i];
        g.data[0] -= acc / (s * s);
      } else {
        for (size_t i = 0; i < g.data.size(); ++i) {
          double s = pb.value.data[i];
          g.data[i] -= self.grad.data[i] * pa.value.data[i] / (s * s);
        }
      }
    }
  });
}

Var scale(const Var& a, double c) {
  Tensor out = a.value();
  for (auto& v : out.data) v *= c;
  return make_op(std::move(out), {a}, [c](Node& self) {
    auto& g = self.parents[0]->grad_buf();
    for (size_t i = 0; i < g.data.size(); ++i) g.data[i] += self.grad.data[i] * c;
  });
}

Var neg(const Var& a) { return scale(a, -1.0); }

Var matmul(const Var& a, const Var& b) {
  const Tensor& ta = a.value();
  const Tensor& tb = b.value();
  if (ta.shape.size() != 2 || tb.shape.size() != 2 || ta.shape[1] != tb.shape[0]) {
    throw std::invalid_argument("matmul: incompatible shapes " + Tensor::shape_str(ta.shape) +
                                " x " + Tensor::shape_str(tb.shape));
  }
  int64_t m = ta.shape[0], k = ta.shape[1], n = tb.shape[1];
  Tensor out = Tensor::zeros({m, n});
  for (int64_t i = 0; i < m; ++i)
    for (int64_t l = 0; l < k; ++l) {
      double av = ta.data[i * k + l];
      if (av == 0.0) continue;
      for (int64_t j = 0; j < n; ++j) out.data[i * n + j] += av * tb.data[l * n + j];
    }
  return make_op(std::move(out), {a, b}, [m, k, n](Node& self) {
    auto& pa = *self.parents[0];
    auto& pb = *self.parents[1];
    if (pa.requires_grad) {
      auto& g = pa.grad_buf();  // dA = dC * B^T
      for (int64_t i = 0; i < m; ++i)
        for (int64_t j = 0; j < n; ++j) {
          double gv = self.grad.data[i * n + j];
          if (gv == 0.0) continue;
          for (int64_t l = 0; l < k; ++l) g.data[i * k + l] += gv * pb.value.data[l * n + j];
        }
    }
    if (pb.requires_grad) {
      auto& g = pb.grad_buf();  // dB = A^T * dC
      for (int64_t i = 0; i < m; ++i)
        for (int64_t l = 0; l < k; ++l) {
          double av = pa.value.data[i * k + l];
          if (av == 0.0) continue;
          for (int64_t j = 0; j < n; ++j) g.data[l * n + j] += av * self.grad.data[i * n + j];
        }
    }
  });
}

Var transpose(const Var& a) {
  int64_t m = a.rows(), n = a.cols();
  Tensor out = Tensor::zeros({n, m});
  for (int64_t i = 0; i < m; ++i)
    for (int64_t j = 0; j < n; ++j) out.data[j * m + i] = a.value().data[i * n + j];
  return make_op(std::move(out), {a}, [m, n](Node& self) {
    auto& g = self.parents[0]->grad_buf();
    for (int64_t i = 0; i < m; ++i)
      for (int64_t j = 0; j < n; ++j) g.data[i * n + j] += self.grad.data[j * m + i];
  });
}

Var concat_rows(const std::vector<Var>& xs) {
  if (xs.empty()) throw std::invalid_argument("concat_rows: empty input");
  int64_t n = xs[0].cols();
  int64_t m = 0;
  for (const auto& x : xs) {
    if (x.cols() != n)
      throw std::invalid_argument("concat_rows: column mismatch " +
                                  Tensor::shape_str(x.value().shape) + " vs cols=" +
                                  std::to_string(n));
    m += x.rows();
  }
  Tensor out = Tensor::zeros({m, n});
  int64_t r = 0;
  for (const auto& x : xs) {
    std::copy(x.value().data.begin(), x.value().data.end(), out.data.begin() + r * n);
    r += x.rows();
  }
  return make_op(std::move(out), xs, [n](Node& self) {
    int64_t r = 0;
    for (auto& p : self.parents) {
      int64_t pr = p->value.shape[0];
      if (p->requires_grad) {
        auto& g = p->grad_buf();
        for (int64_t i = 0; i < pr * n; ++i) g.data[i] += self.grad.data[r * n + i];
      }
      r += pr;
    }
  });
}

Var concat_cols(const std::vector<Var>& xs) {
  if (xs.empty()) throw std::invalid_argument("concat_cols: empty input");
  int64_t m = xs[0].rows();
  int64_t n = 0;
  for (const auto& x : xs) {
    if (x.rows() != m)
      throw std::invalid_argument("concat_cols: row mismatch " +
                                  Tensor::shape_str(x.value().shape) + " vs rows=" +
                                  std::to_string(m));
    n += x.cols();
  }
  Tensor out = Tensor::zeros({m, n});
  int64_t off = 0;
  for (const auto& x : xs) {
    int64_t xc = x.cols();
    for (int64_t i = 0; i < m; ++i)
      for (int64_t j = 0; j < xc; ++j) out.data[i * n + off + j] = x.value().data[i * xc + j];
    off += xc;
  }
  return make_op(std::move(out), xs, [m, n](Node& self) {
    int64_t off = 0;
    for (auto& p : self.parents) {
      int64_t xc = p->value.shape[1];
      if (p->requires_grad) {
        auto& g = p->grad_buf();
        for (int64_t i = 0; i < m; ++i)
          for (int64_t j = 0; j < xc; ++j) g.data[i * xc + j] += self.grad.data[i * n + off + j];
      }
      off += xc;
    }
  });
}

Var slice_rows(const Var& a, int64_t from, int64_t to) {
  int64_t m = a.rows(), n = a.cols();
  if (from < 0 || to > m || from >= to)
    throw std::invalid_argument("slice_rows: bad range [" + std::to_string(from) + "," +
                                std::to_string(to) + ") for " +
                                Tensor::shape_str(a.value().shape));
  Tensor out = Tensor::zeros({to - from, n});
  std::copy(a.value().data.begin() + from * n, a.value().data.begin() + to * n,
            out.data.begin());
  return make_op(std::move(out), {a}, [from, n](Node& self) {
    auto& g = self.parents[0]->grad_buf();
    for (size_t i = 0; i < self.grad.data.size(); ++i)
      g.data[from * n + i] += self.grad.data[i];
  });
}

Var slice_cols(const Var& a, int64_t from, int64_t to) {
  int64_t m = a.rows(), n = a.cols();
  if (from < 0 || to > n || from >= to)
    throw std::invalid_argument("slice_cols: bad range [" + std::to_string(from) + "," +
                                std::to_string(to) + ") for " +
                                Tensor::shape_str(a.value().shape));
  int64_t w = to - from;
  Tensor out = Tensor::zeros({m, w});
  for (int64_t i = 0; i < m; ++i)
    for (int64_t j = 0; j < w; ++j) out.data[i * w + j] = a.value().data[i * n + from + j];
  return make_op(std::move(out), {a}, [m, n, from, w](Node& self) {
    auto& g = self.parents[0]->grad_buf();
    for (int64_t i = 0; i < m; ++i)
      for (int64_t j = 0; j < w; ++j) g.data[i * n + from + j] += self.grad.data[i * w + j];
  });
}

Var reshape(const Var& a, std::vector<int64_t> shape) {
  if (Tensor::numel(shape) != a.value().size())
    throw std::invalid_argument("reshape: size mismatch " +
                                Tensor::shape_str(a.value().shape) + " -> " +
                                Tensor::shape_str(shape));
  Tensor out(std::move(shape), a.value().data);
  return make_op(std::move(out), {a}, [](Node& self) {
    auto& g = self.parents[0]->grad_buf();
    for (size_t i = 0; i < g.data.size(); ++i) g.data[i] += self.grad.data[i];
  });
}

Var sum(const Var& a) {
  double s = 0.0;
  for (double v : a.value().data) s += v;
  return make_op(Tensor::scalar(s), {a}, [](Node& self) {
    auto& g = self.parents[0]->grad_buf();
    double gv = self.grad.data[0];
    for (auto& x : g.data) x += gv;
  });
}

Var mean(const Var& a) {
  int64_t n = a.value().size();
  double s = 0.0;
  for (double v : a.value().data) s += v;
  return make_op(Tensor::scalar(s / static_cast<double>(n)), {a}, [n](Node& self) {
    auto& g = self.parents[0]->grad_buf();
    double gv = self.grad.data[0] / static_cast<double>(n);
    for (auto& x : g.data) x += gv;
  });
}

namespace {

template <typename F, typename DF>
Var unary_op(const Var& a, F f, DF df) {
  Tensor out = a.value();
  for (auto& v : out.data) v = f(v);
  return make_op(std::move(out), {a}, [df](Node& self) {
    auto& g = self.parents[0]->grad_buf();
    for (size_t i = 0; i < g.data.size(); ++i)
      g.data[i] += self.grad.data[i] * df(self.parents[0]->value.data[i], self.value.data[i]);
  });
}

}  // namespace

Var relu(const Var& a) {
  return unary_op(
      a, [](double x) { return x > 0.0 ? x : 0.0; },
      [](double x, double) { return x > 0.0 ? 1.0 : 0.0; });
}

Var sigmoid(const Var& a) {
  return unary_op(
      a, [](double x) { return 1.0 / (1.0 + std::exp(-x)); },
      [](double, double y) { return y * (1.0 - y); });
}

Var tanh_v(const Var& a) {
  return unary_op(
      a, [](double x) { return std::tanh(x); },
      [](double, double y) { return 1.0 - y * y; });
}

Var exp_v(const Var& a) {
  return unary_op(
      a, [](double x) { return std::exp(x); }, [](double, double y) { return y; });
}

Var log_v(const Var& a) {
  return unary_op(
      a, [](double x) { return std::log(x); }, [](double x, double) { return 1.0 / x; });
}

Var abs_v(const Var& a) {
  return unary_op(
      a, [](double x) { return std::abs(x); },
      [](double x, double) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); });
}

Var softmax_rows(const Var& a, const Tensor& mask) {
  const Tensor& ta = a.value();
  if (ta.shape.size() != 2)
    throw std::invalid_argument("softmax_rows: expected 2-d, got " +
                                Tensor::shape_str(ta.shape));
  check_same_shape("softmax_rows(mask)", ta, mask);
  int64_t m = ta.shape[0], n = ta.shape[1];
  Tensor out = Tensor::zeros({m, n});
  constexpr double neg_inf = -std::numeric_limits<double>::infinity();
  for (int64_t i = 0; i < m; ++i) {
    double mx = neg_inf;
    for (int64_t j = 0; j < n; ++j) {
      double z = ta.data[i * n + j] + mask.data[i * n + j];
      if (z > mx) mx = z;
    }
    if (mx == neg_inf) continue;  // fully masked row stays zero
    double denom = 0.0;
    for (int64_t j = 0; j < n; ++j) {
      double z = ta.data[i * n + j] + mask.data[i * n + j];
      double e = (z == neg_inf) ? 0.0 : std::exp(z - mx);
      out.data[i * n + j] = e;
      denom += e;
    }
    for (int64_t j = 0; j < n; ++j) out.data[i * n + j] /= denom;
  }
  return make_op(std::move(out), {a}, [m, n](Node& self) {
    auto& g = self.parents[0]->grad_buf();
    for (int64_t i = 0; i < m; ++i) {
      double dot = 0.0;
      for (int64_t j = 0; j < n; ++j)
        dot += self.grad.data[i * n + j] * self.value.data[i * n + j];
      for (int64_t j = 0; j < n; ++j) {
        double s = self.value.data[i * n + j];
        g.data[i * n + j] += s * (self.grad.data[i * n + j] - dot);
      }
    }
  });
}

Var softmax_rows(const Var& a) {
  return softmax_rows(a, Tensor::zeros(a.value().shape));
}

Var layer_norm(const Var& a, const Var& gain, const Var& bias) {
  constexpr double eps = 1e-5;
  int64_t m = a.rows(), n = a.cols();
  if (gain.value().size() != n || bias.value().size() != n)
    throw std::invalid_argument("layer_norm: gain/bias size must match cols " +
                                std::to_string(n));
  Tensor out = Tensor::zeros({m, n});
  std::vector<double> mu(m), inv_sd(m);
  for (int64_t i = 0; i < m; ++i) {
    double s = 0.0;
    for (int64_t j = 0; j < n; ++j) s += a.value().data[i * n + j];
    mu[i] = s / n;
    double var = 0.0;
    for (int64_t j = 0; j < n; ++j) {
      double d = a.value().data[i * n + j] - mu[i];
      var += d * d;
    }
    var /= n;
    inv_sd[i] = 1.0 / std::sqrt(var + eps);
    for (int64_t j = 0; j < n; ++j) {
      double xn = (a.value().data[i * n + j] - mu[i]) * inv_sd[i];
      out.data[i * n + j] = xn * gain.value().data[j] + bias.value().data[j];
    }
  }
  return make_op(std::move(out), {a, gain, bias},
                 [m, n, mu = std::move(mu), inv_sd = std::move(inv_sd)](Node& self) {
    auto& pa = *self.parents[0];
    auto& pg = *self.parents[1];
    auto& pb = *self.parents[2];
    for (int64_t i = 0; i < m; ++i) {
      // Recover normalized values and row statistics of dL/dxn.
      double sum_dxn = 0.0, sum_dxn_xn = 0.0;
      std::vector<double> xn(n), dxn(n);
      for (int64_t j = 0; j < n; ++j) {
        xn[j] = (pa.value.data[i * n + j] - mu[i]) * inv_sd[i];
        dxn[j] = self.grad.data[i * n + j] * pg.value.data[j];
        sum_dxn += dxn[j];
        sum_dxn_xn += dxn[j] * xn[j];
      }
      if (pa.requires_grad) {
        auto& g = pa.grad_buf();
        for (int64_t j = 0; j < n; ++j) {
          g.data[i * n + j] +=
              inv_sd[i] * (dxn[j] - sum_dxn / n - xn[j] * sum_dxn_xn / n);
        }
      }
      if (pg.requires_grad) {
        auto& g = pg.grad_buf();
        for (int64_t j = 0; j < n; ++j) g.data[j] += self.grad.data[i * n + j] * xn[j];
      }
      if (pb.requires_grad) {
        auto& g = pb.grad_buf();
        for (int64_t j = 0; j < n; ++j) g.data[j] += self.grad.data[i * n + j];
      }
    }
  });
}

}  // namespace trajcast
