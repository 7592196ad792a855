#pragma once

// Hand-rolled reference implementations used as oracles. Everything here is
// plain loops over std::vector<double> rows, independent of the graph code.

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "trajcast/params.hpp"

namespace ref {

using Rows = std::vector<std::vector<double>>;

inline Rows tensor_rows(const trajcast::Tensor& t) {
  Rows out(t.shape[0], std::vector<double>(t.shape[1]));
  for (int64_t i = 0; i < t.shape[0]; ++i)
    for (int64_t j = 0; j < t.shape[1]; ++j) out[i][j] = t.at(i, j);
  return out;
}

inline Rows param(const trajcast::ParamStore& ps, const std::string& name) {
  return tensor_rows(ps.at(name).value());
}

inline Rows matmul(const Rows& a, const Rows& b) {
  Rows out(a.size(), std::vector<double>(b[0].size(), 0.0));
  for (size_t i = 0; i < a.size(); ++i)
    for (size_t k = 0; k < b.size(); ++k)
      for (size_t j = 0; j < b[0].size(); ++j) out[i][j] += a[i][k] * b[k][j];
  return out;
}

inline Rows linear(const trajcast::ParamStore& ps, const std::string& name, const Rows& x) {
  Rows w = param(ps, name + ".w");
  Rows b = param(ps, name + ".b");
  Rows out = matmul(x, w);
  for (auto& row : out)
    for (size_t j = 0; j < row.size(); ++j) row[j] += b[0][j];
  return out;
}

inline Rows layer_norm(const trajcast::ParamStore& ps, const std::string& name, const Rows& x) {
  Rows gain = param(ps, name + ".gain");
  Rows bias = param(ps, name + ".bias");
  Rows out = x;
  for (auto& row : out) {
    double mu = 0.0;
    for (double v : row) mu += v;
    mu /= row.size();
    double var = 0.0;
    for (double v : row) var += (v - mu) * (v - mu);
    var /= row.size();
    double inv = 1.0 / std::sqrt(var + 1e-5);
    for (size_t j = 0; j < row.size(); ++j)
      row[j] = (row[j] - mu) * inv * gain[0][j] + bias[0][j];
  }
  return out;
}

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

inline std::vector<double> softmax_masked(const std::vector<double>& logits,
                                          const std::vector<bool>& ok) {
  std::vector<double> out(logits.size(), 0.0);
  double mx = -std::numeric_limits<double>::infinity();
  for (size_t j = 0; j < logits.size(); ++j)
    if (ok[j]) mx = std::max(mx, logits[j]);
  if (mx == -std::numeric_limits<double>::infinity()) return out;
  double denom = 0.0;
  for (size_t j = 0; j < logits.size(); ++j) {
    if (!ok[j]) continue;
    out[j] = std::exp(logits[j] - mx);
    denom += out[j];
  }
  for (double& v : out) v /= denom;
  return out;
}

inline Rows ffn(const trajcast::ParamStore& ps, const std::string& name, const Rows& x) {
  Rows h = layer_norm(ps, name + ".ln", linear(ps, name + ".fc1", x));
  for (auto& row : h)
    for (double& v : row) v = std::max(v, 0.0);
  return linear(ps, name + ".fc2", h);
}

/// Mirrors one gated attention layer: pre-norm multi-head scaled dot-product
/// attention, optional multiplicative key weights with per-row renormalization,
/// sigmoid-gated blend with a linear self path, then residual + feed-forward.
inline Rows attention_layer(const trajcast::ParamStore& ps, const std::string& name,
                            const Rows& zq, const Rows& zk,
                            const std::vector<std::vector<bool>>& ok, int heads,
                            const std::vector<double>* key_weights = nullptr) {
  const size_t d = zq[0].size();
  const size_t dh = d / heads;
  Rows zqn = layer_norm(ps, name + ".lnq", zq);
  Rows m(zq.size(), std::vector<double>(d, 0.0));
  if (!zk.empty()) {
    Rows zkn = layer_norm(ps, name + ".lnk", zk);
    Rows q = matmul(zqn, param(ps, name + ".wq"));
    Rows k = matmul(zkn, param(ps, name + ".wk"));
    Rows v = matmul(zkn, param(ps, name + ".wv"));
    for (int h = 0; h < heads; ++h) {
      for (size_t i = 0; i < zq.size(); ++i) {
        std::vector<double> logits(zk.size(), 0.0);
        for (size_t j = 0; j < zk.size(); ++j) {
          double dot = 0.0;
          for (size_t c = 0; c < dh; ++c) dot += q[i][h * dh + c] * k[j][h * dh + c];
          logits[j] = dot / std::sqrt(double(dh));
        }
        std::vector<double> alpha = softmax_masked(logits, ok[i]);
        if (key_weights) {
          double denom = 0.0;
          for (size_t j = 0; j < zk.size(); ++j) {
            alpha[j] *= (*key_weights)[j];
            denom += alpha[j];
          }
          if (denom > 0.0)
            for (double& a : alpha) a /= denom;
        }
        for (size_t j = 0; j < zk.size(); ++j)
          for (size_t c = 0; c < dh; ++c) m[i][h * dh + c] += alpha[j] * v[j][h * dh + c];
      }
    }
  }
  Rows self_path = matmul(zqn, param(ps, name + ".wself"));
  Rows wg = param(ps, name + ".wg");
  Rows bg = param(ps, name + ".bg");
  Rows out(zq.size(), std::vector<double>(d));
  for (size_t i = 0; i < zq.size(); ++i) {
    for (size_t c = 0; c < d; ++c) {
      double pre = bg[0][c];
      for (size_t k2 = 0; k2 < d; ++k2) pre += zqn[i][k2] * wg[k2][c];
      for (size_t k2 = 0; k2 < d; ++k2) pre += m[i][k2] * wg[d + k2][c];
      double g = sigmoid(pre);
      double zhat = g * self_path[i][c] + (1.0 - g) * m[i][c];
      out[i][c] = zq[i][c] + zhat;
    }
  }
  Rows f = ffn(ps, name + ".ffn", out);
  for (size_t i = 0; i < out.size(); ++i)
    for (size_t c = 0; c < d; ++c) out[i][c] += f[i][c];
  return out;
}

/// Scalar GRU recurrence for hidden size 1 (all weights are 1x1).
inline double gru_scalar(const trajcast::ParamStore& ps, const std::string& name, double x,
                         double h) {
  auto w = [&](const std::string& n) { return ps.at(name + "." + n).value().data[0]; };
  double r = sigmoid(x * w("wxr") + h * w("whr") + w("br"));
  double z = sigmoid(x * w("wxz") + h * w("whz") + w("bz"));
  double n = std::tanh(x * w("wxn") + r * (h * w("whn")) + w("bn"));
  return (1.0 - z) * n + z * h;
}

}  // namespace ref
