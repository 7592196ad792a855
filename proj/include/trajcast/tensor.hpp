#pragma once

#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace trajcast {

/// Dense row-major tensor of 64-bit floats.
struct Tensor {
  std::vector<int64_t> shape;
  std::vector<double> data;

  Tensor() = default;
  Tensor(std::vector<int64_t> shape_, std::vector<double> data_)
      : shape(std::move(shape_)), data(std::move(data_)) {
    if (static_cast<int64_t>(data.size()) != numel(shape)) {
      throw std::invalid_argument("Tensor: data size " + std::to_string(data.size()) +
                                  " does not match shape " + shape_str(shape));
    }
  }

  static int64_t numel(const std::vector<int64_t>& s) {
    int64_t n = 1;
    for (int64_t d : s) n *= d;
    return n;
  }

  static std::string shape_str(const std::vector<int64_t>& s) {
    std::string out = "[";
    for (size_t i = 0; i < s.size(); ++i) {
      if (i) out += ",";
      out += std::to_string(s[i]);
    }
    return out + "]";
  }

  static Tensor zeros(std::vector<int64_t> shape) {
    auto n = numel(shape);
    return Tensor(std::move(shape), std::vector<double>(static_cast<size_t>(n), 0.0));
  }

  static Tensor full(std::vector<int64_t> shape, double v) {
    auto n = numel(shape);
    return Tensor(std::move(shape), std::vector<double>(static_cast<size_t>(n), v));
  }

  static Tensor scalar(double v) { return Tensor({1}, {v}); }

  static Tensor row(std::vector<double> v) {
    int64_t n = static_cast<int64_t>(v.size());
    return Tensor({1, n}, std::move(v));
  }

  int64_t size() const { return static_cast<int64_t>(data.size()); }

  int64_t rows() const {
    check2d();
    return shape[0];
  }
  int64_t cols() const {
    check2d();
    return shape[1];
  }

  double& at(int64_t r, int64_t c) { return data[static_cast<size_t>(r * shape[1] + c)]; }
  double at(int64_t r, int64_t c) const { return data[static_cast<size_t>(r * shape[1] + c)]; }

  bool same_shape(const Tensor& o) const { return shape == o.shape; }

 private:
  void check2d() const {
    if (shape.size() != 2) {
      throw std::invalid_argument("Tensor: expected 2-d, got shape " + shape_str(shape));
    }
  }
};

}  // namespace trajcast
