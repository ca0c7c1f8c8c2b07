#pragma once

#include <cstdint>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

namespace bgm::nn {

/// Dense row-major tensor of 64-bit floats.
struct Tensor {
  std::vector<int> shape;
  std::vector<double> v;

  Tensor() = default;
  explicit Tensor(std::vector<int> s) : shape(std::move(s)), v(numel(shape), 0.0) {}

  static int64_t numel(const std::vector<int>& s) {
    int64_t n = 1;
    for (int d : s) n *= d;
    return n;
  }
  static Tensor from(std::vector<int> s, std::vector<double> data) {
    Tensor t;
    t.shape = std::move(s);
    t.v = std::move(data);
    return t;
  }
  static Tensor scalar(double x) { return from({1}, {x}); }

  int64_t size() const { return static_cast<int64_t>(v.size()); }
  int rank() const { return static_cast<int>(shape.size()); }
  int dim(int i) const { return shape[i]; }

  double& operator[](int64_t i) { return v[i]; }
  double operator[](int64_t i) const { return v[i]; }

  // 2-D and 3-D accessors; callers guarantee the rank.
  double& at(int r, int c) { return v[static_cast<int64_t>(r) * shape[1] + c]; }
  double at(int r, int c) const { return v[static_cast<int64_t>(r) * shape[1] + c]; }
  double& at(int c, int h, int w) {
    return v[(static_cast<int64_t>(c) * shape[1] + h) * shape[2] + w];
  }
  double at(int c, int h, int w) const {
    return v[(static_cast<int64_t>(c) * shape[1] + h) * shape[2] + w];
  }

  bool same_shape(const Tensor& o) const { return shape == o.shape; }
  std::string shape_str() const {
    std::ostringstream os;
    os << '[';
    for (size_t i = 0; i < shape.size(); ++i) os << (i ? "x" : "") << shape[i];
    os << ']';
    return os.str();
  }
};

}  // namespace bgm::nn
