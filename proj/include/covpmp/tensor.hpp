#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace covpmp {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Dense cubic array of rank `Rank` with every index running over [0, n).
/// Row-major: the last index is contiguous.
template <int Rank>
class Tensor {
  static_assert(Rank >= 1);

 public:
  Tensor() = default;
  explicit Tensor(int n) : n_(n), data_(count(n), 0.0) {}

  int dim() const { return n_; }
  std::size_t size() const { return data_.size(); }

  template <typename... Idx>
  double& operator()(Idx... idx) {
    static_assert(sizeof...(Idx) == Rank);
    return data_[offset({static_cast<int>(idx)...})];
  }

  template <typename... Idx>
  double operator()(Idx... idx) const {
    static_assert(sizeof...(Idx) == Rank);
    return data_[offset({static_cast<int>(idx)...})];
  }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }

  void fill(double v) { std::fill(data_.begin(), data_.end(), v); }

  double max_abs() const {
    double m = 0.0;
    for (double v : data_) m = std::max(m, std::abs(v));
    return m;
  }

  Tensor& operator+=(const Tensor& o) {
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
    return *this;
  }
  Tensor& operator-=(const Tensor& o) {
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
    return *this;
  }
  Tensor& operator*=(double s) {
    for (double& v : data_) v *= s;
    return *this;
  }

  friend Tensor operator-(Tensor a, const Tensor& b) { return a -= b; }
  friend Tensor operator+(Tensor a, const Tensor& b) { return a += b; }
  friend Tensor operator*(double s, Tensor a) { return a *= s; }

 private:
  static std::size_t count(int n) {
    std::size_t c = 1;
    for (int r = 0; r < Rank; ++r) c *= static_cast<std::size_t>(n);
    return c;
  }

  std::size_t offset(const std::array<int, Rank>& idx) const {
    std::size_t off = 0;
    for (int r = 0; r < Rank; ++r) off = off * static_cast<std::size_t>(n_) + static_cast<std::size_t>(idx[r]);
    return off;
  }

  int n_ = 0;
  std::vector<double> data_;
};

using Tensor3 = Tensor<3>;
using Tensor4 = Tensor<4>;

}  // namespace covpmp
