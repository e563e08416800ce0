#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace gradalign {

// Error taxonomy shared by every module.
struct ShapeError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct ParameterError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct BudgetError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Flat row-major array of doubles plus a shape. Inputs, gradients and
// probability vectors are all rank-1 tensors in practice.
class Tensor {
 public:
  Tensor() = default;

  explicit Tensor(std::size_t n, double fill = 0.0) : shape_{n}, data_(n, fill) {}

  explicit Tensor(std::vector<double> data) : shape_{data.size()}, data_(std::move(data)) {}

  Tensor(std::initializer_list<double> values) : Tensor(std::vector<double>(values)) {}

  Tensor(std::vector<std::size_t> shape, std::vector<double> data)
      : shape_(std::move(shape)), data_(std::move(data)) {
    std::size_t n = std::accumulate(shape_.begin(), shape_.end(), std::size_t{1},
                                    std::multiplies<>{});
    if (shape_.empty() || n != data_.size())
      throw ShapeError("tensor shape does not match data length");
    for (auto s : shape_)
      if (s == 0) throw ShapeError("tensor dimensions must be positive");
  }

  [[nodiscard]] std::size_t size() const noexcept { return data_.size(); }
  [[nodiscard]] const std::vector<std::size_t>& shape() const noexcept { return shape_; }

  double& operator[](std::size_t i) noexcept { return data_[i]; }
  double operator[](std::size_t i) const noexcept { return data_[i]; }

  [[nodiscard]] std::span<double> span() noexcept { return data_; }
  [[nodiscard]] std::span<const double> span() const noexcept { return data_; }
  [[nodiscard]] const std::vector<double>& values() const noexcept { return data_; }

  auto begin() noexcept { return data_.begin(); }
  auto end() noexcept { return data_.end(); }
  auto begin() const noexcept { return data_.begin(); }
  auto end() const noexcept { return data_.end(); }

  [[nodiscard]] bool all_finite() const noexcept {
    for (double v : data_)
      if (!std::isfinite(v)) return false;
    return true;
  }

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  std::vector<std::size_t> shape_{0};
  std::vector<double> data_;
};

inline void require_same_size(const Tensor& a, const Tensor& b, const char* what) {
  if (a.size() != b.size())
    throw ShapeError(std::string(what) + ": length " + std::to_string(a.size()) + " vs " +
                     std::to_string(b.size()));
}

// sign(0) := 0
inline double sign(double v) noexcept { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

inline double dot(const Tensor& a, const Tensor& b) {
  require_same_size(a, b, "dot");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm_l1(const Tensor& a) noexcept {
  double s = 0.0;
  for (double v : a) s += std::abs(v);
  return s;
}

inline double norm_l2(const Tensor& a) noexcept {
  double s = 0.0;
  for (double v : a) s += v * v;
  return std::sqrt(s);
}

inline double norm_linf(const Tensor& a) noexcept {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::abs(v));
  return m;
}

inline Tensor operator+(const Tensor& a, const Tensor& b) {
  require_same_size(a, b, "add");
  Tensor out = a;
  for (std::size_t i = 0; i < a.size(); ++i) out[i] += b[i];
  return out;
}

inline Tensor operator-(const Tensor& a, const Tensor& b) {
  require_same_size(a, b, "sub");
  Tensor out = a;
  for (std::size_t i = 0; i < a.size(); ++i) out[i] -= b[i];
  return out;
}

inline Tensor operator*(double s, const Tensor& a) {
  Tensor out = a;
  for (double& v : out) v *= s;
  return out;
}

inline Tensor operator-(const Tensor& a) { return -1.0 * a; }

// Callers must rule out zero-norm operands.
inline double cosine(const Tensor& a, const Tensor& b) {
  return dot(a, b) / (norm_l2(a) * norm_l2(b));
}

// Index of the largest entry, lowest index on ties. `skip` excludes one index.
inline std::size_t argmax(std::span<const double> v, std::size_t skip = static_cast<std::size_t>(-1)) {
  std::size_t best = static_cast<std::size_t>(-1);
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i == skip) continue;
    if (best == static_cast<std::size_t>(-1) || v[i] > v[best]) best = i;
  }
  if (best == static_cast<std::size_t>(-1)) throw ShapeError("argmax over empty set");
  return best;
}

inline std::size_t argmax(const Tensor& t, std::size_t skip = static_cast<std::size_t>(-1)) {
  return argmax(t.span(), skip);
}

}  // namespace gradalign
