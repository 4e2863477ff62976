// SPDX-License-Identifier: Apache-2.0
#include "slidegraph/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "slidegraph/error.hpp"
#include "slidegraph/rng.hpp"

namespace slidegraph {

std::size_t shape_size(const Shape& shape) {
  std::size_t n = 1;
  for (std::size_t e : shape) n *= e;
  return shape.empty() ? 0 : n;
}

std::string shape_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? "," : "") << shape[i];
  os << ']';
  return os.str();
}

namespace {

void check_shape(const Shape& shape) {
  require(!shape.empty(), "tensor shape must have at least one extent");
  for (std::size_t e : shape) require(e > 0,
          [&] { return "tensor extents must be positive, got " + shape_string(shape); });
}

}  // namespace

Tensor::Tensor(Shape shape, double fill) : shape_(std::move(shape)) {
  check_shape(shape_);
  data_.assign(shape_size(shape_), fill);
}

Tensor::Tensor(Shape shape, std::vector<double> data) : shape_(std::move(shape)), data_(std::move(data)) {
  check_shape(shape_);
  require(data_.size() == shape_size(shape_),
          [&] { return "tensor payload length " + std::to_string(data_.size()) + " does not match shape " +
              shape_string(shape_); });
}

Tensor Tensor::matrix(std::size_t rows, std::size_t cols, std::initializer_list<double> values) {
  return Tensor({rows, cols}, std::vector<double>(values));
}

Tensor Tensor::uniform(Shape shape, double bound, Rng& rng) {
  Tensor t(std::move(shape));
  for (double& v : t.data_) v = rng.uniform(-bound, bound);
  return t;
}

std::size_t Tensor::rows() const {
  require(rank() == 2, [&] { return "rows() needs a rank-2 tensor, got " + shape_string(shape_); });
  return shape_[0];
}

std::size_t Tensor::cols() const {
  require(rank() == 2, [&] { return "cols() needs a rank-2 tensor, got " + shape_string(shape_); });
  return shape_[1];
}

double Tensor::item() const {
  require(data_.size() == 1, [&] { return "item() needs a one-element tensor, got " + shape_string(shape_); });
  return data_[0];
}

Tensor Tensor::reshaped(Shape shape) const { return Tensor(std::move(shape), data_); }

void Tensor::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

namespace {
constexpr std::size_t kCacheDoubles = 16384;
}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
  require(a.rank() == 2 && b.rank() == 2 && a.cols() == b.rows(),
          [&] { return "matmul shape mismatch: " + shape_string(a.shape()) + " x " + shape_string(b.shape()); });
  const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
  Tensor c({m, n});
  const double* A = a.data().data();
  const double* B = b.data().data();
  double* C = c.data().data();
  // Row blocks of C small enough to stay cached while B streams past once.
  const std::size_t block = std::max<std::size_t>(1, kCacheDoubles / std::max<std::size_t>(n, 1));
  for (std::size_t i0 = 0; i0 < m; i0 += block) {
    const std::size_t i1 = std::min(m, i0 + block);
    for (std::size_t p = 0; p < k; ++p) {
      const double* brow = B + p * n;
      for (std::size_t i = i0; i < i1; ++i) {
        const double aip = A[i * k + p];
        if (aip == 0.0) continue;
        double* crow = C + i * n;
        for (std::size_t j = 0; j < n; ++j) crow[j] += aip * brow[j];
      }
    }
  }
  return c;
}

Tensor matmul_tn(const Tensor& a, const Tensor& b) {
  require(a.rank() == 2 && b.rank() == 2 && a.rows() == b.rows(),
          [&] { return "matmul_tn shape mismatch: " + shape_string(a.shape()) + "^T x " + shape_string(b.shape()); });
  const std::size_t m = a.cols(), k = a.rows(), n = b.cols();
  Tensor c({m, n});
  const double* A = a.data().data();
  const double* B = b.data().data();
  double* C = c.data().data();
  for (std::size_t i = 0; i < m; ++i) {
    double* crow = C + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double api = A[p * m + i];
      if (api == 0.0) continue;
      const double* brow = B + p * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += api * brow[j];
    }
  }
  return c;
}

Tensor matmul_nt(const Tensor& a, const Tensor& b) {
  require(a.rank() == 2 && b.rank() == 2 && a.cols() == b.cols(),
          [&] { return "matmul_nt shape mismatch: " + shape_string(a.shape()) + " x " + shape_string(b.shape()) +
                       "^T"; });
  const std::size_t m = a.rows(), k = a.cols(), n = b.rows();
  Tensor c({m, n});
  const double* A = a.data().data();
  const double* B = b.data().data();
  double* C = c.data().data();
  for (std::size_t j = 0; j < n; ++j) {
    const double* brow = B + j * k;
    for (std::size_t i = 0; i < m; ++i) {
      const double* arow = A + i * k;
      double s = 0.0;
      for (std::size_t p = 0; p < k; ++p) s += arow[p] * brow[p];
      C[i * n + j] = s;
    }
  }
  return c;
}

double max_abs_diff(const Tensor& a, const Tensor& b) {
  require(a.same_shape(b), "max_abs_diff shape mismatch");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace slidegraph
