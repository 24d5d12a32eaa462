#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "symlat/error.hpp"

namespace symlat {

/// Paired features (row-major n x d) and responses.
class RegressionDataset {
 public:
  RegressionDataset() = default;

  RegressionDataset(std::vector<double> features, std::vector<double> responses, std::size_t dim)
      : x_(std::move(features)), y_(std::move(responses)), dim_(dim) {
    if (dim_ == 0) throw DimensionMismatch("feature dimension must be positive");
    if (x_.size() != y_.size() * dim_)
      throw DimensionMismatch("feature matrix has " + std::to_string(x_.size()) + " entries, expected " +
                              std::to_string(y_.size() * dim_));
    if (y_.size() < 2) throw ArgumentError("a dataset needs at least two rows");
    for (std::size_t k = 0; k < x_.size(); ++k)
      if (!std::isfinite(x_[k])) throw ArgumentError("non-finite feature in row " + std::to_string(k / dim_));
    for (std::size_t k = 0; k < y_.size(); ++k)
      if (!std::isfinite(y_[k])) throw ArgumentError("non-finite response in row " + std::to_string(k));
  }

  std::size_t size() const noexcept { return y_.size(); }
  std::size_t dim() const noexcept { return dim_; }
  std::span<const double> row(std::size_t i) const { return {x_.data() + i * dim_, dim_}; }
  double response(std::size_t i) const { return y_[i]; }
  const std::vector<double>& features() const noexcept { return x_; }
  const std::vector<double>& responses() const noexcept { return y_; }

  /// Rows [begin, end) as a new dataset.
  RegressionDataset slice(std::size_t begin, std::size_t end) const {
    if (begin > end || end > size()) throw ArgumentError("slice out of range");
    return RegressionDataset(std::vector<double>(x_.begin() + begin * dim_, x_.begin() + end * dim_),
                             std::vector<double>(y_.begin() + begin, y_.begin() + end), dim_);
  }

  RegressionDataset subset(const std::vector<std::size_t>& rows) const {
    std::vector<double> x, y;
    x.reserve(rows.size() * dim_);
    for (std::size_t r : rows) {
      if (r >= size()) throw ArgumentError("row index out of range");
      auto v = row(r);
      x.insert(x.end(), v.begin(), v.end());
      y.push_back(y_[r]);
    }
    return RegressionDataset(std::move(x), std::move(y), dim_);
  }

 private:
  std::vector<double> x_;
  std::vector<double> y_;
  std::size_t dim_ = 0;
};

}  // namespace symlat
