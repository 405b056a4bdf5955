#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "wim/error.hpp"

namespace wim {

// Uniform-weight point cloud: n points in d dimensions, stored row-major.
// One-dimensional measures keep a sorted copy of their values.
class EmpiricalMeasure {
 public:
  EmpiricalMeasure(std::vector<double> points, std::size_t dim) : points_(std::move(points)), dim_(dim) {
    if (dim_ == 0) throw DomainError("EmpiricalMeasure: dimension must be at least 1");
    if (points_.empty() || points_.size() % dim_ != 0)
      throw DomainError("EmpiricalMeasure: need a positive whole number of points");
    for (double x : points_)
      if (!std::isfinite(x)) throw DomainError("EmpiricalMeasure: coordinates must be finite");
    if (dim_ == 1) {
      sorted_ = points_;
      std::stable_sort(sorted_.begin(), sorted_.end());
    }
  }

  static EmpiricalMeasure from_1d(std::vector<double> values) { return EmpiricalMeasure(std::move(values), 1); }

  std::size_t size() const { return points_.size() / dim_; }
  std::size_t dim() const { return dim_; }
  std::span<const double> data() const { return points_; }
  std::span<const double> point(std::size_t i) const { return {points_.data() + i * dim_, dim_}; }

  std::span<const double> sorted() const {
    if (dim_ != 1) throw DimensionError("EmpiricalMeasure::sorted requires a one-dimensional measure");
    return sorted_;
  }

  EmpiricalMeasure marginal(std::size_t coord) const {
    if (coord >= dim_) throw DimensionError("EmpiricalMeasure::marginal: coordinate out of range");
    std::vector<double> v(size());
    for (std::size_t i = 0; i < size(); ++i) v[i] = points_[i * dim_ + coord];
    return from_1d(std::move(v));
  }

  EmpiricalMeasure subset(std::span<const std::size_t> idx) const {
    std::vector<double> v;
    v.reserve(idx.size() * dim_);
    for (auto i : idx) {
      auto p = point(i);
      v.insert(v.end(), p.begin(), p.end());
    }
    return EmpiricalMeasure(std::move(v), dim_);
  }

  std::vector<double> coordinate_means() const {
    std::vector<double> m(dim_, 0.0);
    for (std::size_t i = 0; i < size(); ++i)
      for (std::size_t k = 0; k < dim_; ++k) m[k] += points_[i * dim_ + k];
    for (auto& x : m) x /= static_cast<double>(size());
    return m;
  }

 private:
  std::vector<double> points_;
  std::size_t dim_;
  std::vector<double> sorted_;
};

}  // namespace wim
