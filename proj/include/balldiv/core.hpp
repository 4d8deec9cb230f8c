#pragma once

// Core data types and the family of generalized distances used throughout:
// dense row-major data matrices, the pooled two-sample container, group
// labelings, and distances of the form
//     phi(a, b) = h( (1/d) * sum_q psi(|a_q - b_q|^2) )
// with monotone h, psi vanishing at zero. Four built-in kinds are provided
// (euclidean / manhattan / bounded-exponential / log) plus custom h, psi.

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace balldiv {

enum class DistanceKind { L2 = 0, L1 = 1, Exp = 2, Log = 3, Custom = 4 };

struct DistanceSpec {
  DistanceKind kind = DistanceKind::L2;
  // Only consulted for DistanceKind::Custom.
  std::function<double(double)> h;
  std::function<double(double)> psi;

  static DistanceSpec custom(std::function<double(double)> h,
                             std::function<double(double)> psi);
  const char* name() const;
  // Stable small integer used in seed-derivation paths.
  int id() const { return static_cast<int>(kind); }
};

DistanceSpec distance_spec_from_name(const std::string& name);

// Dense row-major matrix of finite doubles. Construction validates that every
// entry is finite and that the buffer matches rows*dim.
class DataMatrix {
 public:
  DataMatrix(int rows, int dim);
  DataMatrix(int rows, int dim, std::vector<double> values);

  int rows() const { return rows_; }
  int dim() const { return dim_; }
  std::span<const double> row(int i) const {
    return {values_.data() + static_cast<std::size_t>(i) * dim_, static_cast<std::size_t>(dim_)};
  }
  double* row_ptr(int i) { return values_.data() + static_cast<std::size_t>(i) * dim_; }
  const double* row_ptr(int i) const {
    return values_.data() + static_cast<std::size_t>(i) * dim_;
  }
  const std::vector<double>& values() const { return values_; }

  // Re-validates (used after in-place fills through row_ptr).
  void check_finite() const;

 private:
  int rows_;
  int dim_;
  std::vector<double> values_;
};

// Two samples with a common dimension, pooled in (x rows first, then y rows)
// order. Both group sizes must be at least 3: the statistic divides by n-2
// and m-2.
class PooledSample {
 public:
  PooledSample(DataMatrix x, DataMatrix y);

  const DataMatrix& x() const { return x_; }
  const DataMatrix& y() const { return y_; }
  int n() const { return x_.rows(); }
  int m() const { return y_.rows(); }
  int total() const { return x_.rows() + y_.rows(); }
  int dim() const { return x_.dim(); }

  // Pooled row view: rows 0..n-1 come from x, rows n..N-1 from y.
  const double* pooled_row(int i) const {
    return i < n() ? x_.row_ptr(i) : y_.row_ptr(i - n());
  }

 private:
  DataMatrix x_;
  DataMatrix y_;
};

// A labeling assigns 0 (first group) or 1 (second group) to each pooled row.
using Labeling = std::vector<std::uint8_t>;

// Canonical labeling: first n rows 0, remaining m rows 1.
Labeling canonical_labeling(int n, int m);

// Label the positions perm[0..n-1] with 0 and the rest with 1. perm must be a
// permutation of 0..N-1 and both resulting groups must have >= 3 members.
Labeling labeling_from_permutation(const std::vector<int>& perm, int n);

// Generalized distance between two points of equal dimension. Validates
// dimensions and finiteness; distance_unchecked skips validation for inner
// loops over already-validated matrices.
double distance(std::span<const double> a, std::span<const double> b, const DistanceSpec& spec);
double distance_unchecked(const double* a, const double* b, int d, const DistanceSpec& spec);

}  // namespace balldiv
