#include "balldiv/core.hpp"

#include <cmath>
#include <stdexcept>

namespace balldiv {

DistanceSpec DistanceSpec::custom(std::function<double(double)> h,
                                  std::function<double(double)> psi) {
  if (!h || !psi) throw std::invalid_argument("custom distance: h and psi must be callable");
  if (h(0.0) != 0.0) throw std::invalid_argument("custom distance: h(0) must be 0");
  if (psi(0.0) != 0.0) throw std::invalid_argument("custom distance: psi(0) must be 0");
  DistanceSpec spec;
  spec.kind = DistanceKind::Custom;
  spec.h = std::move(h);
  spec.psi = std::move(psi);
  return spec;
}

const char* DistanceSpec::name() const {
  switch (kind) {
    case DistanceKind::L2: return "l2";
    case DistanceKind::L1: return "l1";
    case DistanceKind::Exp: return "exp";
    case DistanceKind::Log: return "log";
    case DistanceKind::Custom: return "custom";
  }
  return "?";
}

DistanceSpec distance_spec_from_name(const std::string& name) {
  DistanceSpec spec;
  if (name == "l2") spec.kind = DistanceKind::L2;
  else if (name == "l1") spec.kind = DistanceKind::L1;
  else if (name == "exp") spec.kind = DistanceKind::Exp;
  else if (name == "log") spec.kind = DistanceKind::Log;
  else throw std::invalid_argument("unknown distance kind '" + name + "' (expected l2|l1|exp|log)");
  return spec;
}

DataMatrix::DataMatrix(int rows, int dim) : rows_(rows), dim_(dim) {
  if (rows < 0 || dim <= 0) throw std::invalid_argument("DataMatrix: rows must be >= 0, dim >= 1");
  values_.assign(static_cast<std::size_t>(rows) * dim, 0.0);
}

DataMatrix::DataMatrix(int rows, int dim, std::vector<double> values)
    : rows_(rows), dim_(dim), values_(std::move(values)) {
  if (rows < 0 || dim <= 0) throw std::invalid_argument("DataMatrix: rows must be >= 0, dim >= 1");
  if (values_.size() != static_cast<std::size_t>(rows) * dim)
    throw std::invalid_argument("DataMatrix: buffer size does not match rows*dim");
  check_finite();
}

void DataMatrix::check_finite() const {
  for (double v : values_)
    if (!std::isfinite(v)) throw std::invalid_argument("DataMatrix: non-finite entry");
}

PooledSample::PooledSample(DataMatrix x, DataMatrix y) : x_(std::move(x)), y_(std::move(y)) {
  if (x_.dim() != y_.dim())
    throw std::invalid_argument("PooledSample: samples have different dimensions");
  if (x_.rows() < 3 || y_.rows() < 3)
    throw std::invalid_argument("PooledSample: both groups need at least 3 rows");
}

Labeling canonical_labeling(int n, int m) {
  Labeling lab(static_cast<std::size_t>(n + m), 1);
  for (int i = 0; i < n; ++i) lab[static_cast<std::size_t>(i)] = 0;
  return lab;
}

Labeling labeling_from_permutation(const std::vector<int>& perm, int n) {
  const int N = static_cast<int>(perm.size());
  if (n < 3 || N - n < 3)
    throw std::invalid_argument("labeling_from_permutation: both groups need at least 3 members");
  std::vector<std::uint8_t> seen(static_cast<std::size_t>(N), 0);
  for (int p : perm) {
    if (p < 0 || p >= N || seen[static_cast<std::size_t>(p)])
      throw std::invalid_argument("labeling_from_permutation: not a permutation of 0..N-1");
    seen[static_cast<std::size_t>(p)] = 1;
  }
  Labeling lab(static_cast<std::size_t>(N), 1);
  for (int k = 0; k < n; ++k) lab[static_cast<std::size_t>(perm[static_cast<std::size_t>(k)])] = 0;
  return lab;
}

double distance_unchecked(const double* a, const double* b, int d, const DistanceSpec& spec) {
  double acc = 0.0;
  switch (spec.kind) {
    case DistanceKind::L2:
      for (int q = 0; q < d; ++q) {
        const double g = a[q] - b[q];
        acc += g * g;
      }
      return std::sqrt(acc / d);
    case DistanceKind::L1:
      for (int q = 0; q < d; ++q) acc += std::fabs(a[q] - b[q]);
      return acc / d;
    case DistanceKind::Exp:
      // psi(t) = 1 - exp(-t/2), evaluated as -expm1(-t/2) for small-t accuracy.
      for (int q = 0; q < d; ++q) {
        const double g = a[q] - b[q];
        acc += -std::expm1(-0.5 * g * g);
      }
      return acc / d;
    case DistanceKind::Log:
      for (int q = 0; q < d; ++q) {
        const double g = a[q] - b[q];
        acc += std::log1p(g * g);
      }
      return acc / d;
    case DistanceKind::Custom: {
      for (int q = 0; q < d; ++q) {
        const double g = a[q] - b[q];
        acc += spec.psi(g * g);
      }
      return spec.h(acc / d);
    }
  }
  return 0.0;
}

double distance(std::span<const double> a, std::span<const double> b, const DistanceSpec& spec) {
  if (a.size() != b.size() || a.empty())
    throw std::invalid_argument("distance: points must share a positive dimension");
  for (double v : a)
    if (!std::isfinite(v)) throw std::invalid_argument("distance: non-finite coordinate");
  for (double v : b)
    if (!std::isfinite(v)) throw std::invalid_argument("distance: non-finite coordinate");
  return distance_unchecked(a.data(), b.data(), static_cast<int>(a.size()), spec);
}

}  // namespace balldiv
