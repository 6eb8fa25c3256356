#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

namespace pdsaddle {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Malformed parameters, dimension mismatches, schema violations.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A step-size bound was violated; carries the offending quantity.
class StepSizeError : public ValidationError {
 public:
  StepSizeError(const std::string& what, double offending)
      : ValidationError(what), offending_(offending) {}
  double offending() const { return offending_; }

 private:
  double offending_;
};

/// A regularity condition (C1/C2/C3 or a positivity requirement) fails.
class ConditionError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// A required oracle capability (prox or gradient) is missing.
class CapabilityError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// Non-finite or unbounded iterates detected mid-run.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(const std::string& what, long iteration)
      : std::runtime_error(what), iteration_(iteration) {}
  long iteration() const { return iteration_; }

 private:
  long iteration_;
};

/// Reference solver could not certify a solution within its budget.
class UnsolvedError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Counter-based splittable generator. Each (seed, stream) pair yields an
/// independent deterministic sequence, so parallel trials are reproducible
/// and order-independent.
class SplitRng {
 public:
  explicit SplitRng(uint64_t seed, uint64_t stream = 0)
      : key_(mix(seed + 0x9e3779b97f4a7c15ull, mix(stream, 0x6a09e667f3bcc909ull))),
        counter_(0) {}

  uint64_t next_u64() { return mix(key_, ++counter_); }

  /// Uniform in [0, 1) with 53 bits of precision.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  double log_uniform(double lo, double hi) {
    return std::exp(uniform(std::log(lo), std::log(hi)));
  }

  int uniform_int(int lo, int hi) {  // inclusive bounds
    return lo + static_cast<int>(next_u64() % static_cast<uint64_t>(hi - lo + 1));
  }

  double normal() {
    double u1 = uniform();
    double u2 = uniform();
    if (u1 <= 0) u1 = 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
  }

  Vector gaussian(int dim) {
    Vector v(dim);
    for (int i = 0; i < dim; ++i) v(i) = normal();
    return v;
  }

  /// Uniform on the ball of the given radius (direction uniform, radius ~ r*u^{1/d}).
  Vector uniform_ball(int dim, double radius) {
    Vector v = gaussian(dim);
    double nrm = v.norm();
    if (nrm == 0) return Vector::Zero(dim);
    double r = radius * std::pow(uniform(), 1.0 / dim);
    return v * (r / nrm);
  }

 private:
  static uint64_t mix(uint64_t a, uint64_t b) {
    uint64_t z = a + 0x9e3779b97f4a7c15ull * (b + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  uint64_t key_;
  uint64_t counter_;
};

/// Haar-ish random orthogonal matrix via QR of a Gaussian sample.
inline Matrix random_orthogonal(int dim, SplitRng& rng) {
  Matrix g(dim, dim);
  for (int j = 0; j < dim; ++j) g.col(j) = rng.gaussian(dim);
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ();
  Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < dim; ++j)
    if (r(j, j) < 0) q.col(j) = -q.col(j);
  return q;
}

/// Symmetric matrix with the prescribed eigenvalues in a random basis.
inline Matrix random_symmetric_with_spectrum(const Vector& eigenvalues, SplitRng& rng) {
  const int dim = static_cast<int>(eigenvalues.size());
  Matrix q = random_orthogonal(dim, rng);
  Matrix s = q * eigenvalues.asDiagonal() * q.transpose();
  return 0.5 * (s + s.transpose());
}

inline bool all_finite(const Vector& v) { return v.allFinite(); }

}  // namespace pdsaddle
