#pragma once

#include <algorithm>
#include <memory>
#include <optional>
#include <utility>
#include <vector>

#include "pdsaddle/core.hpp"

namespace pdsaddle {

/// A proper closed convex function exposed through prox/grad/value
/// evaluations plus declared regularity constants. Oracles are immutable
/// after construction; all evaluations are pure.
class FunctionOracle {
 public:
  virtual ~FunctionOracle() = default;

  int dim() const { return dim_; }
  /// Strong-convexity modulus (0 if merely convex).
  double mu() const { return mu_; }
  /// Gradient Lipschitz constant; +infinity encodes nonsmooth.
  double lip() const { return lip_; }
  bool has_prox() const { return has_prox_; }
  bool has_grad() const { return has_grad_; }

  virtual Vector prox(double step, const Vector& point) const = 0;

  virtual Vector grad(const Vector& /*point*/) const {
    throw CapabilityError("oracle does not expose a gradient");
  }

  /// Extended-real function value (+infinity outside the domain).
  virtual double value(const Vector& point) const = 0;

 protected:
  FunctionOracle(int dim, double mu, double lip, bool has_prox, bool has_grad)
      : dim_(dim), mu_(mu), lip_(lip), has_prox_(has_prox), has_grad_(has_grad) {
    if (dim <= 0) throw ValidationError("oracle dim must be positive");
    if (mu < 0) throw ValidationError("oracle mu must be nonnegative");
    if (std::isfinite(lip) && mu > lip * (1 + 1e-12) + 1e-15)
      throw ValidationError("oracle requires mu <= lip");
  }

  void check_dim(const Vector& v) const {
    if (v.size() != dim_) throw ValidationError("oracle point has wrong dimension");
  }

 private:
  int dim_;
  double mu_;
  double lip_;
  bool has_prox_;
  bool has_grad_;
};

using OraclePtr = std::shared_ptr<const FunctionOracle>;

// Membership slack for indicator domains.
inline constexpr double kMembershipTol = 1e-12;

class ZeroOracle final : public FunctionOracle {
 public:
  explicit ZeroOracle(int dim) : FunctionOracle(dim, 0, 0, true, true) {}
  Vector prox(double step, const Vector& v) const override {
    if (step <= 0) throw ValidationError("prox step must be positive");
    check_dim(v);
    return v;
  }
  Vector grad(const Vector& v) const override {
    check_dim(v);
    return Vector::Zero(dim());
  }
  double value(const Vector& v) const override {
    check_dim(v);
    return 0;
  }
};

class LinearOracle final : public FunctionOracle {
 public:
  explicit LinearOracle(Vector slope)
      : FunctionOracle(static_cast<int>(slope.size()), 0, 0, true, true),
        slope_(std::move(slope)) {}
  Vector prox(double step, const Vector& v) const override {
    if (step <= 0) throw ValidationError("prox step must be positive");
    check_dim(v);
    return v - step * slope_;
  }
  Vector grad(const Vector& v) const override {
    check_dim(v);
    return slope_;
  }
  double value(const Vector& v) const override {
    check_dim(v);
    return slope_.dot(v);
  }
  const Vector& slope() const { return slope_; }

 private:
  Vector slope_;
};

/// f(x) = 1/2 (x - center)' C (x - center), with C either a scalar multiple
/// of the identity or a dense PSD matrix (eigendecomposition cached so prox
/// is a closed form for every step size).
class QuadraticOracle final : public FunctionOracle {
 public:
  QuadraticOracle(double weight, Vector center)
      : FunctionOracle(static_cast<int>(center.size()), weight, weight, true, true),
        scalar_weight_(weight),
        center_(std::move(center)) {
    if (weight < 0) throw ValidationError("quadratic weight must be nonnegative");
  }

  QuadraticOracle(const Matrix& weight, Vector center)
      : QuadraticOracle(Spectral(weight), std::move(center)) {}

  Vector prox(double step, const Vector& v) const override {
    if (step <= 0) throw ValidationError("prox step must be positive");
    check_dim(v);
    if (!basis_) return (v + (step * scalar_weight_) * center_) / (1 + step * scalar_weight_);
    // (I + t C)^{-1} (v + t C center) in the cached eigenbasis.
    Vector rhs = basis_->vectors.transpose() * (v + step * (matrix() * center_));
    for (int i = 0; i < dim(); ++i) rhs(i) /= 1 + step * basis_->values(i);
    return basis_->vectors * rhs;
  }

  Vector grad(const Vector& v) const override {
    check_dim(v);
    if (!basis_) return scalar_weight_ * (v - center_);
    return matrix() * (v - center_);
  }

  double value(const Vector& v) const override {
    check_dim(v);
    Vector d = v - center_;
    if (!basis_) return 0.5 * scalar_weight_ * d.squaredNorm();
    return 0.5 * d.dot(matrix() * d);
  }

  const Vector& center() const { return center_; }
  Matrix matrix() const {
    if (!basis_) return scalar_weight_ * Matrix::Identity(dim(), dim());
    return basis_->vectors * basis_->values.asDiagonal() * basis_->vectors.transpose();
  }
  bool is_scalar() const { return !basis_.has_value(); }
  double scalar_weight() const { return scalar_weight_; }

 private:
  struct Spectral {
    explicit Spectral(const Matrix& weight) {
      if (weight.rows() != weight.cols())
        throw ValidationError("quadratic weight matrix must be square");
      Matrix sym = 0.5 * (weight + weight.transpose());
      if ((weight - sym).cwiseAbs().maxCoeff() > 1e-10 * (1 + sym.cwiseAbs().maxCoeff()))
        throw ValidationError("quadratic weight matrix must be symmetric");
      Eigen::SelfAdjointEigenSolver<Matrix> es(sym);
      values = es.eigenvalues();
      vectors = es.eigenvectors();
      if (values(0) < -1e-10 * std::max(1.0, values(values.size() - 1)))
        throw ValidationError("quadratic weight matrix must be positive semidefinite");
      values = values.cwiseMax(0.0);
    }
    Vector values;
    Matrix vectors;
  };

  QuadraticOracle(Spectral spectral, Vector center)
      : FunctionOracle(static_cast<int>(center.size()), spectral.values(0),
                       spectral.values(spectral.values.size() - 1), true, true),
        scalar_weight_(0),
        center_(std::move(center)),
        basis_(std::move(spectral)) {
    if (basis_->values.size() != dim())
      throw ValidationError("quadratic weight matrix does not match center dimension");
  }

  double scalar_weight_;
  Vector center_;
  std::optional<Spectral> basis_;
};

/// f(x) = 1/2 x' C x + b' x with dense PSD C.
class QuadraticPlusLinearOracle final : public FunctionOracle {
 public:
  QuadraticPlusLinearOracle(const Matrix& weight, Vector linear)
      : QuadraticPlusLinearOracle(QuadraticOracle(weight, Vector::Zero(linear.size())),
                                  std::move(linear)) {}

  Vector prox(double step, const Vector& v) const override {
    check_dim(v);
    return quad_.prox(step, v - step * linear_);
  }
  Vector grad(const Vector& v) const override { return quad_.grad(v) + linear_; }
  double value(const Vector& v) const override { return quad_.value(v) + linear_.dot(v); }

  Matrix matrix() const { return quad_.matrix(); }
  const Vector& linear() const { return linear_; }

 private:
  QuadraticPlusLinearOracle(QuadraticOracle quad, Vector linear)
      : FunctionOracle(quad.dim(), quad.mu(), quad.lip(), true, true),
        quad_(std::move(quad)),
        linear_(std::move(linear)) {}

  QuadraticOracle quad_;
  Vector linear_;
};

/// Projection region for indicator-type oracles.
struct Region {
  enum class Kind { kAll, kNonneg, kBox, kBall };
  Kind kind = Kind::kAll;
  Vector lo, hi;   // box bounds
  double radius = 0;

  static Region all() { return {}; }
  static Region nonneg() { return {Kind::kNonneg, {}, {}, 0}; }
  static Region box(Vector lo, Vector hi) {
    if (lo.size() != hi.size()) throw ValidationError("box bounds must have equal dims");
    for (int i = 0; i < lo.size(); ++i)
      if (!(lo(i) <= hi(i))) throw ValidationError("box requires lo <= hi");
    return {Kind::kBox, std::move(lo), std::move(hi), 0};
  }
  static Region ball(double radius) {
    if (radius <= 0) throw ValidationError("ball radius must be positive");
    return {Kind::kBall, {}, {}, radius};
  }

  Vector project(const Vector& v) const {
    switch (kind) {
      case Kind::kAll:
        return v;
      case Kind::kNonneg:
        return v.cwiseMax(0.0);
      case Kind::kBox:
        return v.cwiseMax(lo).cwiseMin(hi);
      case Kind::kBall: {
        double nrm = v.norm();
        if (nrm <= radius) return v;
        return v * (radius / nrm);
      }
    }
    return v;
  }

  bool contains(const Vector& v) const {
    const double tol = kMembershipTol * (1 + v.cwiseAbs().maxCoeff());
    switch (kind) {
      case Kind::kAll:
        return true;
      case Kind::kNonneg:
        return v.minCoeff() >= -tol;
      case Kind::kBox:
        return ((v - lo).minCoeff() >= -tol) && ((hi - v).minCoeff() >= -tol);
      case Kind::kBall:
        return v.norm() <= radius + tol;
    }
    return true;
  }
};

/// Pure indicator of a convex region; prox is the Euclidean projection.
class ProjectionOracle final : public FunctionOracle {
 public:
  ProjectionOracle(int dim, Region region)
      : FunctionOracle(dim, 0, kInf, true, false), region_(std::move(region)) {
    if (region_.kind == Region::Kind::kBox && region_.lo.size() != dim)
      throw ValidationError("box bounds do not match oracle dimension");
  }
  Vector prox(double step, const Vector& v) const override {
    if (step <= 0) throw ValidationError("prox step must be positive");
    check_dim(v);
    return region_.project(v);
  }
  double value(const Vector& v) const override {
    check_dim(v);
    return region_.contains(v) ? 0.0 : kInf;
  }
  const Region& region() const { return region_; }

 private:
  Region region_;
};

/// f(x) = w/2 ||x||^2 + c'x + indicator(region). Covers the dualized Huber
/// term (w = alpha, box [-1,1]), the orthant-constrained linear objective
/// of affinely constrained programs (w = 0, region nonneg), and interval
/// counterexamples. Prox is a shift-scale followed by projection.
class ProjectedQuadraticOracle final : public FunctionOracle {
 public:
  ProjectedQuadraticOracle(int dim, double weight, Vector linear, Region region)
      : FunctionOracle(dim, weight,
                       region.kind == Region::Kind::kAll ? weight : kInf,
                       /*has_prox=*/true,
                       /*has_grad=*/region.kind == Region::Kind::kAll),
        weight_(weight),
        linear_(std::move(linear)),
        region_(std::move(region)) {
    if (weight < 0) throw ValidationError("weight must be nonnegative");
    if (linear_.size() != dim) throw ValidationError("linear term has wrong dimension");
    if (region_.kind == Region::Kind::kBox && region_.lo.size() != dim)
      throw ValidationError("box bounds do not match oracle dimension");
  }

  Vector prox(double step, const Vector& v) const override {
    if (step <= 0) throw ValidationError("prox step must be positive");
    check_dim(v);
    return region_.project((v - step * linear_) / (1 + step * weight_));
  }
  Vector grad(const Vector& v) const override {
    if (region_.kind != Region::Kind::kAll)
      throw CapabilityError("indicator part makes the oracle nonsmooth");
    check_dim(v);
    return weight_ * v + linear_;
  }
  double value(const Vector& v) const override {
    check_dim(v);
    if (!region_.contains(v)) return kInf;
    return 0.5 * weight_ * v.squaredNorm() + linear_.dot(v);
  }

  double weight() const { return weight_; }
  const Vector& linear() const { return linear_; }
  const Region& region() const { return region_; }

 private:
  double weight_;
  Vector linear_;
  Region region_;
};

class L1Oracle final : public FunctionOracle {
 public:
  L1Oracle(int dim, double weight)
      : FunctionOracle(dim, 0, kInf, true, false), weight_(weight) {
    if (weight <= 0) throw ValidationError("l1 weight must be positive");
  }
  Vector prox(double step, const Vector& v) const override {
    if (step <= 0) throw ValidationError("prox step must be positive");
    check_dim(v);
    const double t = step * weight_;
    Vector out(v.size());
    for (int i = 0; i < v.size(); ++i)
      out(i) = std::copysign(std::max(std::abs(v(i)) - t, 0.0), v(i));
    return out;
  }
  double value(const Vector& v) const override {
    check_dim(v);
    return weight_ * v.lpNorm<1>();
  }
  double weight() const { return weight_; }

 private:
  double weight_;
};

enum class OracleKind {
  kZero,
  kQuadratic,
  kLinear,
  kIndicatorNonneg,
  kIndicatorBall,
  kIndicatorBox,
  kQuadraticPlusLinear,
  kL1,
};

/// Parameter bundle for the closed-form catalog.
struct OracleCatalogEntry {
  OracleKind kind = OracleKind::kZero;
  int dim = 0;
  double scalar_weight = 0;      // quadratic (scalar form), l1 weight
  std::optional<Matrix> weight;  // quadratic / quadratic_plus_linear matrix
  Vector center;                 // quadratic center
  Vector linear_term;            // linear slope, quadratic_plus_linear b
  double radius = 0;             // indicator_ball
  Vector lo, hi;                 // indicator_box

  static OracleCatalogEntry zero(int dim) { return {OracleKind::kZero, dim}; }
  static OracleCatalogEntry quadratic(int dim, double lambda, Vector center = {}) {
    OracleCatalogEntry e{OracleKind::kQuadratic, dim};
    e.scalar_weight = lambda;
    e.center = center.size() ? std::move(center) : Vector::Zero(dim);
    return e;
  }
  static OracleCatalogEntry quadratic(Matrix weight, Vector center = {}) {
    OracleCatalogEntry e{OracleKind::kQuadratic, static_cast<int>(weight.rows())};
    e.center = center.size() ? std::move(center) : Vector::Zero(weight.rows());
    e.weight = std::move(weight);
    return e;
  }
  static OracleCatalogEntry linear(Vector slope) {
    OracleCatalogEntry e{OracleKind::kLinear, static_cast<int>(slope.size())};
    e.linear_term = std::move(slope);
    return e;
  }
  static OracleCatalogEntry indicator_nonneg(int dim) {
    return {OracleKind::kIndicatorNonneg, dim};
  }
  static OracleCatalogEntry indicator_ball(int dim, double radius) {
    OracleCatalogEntry e{OracleKind::kIndicatorBall, dim};
    e.radius = radius;
    return e;
  }
  static OracleCatalogEntry indicator_box(Vector lo, Vector hi) {
    OracleCatalogEntry e{OracleKind::kIndicatorBox, static_cast<int>(lo.size())};
    e.lo = std::move(lo);
    e.hi = std::move(hi);
    return e;
  }
  static OracleCatalogEntry quadratic_plus_linear(Matrix weight, Vector linear) {
    OracleCatalogEntry e{OracleKind::kQuadraticPlusLinear,
                         static_cast<int>(weight.rows())};
    e.weight = std::move(weight);
    e.linear_term = std::move(linear);
    return e;
  }
  static OracleCatalogEntry l1(int dim, double weight) {
    OracleCatalogEntry e{OracleKind::kL1, dim};
    e.scalar_weight = weight;
    return e;
  }
};

inline OraclePtr make_oracle(const OracleCatalogEntry& entry) {
  if (entry.dim <= 0) throw ValidationError("catalog entry dim must be positive");
  switch (entry.kind) {
    case OracleKind::kZero:
      return std::make_shared<ZeroOracle>(entry.dim);
    case OracleKind::kQuadratic: {
      Vector center = entry.center.size() ? entry.center : Vector::Zero(entry.dim);
      if (center.size() != entry.dim)
        throw ValidationError("quadratic center has wrong dimension");
      if (entry.weight) return std::make_shared<QuadraticOracle>(*entry.weight, center);
      return std::make_shared<QuadraticOracle>(entry.scalar_weight, center);
    }
    case OracleKind::kLinear:
      if (entry.linear_term.size() != entry.dim)
        throw ValidationError("linear slope has wrong dimension");
      return std::make_shared<LinearOracle>(entry.linear_term);
    case OracleKind::kIndicatorNonneg:
      return std::make_shared<ProjectionOracle>(entry.dim, Region::nonneg());
    case OracleKind::kIndicatorBall:
      return std::make_shared<ProjectionOracle>(entry.dim, Region::ball(entry.radius));
    case OracleKind::kIndicatorBox:
      return std::make_shared<ProjectionOracle>(entry.dim,
                                                Region::box(entry.lo, entry.hi));
    case OracleKind::kQuadraticPlusLinear:
      if (!entry.weight) throw ValidationError("quadratic_plus_linear needs a matrix");
      if (entry.linear_term.size() != entry.dim)
        throw ValidationError("quadratic_plus_linear b has wrong dimension");
      return std::make_shared<QuadraticPlusLinearOracle>(*entry.weight,
                                                         entry.linear_term);
    case OracleKind::kL1:
      return std::make_shared<L1Oracle>(entry.dim, entry.scalar_weight);
  }
  throw ValidationError("unknown catalog kind");
}

/// Worst-case violations of the oracle's declared metadata over sampled
/// pairs. All violations are relative; pass iff none exceeds 1e-8.
struct ValidationReport {
  int samples = 0;
  double firm_nonexpansive_violation = 0;
  double prox_optimality_violation = 0;
  double monotonicity_violation = 0;
  double lipschitz_violation = 0;
  double attained_mu = kInf;
  double attained_lip = 0;
  bool grad_checked = false;
  bool pass = false;
  Vector worst_a, worst_b;
};

namespace detail {

/// Estimate the extreme curvature directions of an affine gradient map by
/// (shifted) power iteration on gradient differences; used to sample
/// adversarial pairs without access to the underlying matrix.
inline std::pair<Vector, Vector> extreme_grad_directions(const FunctionOracle& oracle,
                                                         SplitRng& rng) {
  const int d = oracle.dim();
  const Vector base = Vector::Zero(d);
  const Vector g0 = oracle.grad(base);
  auto apply = [&](const Vector& u) { return oracle.grad(base + u) - g0; };
  Vector top = rng.gaussian(d).normalized();
  for (int it = 0; it < 40; ++it) {
    Vector next = apply(top);
    double nrm = next.norm();
    if (nrm < 1e-300) break;
    top = next / nrm;
  }
  double lam_top = apply(top).dot(top);
  Vector bottom = rng.gaussian(d).normalized();
  for (int it = 0; it < 60; ++it) {
    Vector next = (lam_top + 1) * bottom - apply(bottom);
    double nrm = next.norm();
    if (nrm < 1e-300) break;
    bottom = next / nrm;
  }
  return {top, bottom};
}

}  // namespace detail

inline ValidationReport validate_oracle(const FunctionOracle& oracle, int samples,
                                        double radius, uint64_t seed) {
  if (samples <= 0) throw ValidationError("samples must be positive");
  if (radius <= 0) throw ValidationError("radius must be positive");
  ValidationReport report;
  report.samples = samples;
  const int d = oracle.dim();
  SplitRng rng(seed, 0);

  std::vector<std::pair<Vector, Vector>> pairs;
  pairs.reserve(samples + 4);
  for (int i = 0; i < samples; ++i) {
    SplitRng trial(seed, i + 1);
    pairs.emplace_back(trial.uniform_ball(d, radius), trial.uniform_ball(d, radius));
  }
  if (oracle.has_grad()) {
    auto [top, bottom] = detail::extreme_grad_directions(oracle, rng);
    Vector c = rng.uniform_ball(d, radius);
    pairs.emplace_back(c, c + radius * top);
    pairs.emplace_back(c, c + radius * bottom);
  }

  auto note_worst = [&](double violation, const Vector& a, const Vector& b,
                        double& slot) {
    if (violation > slot) {
      slot = violation;
      report.worst_a = a;
      report.worst_b = b;
    }
  };

  for (size_t idx = 0; idx < pairs.size(); ++idx) {
    const auto& [a, b] = pairs[idx];
    const Vector diff = a - b;
    const double d2 = diff.squaredNorm();
    if (d2 < 1e-28) continue;

    if (oracle.has_prox()) {
      SplitRng aux(seed, 1000003 + idx);
      const double step = aux.log_uniform(0.05, 5.0);
      const Vector pa = oracle.prox(step, a);
      const Vector pb = oracle.prox(step, b);
      const Vector dp = pa - pb;
      // firm nonexpansiveness: ||dp||^2 <= <dp, diff>
      note_worst((dp.squaredNorm() - dp.dot(diff)) / d2, a, b,
                 report.firm_nonexpansive_violation);
      // prox optimality against perturbed candidates
      const double fa = oracle.value(pa);
      if (std::isfinite(fa)) {
        Vector z = pa + 0.3 * radius * aux.uniform_ball(d, 1.0);
        const double lhs = fa + (a - pa).squaredNorm() / (2 * step);
        const double rhs = oracle.value(z) + (a - z).squaredNorm() / (2 * step);
        if (std::isfinite(rhs)) {
          const double scale = std::max({1.0, std::abs(lhs), std::abs(rhs)});
          note_worst((lhs - rhs) / scale, a, b, report.prox_optimality_violation);
        }
      }
    }

    if (oracle.has_grad()) {
      report.grad_checked = true;
      const Vector dg = oracle.grad(a) - oracle.grad(b);
      const double ip = dg.dot(diff);
      report.attained_mu = std::min(report.attained_mu, ip / d2);
      const double ratio = dg.norm() / std::sqrt(d2);
      report.attained_lip = std::max(report.attained_lip, ratio);
      const double mu = oracle.mu();
      note_worst((mu * d2 - ip) / (std::max(mu, 1.0) * d2), a, b,
                 report.monotonicity_violation);
      if (std::isfinite(oracle.lip()))
        note_worst((ratio - oracle.lip()) / std::max(oracle.lip(), 1.0), a, b,
                   report.lipschitz_violation);
    }
  }

  const double worst =
      std::max({report.firm_nonexpansive_violation, report.prox_optimality_violation,
                report.monotonicity_violation, report.lipschitz_violation});
  report.pass = worst <= 1e-8;
  return report;
}

struct GraphSample {
  Vector point;
  Vector subgrad;
};

/// Inverts the resolvent identity prox = (Id + step*subdiff)^{-1}: the pair
/// (u, (probe-u)/step) lies on the graph of the subdifferential.
inline GraphSample subgradient_graph_sample(const FunctionOracle& oracle,
                                            const Vector& probe, double step) {
  if (step <= 0) throw ValidationError("graph sample step must be positive");
  if (!oracle.has_prox()) throw CapabilityError("graph sampling needs a prox oracle");
  Vector u = oracle.prox(step, probe);
  return {u, (probe - u) / step};
}

}  // namespace pdsaddle
