#pragma once

#include <string>
#include <utility>
#include <vector>

#include "pdsaddle/core.hpp"
#include "pdsaddle/oracle.hpp"

namespace pdsaddle {

/// (f, g, A) instance of the bilinear saddle-point problem
///   min_x max_y  f(x) + y'Ax - g(y)
/// with cached spectral quantities of the coupling matrix.
struct SaddleProblem {
  OraclePtr f;
  OraclePtr g;
  Matrix A;  // m x n
  int n = 0;
  int m = 0;
  double norm_A = 0;   // largest singular value
  double mu_AtA = 0;   // lambda_min(A'A)
  double mu_AAt = 0;   // lambda_min(AA')
  std::vector<std::string> notes;

  static SaddleProblem make(OraclePtr f, OraclePtr g, Matrix A) {
    if (!f || !g) throw ValidationError("problem needs both oracles");
    SaddleProblem p;
    p.n = f->dim();
    p.m = g->dim();
    if (A.rows() != p.m || A.cols() != p.n)
      throw ValidationError("coupling matrix must be m x n (g.dim x f.dim)");
    p.f = std::move(f);
    p.g = std::move(g);
    p.A = std::move(A);
    Eigen::BDCSVD<Matrix> svd(p.A);
    const Vector& s = svd.singularValues();
    const int k = static_cast<int>(s.size());
    p.norm_A = k > 0 ? s(0) : 0.0;
    const double smin = k > 0 ? s(k - 1) : 0.0;
    p.mu_AtA = (p.n <= p.m) ? smin * smin : 0.0;
    p.mu_AAt = (p.m <= p.n) ? smin * smin : 0.0;
    return p;
  }
};

enum class Condition { C1, C2, C3 };

inline const char* to_string(Condition c) {
  switch (c) {
    case Condition::C1: return "C1";
    case Condition::C2: return "C2";
    case Condition::C3: return "C3";
  }
  return "?";
}

/// Computed regularity flags and the constants they depend on. mu_A is
/// lambda_min(A'A) with singular values below rank_tol*||A|| treated as 0.
struct ConditionProfile {
  double mu_f = 0, mu_g = 0;
  double L_f = kInf, L_g = kInf;
  double mu_A = 0;
  double norm_A = 0;
  bool c1 = false, c2 = false, c3 = false;
  int n = 0, m = 0;
  std::vector<std::string> warnings;

  bool has(Condition c) const {
    switch (c) {
      case Condition::C1: return c1;
      case Condition::C2: return c2;
      case Condition::C3: return c3;
    }
    return false;
  }
};

inline ConditionProfile build_condition_profile(const SaddleProblem& problem,
                                                double rank_tol = 1e-10) {
  if (rank_tol <= 0) throw ValidationError("rank_tol must be positive");
  ConditionProfile p;
  p.mu_f = problem.f->mu();
  p.mu_g = problem.g->mu();
  p.L_f = problem.f->lip();
  p.L_g = problem.g->lip();
  p.norm_A = problem.norm_A;
  p.n = problem.n;
  p.m = problem.m;
  const double floor2 = rank_tol * problem.norm_A * (rank_tol * problem.norm_A);
  p.mu_A = problem.mu_AtA > floor2 ? problem.mu_AtA : 0.0;
  p.c1 = p.mu_f > 0 && p.mu_g > 0;
  p.c2 = p.mu_g > 0 && std::isfinite(p.L_g) && p.mu_A > 0;
  p.c3 = std::isfinite(p.L_f) && std::isfinite(p.L_g) && p.n == p.m && p.mu_A > 0;
  p.warnings = problem.notes;
  return p;
}

/// Certified saddle point; residual is the fixed-point residual in the
/// Phi-norm used to certify it.
struct SaddleSolution {
  Vector x;
  Vector y;
  double residual = kInf;
};

/// Forward-difference operator between adjacent pixels of a rows x cols
/// grid (row-major), horizontal differences stacked before vertical ones.
/// Neumann boundary: zero boundary differences are dropped, so the operator
/// has rows*(cols-1) + (rows-1)*cols rows.
inline Matrix grid_difference_operator(int rows, int cols) {
  if (rows <= 0 || cols <= 0) throw ValidationError("grid dims must be positive");
  const int n = rows * cols;
  const int m = rows * (cols - 1) + (rows - 1) * cols;
  Matrix d = Matrix::Zero(std::max(m, 0), n);
  int r = 0;
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j + 1 < cols; ++j, ++r) {
      d(r, i * cols + j) = -1;
      d(r, i * cols + j + 1) = 1;
    }
  for (int i = 0; i + 1 < rows; ++i)
    for (int j = 0; j < cols; ++j, ++r) {
      d(r, i * cols + j) = -1;
      d(r, (i + 1) * cols + j) = 1;
    }
  return d;
}

/// Total-variation Huber-ROF model in saddle form:
///   f = lambda/2 ||x - noisy||^2,  g = alpha/2 ||y||^2 + indicator of the
/// unit-inf dual ball, coupling A = -D with D the grid difference operator
/// (the model's -y'Dx recast in the +y'Ax convention).
inline SaddleProblem make_huber_rof(const Vector& noisy_image, double lambda,
                                    double alpha, int rows, int cols) {
  if (lambda <= 0 || alpha <= 0) throw ValidationError("lambda and alpha must be positive");
  if (noisy_image.size() != static_cast<long>(rows) * cols)
    throw ValidationError("image size does not match grid");
  Matrix d = grid_difference_operator(rows, cols);
  if (d.rows() == 0)
    throw ValidationError("grid has no adjacent pixels (difference operator is empty)");
  const int m = static_cast<int>(d.rows());
  auto f = std::make_shared<QuadraticOracle>(lambda, noisy_image);
  auto g = std::make_shared<ProjectedQuadraticOracle>(
      m, alpha, Vector::Zero(m),
      Region::box(Vector::Constant(m, -1.0), Vector::Constant(m, 1.0)));
  return SaddleProblem::make(std::move(f), std::move(g), -d);
}

/// min_{A'y >= b} g(y) in saddle form: f(x) = -x'b + indicator(x >= 0), so
/// prox_{tf}(v) = max(0, v + t b) componentwise.
inline SaddleProblem make_affine_constrained(OraclePtr g, const Matrix& A,
                                             const Vector& b) {
  if (!g) throw ValidationError("g oracle required");
  const int m = g->dim();
  const int n = static_cast<int>(b.size());
  if (A.rows() != m || A.cols() != n)
    throw ValidationError("A must be g.dim x b.dim for the constraint A'y >= b");
  auto f = std::make_shared<ProjectedQuadraticOracle>(n, 0.0, -b, Region::nonneg());
  return SaddleProblem::make(std::move(f), std::move(g), A);
}

/// Mean squared projected Bellman error for linear value-function
/// approximation. features holds phi(s_0..s_T) as rows (T+1 x n), rewards
/// r_0..r_{T-1}. Builds C = sum phi_t phi_t', b = sum r_t phi_t,
/// A_pe = C - gamma sum phi_t phi_{t+1}', and returns f = 0,
/// g = 1/2 ||y||_C^2 + y'b with stored coupling -A_pe (sign convention).
inline SaddleProblem make_policy_eval(const Matrix& features, const Vector& rewards,
                                      double gamma) {
  const long T = rewards.size();
  if (T < 1) throw ValidationError("need at least one transition");
  if (features.rows() != T + 1)
    throw ValidationError("features must have T+1 rows");
  if (!(gamma >= 0 && gamma < 1)) throw ValidationError("gamma must lie in [0,1)");
  const int n = static_cast<int>(features.cols());
  Matrix c = Matrix::Zero(n, n);
  Matrix cross = Matrix::Zero(n, n);
  Vector b = Vector::Zero(n);
  for (long t = 0; t < T; ++t) {
    const Vector phi = features.row(t).transpose();
    const Vector phi_next = features.row(t + 1).transpose();
    c += phi * phi.transpose();
    cross += phi * phi_next.transpose();
    b += rewards(t) * phi;
  }
  Matrix a_pe = c - gamma * cross;
  auto f = std::make_shared<ZeroOracle>(n);
  auto g = std::make_shared<QuadraticPlusLinearOracle>(0.5 * (c + c.transpose()), b);
  SaddleProblem problem = SaddleProblem::make(std::move(f), std::move(g), -a_pe);
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (c + c.transpose()));
  if (es.eigenvalues()(0) <= 1e-10 * std::max(1.0, es.eigenvalues()(n - 1)))
    problem.notes.push_back("feature covariance C is singular: g is not strongly convex");
  return problem;
}

struct RandomProblemSpec {
  double mu_f = 0, mu_g = 0;
  double L_f = 0, L_g = 0;  // 0 with mu > 0 means "stiff" (L = mu)
  double sing_min = 0, sing_max = 0;
};

namespace detail {

inline OraclePtr random_quadratic_oracle(int dim, double mu, double L, SplitRng& rng) {
  if (mu == 0 && L == 0) {
    Vector slope = rng.gaussian(dim);
    return std::make_shared<LinearOracle>(slope);
  }
  Vector evals(dim);
  evals(0) = mu;
  if (dim > 1) evals(dim - 1) = L;
  for (int i = 1; i + 1 < dim; ++i) evals(i) = rng.uniform(mu, L);
  Vector center = rng.gaussian(dim);
  if (dim == 1) return std::make_shared<QuadraticOracle>(mu, center);
  return std::make_shared<QuadraticOracle>(random_symmetric_with_spectrum(evals, rng),
                                           center);
}

inline Matrix random_matrix_with_singulars(int m, int n, double smin, double smax,
                                           SplitRng& rng) {
  const int k = std::min(m, n);
  Vector s(k);
  s(0) = smax;
  if (k > 1) s(k - 1) = smin;
  for (int i = 1; i + 1 < k; ++i) s(i) = rng.uniform(smin, smax);
  Matrix u = random_orthogonal(m, rng);
  Matrix v = random_orthogonal(n, rng);
  Matrix sigma = Matrix::Zero(m, n);
  for (int i = 0; i < k; ++i) sigma(i, i) = s(i);
  return u * sigma * v.transpose();
}

}  // namespace detail

/// Synthetic instance with quadratic (or affine) f, g whose declared
/// constants are attained exactly, and A built from random orthogonal
/// factors and prescribed singular values.
inline SaddleProblem make_random(Condition condition, int n, int m,
                                 RandomProblemSpec spec, uint64_t seed) {
  if (n <= 0 || m <= 0) throw ValidationError("dimensions must be positive");
  auto lift = [](double mu, double L) {
    if (L > 0 && L < mu) throw ValidationError("need mu <= L");
    return std::max(mu, L);  // L = 0 with mu > 0 defaults to L = mu
  };
  spec.L_f = lift(spec.mu_f, spec.L_f);
  spec.L_g = lift(spec.mu_g, spec.L_g);
  if (spec.sing_min < 0 || spec.sing_max < spec.sing_min)
    throw ValidationError("need 0 <= sing_min <= sing_max");
  switch (condition) {
    case Condition::C1:
      if (!(spec.mu_f > 0 && spec.mu_g > 0))
        throw ValidationError("C1 requires mu_f > 0 and mu_g > 0");
      break;
    case Condition::C2:
      if (!(spec.mu_g > 0)) throw ValidationError("C2 requires mu_g > 0");
      if (!std::isfinite(spec.L_g)) throw ValidationError("C2 requires finite L_g");
      if (!(spec.sing_min > 0)) throw ValidationError("C2 requires sing_min > 0");
      if (m < n)
        throw ValidationError("C2 requires m >= n so that A'A can be full rank");
      break;
    case Condition::C3:
      if (n != m) throw ValidationError("C3 requires n = m");
      if (!(spec.sing_min > 0)) throw ValidationError("C3 requires sing_min > 0");
      if (!std::isfinite(spec.L_f) || !std::isfinite(spec.L_g))
        throw ValidationError("C3 requires finite L_f and L_g");
      break;
  }
  SplitRng rng(seed, 17);
  OraclePtr f = detail::random_quadratic_oracle(n, spec.mu_f, spec.L_f, rng);
  OraclePtr g = detail::random_quadratic_oracle(m, spec.mu_g, spec.L_g, rng);
  Matrix a = spec.sing_max == 0
                 ? Matrix::Zero(m, n)
                 : detail::random_matrix_with_singulars(m, n, spec.sing_min,
                                                        spec.sing_max, rng);
  SaddleProblem problem = SaddleProblem::make(std::move(f), std::move(g), std::move(a));
  ConditionProfile profile = build_condition_profile(problem);
  if (!profile.has(condition))
    throw ValidationError("generator failed to realize the requested condition");
  return problem;
}

/// The three uniqueness counterexamples: each violates one subcondition and
/// admits a continuum of saddle points.
inline SaddleProblem make_counterexample(int which) {
  switch (which) {
    case 1: {  // f = g = 0, A = (0, 1)'
      Matrix a(2, 1);
      a << 0, 1;
      return SaddleProblem::make(std::make_shared<ZeroOracle>(1),
                                 std::make_shared<ZeroOracle>(2), a);
    }
    case 2: {  // f = 0, g = indicator([0,1]) + y^2, A = 1
      Matrix a(1, 1);
      a << 1;
      auto g = std::make_shared<ProjectedQuadraticOracle>(
          1, 2.0, Vector::Zero(1),
          Region::box(Vector::Zero(1), Vector::Ones(1)));
      return SaddleProblem::make(std::make_shared<ZeroOracle>(1), std::move(g), a);
    }
    case 3: {  // f = 0, g = y^2, A = 0
      auto g = std::make_shared<QuadraticOracle>(2.0, Vector::Zero(1));
      return SaddleProblem::make(std::make_shared<ZeroOracle>(1), std::move(g),
                                 Matrix::Zero(1, 1));
    }
    default:
      throw ValidationError("counterexample index must be 1, 2 or 3");
  }
}

}  // namespace pdsaddle
