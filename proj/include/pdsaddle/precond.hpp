#pragma once

#include <string>
#include <utility>

#include "pdsaddle/core.hpp"

namespace pdsaddle {

enum class PrecondKind { kPhiTauSigma, kPhiEta, kPhiPlusPsi, kIdentity };

/// Psi = diag(gamma_x I_n, gamma_y I_m), the nonnegative diagonal shifts of
/// the partial-contractivity machinery.
struct PsiShift {
  double gamma_x = 0;
  double gamma_y = 0;

  PsiShift() = default;
  PsiShift(double gx, double gy) : gamma_x(gx), gamma_y(gy) {
    if (gx < 0 || gy < 0) throw ValidationError("psi shifts must be nonnegative");
  }
};

/// Symmetric positive-definite weighting matrix over the stacked (x, y)
/// space, with cached eigendecomposition for weighted norms, matrix square
/// roots and bounds.
class Preconditioner {
 public:
  const Matrix& matrix() const { return matrix_; }
  int n() const { return n_; }
  int m() const { return m_; }
  int dim() const { return n_ + m_; }
  double tau() const { return tau_; }
  double sigma() const { return sigma_; }
  double eta() const { return eta_; }
  double norm_A() const { return norm_A_; }
  PrecondKind kind() const { return kind_; }
  double lambda_min() const { return evals_(0); }
  double lambda_max() const { return evals_(evals_.size() - 1); }

  double inner(const Vector& u, const Vector& w) const {
    check(u);
    check(w);
    return w.dot(matrix_ * u);
  }

  double norm(const Vector& w) const {
    check(w);
    double q = w.dot(matrix_ * w);
    return q > 0 ? std::sqrt(q) : 0.0;
  }

  Matrix sqrt_matrix() const {
    return evecs_ * evals_.cwiseSqrt().asDiagonal() * evecs_.transpose();
  }
  Matrix inv_sqrt_matrix() const {
    return evecs_ * evals_.cwiseSqrt().cwiseInverse().asDiagonal() * evecs_.transpose();
  }
  Vector solve(const Vector& rhs) const {
    return evecs_ * (evecs_.transpose() * rhs).cwiseQuotient(evals_);
  }

  static Preconditioner identity(int n, int m) {
    Preconditioner p;
    p.kind_ = PrecondKind::kIdentity;
    p.n_ = n;
    p.m_ = m;
    p.matrix_ = Matrix::Identity(n + m, n + m);
    p.evals_ = Vector::Ones(n + m);
    p.evecs_ = Matrix::Identity(n + m, n + m);
    return p;
  }

  friend Preconditioner make_phi(double, double, const Matrix&);
  friend Preconditioner make_phi_eta(double, const Matrix&);
  friend Preconditioner shift_preconditioner(const Preconditioner&, const PsiShift&);

 private:
  void finalize() {
    const double scale = 1 + matrix_.cwiseAbs().maxCoeff();
    if ((matrix_ - matrix_.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
      throw ValidationError("preconditioner must be symmetric");
    matrix_ = 0.5 * (matrix_ + matrix_.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> es(matrix_);
    evals_ = es.eigenvalues();
    evecs_ = es.eigenvectors();
    if (evals_(0) <= 0)
      throw ValidationError("preconditioner must be positive definite");
  }

  void check(const Vector& w) const {
    if (w.size() != dim()) throw ValidationError("vector does not match norm dimension");
  }

  Matrix matrix_;
  Vector evals_;
  Matrix evecs_;
  int n_ = 0, m_ = 0;
  double tau_ = 0, sigma_ = 0, eta_ = 0, norm_A_ = 0;
  PrecondKind kind_ = PrecondKind::kIdentity;
};

/// zeta_{tau,sigma} = max{1/tau, 1/sigma} + ||A||, the scalar bound on
/// lambda_max(Phi_{tau,sigma}).
inline double zeta(double tau, double sigma, double norm_A) {
  if (tau <= 0 || sigma <= 0) throw ValidationError("step sizes must be positive");
  if (norm_A < 0) throw ValidationError("norm_A must be nonnegative");
  return std::max(1.0 / tau, 1.0 / sigma) + norm_A;
}

/// Phi_{tau,sigma} = [1/tau I, -A'; -A, 1/sigma I]; positive definite
/// exactly when tau*sigma*||A||^2 < 1.
inline Preconditioner make_phi(double tau, double sigma, const Matrix& A) {
  if (tau <= 0 || sigma <= 0) throw ValidationError("step sizes must be positive");
  const int m = static_cast<int>(A.rows());
  const int n = static_cast<int>(A.cols());
  const double norm_A = A.size() ? A.operatorNorm() : 0.0;
  const double product = tau * sigma * norm_A * norm_A;
  if (product >= 1.0)
    throw StepSizeError("Phi_{tau,sigma} requires tau*sigma*||A||^2 < 1", product);
  Preconditioner p;
  p.kind_ = PrecondKind::kPhiTauSigma;
  p.n_ = n;
  p.m_ = m;
  p.tau_ = tau;
  p.sigma_ = sigma;
  p.norm_A_ = norm_A;
  p.matrix_ = Matrix::Zero(n + m, n + m);
  p.matrix_.topLeftCorner(n, n) = (1.0 / tau) * Matrix::Identity(n, n);
  p.matrix_.bottomRightCorner(m, m) = (1.0 / sigma) * Matrix::Identity(m, m);
  p.matrix_.topRightCorner(n, m) = -A.transpose();
  p.matrix_.bottomLeftCorner(m, n) = -A;
  p.finalize();
  return p;
}

/// Phi_eta = [I, -eta A'; -eta A, I]; positive definite for eta < 1/||A||
/// (eta = 0 gives the identity).
inline Preconditioner make_phi_eta(double eta, const Matrix& A) {
  if (eta < 0) throw ValidationError("eta must be nonnegative");
  const int m = static_cast<int>(A.rows());
  const int n = static_cast<int>(A.cols());
  const double norm_A = A.size() ? A.operatorNorm() : 0.0;
  if (eta * norm_A >= 1.0)
    throw StepSizeError("Phi_eta requires eta < 1/||A||", eta * norm_A);
  Preconditioner p;
  p.kind_ = PrecondKind::kPhiEta;
  p.n_ = n;
  p.m_ = m;
  p.eta_ = eta;
  p.norm_A_ = norm_A;
  p.matrix_ = Matrix::Identity(n + m, n + m);
  p.matrix_.topRightCorner(n, m) = -eta * A.transpose();
  p.matrix_.bottomLeftCorner(m, n) = -eta * A;
  p.finalize();
  return p;
}

/// Phi + diag(gamma_x I_n, gamma_y I_m), used as the contraction norm of the
/// shifted theorems.
inline Preconditioner shift_preconditioner(const Preconditioner& base,
                                           const PsiShift& psi) {
  Preconditioner p = base;
  p.kind_ = PrecondKind::kPhiPlusPsi;
  p.matrix_.topLeftCorner(p.n_, p.n_) += psi.gamma_x * Matrix::Identity(p.n_, p.n_);
  p.matrix_.bottomRightCorner(p.m_, p.m_) += psi.gamma_y * Matrix::Identity(p.m_, p.m_);
  p.finalize();
  return p;
}

inline double weighted_norm(const Preconditioner& P, const Vector& w) {
  return P.norm(w);
}

inline double weighted_inner(const Preconditioner& P, const Vector& u, const Vector& w) {
  return P.inner(u, w);
}

/// ||w||_{P + Psi} without materializing the shifted matrix.
inline double weighted_norm(const Preconditioner& P, const PsiShift& psi,
                            const Vector& w) {
  double q = w.dot(P.matrix() * w);
  q += psi.gamma_x * w.head(P.n()).squaredNorm();
  q += psi.gamma_y * w.tail(P.m()).squaredNorm();
  return q > 0 ? std::sqrt(q) : 0.0;
}

struct BoundReport {
  double lambda_max = 0;
  double zeta = 0;
  bool pass = false;
};

/// Checks lambda_max(Phi_{tau,sigma}) <= zeta_{tau,sigma}.
inline BoundReport check_phi_bounds(const Preconditioner& P) {
  if (P.kind() != PrecondKind::kPhiTauSigma)
    throw ValidationError("bound report applies to Phi_{tau,sigma} only");
  BoundReport r;
  r.lambda_max = P.lambda_max();
  r.zeta = zeta(P.tau(), P.sigma(), P.norm_A());
  r.pass = r.lambda_max <= r.zeta + 1e-12;
  return r;
}

/// Largest gamma with lhs >= gamma * rhs (rhs SPD): the smallest
/// generalized eigenvalue of the pencil (lhs, rhs).
inline double smallest_pencil_eigenvalue(const Matrix& lhs, const Matrix& rhs) {
  if (lhs.rows() != rhs.rows() || lhs.cols() != rhs.cols() || lhs.rows() != lhs.cols())
    throw ValidationError("pencil matrices must be square and same size");
  Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> solver(
      0.5 * (lhs + lhs.transpose()), 0.5 * (rhs + rhs.transpose()));
  if (solver.info() != Eigen::Success)
    throw ValidationError("generalized eigensolver failed (rhs not SPD?)");
  return solver.eigenvalues()(0);
}

/// Largest gamma in [0,1] with Psi_b + Psi_f >= gamma (Phi + Psi_b).
inline double best_gamma(const Preconditioner& phi, const PsiShift& psi_b,
                         const PsiShift& psi_f) {
  const int n = phi.n(), m = phi.m();
  Matrix lhs = Matrix::Zero(n + m, n + m);
  lhs.topLeftCorner(n, n) =
      (psi_b.gamma_x + psi_f.gamma_x) * Matrix::Identity(n, n);
  lhs.bottomRightCorner(m, m) =
      (psi_b.gamma_y + psi_f.gamma_y) * Matrix::Identity(m, m);
  Matrix rhs = phi.matrix();
  rhs.topLeftCorner(n, n) += psi_b.gamma_x * Matrix::Identity(n, n);
  rhs.bottomRightCorner(m, m) += psi_b.gamma_y * Matrix::Identity(m, m);
  double gamma = smallest_pencil_eigenvalue(lhs, rhs);
  return std::clamp(gamma, 0.0, 1.0);
}

}  // namespace pdsaddle
