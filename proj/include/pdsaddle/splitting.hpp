#pragma once

#include <utility>
#include <vector>

#include "pdsaddle/core.hpp"
#include "pdsaddle/precond.hpp"
#include "pdsaddle/problem.hpp"

namespace pdsaddle {

/// Stacked iterate omega = (x, y).
struct Iterate {
  Vector x;
  Vector y;

  static Iterate zero(const SaddleProblem& p) {
    return {Vector::Zero(p.n), Vector::Zero(p.m)};
  }
};

inline Vector stack(const Iterate& w) {
  Vector v(w.x.size() + w.y.size());
  v << w.x, w.y;
  return v;
}

inline Iterate unstack(const Vector& v, int n, int m) {
  if (v.size() != n + m) throw ValidationError("stacked vector has wrong size");
  return {v.head(n), v.tail(m)};
}

enum class Algorithm {
  kChambollePock,
  kSemiImplicit,
  kExplicitPdg,
  kPlainPdg,
  kPrecondGda,
};

inline const char* to_string(Algorithm a) {
  switch (a) {
    case Algorithm::kChambollePock: return "chambolle_pock";
    case Algorithm::kSemiImplicit: return "semi_implicit";
    case Algorithm::kExplicitPdg: return "explicit_pdg";
    case Algorithm::kPlainPdg: return "plain_pdg";
    case Algorithm::kPrecondGda: return "precond_gda";
  }
  return "?";
}

/// Algorithm selector; theta is carried for the first three methods but
/// only theta = 1 is rate-certified (theta = -1 and 0 reproduce the plain
/// and incremental PDG variants used in the divergence demonstrations).
struct AlgorithmId {
  Algorithm alg = Algorithm::kChambollePock;
  double theta = 1.0;

  AlgorithmId(Algorithm a = Algorithm::kChambollePock, double t = 1.0)
      : alg(a), theta(t) {}
};

struct StepSizes {
  double tau = 0;
  double sigma = 0;
  double alpha = 0;      // single step of the appendix gradient methods
  double eta = 0;        // Phi_eta geometry parameter
  double nu = 1.0;       // free balance parameter of the explicit-method bounds
  double epsilon = 1e-3; // slack in the (1+eps) step-size bounds
};

namespace detail {

inline void require_prox(const OraclePtr& o, const char* who) {
  if (!o->has_prox()) throw CapabilityError(std::string(who) + " needs a prox oracle");
}
inline void require_grad(const OraclePtr& o, const char* who) {
  if (!o->has_grad()) throw CapabilityError(std::string(who) + " needs a gradient oracle");
}
inline void require_steps(double tau, double sigma) {
  if (tau <= 0 || sigma <= 0) throw ValidationError("step sizes must be positive");
}

}  // namespace detail

inline Iterate cp_step(const SaddleProblem& p, const StepSizes& s, const Iterate& w,
                       double theta = 1.0) {
  detail::require_steps(s.tau, s.sigma);
  detail::require_prox(p.f, "chambolle_pock");
  detail::require_prox(p.g, "chambolle_pock");
  Vector xp = p.f->prox(s.tau, w.x - s.tau * (p.A.transpose() * w.y));
  Vector extrapolated = (1 + theta) * xp - theta * w.x;
  Vector yp = p.g->prox(s.sigma, w.y + s.sigma * (p.A * extrapolated));
  return {std::move(xp), std::move(yp)};
}

inline Iterate semi_implicit_step(const SaddleProblem& p, const StepSizes& s,
                                  const Iterate& w, double theta = 1.0) {
  detail::require_steps(s.tau, s.sigma);
  detail::require_prox(p.f, "semi_implicit");
  detail::require_grad(p.g, "semi_implicit");
  Vector xp = p.f->prox(s.tau, w.x - s.tau * (p.A.transpose() * w.y));
  Vector extrapolated = (1 + theta) * xp - theta * w.x;
  Vector yp = w.y - s.sigma * (p.g->grad(w.y) - p.A * extrapolated);
  return {std::move(xp), std::move(yp)};
}

inline Iterate explicit_pdg_step(const SaddleProblem& p, const StepSizes& s,
                                 const Iterate& w, double theta = 1.0) {
  detail::require_steps(s.tau, s.sigma);
  detail::require_grad(p.f, "explicit_pdg");
  detail::require_grad(p.g, "explicit_pdg");
  Vector xp = w.x - s.tau * (p.f->grad(w.x) + p.A.transpose() * w.y);
  Vector extrapolated = (1 + theta) * xp - theta * w.x;
  Vector yp = w.y - s.sigma * (p.g->grad(w.y) - p.A * extrapolated);
  return {std::move(xp), std::move(yp)};
}

/// Simultaneous primal-dual gradient update with a single step alpha.
inline Iterate plain_pdg_step(const SaddleProblem& p, const StepSizes& s,
                              const Iterate& w) {
  if (s.alpha <= 0) throw ValidationError("alpha must be positive");
  detail::require_grad(p.f, "plain_pdg");
  detail::require_grad(p.g, "plain_pdg");
  Vector xp = w.x - s.alpha * (p.f->grad(w.x) + p.A.transpose() * w.y);
  Vector yp = w.y - s.alpha * (p.g->grad(w.y) - p.A * w.x);
  return {std::move(xp), std::move(yp)};
}

/// omega - alpha * Phi_eta F(omega): gradient update preconditioned by
/// Phi_eta, contractive in the unweighted norm.
inline Iterate precond_gda_step(const SaddleProblem& p, const StepSizes& s,
                                const Iterate& w) {
  if (s.alpha <= 0) throw ValidationError("alpha must be positive");
  if (s.eta < 0) throw ValidationError("eta must be nonnegative");
  if (s.eta * p.norm_A >= 1.0)
    throw StepSizeError("precond_gda requires eta < 1/||A||", s.eta * p.norm_A);
  detail::require_grad(p.f, "precond_gda");
  detail::require_grad(p.g, "precond_gda");
  Vector a = p.f->grad(w.x) + p.A.transpose() * w.y;
  Vector b = p.g->grad(w.y) - p.A * w.x;
  Vector xp = w.x - s.alpha * (a - s.eta * (p.A.transpose() * b));
  Vector yp = w.y - s.alpha * (b - s.eta * (p.A * a));
  return {std::move(xp), std::move(yp)};
}

enum class SplitKind { kCp, kSemi, kExplicit };

inline const char* to_string(SplitKind k) {
  switch (k) {
    case SplitKind::kCp: return "cp";
    case SplitKind::kSemi: return "semi";
    case SplitKind::kExplicit: return "explicit";
  }
  return "?";
}

namespace detail {

inline void require_split_caps(const SaddleProblem& p, SplitKind split) {
  switch (split) {
    case SplitKind::kCp:
      require_prox(p.f, "cp split");
      require_prox(p.g, "cp split");
      break;
    case SplitKind::kSemi:
      require_prox(p.f, "semi split");
      require_grad(p.g, "semi split");
      break;
    case SplitKind::kExplicit:
      require_grad(p.f, "explicit split");
      require_grad(p.g, "explicit split");
      break;
  }
}

inline void require_phi_spd(const SaddleProblem& p, const StepSizes& s) {
  require_steps(s.tau, s.sigma);
  const double product = s.tau * s.sigma * p.norm_A * p.norm_A;
  if (product >= 1.0)
    throw StepSizeError("splitting requires tau*sigma*||A||^2 < 1", product);
}

/// Forward image r = Phi omega - F_f(omega) in the physical (unweighted)
/// coordinates; no matrix inverse involved.
inline Iterate forward_image(const SaddleProblem& p, SplitKind split,
                             const StepSizes& s, const Iterate& w) {
  Vector rx = w.x / s.tau - p.A.transpose() * w.y;
  Vector ry = w.y / s.sigma - p.A * w.x;
  if (split == SplitKind::kExplicit) rx -= p.f->grad(w.x);
  if (split != SplitKind::kCp) ry -= p.g->grad(w.y);
  return {std::move(rx), std::move(ry)};
}

/// Solves the block-triangular backward inclusion (Phi + F_b)(w+) = r:
/// the x-row first (a prox, or a scaling in the explicit split), then the
/// y-row, which only depends on x+.
inline Iterate backward_solve(const SaddleProblem& p, SplitKind split,
                              const StepSizes& s, const Iterate& r) {
  Vector xp;
  switch (split) {
    case SplitKind::kCp:
    case SplitKind::kSemi:
      xp = p.f->prox(s.tau, s.tau * r.x);
      break;
    case SplitKind::kExplicit:
      xp = s.tau * r.x;
      break;
  }
  Vector shifted = r.y + 2 * (p.A * xp);
  Vector yp = (split == SplitKind::kCp) ? p.g->prox(s.sigma, s.sigma * shifted)
                                        : Vector(s.sigma * shifted);
  return {std::move(xp), std::move(yp)};
}

}  // namespace detail

/// One step of the preconditioned forward-backward iteration
///   w+ = (Id + Phi^{-1} F_b)^{-1} (Id - Phi^{-1} F_f)(w)
/// solved directly through (Phi + F_b)(w+) = (Phi - F_f)(w). Must agree
/// with the specialized steps (theta = 1) to rounding error.
inline Iterate generic_fb_step(const SaddleProblem& p, SplitKind split,
                               const StepSizes& s, const Iterate& w) {
  detail::require_phi_spd(p, s);
  detail::require_split_caps(p, split);
  return detail::backward_solve(p, split, s, detail::forward_image(p, split, s, w));
}

/// Forward half F(w) = w - Phi^{-1} F_f(w) of the splitting.
inline Iterate forward_half(const SaddleProblem& p, SplitKind split, const Iterate& w,
                            const Preconditioner& phi) {
  detail::require_split_caps(p, split);
  Vector ff = Vector::Zero(p.n + p.m);
  if (split == SplitKind::kExplicit) ff.head(p.n) = p.f->grad(w.x);
  if (split != SplitKind::kCp) ff.tail(p.m) = p.g->grad(w.y);
  Vector out = stack(w) - phi.solve(ff);
  return unstack(out, p.n, p.m);
}

/// Backward half B(w) = (Id + Phi^{-1} F_b)^{-1}(w).
inline Iterate backward_half(const SaddleProblem& p, SplitKind split, const StepSizes& s,
                             const Iterate& w) {
  detail::require_phi_spd(p, s);
  detail::require_split_caps(p, split);
  Iterate r{w.x / s.tau - p.A.transpose() * w.y, w.y / s.sigma - p.A * w.x};
  return detail::backward_solve(p, split, s, r);
}

inline Iterate apply_step(const SaddleProblem& p, const AlgorithmId& id,
                          const StepSizes& s, const Iterate& w) {
  switch (id.alg) {
    case Algorithm::kChambollePock: return cp_step(p, s, w, id.theta);
    case Algorithm::kSemiImplicit: return semi_implicit_step(p, s, w, id.theta);
    case Algorithm::kExplicitPdg: return explicit_pdg_step(p, s, w, id.theta);
    case Algorithm::kPlainPdg: return plain_pdg_step(p, s, w);
    case Algorithm::kPrecondGda: return precond_gda_step(p, s, w);
  }
  throw ValidationError("unknown algorithm");
}

/// The norm in which the runner measures fixed-point residuals: the
/// algorithm's own Phi when it is positive definite, Euclidean otherwise.
inline Preconditioner residual_norm(const SaddleProblem& p, const AlgorithmId& id,
                                    const StepSizes& s) {
  switch (id.alg) {
    case Algorithm::kChambollePock:
    case Algorithm::kSemiImplicit:
    case Algorithm::kExplicitPdg:
      if (s.tau > 0 && s.sigma > 0 && s.tau * s.sigma * p.norm_A * p.norm_A < 1.0)
        return make_phi(s.tau, s.sigma, p.A);
      return Preconditioner::identity(p.n, p.m);
    case Algorithm::kPlainPdg:
      if (s.eta > 0 && s.eta * p.norm_A < 1.0) return make_phi_eta(s.eta, p.A);
      return Preconditioner::identity(p.n, p.m);
    case Algorithm::kPrecondGda:
      return Preconditioner::identity(p.n, p.m);
  }
  return Preconditioner::identity(p.n, p.m);
}

enum class StopReason { kResidualTol, kMaxIters };

struct Trajectory {
  std::vector<Iterate> iterates;
  std::vector<double> residuals;  // ||w^k - T(w^k)||_Phi, same length as iterates
  StopReason stop_reason = StopReason::kMaxIters;
};

/// Fixed-point iteration driver. Deterministic; throws DivergenceError on
/// non-finite iterates or unbounded residual growth.
inline Trajectory run(const SaddleProblem& p, const AlgorithmId& id, const StepSizes& s,
                      const Iterate& w0, long max_iters, double residual_tol) {
  if (max_iters < 0) throw ValidationError("max_iters must be nonnegative");
  if (residual_tol < 0) throw ValidationError("residual_tol must be nonnegative");
  if (w0.x.size() != p.n || w0.y.size() != p.m)
    throw ValidationError("w0 does not match problem dimensions");
  const Preconditioner norm = residual_norm(p, id, s);
  Trajectory traj;
  Iterate w = w0;
  double cap = kInf;
  for (long k = 0; k <= max_iters; ++k) {
    Iterate next = apply_step(p, id, s, w);
    if (!all_finite(next.x) || !all_finite(next.y))
      throw DivergenceError("non-finite iterate", k);
    const double res = norm.norm(stack(w) - stack(next));
    if (!std::isfinite(res)) throw DivergenceError("non-finite residual", k);
    traj.iterates.push_back(w);
    traj.residuals.push_back(res);
    if (k == 0) cap = 1e9 * (1 + res);
    if (res > cap) throw DivergenceError("residual growth exceeds divergence cap", k);
    if (res <= residual_tol) {
      traj.stop_reason = StopReason::kResidualTol;
      return traj;
    }
    w = std::move(next);
  }
  traj.stop_reason = StopReason::kMaxIters;
  return traj;
}

}  // namespace pdsaddle
