#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "pdsaddle/core.hpp"
#include "pdsaddle/precond.hpp"
#include "pdsaddle/problem.hpp"
#include "pdsaddle/splitting.hpp"

namespace pdsaddle {

/// Machine-checkable record of one theorem item's contraction claim:
/// algorithm, condition, step sizes, the norm in which contraction holds,
/// the certified rate and every constituent constant.
struct RateCertificate {
  Algorithm algorithm = Algorithm::kChambollePock;
  Condition condition = Condition::C1;
  StepSizes steps;
  double rho = 1.0;
  std::string norm;  // phi_tau_sigma | phi_plus_psi_b | phi_eta | euclidean
  PsiShift psi_b;    // shift of the contraction norm, when norm = phi_plus_psi_b
  std::map<std::string, double> constants;
  std::string theorem;
  std::vector<std::string> flags;
};

/// Materializes the certificate's contraction norm for a concrete problem.
inline Preconditioner certificate_norm(const RateCertificate& cert,
                                       const SaddleProblem& problem) {
  if (cert.norm == "phi_tau_sigma")
    return make_phi(cert.steps.tau, cert.steps.sigma, problem.A);
  if (cert.norm == "phi_plus_psi_b")
    return shift_preconditioner(make_phi(cert.steps.tau, cert.steps.sigma, problem.A),
                                cert.psi_b);
  if (cert.norm == "phi_eta") return make_phi_eta(cert.steps.eta, problem.A);
  if (cert.norm == "euclidean") return Preconditioner::identity(problem.n, problem.m);
  throw ValidationError("unknown certificate norm: " + cert.norm);
}

namespace detail {

inline double lambda_min_2x2(double a, double b, double c) {
  return 0.5 * (a + c) - std::hypot(0.5 * (a - c), b);
}

inline void check_le(double value, double bound, const char* name) {
  if (!(value <= bound * (1 + 1e-12) + 1e-300))
    throw StepSizeError(std::string(name) + " violated", value);
}

inline void check_lt(double value, double bound, const char* name) {
  if (!(value < bound)) throw StepSizeError(std::string(name) + " violated", value);
}

inline void require_condition(const ConditionProfile& p, Condition c) {
  if (!p.has(c))
    throw ConditionError(std::string("condition_not_satisfied: ") + to_string(c));
}

template <class F>
double golden_min(F&& f, double lo, double hi, int iters = 90) {
  constexpr double kInvPhi = 0.6180339887498949;
  double a = lo, b = hi;
  double c = b - kInvPhi * (b - a);
  double d = a + kInvPhi * (b - a);
  double fc = f(c), fd = f(d);
  for (int i = 0; i < iters; ++i) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kInvPhi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kInvPhi * (b - a);
      fd = f(d);
    }
  }
  return fc < fd ? c : d;
}

}  // namespace detail

/// kappa of the strongly-convex Chambolle-Pock analysis; positive whenever
/// mu_f, mu_g > 0 and tau*sigma*||A||^2 < 1.
inline double kappa(double mu_f, double mu_g, double tau, double sigma, double norm_A) {
  if (!(mu_f > 0 && mu_g > 0)) throw ConditionError("kappa needs mu_f, mu_g > 0");
  if (tau <= 0 || sigma <= 0) throw ValidationError("step sizes must be positive");
  const double product = tau * sigma * norm_A * norm_A;
  detail::check_lt(product, 1.0, "tau*sigma*||A||^2 < 1");
  const double s = mu_f * tau + mu_g * sigma;
  const double disc = (mu_f * tau - mu_g * sigma) * (mu_f * tau - mu_g * sigma) +
                      4 * norm_A * norm_A * mu_f * mu_g * tau * tau * sigma * sigma;
  return (s - std::sqrt(disc)) / (2 * (1 - product));
}

struct R2Result {
  double R2 = 0;
  double alpha_free = 0;
};

/// Inverse-Lipschitz constant of the full saddle operator under C2:
/// R2 = min over alpha of (1 + alpha ||A||) / lambda_min(M_alpha) with
/// M_alpha = [mu_f + alpha mu_A, -alpha L_g ||A|| / 2; ., mu_g].
inline R2Result constant_R2(const ConditionProfile& p) {
  detail::require_condition(p, Condition::C2);
  const double mu_f = p.mu_f, mu_g = p.mu_g, L_g = p.L_g;
  const double a = p.norm_A, mu_A = p.mu_A;
  const double alpha_max =
      (2 * mu_A * mu_g +
       2 * std::sqrt(mu_A * mu_A * mu_g * mu_g + L_g * L_g * a * a * mu_g * mu_f)) /
      (L_g * L_g * a * a);
  auto objective = [&](double alpha) {
    const double lmin =
        detail::lambda_min_2x2(mu_f + alpha * mu_A, -0.5 * alpha * L_g * a, mu_g);
    return lmin > 0 ? (1 + alpha * a) / lmin : kInf;
  };
  const double hi = 0.999 * alpha_max;
  const double lo = 1e-9 * alpha_max;
  // coarse log grid, then golden refinement around the best cell
  const int grid = 128;
  int best = 0;
  double best_val = kInf;
  std::vector<double> alphas(grid);
  for (int i = 0; i < grid; ++i) {
    alphas[i] = lo * std::pow(hi / lo, i / double(grid - 1));
    const double v = objective(alphas[i]);
    if (v < best_val) {
      best_val = v;
      best = i;
    }
  }
  const double a_lo = alphas[std::max(best - 1, 0)];
  const double a_hi = alphas[std::min(best + 1, grid - 1)];
  double alpha = detail::golden_min(
      [&](double t) { return objective(std::exp(t)); }, std::log(a_lo), std::log(a_hi));
  alpha = std::exp(alpha);
  if (objective(alpha) > best_val) alpha = alphas[best];
  return {objective(alpha), alpha};
}

enum class SmoothnessArg { kBoth, kFOnly };

struct R3Result {
  double R3 = 0;
  double eps_free = 0;
  double delta_free = 0;
};

/// Inverse-Lipschitz constant under C3 (R3, L = max{L_f, L_g}) or of the
/// semi-implicit backward operator (R3', L = L_f):
/// R3 = min over (eps, delta) of (1 + eps ||A||) / (eps (mu_A - ||A||/(2 delta)))
/// with delta > ||A||/(2 mu_A) and eps < 2/(L ||A|| delta).
inline R3Result constant_R3(const ConditionProfile& p, SmoothnessArg smoothness) {
  double L;
  if (smoothness == SmoothnessArg::kBoth) {
    detail::require_condition(p, Condition::C3);
    L = std::max(p.L_f, p.L_g);
  } else {
    if (!(p.mu_A > 0 && std::isfinite(p.L_f)))
      throw ConditionError("R3' needs mu_A > 0 and finite L_f");
    L = p.L_f;
  }
  const double a = p.norm_A, mu_A = p.mu_A;
  const double delta_lb = a / (2 * mu_A);
  const double eps_cap = 1e9 * std::max(1.0, 1.0 / std::max(a, 1e-12));
  auto eps_hi = [&](double delta) {
    if (L * a * delta <= 0) return eps_cap;
    return std::min(0.9999 * 2 / (L * a * delta), eps_cap);
  };
  auto objective = [&](double eps, double delta) {
    const double c = eps * (mu_A - a / (2 * delta));
    return c > 0 ? (1 + eps * a) / c : kInf;
  };
  // 64 x 64 log-spaced grid over (delta, eps)
  double best_val = kInf, best_eps = 0, best_delta = 0;
  for (int i = 0; i < 64; ++i) {
    const double u = 1e-6 * std::pow(1e14, i / 63.0);  // delta = delta_lb (1+u)
    const double delta = delta_lb * (1 + u);
    const double hi = eps_hi(delta);
    const double lo = hi * 1e-14;
    for (int j = 0; j < 64; ++j) {
      const double eps = lo * std::pow(hi / lo, j / 63.0);
      const double v = objective(eps, delta);
      if (v < best_val) {
        best_val = v;
        best_eps = eps;
        best_delta = delta;
      }
    }
  }
  // coordinatewise golden refinement in log space
  for (int round = 0; round < 3; ++round) {
    const double d = best_delta;
    const double e_hi = eps_hi(d);
    double e = detail::golden_min(
        [&](double t) { return objective(std::exp(t), d); },
        std::log(e_hi) - 30.0, std::log(e_hi));
    e = std::exp(e);
    if (objective(e, d) < best_val) {
      best_eps = e;
      best_val = objective(e, d);
    }
    // for fixed eps, delta ranges over (delta_lb, 2/(L a eps))
    double d_hi = (L * a * best_eps > 0)
                      ? 0.9999 * 2 / (L * a * best_eps)
                      : delta_lb * (1 + 1e14);
    if (d_hi > delta_lb) {
      const double d_lo = delta_lb * (1 + 1e-12);
      if (d_hi > d_lo) {
        double dd = detail::golden_min(
            [&](double t) { return objective(best_eps, std::exp(t)); },
            std::log(d_lo), std::log(d_hi));
        dd = std::exp(dd);
        if (objective(best_eps, dd) < best_val) {
          best_delta = dd;
          best_val = objective(best_eps, dd);
        }
      }
    }
  }
  if (!std::isfinite(best_val))
    throw ConditionError("R3 search found no feasible (eps, delta)");
  return {best_val, best_eps, best_delta};
}

/// gamma_x = mu_A / zeta_{tau,sigma} + 2 mu_f of the backward shift.
inline double gamma_x(const ConditionProfile& p, const StepSizes& s) {
  detail::check_lt(s.tau * s.sigma * p.norm_A * p.norm_A, 1.0, "tau*sigma*||A||^2 < 1");
  if (p.mu_f == 0 && p.mu_A == 0)
    throw ConditionError("gamma_x needs mu_f > 0 or mu_A > 0 (C1 or C2)");
  return p.mu_A / zeta(s.tau, s.sigma, p.norm_A) + 2 * p.mu_f;
}

/// Forward shift gamma_y of the semi-implicit method; the two-case formula
/// collapses to the squared gradient-descent rate when A = 0.
inline double gamma_y(const ConditionProfile& p, const StepSizes& s) {
  if (!(p.mu_g > 0)) throw ConditionError("gamma_y needs mu_g > 0");
  if (!std::isfinite(p.L_g)) throw CapabilityError("gamma_y needs smooth g");
  if (s.tau <= 0 || s.sigma <= 0) throw ValidationError("step sizes must be positive");
  const double bound = 2 / (2 * s.tau * p.norm_A * p.norm_A + p.L_g);
  detail::check_lt(s.sigma, bound, "sigma < 2/(2 tau ||A||^2 + L_g)");
  const double xi1 = 1 / s.sigma - s.tau * p.norm_A * p.norm_A;
  const double xi2 = 1 / s.sigma - s.tau * p.mu_A;
  const double L = p.L_g, mu = p.mu_g;
  double value;
  if (xi1 >= 0.5 * (L + mu))
    value = 2 * L * mu / (L + mu) + mu * mu * (2 * xi1 - L - mu) / ((L + mu) * xi2);
  else
    value = 2 * L * mu / (L + mu) - L * L * (L + mu - 2 * xi1) / ((L + mu) * xi1);
  return value;
}

struct BetaXY {
  double beta_x = 0;
  double beta_y = 0;
};

/// Forward shifts of the explicit method (diagonal Psi_f). beta_x > 0 iff
/// mu_f > 0 and tau is strictly below 2/(L_f + 2||A|| nu); zero otherwise.
inline BetaXY beta_xy(const ConditionProfile& p, const StepSizes& s, double nu) {
  if (nu <= 0) throw ValidationError("nu must be positive");
  if (!std::isfinite(p.L_f) || !std::isfinite(p.L_g))
    throw CapabilityError("beta_xy needs smooth f and g");
  if (s.tau <= 0 || s.sigma <= 0) throw ValidationError("step sizes must be positive");
  const double a = p.norm_A;
  detail::check_le(s.tau, 2 / (p.L_f + 2 * a * nu), "tau <= 2/(L_f + 2||A|| nu)");
  detail::check_le(s.sigma, 2 / (p.L_g + 2 * a / nu), "sigma <= 2/(L_g + 2||A||/nu)");
  auto one_block = [a](double mu, double L, double step, double scaled_nu) {
    if (L == 0) return 0.0;
    const double denom = 1 - step * a * scaled_nu;
    const double factor = step / denom;
    double beta;
    if (step <= 2 / (L + mu + 2 * a * scaled_nu))
      beta = 2 * mu - factor * mu * mu;
    else
      beta = 2 * L - factor * L * L;
    return std::max(beta, 0.0);
  };
  return {one_block(p.mu_f, p.L_f, s.tau, nu), one_block(p.mu_g, p.L_g, s.sigma, 1 / nu)};
}

struct PhiEtaConstants {
  double M_eta_lambda_min = 0;
  double C_M = 0;
  double mu_eta = 0;
  double L_eta = 0;
};

/// Constants of the Phi_eta geometry: the 2x2 coupling matrix M_eta, its
/// admissibility threshold C_M, and the strong-monotonicity / Lipschitz
/// moduli of the saddle operator in the Phi_eta-weighted space.
inline PhiEtaConstants phi_eta_constants(const ConditionProfile& p, double eta) {
  detail::require_condition(p, Condition::C2);
  if (!std::isfinite(p.L_f)) throw ConditionError("phi_eta constants need finite L_f");
  const double a = p.norm_A, mu_A = p.mu_A;
  const double lsum = p.L_f + p.L_g;
  PhiEtaConstants out;
  out.C_M = p.mu_g * mu_A / (mu_A * a * a + 0.25 * lsum * lsum * a * a);
  const double eta_cap = std::min(1.0 / a, out.C_M);
  if (!(eta > 0 && eta < eta_cap))
    throw StepSizeError("eta must lie in (0, min{1/||A||, C_M}) = (0, " +
                            std::to_string(eta_cap) + ")",
                        eta);
  out.M_eta_lambda_min = detail::lambda_min_2x2(
      eta * mu_A, -0.5 * eta * lsum * a, p.mu_g - eta * a * a);
  const double phi_max = 1 + eta * a;  // eigenvalues of Phi_eta are 1 +- eta s_i
  const double phi_min = 1 - eta * a;
  out.mu_eta = out.M_eta_lambda_min / phi_max;
  const double lmax = std::max(p.L_f, p.L_g);
  out.L_eta = std::sqrt(phi_max / phi_min) * std::sqrt(lmax * lmax + a * a);
  return out;
}

/// Chambolle-Pock contraction certificate (items (i)-(iii) by condition).
inline RateCertificate rate_cp(const ConditionProfile& p, const StepSizes& s,
                               Condition condition) {
  detail::require_condition(p, condition);
  if (!(s.epsilon > 0)) throw ValidationError("epsilon must be positive");
  if (s.tau <= 0 || s.sigma <= 0) throw ValidationError("step sizes must be positive");
  const double product = s.tau * s.sigma * p.norm_A * p.norm_A;
  detail::check_le(product * (1 + s.epsilon) * (1 + s.epsilon), 1.0,
                   "tau*sigma*||A||^2 (1+eps)^2 <= 1");
  RateCertificate cert;
  cert.algorithm = Algorithm::kChambollePock;
  cert.condition = condition;
  cert.steps = s;
  cert.norm = "phi_tau_sigma";
  const double z = zeta(s.tau, s.sigma, p.norm_A);
  cert.constants["zeta"] = z;
  cert.constants["eps_free"] = s.epsilon;
  switch (condition) {
    case Condition::C1: {
      const double k = kappa(p.mu_f, p.mu_g, s.tau, s.sigma, p.norm_A);
      const double contraction = std::min({p.mu_f * s.tau, p.mu_g * s.sigma, k});
      cert.rho = 1 / (1 + contraction);
      cert.constants["kappa"] = k;
      cert.theorem = "thm2(i)";
      break;
    }
    case Condition::C2: {
      const R2Result r2 = constant_R2(p);
      cert.rho = r2.R2 * z / std::sqrt(r2.R2 * z * r2.R2 * z + 1);
      cert.constants["R2"] = r2.R2;
      cert.constants["alpha_free"] = r2.alpha_free;
      cert.theorem = "thm2(ii)";
      break;
    }
    case Condition::C3: {
      const R3Result r3 = constant_R3(p, SmoothnessArg::kBoth);
      cert.rho = r3.R3 * z / std::sqrt(r3.R3 * z * r3.R3 * z + 1);
      cert.constants["R3"] = r3.R3;
      cert.constants["eps_free"] = r3.eps_free;
      cert.constants["delta_free"] = r3.delta_free;
      cert.theorem = "thm2(iii)";
      break;
    }
  }
  return cert;
}

/// Semi-implicit certificate. Item (i) certifies the conservative maximum of
/// the two candidate rates (the theorem statement squares the shifts, its
/// proof does not); both candidates are recorded.
inline RateCertificate rate_semi_implicit(const ConditionProfile& p, const StepSizes& s,
                                          Condition condition) {
  detail::require_condition(p, condition);
  if (!std::isfinite(p.L_g)) throw CapabilityError("semi_implicit needs smooth g");
  if (s.tau <= 0 || s.sigma <= 0) throw ValidationError("step sizes must be positive");
  RateCertificate cert;
  cert.algorithm = Algorithm::kSemiImplicit;
  cert.condition = condition;
  cert.steps = s;
  const double a = p.norm_A;
  const double condat = s.tau * s.sigma * a * a + 0.5 * p.L_g * s.sigma;
  if (condition == Condition::C3) {
    if (!(s.epsilon > 0)) throw ValidationError("epsilon must be positive");
    detail::check_le(condat, 1.0, "tau*sigma*||A||^2 + (L_g/2) sigma <= 1");
    detail::check_le(s.tau * s.sigma * a * a * (1 + s.epsilon) * (1 + s.epsilon), 1.0,
                     "tau*sigma*||A||^2 (1+eps)^2 < 1");
    const R3Result r3 = constant_R3(p, SmoothnessArg::kFOnly);
    const double z = zeta(s.tau, s.sigma, a);
    cert.rho = r3.R3 * z / std::sqrt(r3.R3 * z * r3.R3 * z + 1);
    cert.norm = "phi_tau_sigma";
    cert.theorem = "thm3(ii)";
    cert.constants["R3_prime"] = r3.R3;
    cert.constants["eps_free"] = r3.eps_free;
    cert.constants["delta_free"] = r3.delta_free;
    cert.constants["zeta"] = z;
    return cert;
  }
  detail::check_lt(condat, 1.0, "tau*sigma*||A||^2 + (L_g/2) sigma < 1");
  const double gx = gamma_x(p, s);
  const double gy = gamma_y(p, s);
  const double z = zeta(s.tau, s.sigma, a);
  const double gamma_proof = std::min(gx, gy) / (z + gx);
  const double gamma_stmt = std::min(gx * gx, gy * gy) / (z + gx);
  const double gamma_cert = std::min(gamma_proof, gamma_stmt);
  cert.rho = std::sqrt(1 - gamma_cert);
  cert.norm = "phi_plus_psi_b";
  cert.psi_b = PsiShift(gx, 0);
  cert.theorem = "thm3(i)";
  cert.constants["gamma_x"] = gx;
  cert.constants["gamma_y"] = gy;
  cert.constants["zeta"] = z;
  cert.constants["gamma_cert"] = gamma_cert;
  cert.constants["rho_proof"] = std::sqrt(1 - gamma_proof);
  if (gamma_stmt <= 1) cert.constants["rho_stmt"] = std::sqrt(1 - gamma_stmt);
  cert.flags.push_back("thm3(i) statement/proof disagree (squared vs plain shifts); "
                       "certified the conservative maximum");
  return cert;
}

/// Explicit preconditioned PDG certificate. The item (i) rate is certified
/// as sqrt(1 - min{...}): the square root is required by the partial
/// contractivity chain (A2 bounds squared norms) and is what reduces to the
/// classical gradient-descent factor at A = 0.
inline RateCertificate rate_explicit_pdg(const ConditionProfile& p, const StepSizes& s,
                                         Condition condition) {
  detail::require_condition(p, condition);
  if (!std::isfinite(p.L_f) || !std::isfinite(p.L_g))
    throw CapabilityError("explicit_pdg needs smooth f and g");
  if (s.tau <= 0 || s.sigma <= 0) throw ValidationError("step sizes must be positive");
  if (s.nu <= 0) throw ValidationError("nu must be positive");
  const double a = p.norm_A;
  const double tau_bound = 2 / (p.L_f + 2 * a * s.nu);
  const double sigma_bound = 2 / (p.L_g + 2 * a / s.nu);
  RateCertificate cert;
  cert.algorithm = Algorithm::kExplicitPdg;
  cert.condition = condition;
  cert.steps = s;
  const double z = zeta(s.tau, s.sigma, a);
  cert.constants["zeta"] = z;
  cert.constants["nu"] = s.nu;
  switch (condition) {
    case Condition::C1: {
      detail::check_lt(s.tau, tau_bound, "tau < 2/(L_f + 2||A|| nu)");
      detail::check_lt(s.sigma, sigma_bound, "sigma < 2/(L_g + 2||A||/nu)");
      const BetaXY beta = beta_xy(p, s, s.nu);
      const double contraction =
          std::min(beta.beta_x * s.tau / (1 + s.tau * a * s.nu),
                   beta.beta_y * s.sigma / (1 + s.sigma * a / s.nu));
      cert.rho = std::sqrt(1 - contraction);
      cert.norm = "phi_tau_sigma";
      cert.theorem = "thm4(i)";
      cert.constants["beta_x"] = beta.beta_x;
      cert.constants["beta_y"] = beta.beta_y;
      break;
    }
    case Condition::C2: {
      detail::check_le(s.tau, tau_bound, "tau <= 2/(L_f + 2||A|| nu)");
      detail::check_lt(s.sigma, sigma_bound, "sigma < 2/(L_g + 2||A||/nu)");
      const BetaXY beta = beta_xy(p, s, s.nu);
      const double gamma =
          std::min(p.mu_A, z * beta.beta_y) / (z * z + p.mu_A * z);
      cert.rho = std::sqrt(1 - gamma);
      cert.norm = "phi_plus_psi_b";
      cert.psi_b = PsiShift(p.mu_A / z, 0);
      cert.theorem = "thm4(ii)";
      cert.constants["beta_y"] = beta.beta_y;
      cert.constants["gamma_cert"] = gamma;
      break;
    }
    case Condition::C3: {
      if (!(s.epsilon > 0)) throw ValidationError("epsilon must be positive");
      detail::check_le(s.tau, tau_bound, "tau <= 2/(L_f + 2||A|| nu)");
      detail::check_le(s.sigma, sigma_bound, "sigma <= 2/(L_g + 2||A||/nu)");
      detail::check_le(s.tau * s.sigma * a * a * (1 + s.epsilon) * (1 + s.epsilon), 1.0,
                       "tau*sigma*||A||^2 (1+eps)^2 <= 1");
      cert.rho = z / std::sqrt(p.mu_A + z * z);
      cert.norm = "phi_tau_sigma";
      cert.theorem = "thm4(iii)";
      break;
    }
  }
  return cert;
}

/// Certificates of the appendix gradient methods: plain PDG contracts in
/// the Phi_eta norm, its preconditioned variant in the Euclidean norm.
inline RateCertificate rate_appendix_gda(const ConditionProfile& p, const StepSizes& s,
                                         bool preconditioned) {
  const PhiEtaConstants c = phi_eta_constants(p, s.eta);  // checks C2, L_f, eta range
  if (s.alpha <= 0) throw ValidationError("alpha must be positive");
  RateCertificate cert;
  cert.condition = Condition::C2;
  cert.steps = s;
  cert.constants["mu_eta"] = c.mu_eta;
  cert.constants["L_eta"] = c.L_eta;
  cert.constants["M_eta_lambda_min"] = c.M_eta_lambda_min;
  cert.constants["C_M"] = c.C_M;
  cert.constants["eta"] = s.eta;
  cert.constants["alpha"] = s.alpha;
  if (!preconditioned) {
    detail::check_lt(s.alpha, 2 * c.mu_eta / (c.L_eta * c.L_eta),
                     "alpha < 2 mu_eta / L_eta^2");
    cert.algorithm = Algorithm::kPlainPdg;
    cert.rho = std::sqrt(1 - 2 * s.alpha * c.mu_eta + s.alpha * s.alpha * c.L_eta * c.L_eta);
    cert.norm = "phi_eta";
    cert.theorem = "thmD.1";
    return cert;
  }
  const double a = p.norm_A;
  const double lmax = std::max(p.L_f, p.L_g);
  const double phi_max = 1 + s.eta * a;
  const double curvature = phi_max * phi_max * (lmax * lmax + a * a);
  detail::check_lt(s.alpha, 2 * c.M_eta_lambda_min / curvature,
                   "alpha < 2 lambda_min(M_eta) / (lambda_max^2(Phi_eta) (L^2+||A||^2))");
  cert.algorithm = Algorithm::kPrecondGda;
  cert.rho = std::sqrt(1 - 2 * s.alpha * c.M_eta_lambda_min +
                       s.alpha * s.alpha * curvature);
  cert.norm = "euclidean";
  cert.theorem = "thmD.2";
  return cert;
}

/// Dispatch to the certificate matching (algorithm, condition).
inline RateCertificate certify(const ConditionProfile& p, Algorithm alg,
                               Condition condition, const StepSizes& s) {
  switch (alg) {
    case Algorithm::kChambollePock: return rate_cp(p, s, condition);
    case Algorithm::kSemiImplicit: return rate_semi_implicit(p, s, condition);
    case Algorithm::kExplicitPdg: return rate_explicit_pdg(p, s, condition);
    case Algorithm::kPlainPdg:
      if (condition != Condition::C2)
        throw ConditionError("plain_pdg is certified under C2 only");
      return rate_appendix_gda(p, s, /*preconditioned=*/false);
    case Algorithm::kPrecondGda:
      if (condition != Condition::C2)
        throw ConditionError("precond_gda is certified under C2 only");
      return rate_appendix_gda(p, s, /*preconditioned=*/true);
  }
  throw ValidationError("unknown algorithm");
}

struct StepSearchResult {
  StepSizes steps;
  std::map<std::string, double> info;  // grid resolution and search metadata
};

/// The free balance parameter solving 2/(L_f + 2||A|| nu) = 2/(L_g + 2||A||/nu).
inline double balanced_nu(double L_f, double L_g, double norm_A) {
  if (norm_A == 0) return 1.0;
  return (L_g - L_f + std::sqrt((L_f - L_g) * (L_f - L_g) + 16 * norm_A * norm_A)) /
         (4 * norm_A);
}

/// Theorem-optimal step sizes where a closed form exists; a grid search
/// maximizing the certified rate's margin otherwise. When A = 0 and the
/// theorem allows arbitrarily large steps, the supplied defaults are used.
inline StepSearchResult optimal_stepsizes(Algorithm alg, Condition condition,
                                          const ConditionProfile& p, double epsilon,
                                          double default_tau = 1.0,
                                          double default_sigma = 1.0) {
  if (!(epsilon > 0)) throw ValidationError("epsilon must be positive");
  detail::require_condition(p, condition);
  const double a = p.norm_A;
  StepSearchResult out;
  out.steps.epsilon = epsilon;
  switch (alg) {
    case Algorithm::kChambollePock: {
      if (a == 0) {
        if (condition != Condition::C1)
          throw ConditionError("A = 0 is incompatible with C2/C3");
        out.steps.tau = default_tau;
        out.steps.sigma = default_sigma;
        return out;
      }
      if (condition == Condition::C1) {
        const double base = 1 / ((1 + epsilon) * a);
        out.steps.tau = base * std::sqrt(p.mu_g / p.mu_f);
        out.steps.sigma = base * std::sqrt(p.mu_f / p.mu_g);
      } else {
        out.steps.tau = out.steps.sigma = 1 / ((1 + epsilon) * a);
      }
      return out;
    }
    case Algorithm::kSemiImplicit: {
      if (condition == Condition::C3) {
        const double condat = (std::sqrt(p.L_g * p.L_g + 16 * a * a) - p.L_g) /
                              (4 * a * a);
        out.steps.tau = out.steps.sigma = std::min(condat, 1 / ((1 + epsilon) * a));
        return out;
      }
      // Thm 3(i): no closed form; 2-D log grid over (tau, sigma)
      const double scale = 1 / (a + p.L_g + p.mu_f + p.mu_g + 1);
      const int grid = 28;
      double best_rho = kInf;
      for (int i = 0; i < grid; ++i) {
        const double tau = scale * 1e-2 * std::pow(1e5, i / double(grid - 1));
        const double sigma_max = 1 / (tau * a * a + 0.5 * p.L_g);
        for (int j = 0; j < grid; ++j) {
          const double sigma = sigma_max * 1e-4 * std::pow(0.97e4, j / double(grid - 1));
          StepSizes trial = out.steps;
          trial.tau = tau;
          trial.sigma = sigma;
          try {
            const double rho = rate_semi_implicit(p, trial, condition).rho;
            if (rho < best_rho) {
              best_rho = rho;
              out.steps = trial;
            }
          } catch (const ValidationError&) {
          }
        }
      }
      if (!std::isfinite(best_rho))
        throw ConditionError("no feasible step sizes found for thm3(i)");
      out.info["grid_tau_points"] = grid;
      out.info["grid_sigma_points"] = grid;
      return out;
    }
    case Algorithm::kExplicitPdg: {
      const double nu_bar = balanced_nu(p.L_f, p.L_g, a);
      if (condition == Condition::C3) {
        out.steps.nu = nu_bar;
        out.steps.tau = out.steps.sigma =
            std::min(1 / ((1 + epsilon) * a), 2 / (p.L_f + 2 * a * nu_bar));
        return out;
      }
      // Thm 4(i)/(ii): grid over (nu, tau fraction, sigma fraction)
      const int nu_grid = 14, frac_grid = 14;
      double best_rho = kInf;
      for (int i = 0; i < nu_grid; ++i) {
        const double nu = (a == 0) ? 1.0
                                   : nu_bar * 3e-2 * std::pow(1e3, i / double(nu_grid - 1));
        const double tau_max = 2 / (p.L_f + 2 * a * nu);
        const double sigma_max = 2 / (p.L_g + 2 * a / nu);
        for (int j = 0; j < frac_grid; ++j) {
          const double ft = 1e-3 * std::pow(970.0, j / double(frac_grid - 1));
          for (int k = 0; k < frac_grid; ++k) {
            const double fs = 1e-3 * std::pow(970.0, k / double(frac_grid - 1));
            StepSizes trial = out.steps;
            trial.nu = nu;
            trial.tau = std::min(ft * tau_max, default_tau * 1e3);
            trial.sigma = std::min(fs * sigma_max, default_sigma * 1e3);
            try {
              const double rho = rate_explicit_pdg(p, trial, condition).rho;
              if (rho < best_rho) {
                best_rho = rho;
                out.steps = trial;
              }
            } catch (const ValidationError&) {
            }
          }
        }
        if (a == 0) break;
      }
      if (!std::isfinite(best_rho))
        throw ConditionError("no feasible step sizes found for thm4(i)/(ii)");
      out.info["grid_nu_points"] = nu_grid;
      out.info["grid_fraction_points"] = frac_grid;
      return out;
    }
    case Algorithm::kPlainPdg:
    case Algorithm::kPrecondGda: {
      if (condition != Condition::C2)
        throw ConditionError("appendix gradient methods are certified under C2 only");
      if (!std::isfinite(p.L_f))
        throw ConditionError("appendix gradient methods need finite L_f");
      const bool preconditioned = (alg == Algorithm::kPrecondGda);
      const double lmax = std::max(p.L_f, p.L_g);
      const double c_m = p.mu_g * p.mu_A /
                         (p.mu_A * a * a +
                          0.25 * (p.L_f + p.L_g) * (p.L_f + p.L_g) * a * a);
      const double eta_cap = std::min(1.0 / a, c_m);
      double best_rho = kInf;
      const int grid = 64;
      for (int i = 0; i < grid; ++i) {
        StepSizes trial = out.steps;
        const double frac = 1e-4 * std::pow(0.999e4, i / double(grid - 1));
        trial.eta = frac * eta_cap;
        try {
          const PhiEtaConstants c = phi_eta_constants(p, trial.eta);
          double curvature;
          double slope;
          if (preconditioned) {
            const double phi_max = 1 + trial.eta * a;
            curvature = phi_max * phi_max * (lmax * lmax + a * a);
            slope = c.M_eta_lambda_min;
          } else {
            curvature = c.L_eta * c.L_eta;
            slope = c.mu_eta;
          }
          trial.alpha = slope / curvature;  // vertex of the quadratic-in-alpha bound
          const double rho = std::sqrt(1 - slope * slope / curvature);
          if (rho < best_rho) {
            best_rho = rho;
            out.steps = trial;
          }
        } catch (const ValidationError&) {
        }
      }
      if (!std::isfinite(best_rho))
        throw ConditionError("no feasible eta found for the appendix methods");
      out.info["grid_eta_points"] = grid;
      return out;
    }
  }
  throw ValidationError("unknown algorithm");
}

}  // namespace pdsaddle
