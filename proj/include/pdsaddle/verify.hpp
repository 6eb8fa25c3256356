#pragma once

#include <atomic>
#include <cstdlib>
#include <functional>
#include <mutex>
#include <optional>
#include <thread>
#include <utility>
#include <vector>

#include "pdsaddle/core.hpp"
#include "pdsaddle/oracle.hpp"
#include "pdsaddle/precond.hpp"
#include "pdsaddle/problem.hpp"
#include "pdsaddle/rates.hpp"
#include "pdsaddle/splitting.hpp"

namespace pdsaddle {

namespace detail {

inline int verify_threads() {
  if (const char* env = std::getenv("PDSADDLE_THREADS")) {
    const int v = std::atoi(env);
    if (v >= 1) return std::min(v, 64);
  }
  const unsigned hc = std::thread::hardware_concurrency();
  return std::clamp(static_cast<int>(hc ? hc : 1), 1, 8);
}

/// Evaluates fn(trial) for trial = 0..trials-1, possibly across threads.
/// Results are keyed by trial index, so the reduction done by the caller is
/// independent of the parallelism level.
template <class PerTrial>
std::vector<double> parallel_trials(int trials, PerTrial&& fn) {
  std::vector<double> out(trials);
  const int threads = std::min(verify_threads(), std::max(trials, 1));
  if (threads <= 1 || trials < 32) {
    for (int i = 0; i < trials; ++i) out[i] = fn(i);
    return out;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&]() {
    try {
      for (int i = next.fetch_add(1); i < trials; i = next.fetch_add(1)) out[i] = fn(i);
    } catch (...) {
      std::lock_guard<std::mutex> lock(error_mutex);
      if (!error) error = std::current_exception();
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
  return out;
}

}  // namespace detail

struct AffineMap {
  Matrix M;
  Vector c;
  Vector apply(const Vector& v) const { return M * v + c; }
};

/// Attempts to express the map as v -> M v + c by probing the basis; returns
/// nullopt when a random point contradicts affinity.
inline std::optional<AffineMap> try_linearize(
    const std::function<Vector(const Vector&)>& map, int dim, uint64_t seed = 12345,
    double tol = 1e-8) {
  AffineMap out;
  out.c = map(Vector::Zero(dim));
  out.M.resize(dim, dim);
  for (int j = 0; j < dim; ++j) {
    Vector e = Vector::Zero(dim);
    e(j) = 1;
    out.M.col(j) = map(e) - out.c;
  }
  SplitRng rng(seed, 999);
  for (int probe = 0; probe < 2; ++probe) {
    Vector z = rng.uniform_ball(dim, 3.0);
    Vector predicted = out.apply(z);
    Vector actual = map(z);
    if ((predicted - actual).norm() > tol * (1 + actual.norm())) return std::nullopt;
  }
  return out;
}

inline std::function<Vector(const Vector&)> step_map(const SaddleProblem& p,
                                                     const AlgorithmId& id,
                                                     const StepSizes& s) {
  return [&p, id, s](const Vector& v) {
    return stack(apply_step(p, id, s, unstack(v, p.n, p.m)));
  };
}

/// One-step map as an affine map; valid for problems whose oracles have
/// affine prox/gradient maps (quadratic instances). Throws otherwise.
inline AffineMap linearize_step(const SaddleProblem& p, const AlgorithmId& id,
                                const StepSizes& s) {
  auto lin = try_linearize(step_map(p, id, s), p.n + p.m);
  if (!lin) throw ValidationError("one-step map is not affine on the probed region");
  return *lin;
}

/// Exact operator norm of M in the geometry of the SPD weight:
/// || W^{1/2} M W^{-1/2} ||_2.
inline double weighted_operator_norm(const Matrix& M, const Preconditioner& norm) {
  if (norm.kind() == PrecondKind::kIdentity)
    return Eigen::JacobiSVD<Matrix>(M).singularValues()(0);
  Matrix b = norm.sqrt_matrix() * M * norm.inv_sqrt_matrix();
  return Eigen::JacobiSVD<Matrix>(b).singularValues()(0);
}

struct ContractionReport {
  int pairs_tested = 0;
  double max_ratio = 0;
  double certified_rho = 0;
  bool pass = false;
  Vector worst_a, worst_b;
  uint64_t seed = 0;
};

/// Samples pair ratios ||T(w)-T(w')||_P / ||w-w'||_P over a ball, plus
/// axis-aligned pairs and (for affine maps) the adversarial pair along the
/// top singular direction of the weighted linearization.
inline ContractionReport check_contraction(const std::function<Vector(const Vector&)>& step,
                                           const Preconditioner& norm, double rho,
                                           int pairs, double radius, uint64_t seed,
                                           double tol = 1e-9) {
  if (!(rho >= 0 && rho <= 1)) throw ValidationError("certified rho must lie in [0,1]");
  if (pairs <= 0 || radius <= 0) throw ValidationError("pairs and radius must be positive");
  const int dim = norm.dim();
  ContractionReport report;
  report.certified_rho = rho;
  report.seed = seed;

  auto pair_for_trial = [&](int trial) -> std::pair<Vector, Vector> {
    if (trial < pairs) {  // random ball pairs
      SplitRng rng(seed, 10'000 + trial);
      return {rng.uniform_ball(dim, radius), rng.uniform_ball(dim, radius)};
    }
    const int j = trial - pairs;  // axis-aligned pairs
    SplitRng rng(seed, 20'000 + j);
    Vector base = rng.uniform_ball(dim, radius);
    Vector other = base;
    other(j % dim) += radius;
    return {base, other};
  };

  const int total = pairs + std::min(dim, 64);
  auto ratios = detail::parallel_trials(total, [&](int trial) {
    auto [a, b] = pair_for_trial(trial);
    const double denom = norm.norm(a - b);
    if (denom < 1e-14) return 0.0;  // degenerate pair skipped
    return norm.norm(step(a) - step(b)) / denom;
  });

  int worst_index = -1;
  for (int i = 0; i < total; ++i) {
    if (ratios[i] > report.max_ratio) {
      report.max_ratio = ratios[i];
      worst_index = i;
    }
  }
  if (worst_index >= 0) {
    auto [a, b] = pair_for_trial(worst_index);
    report.worst_a = a;
    report.worst_b = b;
  }

  // adversarial direction from the linearization, when the map is affine
  if (auto lin = try_linearize(step, dim, seed)) {
    Matrix b = norm.sqrt_matrix() * lin->M * norm.inv_sqrt_matrix();
    Eigen::JacobiSVD<Matrix> svd(b, Eigen::ComputeFullV);
    Vector dir = norm.inv_sqrt_matrix() * svd.matrixV().col(0);
    Vector a = Vector::Zero(dim);
    Vector bb = radius * dir / std::max(dir.norm(), 1e-300);
    const double denom = norm.norm(a - bb);
    if (denom > 1e-14) {
      const double ratio = norm.norm(step(a) - step(bb)) / denom;
      if (ratio > report.max_ratio) {
        report.max_ratio = ratio;
        report.worst_a = a;
        report.worst_b = bb;
      }
    }
  }

  report.pairs_tested = total;
  report.pass = report.max_ratio <= rho + tol;
  return report;
}

enum class OperatorPart { kFullF, kFbSemi, kFbSkew };

struct ModulusReport {
  int samples = 0;
  double empirical_min_ratio = kInf;
  double certified_inverse_modulus = 0;
  bool pass = false;
};

namespace detail {

struct GraphPoint {
  Vector point;  // stacked (x, y)
  Vector value;  // stacked operator output
};

inline GraphPoint operator_graph_point(const SaddleProblem& p, OperatorPart part,
                                       SplitRng& rng, double radius) {
  const Vector probe_x = rng.uniform_ball(p.n, radius);
  const Vector probe_y = rng.uniform_ball(p.m, radius);
  const double step = rng.log_uniform(0.1, 2.0);
  auto side = [&](const FunctionOracle& o, const Vector& probe) -> GraphSample {
    if (o.has_prox()) return subgradient_graph_sample(o, probe, step);
    if (o.has_grad()) return {probe, o.grad(probe)};
    throw CapabilityError("operator sampling needs prox or gradient access");
  };
  GraphPoint out;
  switch (part) {
    case OperatorPart::kFullF: {
      const GraphSample fx = side(*p.f, probe_x);
      const GraphSample gy = side(*p.g, probe_y);
      out.point.resize(p.n + p.m);
      out.point << fx.point, gy.point;
      out.value.resize(p.n + p.m);
      out.value << fx.subgrad + p.A.transpose() * gy.point,
          gy.subgrad - p.A * fx.point;
      return out;
    }
    case OperatorPart::kFbSemi: {
      const GraphSample fx = side(*p.f, probe_x);
      out.point.resize(p.n + p.m);
      out.point << fx.point, probe_y;
      out.value.resize(p.n + p.m);
      out.value << fx.subgrad + p.A.transpose() * probe_y, -(p.A * fx.point);
      return out;
    }
    case OperatorPart::kFbSkew: {
      out.point.resize(p.n + p.m);
      out.point << probe_x, probe_y;
      out.value.resize(p.n + p.m);
      out.value << p.A.transpose() * probe_y, -(p.A * probe_x);
      return out;
    }
  }
  throw ValidationError("unknown operator part");
}

}  // namespace detail

/// Empirical min of ||F(w)-F(w')|| / ||w-w'|| over graph-sampled pairs,
/// compared one-sidedly against the certified inverse modulus (1/R2, 1/R3
/// or sqrt(mu_A)).
inline ModulusReport estimate_inverse_lipschitz(const SaddleProblem& p, OperatorPart part,
                                                int samples, double radius, uint64_t seed,
                                                double certified_inverse_modulus,
                                                double tol = 1e-8) {
  if (samples <= 0 || radius <= 0)
    throw ValidationError("samples and radius must be positive");
  ModulusReport report;
  report.samples = samples;
  report.certified_inverse_modulus = certified_inverse_modulus;
  auto ratios = detail::parallel_trials(samples, [&](int trial) {
    SplitRng rng_a(seed, 2 * trial);
    SplitRng rng_b(seed, 2 * trial + 1);
    const auto ga = detail::operator_graph_point(p, part, rng_a, radius);
    const auto gb = detail::operator_graph_point(p, part, rng_b, radius);
    const double denom = (ga.point - gb.point).norm();
    if (denom < 1e-14) return kInf;
    return (ga.value - gb.value).norm() / denom;
  });
  for (double r : ratios) report.empirical_min_ratio = std::min(report.empirical_min_ratio, r);
  report.pass = report.empirical_min_ratio >= certified_inverse_modulus - tol;
  return report;
}

struct A1A2Report {
  int pairs_tested = 0;
  double worst_a1_violation = -kInf;
  double worst_a2_violation = -kInf;
  double gamma = 0;
  double rho_from_gamma = 1;
  bool pass = false;
};

/// Samples the two partial-contractivity inequalities
///   A1: ||B(w)-B(w')||^2_{Phi+Psi_b} <= ||w-w'||^2_Phi
///   A2: ||F(w)-F(w')||^2_Phi <= ||w-w'||^2_{Phi-Psi_f}
/// and reports the exact pencil gamma with its implied rate sqrt(1-gamma).
inline A1A2Report check_A1_A2(const SaddleProblem& p, SplitKind split, const StepSizes& s,
                              const PsiShift& psi_b, const PsiShift& psi_f, int pairs,
                              double radius, uint64_t seed, double tol = 1e-9) {
  if (pairs <= 0 || radius <= 0) throw ValidationError("pairs and radius must be positive");
  const Preconditioner phi = make_phi(s.tau, s.sigma, p.A);
  Matrix phi_minus_psi = phi.matrix();
  phi_minus_psi.topLeftCorner(p.n, p.n) -= psi_f.gamma_x * Matrix::Identity(p.n, p.n);
  phi_minus_psi.bottomRightCorner(p.m, p.m) -= psi_f.gamma_y * Matrix::Identity(p.m, p.m);
  {
    Eigen::SelfAdjointEigenSolver<Matrix> es(phi_minus_psi);
    if (es.eigenvalues()(0) < -1e-10)
      throw ValidationError("Phi - Psi_f is not positive semidefinite");
  }
  A1A2Report report;
  report.pairs_tested = pairs;
  // violations encoded as (lhs - rhs) / ||dw||^2_Phi; a single trial value
  // packs the max of the two inequalities
  auto violations = detail::parallel_trials(2 * pairs, [&](int trial) {
    const int i = trial / 2;
    const bool second = trial % 2;
    SplitRng rng(seed, 30'000 + i);
    const Iterate w = unstack(rng.uniform_ball(p.n + p.m, radius), p.n, p.m);
    const Iterate wp = unstack(rng.uniform_ball(p.n + p.m, radius), p.n, p.m);
    const Vector dw = stack(w) - stack(wp);
    const double scale = dw.dot(phi.matrix() * dw);
    if (scale < 1e-20) return -kInf;
    if (!second) {
      const Vector db = stack(backward_half(p, split, s, w)) -
                        stack(backward_half(p, split, s, wp));
      double lhs = db.dot(phi.matrix() * db) + psi_b.gamma_x * db.head(p.n).squaredNorm() +
                   psi_b.gamma_y * db.tail(p.m).squaredNorm();
      return (lhs - scale) / scale;
    }
    const Vector df = stack(forward_half(p, split, w, phi)) -
                      stack(forward_half(p, split, wp, phi));
    const double lhs = df.dot(phi.matrix() * df);
    const double rhs = dw.dot(phi_minus_psi * dw);
    return (lhs - rhs) / scale;
  });
  for (int i = 0; i < pairs; ++i) {
    report.worst_a1_violation = std::max(report.worst_a1_violation, violations[2 * i]);
    report.worst_a2_violation = std::max(report.worst_a2_violation, violations[2 * i + 1]);
  }
  report.gamma = best_gamma(phi, psi_b, psi_f);
  report.rho_from_gamma = std::sqrt(1 - report.gamma);
  report.pass = report.worst_a1_violation <= tol && report.worst_a2_violation <= tol;
  return report;
}

namespace detail {

/// Gradient of a smooth oracle as an affine map grad(x) = P x + q; throws
/// when probing contradicts affinity.
inline std::pair<Matrix, Vector> affine_gradient(const FunctionOracle& o) {
  if (!o.has_grad()) throw CapabilityError("oracle has no gradient");
  const int d = o.dim();
  Vector q = o.grad(Vector::Zero(d));
  Matrix p(d, d);
  for (int j = 0; j < d; ++j) {
    Vector e = Vector::Zero(d);
    e(j) = 1;
    p.col(j) = o.grad(e) - q;
  }
  SplitRng rng(7, 7);
  Vector z = rng.gaussian(d);
  if ((o.grad(z) - (p * z + q)).norm() > 1e-8 * (1 + q.norm() + z.norm()))
    throw ValidationError("oracle gradient is not affine");
  return {p, q};
}

inline StepSizes reference_steps(const SaddleProblem& p) {
  StepSizes s;
  s.tau = s.sigma = p.norm_A > 0 ? 1 / ((1 + 1e-3) * p.norm_A) : 1.0;
  return s;
}

inline double fixed_point_residual(const SaddleProblem& p, const Iterate& w) {
  const StepSizes s = reference_steps(p);
  const Preconditioner phi = make_phi(s.tau, s.sigma, p.A);
  Iterate image = (p.f->has_prox() && p.g->has_prox())
                      ? cp_step(p, s, w)
                      : explicit_pdg_step(p, s, w);
  return phi.norm(stack(w) - stack(image));
}

}  // namespace detail

/// Reference saddle point: a direct KKT solve for smooth quadratic
/// instances, active-set enumeration for quadratic-plus-orthant f with
/// small n, and a long high-accuracy Chambolle-Pock run otherwise. The
/// result is certified by its fixed-point residual (<= 1e-11).
inline SaddleSolution solve_reference(const SaddleProblem& p) {
  std::optional<Iterate> candidate;

  // direct KKT solve
  if (p.f->has_grad() && p.g->has_grad()) {
    try {
      auto [pf, qf] = detail::affine_gradient(*p.f);
      auto [pg, qg] = detail::affine_gradient(*p.g);
      Matrix kkt(p.n + p.m, p.n + p.m);
      kkt.topLeftCorner(p.n, p.n) = pf;
      kkt.topRightCorner(p.n, p.m) = p.A.transpose();
      kkt.bottomLeftCorner(p.m, p.n) = -p.A;
      kkt.bottomRightCorner(p.m, p.m) = pg;
      Vector rhs(p.n + p.m);
      rhs << -qf, -qg;
      Eigen::FullPivLU<Matrix> lu(kkt);
      if (lu.isInvertible()) candidate = unstack(lu.solve(rhs), p.n, p.m);
    } catch (const ValidationError&) {
    }
  }

  // active-set enumeration for orthant-constrained affine-plus-quadratic f
  if (!candidate && p.n <= 12 && p.g->has_grad()) {
    const auto* f = dynamic_cast<const ProjectedQuadraticOracle*>(p.f.get());
    if (f && f->region().kind == Region::Kind::kNonneg) {
      try {
        auto [pg, qg] = detail::affine_gradient(*p.g);
        const double wf = f->weight();
        const Vector& cf = f->linear();
        double best_margin = -kInf;
        for (unsigned mask = 0; mask < (1u << p.n); ++mask) {
          std::vector<int> free_set;
          for (int i = 0; i < p.n; ++i)
            if (mask & (1u << i)) free_set.push_back(i);
          const int k = static_cast<int>(free_set.size());
          Matrix sys = Matrix::Zero(p.m + k, p.m + k);
          Vector rhs = Vector::Zero(p.m + k);
          sys.topLeftCorner(p.m, p.m) = pg;
          rhs.head(p.m) = -qg;
          for (int j = 0; j < k; ++j) {
            sys.block(0, p.m + j, p.m, 1) = -p.A.col(free_set[j]);
            sys.block(p.m + j, 0, 1, p.m) = p.A.col(free_set[j]).transpose();
            sys(p.m + j, p.m + j) = wf;
            rhs(p.m + j) = -cf(free_set[j]);
          }
          Eigen::FullPivLU<Matrix> lu(sys);
          if (!lu.isInvertible()) continue;
          Vector sol = lu.solve(rhs);
          Vector y = sol.head(p.m);
          Vector x = Vector::Zero(p.n);
          double margin = kInf;
          for (int j = 0; j < k; ++j) {
            x(free_set[j]) = sol(p.m + j);
            margin = std::min(margin, sol(p.m + j));
          }
          Vector slack = cf + p.A.transpose() * y;  // + wf * x on active coords (x=0)
          for (int i = 0; i < p.n; ++i)
            if (!(mask & (1u << i))) margin = std::min(margin, slack(i));
          if (margin > best_margin && margin > -1e-9) {
            best_margin = margin;
            candidate = Iterate{x, y};
          }
        }
      } catch (const ValidationError&) {
      }
    }
  }

  // fallback: long high-accuracy run of the proximal algorithm
  if (!candidate) {
    const StepSizes s = detail::reference_steps(p);
    Trajectory traj = run(p, AlgorithmId(Algorithm::kChambollePock), s,
                          Iterate::zero(p), 1'000'000, 1e-13);
    if (traj.stop_reason != StopReason::kResidualTol)
      throw UnsolvedError("reference solver did not reach the residual target");
    candidate = traj.iterates.back();
  }

  SaddleSolution sol;
  sol.x = candidate->x;
  sol.y = candidate->y;
  sol.residual = detail::fixed_point_residual(p, *candidate);
  if (!(sol.residual <= 1e-11))
    throw UnsolvedError("reference solution failed residual certification");
  return sol;
}

struct QLinearReport {
  int steps_checked = 0;
  double worst_step_ratio = 0;
  double worst_envelope_excess = -kInf;
  bool pass = false;
};

/// Per-step distance ratios against the certified rho, plus the cumulative
/// geometric envelope, down to a floor where rounding dominates.
inline QLinearReport check_qlinear(const Trajectory& traj, const SaddleSolution& sol,
                                   double rho, const Preconditioner& norm,
                                   double floor = 1e-12, double tol = 1e-9) {
  QLinearReport report;
  const Vector star = [&] {
    Vector v(sol.x.size() + sol.y.size());
    v << sol.x, sol.y;
    return v;
  }();
  std::vector<double> dist(traj.iterates.size());
  for (size_t k = 0; k < traj.iterates.size(); ++k)
    dist[k] = norm.norm(stack(traj.iterates[k]) - star);
  if (dist.empty()) {
    report.pass = true;
    return report;
  }
  const double d0 = dist[0];
  double envelope = d0;
  for (size_t k = 0; k + 1 < dist.size(); ++k) {
    if (dist[k] <= floor) break;
    report.worst_step_ratio = std::max(report.worst_step_ratio, dist[k + 1] / dist[k]);
    envelope *= rho + tol;
    if (dist[k + 1] > floor)
      report.worst_envelope_excess =
          std::max(report.worst_envelope_excess, dist[k + 1] - envelope * (1 + tol));
    ++report.steps_checked;
  }
  report.pass = report.worst_step_ratio <= rho + tol &&
                report.worst_envelope_excess <= tol * std::max(1.0, d0);
  return report;
}

struct MonotonicityReport {
  int samples = 0;
  double min_ratio = kInf;
  double mu_eta = 0;
  bool pass = false;
};

/// Sampled Rayleigh ratios <F(w)-F(w'), w-w'>_{Phi_eta} / ||w-w'||^2_{Phi_eta}
/// against the certified mu_eta.
inline MonotonicityReport check_strong_monotonicity_phi_eta(const SaddleProblem& p,
                                                            double eta, int samples,
                                                            double radius, uint64_t seed,
                                                            double tol = 1e-9) {
  const ConditionProfile profile = build_condition_profile(p);
  const PhiEtaConstants consts = phi_eta_constants(profile, eta);  // range checks
  if (!p.f->has_grad() || !p.g->has_grad())
    throw CapabilityError("strong monotonicity check needs smooth f and g");
  const Preconditioner phi = make_phi_eta(eta, p.A);
  auto field = [&](const Vector& v) {
    Iterate w = unstack(v, p.n, p.m);
    Vector out(p.n + p.m);
    out << p.f->grad(w.x) + p.A.transpose() * w.y, p.g->grad(w.y) - p.A * w.x;
    return out;
  };
  MonotonicityReport report;
  report.samples = samples;
  report.mu_eta = consts.mu_eta;
  auto ratios = detail::parallel_trials(samples, [&](int trial) {
    SplitRng rng(seed, 40'000 + trial);
    const Vector a = rng.uniform_ball(p.n + p.m, radius);
    const Vector b = rng.uniform_ball(p.n + p.m, radius);
    const Vector d = a - b;
    const double denom = d.dot(phi.matrix() * d);
    if (denom < 1e-20) return kInf;
    return d.dot(phi.matrix() * (field(a) - field(b))) / denom;
  });
  for (double r : ratios) report.min_ratio = std::min(report.min_ratio, r);
  report.pass = report.min_ratio >= consts.mu_eta - tol;
  return report;
}

}  // namespace pdsaddle
