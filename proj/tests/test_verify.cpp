#include "test_support.hpp"

#include "pdsaddle/verify.hpp"

using namespace pdsaddle;
using pdsaddle::testing::scalar_problem;
using pdsaddle::testing::vec;
using pdsaddle::testing::zero_problem;

namespace {

SaddleProblem c2_quadratic(uint64_t seed, int n = 2, int m = 3) {
  RandomProblemSpec spec;
  spec.mu_f = 0.0;
  spec.L_f = 1.5;
  spec.mu_g = 0.8;
  spec.L_g = 2.0;
  spec.sing_min = 0.5;
  spec.sing_max = 1.5;
  return make_random(Condition::C2, n, m, spec, seed);
}

SaddleProblem c3_quadratic(uint64_t seed, int n = 3) {
  RandomProblemSpec spec;
  spec.mu_f = 0.0;
  spec.L_f = 1.0;
  spec.mu_g = 0.0;
  spec.L_g = 1.4;
  spec.sing_min = 0.6;
  spec.sing_max = 1.3;
  return make_random(Condition::C3, n, n, spec, seed);
}

}  // namespace

TEST_CASE("check_contraction on reference maps") {
  auto id = Preconditioner::identity(1, 1);
  SECTION("identity map is nonexpansive") {
    auto r = check_contraction([](const Vector& v) { return v; }, id, 1.0, 200, 2.0, 3);
    REQUIRE(r.pass);
    REQUIRE(r.max_ratio == Catch::Approx(1.0).margin(1e-12));
  }
  SECTION("halving map contracts at exactly one half") {
    auto r = check_contraction([](const Vector& v) { return (0.5 * v).eval(); }, id,
                               0.5, 200, 2.0, 3);
    REQUIRE(r.pass);
    REQUIRE(r.max_ratio == Catch::Approx(0.5).margin(1e-12));
  }
  SECTION("plain pdg on the skew scalar fails every rho < 1") {
    auto p = zero_problem(Matrix::Identity(1, 1));
    StepSizes s;
    s.alpha = 0.5;
    auto r = check_contraction(step_map(p, AlgorithmId(Algorithm::kPlainPdg), s), id,
                               0.999, 300, 2.0, 7);
    REQUIRE_FALSE(r.pass);
    REQUIRE(r.max_ratio == Catch::Approx(std::sqrt(1.25)).margin(1e-12));
    REQUIRE(r.worst_a.size() == 2);  // witness pair embedded
  }
}

TEST_CASE("exact weighted operator norm") {
  Matrix m(2, 2);
  m << 0.5, 0.3, 0.0, 0.25;
  SECTION("euclidean norm matches the SVD") {
    REQUIRE(weighted_operator_norm(m, Preconditioner::identity(1, 1)) ==
            Catch::Approx(Eigen::JacobiSVD<Matrix>(m).singularValues()(0)));
  }
  SECTION("similarity invariance") {
    auto phi = make_phi(0.5, 0.5, Matrix::Identity(1, 1));
    // operator norm of the identity is 1 in every geometry
    REQUIRE(weighted_operator_norm(Matrix::Identity(2, 2), phi) ==
            Catch::Approx(1.0).margin(1e-12));
  }
}

TEST_CASE("linearize_step recovers affine one-step maps") {
  auto p = scalar_problem(1.0, 1.0, 1.0);
  StepSizes s;
  s.tau = s.sigma = 0.5;
  AffineMap map = linearize_step(p, AlgorithmId(Algorithm::kChambollePock), s);
  // hand iteration: from (1,1) the step lands at (1/3, 5/9)
  Vector w = vec({1, 1});
  REQUIRE((map.apply(w) - vec({1.0 / 3, 5.0 / 9})).norm() < 1e-14);
  SECTION("non-affine maps are rejected") {
    auto orthant = make_oracle(OracleCatalogEntry::indicator_nonneg(1));
    auto quad = make_oracle(OracleCatalogEntry::quadratic(1, 1.0));
    auto nonsmooth = SaddleProblem::make(orthant, quad, Matrix::Identity(1, 1));
    REQUIRE_THROWS_AS(
        linearize_step(nonsmooth, AlgorithmId(Algorithm::kChambollePock), s),
        ValidationError);
  }
}

TEST_CASE("inverse lipschitz estimates") {
  SECTION("skew part attains sqrt(mu_A) exactly for orthogonal A") {
    SplitRng rng(5, 0);
    Matrix q = random_orthogonal(3, rng);
    auto p = zero_problem(q);
    auto r = estimate_inverse_lipschitz(p, OperatorPart::kFbSkew, 400, 3.0, 11, 1.0);
    REQUIRE(r.pass);
    REQUIRE(r.empirical_min_ratio == Catch::Approx(1.0).margin(1e-10));
  }
  SECTION("full operator under C2 stays above 1/R2") {
    auto p = c2_quadratic(17);
    auto profile = build_condition_profile(p);
    const double inv = 1.0 / constant_R2(profile).R2;
    auto r = estimate_inverse_lipschitz(p, OperatorPart::kFullF, 500, 4.0, 13, inv);
    REQUIRE(r.pass);
  }
  SECTION("full operator under C3 stays above 1/R3") {
    auto p = c3_quadratic(19);
    auto profile = build_condition_profile(p);
    const double inv = 1.0 / constant_R3(profile, SmoothnessArg::kBoth).R3;
    auto r = estimate_inverse_lipschitz(p, OperatorPart::kFullF, 500, 4.0, 17, inv);
    REQUIRE(r.pass);
  }
  SECTION("semi-implicit backward operator stays above 1/R3'") {
    auto p = c3_quadratic(23);
    auto profile = build_condition_profile(p);
    const double inv = 1.0 / constant_R3(profile, SmoothnessArg::kFOnly).R3;
    auto r = estimate_inverse_lipschitz(p, OperatorPart::kFbSemi, 500, 4.0, 19, inv);
    REQUIRE(r.pass);
  }
}

TEST_CASE("A1/A2 sampled inequalities") {
  SECTION("zero shifts reduce to nonexpansiveness") {
    auto p = c3_quadratic(29);
    StepSizes s;
    s.tau = s.sigma = 0.5 / p.norm_A;
    auto r = check_A1_A2(p, SplitKind::kCp, s, PsiShift(), PsiShift(), 300, 3.0, 31);
    REQUIRE(r.pass);
    REQUIRE(r.gamma == 0.0);
  }
  SECTION("lemma shifts for the semi-implicit split under C2") {
    auto p = c2_quadratic(37);
    auto profile = build_condition_profile(p);
    StepSizes s;
    s.tau = 0.5 / profile.norm_A;
    s.sigma = 0.9 * 2 / (2 * s.tau * profile.norm_A * profile.norm_A + profile.L_g);
    PsiShift psi_b(gamma_x(profile, s), 0.0);
    PsiShift psi_f(0.0, gamma_y(profile, s));
    auto r = check_A1_A2(p, SplitKind::kSemi, s, psi_b, psi_f, 400, 3.0, 41);
    REQUIRE(r.worst_a1_violation <= 1e-9);
    REQUIRE(r.worst_a2_violation <= 1e-9);
    REQUIRE(r.pass);
    // the exact pencil gamma is at least as good as the certificate's
    auto cert = rate_semi_implicit(profile, s, Condition::C2);
    REQUIRE(r.rho_from_gamma <= cert.rho + 1e-12);
  }
  SECTION("lemma shifts for the explicit split under C1") {
    RandomProblemSpec spec;
    spec.mu_f = 0.6;
    spec.L_f = 1.8;
    spec.mu_g = 0.9;
    spec.L_g = 2.2;
    spec.sing_min = 0.4;
    spec.sing_max = 1.0;
    auto p = make_random(Condition::C1, 3, 2, spec, 43);
    auto profile = build_condition_profile(p);
    StepSizes s;
    s.nu = balanced_nu(profile.L_f, profile.L_g, profile.norm_A);
    s.tau = 0.9 * 2 / (profile.L_f + 2 * profile.norm_A * s.nu);
    s.sigma = 0.9 * 2 / (profile.L_g + 2 * profile.norm_A / s.nu);
    BetaXY beta = beta_xy(profile, s, s.nu);
    auto r = check_A1_A2(p, SplitKind::kExplicit, s, PsiShift(),
                         PsiShift(beta.beta_x, beta.beta_y), 400, 3.0, 47);
    REQUIRE(r.pass);
  }
  SECTION("psd precondition is checked") {
    auto p = c3_quadratic(53);
    StepSizes s;
    s.tau = s.sigma = 0.5 / p.norm_A;
    REQUIRE_THROWS_AS(
        check_A1_A2(p, SplitKind::kCp, s, PsiShift(), PsiShift(0, 1e3), 10, 1.0, 1),
        ValidationError);
  }
}

TEST_CASE("reference solver") {
  SECTION("symmetric scalar instance solves to the origin") {
    auto sol = solve_reference(scalar_problem(1, 1, 1));
    REQUIRE(sol.x.norm() == Catch::Approx(0.0).margin(1e-12));
    REQUIRE(sol.y.norm() == Catch::Approx(0.0).margin(1e-12));
    REQUIRE(sol.residual <= 1e-11);
  }
  SECTION("shifted scalar instance") {
    auto p = SaddleProblem::make(
        std::make_shared<QuadraticOracle>(1.0, vec({1})),
        std::make_shared<QuadraticOracle>(1.0, Vector::Zero(1)),
        Matrix::Identity(1, 1));
    auto sol = solve_reference(p);
    REQUIRE(sol.x(0) == Catch::Approx(0.5).margin(1e-12));
    REQUIRE(sol.y(0) == Catch::Approx(0.5).margin(1e-12));
  }
  SECTION("affine-constrained instance with inactive constraints") {
    Vector c = vec({0.5, 1.5});
    auto g = std::make_shared<QuadraticOracle>(1.0, c);
    auto p = make_affine_constrained(g, Matrix::Identity(2, 2), Vector::Zero(2));
    auto sol = solve_reference(p);
    REQUIRE((sol.y - c).norm() <= 1e-10);
    REQUIRE(sol.x.norm() <= 1e-10);
  }
  SECTION("active-set case with binding constraints") {
    // min 1/2||y - c||^2 s.t. y >= b componentwise (A = I), c below b in one coord
    Vector c = vec({-1.0, 2.0});
    auto g = std::make_shared<QuadraticOracle>(1.0, c);
    Vector b = vec({0.0, 0.0});
    auto p = make_affine_constrained(g, Matrix::Identity(2, 2), b);
    auto sol = solve_reference(p);
    REQUIRE(sol.y(0) == Catch::Approx(0.0).margin(1e-10));   // clipped at the bound
    REQUIRE(sol.y(1) == Catch::Approx(2.0).margin(1e-10));   // interior
    REQUIRE(sol.x(0) == Catch::Approx(1.0).margin(1e-10));   // active multiplier
    REQUIRE(sol.x(1) == Catch::Approx(0.0).margin(1e-10));
  }
  SECTION("nonsmooth fallback run") {
    auto p = make_huber_rof(Vector::Constant(4, 0.3), 1.0, 0.5, 2, 2);
    auto sol = solve_reference(p);
    REQUIRE(sol.residual <= 1e-11);
  }
}

TEST_CASE("q-linear envelope checks") {
  auto p = scalar_problem(1, 1, 1);
  auto sol = solve_reference(p);
  auto profile = build_condition_profile(p);
  StepSizes s = optimal_stepsizes(Algorithm::kChambollePock, Condition::C1, profile,
                                  1e-3)
                    .steps;
  auto cert = rate_cp(profile, s, Condition::C1);
  auto norm = certificate_norm(cert, p);
  SECTION("starting at the solution passes trivially") {
    Trajectory traj = run(p, AlgorithmId(Algorithm::kChambollePock), s,
                          {sol.x, sol.y}, 10, 1e-14);
    REQUIRE(check_qlinear(traj, sol, cert.rho, norm).pass);
  }
  SECTION("contractive run passes") {
    Trajectory traj = run(p, AlgorithmId(Algorithm::kChambollePock), s,
                          {vec({2}), vec({-1})}, 5000, 1e-12);
    auto r = check_qlinear(traj, sol, cert.rho, norm);
    REQUIRE(r.pass);
    REQUIRE(r.worst_step_ratio <= cert.rho + 1e-9);
  }
  SECTION("expanding run fails") {
    auto skew = zero_problem(Matrix::Identity(1, 1));
    StepSizes sa;
    sa.alpha = 0.5;
    SaddleSolution origin{Vector::Zero(1), Vector::Zero(1), 0.0};
    Trajectory traj;
    try {
      traj = run(skew, AlgorithmId(Algorithm::kPlainPdg), sa, {vec({1}), vec({0})},
                 60, 0.0);
    } catch (const DivergenceError&) {
    }
    if (!traj.iterates.empty()) {
      auto r = check_qlinear(traj, origin, 0.99,
                             Preconditioner::identity(1, 1));
      REQUIRE_FALSE(r.pass);
      REQUIRE(r.worst_step_ratio == Catch::Approx(std::sqrt(1.25)).margin(1e-12));
    }
  }
}

TEST_CASE("strong monotonicity in the phi_eta geometry") {
  SECTION("scalar appendix example passes with margin") {
    RandomProblemSpec spec;
    spec.mu_f = 0.0;
    spec.L_f = 1.0;
    spec.mu_g = 1.0;
    spec.L_g = 1.0;
    spec.sing_min = 1.0;
    spec.sing_max = 1.0;
    auto p = make_random(Condition::C2, 1, 1, spec, 59);
    auto r = check_strong_monotonicity_phi_eta(p, 0.25, 300, 3.0, 61);
    REQUIRE(r.pass);
    REQUIRE(r.min_ratio >= r.mu_eta - 1e-9);
  }
  SECTION("eta above the admissible range is refused") {
    auto p = c2_quadratic(67);
    auto profile = build_condition_profile(p);
    const double c_m = phi_eta_constants(profile, 1e-6).C_M;
    REQUIRE_THROWS_AS(
        check_strong_monotonicity_phi_eta(p, c_m * 1.0001, 10, 1.0, 1),
        StepSizeError);
  }
}

TEST_CASE("exact contraction of the affine one-step map is within the certificate") {
  auto p = c2_quadratic(71);
  auto profile = build_condition_profile(p);
  auto steps = optimal_stepsizes(Algorithm::kChambollePock, Condition::C2, profile,
                                 1e-3)
                   .steps;
  auto cert = rate_cp(profile, steps, Condition::C2);
  AffineMap map = linearize_step(p, AlgorithmId(Algorithm::kChambollePock), steps);
  const double opnorm = weighted_operator_norm(map.M, certificate_norm(cert, p));
  REQUIRE(opnorm <= cert.rho + 1e-10);
  SECTION("a deliberately deflated rho is caught by the sharp check") {
    // proximal point at A = 0 is tight: the exact norm equals the certificate
    auto tight = scalar_problem(1, 1, 0);
    auto tight_profile = build_condition_profile(tight);
    StepSizes s;
    s.tau = s.sigma = 1.0;
    auto tight_cert = rate_cp(tight_profile, s, Condition::C1);
    AffineMap m2 = linearize_step(tight, AlgorithmId(Algorithm::kChambollePock), s);
    const double exact = weighted_operator_norm(m2.M, certificate_norm(tight_cert, tight));
    REQUIRE(exact == Catch::Approx(tight_cert.rho).margin(1e-12));
    auto r = check_contraction(
        step_map(tight, AlgorithmId(Algorithm::kChambollePock), s),
        certificate_norm(tight_cert, tight), 0.99 * tight_cert.rho, 100, 2.0, 3);
    REQUIRE_FALSE(r.pass);
  }
}
