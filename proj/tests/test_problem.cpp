#include "test_support.hpp"

using namespace pdsaddle;
using pdsaddle::testing::mat;
using pdsaddle::testing::vec;

TEST_CASE("condition profile flags") {
  SECTION("strongly convex pair with zero coupling is C1 only") {
    auto p = testing::scalar_problem(1.0, 1.0, 0.0);
    auto profile = build_condition_profile(p);
    REQUIRE(profile.c1);
    REQUIRE_FALSE(profile.c2);
    REQUIRE_FALSE(profile.c3);
  }
  SECTION("zero functions with identity coupling are C3 only") {
    auto p = testing::zero_problem(Matrix::Identity(1, 1));
    auto profile = build_condition_profile(p);
    REQUIRE(profile.c3);
    REQUIRE_FALSE(profile.c1);
    REQUIRE_FALSE(profile.c2);
  }
  SECTION("interval counterexample fails C2 through L_g") {
    auto p = make_counterexample(2);
    auto profile = build_condition_profile(p);
    REQUIRE(profile.mu_g > 0);
    REQUIRE(profile.mu_A > 0);
    REQUIRE(profile.L_g == kInf);
    REQUIRE_FALSE(profile.c2);
    REQUIRE_FALSE(profile.c3);
  }
}

TEST_CASE("cached spectral quantities match an independent SVD") {
  SplitRng rng(101, 0);
  for (int trial = 0; trial < 10; ++trial) {
    const int m = rng.uniform_int(1, 6);
    const int n = rng.uniform_int(1, 6);
    Matrix a(m, n);
    for (int i = 0; i < m; ++i) a.row(i) = rng.gaussian(n).transpose();
    auto p = SaddleProblem::make(std::make_shared<ZeroOracle>(n),
                                 std::make_shared<ZeroOracle>(m), a);
    Eigen::JacobiSVD<Matrix> svd(a);
    const Vector& s = svd.singularValues();
    REQUIRE(p.norm_A == Catch::Approx(s(0)).epsilon(1e-12));
    const double smin = s(s.size() - 1);
    if (n <= m)
      REQUIRE(p.mu_AtA == Catch::Approx(smin * smin).margin(1e-10 * s(0) * s(0)));
    else
      REQUIRE(p.mu_AtA == 0.0);
  }
}

TEST_CASE("huber-rof construction") {
  SECTION("single horizontal difference") {
    auto p = make_huber_rof(vec({0, 0}), 1.0, 1.0, 1, 2);
    REQUIRE(p.m == 1);
    REQUIRE(p.A == mat(1, 2, {1, -1}));
    auto profile = build_condition_profile(p);
    REQUIRE(profile.c1);
  }
  SECTION("single pixel rejected") {
    REQUIRE_THROWS_AS(make_huber_rof(vec({0}), 1.0, 1.0, 1, 1), ValidationError);
  }
  SECTION("declared constants") {
    auto p = make_huber_rof(Vector::Zero(12), 8.0, 0.05, 3, 4);
    auto profile = build_condition_profile(p);
    REQUIRE(profile.mu_f == 8.0);
    REQUIRE(profile.L_f == 8.0);
    REQUIRE(profile.mu_g == 0.05);
    REQUIRE(profile.L_g == kInf);
  }
  SECTION("difference operator geometry on a 2x2 grid") {
    Matrix d = grid_difference_operator(2, 2);
    REQUIRE(d.rows() == 4);  // 2 horizontal + 2 vertical
    REQUIRE(d.row(0) == mat(1, 4, {-1, 1, 0, 0}).row(0));
    REQUIRE(d.row(2) == mat(1, 4, {-1, 0, 1, 0}).row(0));
  }
}

TEST_CASE("affine constrained construction") {
  auto g = std::make_shared<QuadraticOracle>(1.0, Vector::Zero(2));
  auto p = make_affine_constrained(g, Matrix::Identity(2, 2), Vector::Zero(2));
  auto profile = build_condition_profile(p);
  REQUIRE(profile.c2);
  // prox of f at v = (-1, 3) with step 1 and b = (2, 2) is max(0, v + b)
  auto p2 = make_affine_constrained(g, Matrix::Identity(2, 2), vec({2, 2}));
  REQUIRE((p2.f->prox(1.0, vec({-1, 3})) - vec({1, 5})).norm() == 0.0);
  REQUIRE_THROWS_AS(
      make_affine_constrained(g, Matrix::Identity(2, 2), Vector::Zero(3)),
      ValidationError);
}

TEST_CASE("policy evaluation construction") {
  SECTION("scalar transition") {
    Matrix features(2, 1);
    features << 1, 1;
    auto p = make_policy_eval(features, vec({1}), 0.5);
    auto profile = build_condition_profile(p);
    REQUIRE(p.A(0, 0) == Catch::Approx(-0.5));  // stored with the sign flip
    REQUIRE(profile.c3);
    auto* g = dynamic_cast<const QuadraticPlusLinearOracle*>(p.g.get());
    REQUIRE(g != nullptr);
    REQUIRE(g->matrix()(0, 0) == Catch::Approx(1.0));
    REQUIRE(g->linear()(0) == Catch::Approx(1.0));
  }
  SECTION("discount-free orthonormal features") {
    Matrix features = Matrix::Identity(3, 2);
    auto p = make_policy_eval(features, vec({1, 0}), 0.0);
    auto profile = build_condition_profile(p);
    REQUIRE(profile.c3);
    REQUIRE((p.A + Matrix::Identity(2, 2) * 1.0).norm() ==
            Catch::Approx(0.0).margin(1e-14));
  }
  SECTION("degenerate features produce a warning") {
    Matrix features = Matrix::Zero(3, 2);
    auto p = make_policy_eval(features, vec({1, 1}), 0.5);
    auto profile = build_condition_profile(p);
    REQUIRE_FALSE(profile.warnings.empty());
    REQUIRE_FALSE(profile.c3);
  }
}

TEST_CASE("random problem generator") {
  SECTION("C1 with prescribed singular values") {
    RandomProblemSpec spec;
    spec.mu_f = 1;
    spec.mu_g = 4;
    spec.sing_min = spec.sing_max = 2;
    auto p = make_random(Condition::C1, 2, 2, spec, 5);
    auto profile = build_condition_profile(p);
    REQUIRE(profile.c1);
    REQUIRE(profile.norm_A == Catch::Approx(2.0).epsilon(1e-12));
    REQUIRE(profile.mu_f == Catch::Approx(1.0));
    REQUIRE(profile.mu_g == Catch::Approx(4.0));
  }
  SECTION("C3 with affine functions") {
    RandomProblemSpec spec;
    spec.sing_min = 0.5;
    spec.sing_max = 2.0;
    auto p = make_random(Condition::C3, 3, 3, spec, 9);
    auto profile = build_condition_profile(p);
    REQUIRE(profile.c3);
    REQUIRE_FALSE(profile.c1);
    REQUIRE_FALSE(profile.c2);
    REQUIRE(profile.mu_A == Catch::Approx(0.25).epsilon(1e-10));
    REQUIRE(profile.L_f == 0.0);
  }
  SECTION("C2 requires m >= n") {
    RandomProblemSpec spec;
    spec.mu_g = 1;
    spec.L_g = 2;
    spec.sing_min = 0.5;
    spec.sing_max = 1.0;
    REQUIRE_THROWS_AS(make_random(Condition::C2, 3, 2, spec, 1), ValidationError);
    auto p = make_random(Condition::C2, 2, 3, spec, 1);
    REQUIRE(build_condition_profile(p).c2);
  }
  SECTION("declared constants are attained") {
    RandomProblemSpec spec;
    spec.mu_f = 0.5;
    spec.L_f = 2.0;
    spec.mu_g = 1.0;
    spec.L_g = 3.0;
    spec.sing_min = 0.3;
    spec.sing_max = 1.7;
    auto p = make_random(Condition::C1, 4, 4, spec, 13);
    ValidationReport rf = validate_oracle(*p.f, 150, 2.0, 17);
    REQUIRE(rf.pass);
    REQUIRE(rf.attained_mu <= 1.01 * spec.mu_f);
    REQUIRE(rf.attained_lip >= 0.99 * spec.L_f);
  }
}

TEST_CASE("counterexample profiles violate the targeted conditions") {
  {
    auto profile = build_condition_profile(make_counterexample(1));
    REQUIRE_FALSE(profile.c2);  // g not strongly convex
    REQUIRE_FALSE(profile.c3);  // n != m
  }
  {
    auto profile = build_condition_profile(make_counterexample(2));
    REQUIRE_FALSE(profile.c2);  // g nonsmooth
    REQUIRE_FALSE(profile.c3);
  }
  {
    auto profile = build_condition_profile(make_counterexample(3));
    REQUIRE_FALSE(profile.c1);  // f merely convex
    REQUIRE_FALSE(profile.c2);  // A = 0
  }
  REQUIRE_THROWS_AS(make_counterexample(4), ValidationError);
}
