// Command-line front end: define problems via JSON configs, compute rate
// certificates, run the algorithms, execute the verification suites and
// emit CSV/JSON results suitable for plotting.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "pdsaddle/serialize.hpp"
#include "pdsaddle/verify.hpp"

namespace {

using namespace pdsaddle;

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot open output path: " + path);
  out << text;
}

Json load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config: " + path);
  Json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw ValidationError(std::string("config is not valid JSON: ") + e.what());
  }
  return j;
}

bool algorithm_supports(Algorithm alg, Condition c) {
  if (alg == Algorithm::kPlainPdg || alg == Algorithm::kPrecondGda)
    return c == Condition::C2;
  return true;
}

Condition pick_condition(const ExperimentConfig& cfg, const ConditionProfile& profile) {
  if (cfg.condition) {
    if (!profile.has(*cfg.condition))
      throw ConditionError(std::string("condition_not_satisfied: ") +
                           to_string(*cfg.condition));
    return *cfg.condition;
  }
  for (Condition c : {Condition::C1, Condition::C2, Condition::C3})
    if (profile.has(c) && algorithm_supports(cfg.algorithm, c)) return c;
  throw ConditionError("condition_not_satisfied: none of C1/C2/C3 holds");
}

struct Prepared {
  SaddleProblem problem;
  ConditionProfile profile;
  Condition condition;
  StepSizes steps;
  RateCertificate certificate;
};

Prepared prepare(const ExperimentConfig& cfg) {
  if (cfg.problem_json.is_null()) throw ValidationError("config has no problem");
  Prepared p{problem_from_json(cfg.problem_json), {}, Condition::C1, {}, {}};
  p.profile = build_condition_profile(p.problem);
  p.condition = pick_condition(cfg, p.profile);
  std::map<std::string, double> search_info;
  if (cfg.optimal_steps) {
    StepSearchResult res =
        optimal_stepsizes(cfg.algorithm, p.condition, p.profile, cfg.epsilon);
    p.steps = res.steps;
    search_info = res.info;
  } else {
    p.steps = cfg.steps;
  }
  p.certificate = certify(p.profile, cfg.algorithm, p.condition, p.steps);
  for (const auto& [k, v] : search_info) p.certificate.constants["search_" + k] = v;
  return p;
}

Iterate initial_point(const ExperimentConfig& cfg, const SaddleProblem& problem) {
  switch (cfg.w0_kind) {
    case ExperimentConfig::W0::kZero:
      return Iterate::zero(problem);
    case ExperimentConfig::W0::kRandom: {
      SplitRng rng(cfg.w0_seed, 11);
      return unstack(rng.uniform_ball(problem.n + problem.m, 10.0), problem.n,
                     problem.m);
    }
    case ExperimentConfig::W0::kExplicit:
      return unstack(cfg.w0_values, problem.n, problem.m);
  }
  throw ValidationError("bad w0");
}

int cmd_rates(const ExperimentConfig& cfg) {
  Prepared p = prepare(cfg);
  Json out = certificate_to_json(p.certificate);
  write_text(cfg.out_path, out.dump(2) + "\n");
  return 0;
}

int cmd_run(const ExperimentConfig& cfg) {
  if (cfg.problem_json.is_null()) throw ValidationError("config has no problem");
  SaddleProblem problem = problem_from_json(cfg.problem_json);
  ConditionProfile profile = build_condition_profile(problem);
  StepSizes steps = cfg.steps;
  if (cfg.optimal_steps) {
    Condition condition = pick_condition(cfg, profile);
    steps = optimal_stepsizes(cfg.algorithm, condition, profile, cfg.epsilon).steps;
  }
  AlgorithmId id(cfg.algorithm, cfg.theta);
  Trajectory traj =
      run(problem, id, steps, initial_point(cfg, problem), cfg.max_iters,
          cfg.residual_tol);
  const Preconditioner norm = residual_norm(problem, id, steps);
  std::optional<SaddleSolution> ref;
  try {
    ref = solve_reference(problem);
  } catch (const std::exception&) {
  }
  std::ostringstream csv;
  csv << "iter,residual_phi";
  if (ref) csv << ",dist_to_ref_phi";
  csv << ",ratio\n";
  Vector star;
  if (ref) {
    star.resize(problem.n + problem.m);
    star << ref->x, ref->y;
  }
  double prev = 0;
  for (size_t k = 0; k < traj.iterates.size(); ++k) {
    csv << k << ',' << format_double(traj.residuals[k]);
    double metric = traj.residuals[k];
    if (ref) {
      const double dist = norm.norm(stack(traj.iterates[k]) - star);
      csv << ',' << format_double(dist);
      metric = dist;
    }
    csv << ',';
    if (k > 0 && prev > 0) csv << format_double(metric / prev);
    csv << '\n';
    prev = metric;
  }
  write_text(cfg.out_path, csv.str());
  return 0;
}

SplitKind split_for(Algorithm alg) {
  switch (alg) {
    case Algorithm::kChambollePock: return SplitKind::kCp;
    case Algorithm::kSemiImplicit: return SplitKind::kSemi;
    case Algorithm::kExplicitPdg: return SplitKind::kExplicit;
    default:
      throw ValidationError("A1/A2 checks apply to the splitting algorithms only");
  }
}

int cmd_verify(const ExperimentConfig& cfg) {
  Prepared p = prepare(cfg);
  Json report;
  report["schema"] = "1";
  report["certificate"] = certificate_to_json(p.certificate);
  bool all_pass = true;
  for (const std::string& check : cfg.checks) {
    if (check == "contraction") {
      const double rho = cfg.rho_override.value_or(p.certificate.rho);
      ContractionReport r = check_contraction(
          step_map(p.problem, AlgorithmId(cfg.algorithm, cfg.theta), p.steps),
          certificate_norm(p.certificate, p.problem), std::min(rho, 1.0),
          cfg.verify_pairs, cfg.verify_radius, cfg.verify_seed);
      Json jr;
      jr["pairs_tested"] = r.pairs_tested;
      jr["max_ratio"] = r.max_ratio;
      jr["certified_rho"] = r.certified_rho;
      jr["pass"] = r.pass;
      jr["seed"] = r.seed;
      if (!r.pass) {
        jr["witness_a"] = to_json(r.worst_a);
        jr["witness_b"] = to_json(r.worst_b);
      }
      report["contraction"] = jr;
      all_pass = all_pass && r.pass;
    } else if (check == "a1a2") {
      SplitKind split = split_for(cfg.algorithm);
      PsiShift psi_b, psi_f;
      const auto& c = p.certificate.constants;
      if (p.certificate.norm == "phi_plus_psi_b") psi_b = p.certificate.psi_b;
      if (cfg.algorithm == Algorithm::kSemiImplicit && c.count("gamma_y"))
        psi_f = PsiShift(0, c.at("gamma_y"));
      if (cfg.algorithm == Algorithm::kExplicitPdg)
        psi_f = PsiShift(c.count("beta_x") ? c.at("beta_x") : 0.0,
                         c.count("beta_y") ? c.at("beta_y") : 0.0);
      A1A2Report r = check_A1_A2(p.problem, split, p.steps, psi_b, psi_f,
                                 cfg.verify_pairs, cfg.verify_radius, cfg.verify_seed);
      Json jr;
      jr["pairs_tested"] = r.pairs_tested;
      jr["worst_a1_violation"] = r.worst_a1_violation;
      jr["worst_a2_violation"] = r.worst_a2_violation;
      jr["gamma"] = r.gamma;
      jr["rho_from_gamma"] = r.rho_from_gamma;
      jr["pass"] = r.pass;
      report["a1a2"] = jr;
      all_pass = all_pass && r.pass;
    } else if (check == "inverse_lipschitz") {
      Json jr = Json::array();
      auto add = [&](OperatorPart part, const char* name, double certified) {
        ModulusReport r =
            estimate_inverse_lipschitz(p.problem, part, cfg.verify_pairs,
                                       cfg.verify_radius, cfg.verify_seed, certified);
        Json one;
        one["operator"] = name;
        one["samples"] = r.samples;
        one["empirical_min_ratio"] = r.empirical_min_ratio;
        one["certified_inverse_modulus"] = r.certified_inverse_modulus;
        one["pass"] = r.pass;
        jr.push_back(one);
        all_pass = all_pass && r.pass;
      };
      if (p.profile.c2) add(OperatorPart::kFullF, "full_F",
                            1.0 / constant_R2(p.profile).R2);
      if (p.profile.c3) {
        add(OperatorPart::kFullF, "full_F",
            1.0 / constant_R3(p.profile, SmoothnessArg::kBoth).R3);
        add(OperatorPart::kFbSkew, "F_b_skew", std::sqrt(p.profile.mu_A));
        if (std::isfinite(p.profile.L_f))
          add(OperatorPart::kFbSemi, "F_b_semi",
              1.0 / constant_R3(p.profile, SmoothnessArg::kFOnly).R3);
      }
      report["inverse_lipschitz"] = jr;
    } else {
      throw ValidationError("unknown check: " + check);
    }
  }
  report["pass"] = all_pass;
  write_text(cfg.out_path, report.dump(2) + "\n");
  return all_pass ? 0 : 1;
}

int cmd_bench(const ExperimentConfig& cfg) {
  if (cfg.bench.is_null()) throw ValidationError("bench config missing");
  const std::string name = cfg.bench.at("name").get<std::string>();
  SaddleProblem problem = [&]() -> SaddleProblem {
    SplitRng rng(cfg.bench.value("seed", 0), 23);
    if (name == "huber_rof") {
      Json gen = cfg.bench;
      gen["name"] = "huber_rof";
      if (!gen.contains("image_seed")) gen["image_seed"] = gen.value("seed", 0);
      return problem_from_generator(gen);
    }
    if (name == "affine_constrained") {
      const int n = cfg.bench.value("n", 8);
      const int m = cfg.bench.value("m", n + 4);
      const double mu_g = cfg.bench.value("mu_g", 1.0);
      const double l_g = cfg.bench.value("L_g", 4.0);
      Vector evals(m);
      evals(0) = mu_g;
      if (m > 1) evals(m - 1) = l_g;
      for (int i = 1; i + 1 < m; ++i) evals(i) = rng.uniform(mu_g, l_g);
      auto g = std::make_shared<QuadraticOracle>(
          random_symmetric_with_spectrum(evals, rng), rng.gaussian(m));
      Matrix a = detail::random_matrix_with_singulars(m, n, 0.5, 2.0, rng);
      Vector b = rng.gaussian(n);
      return make_affine_constrained(std::move(g), a, b);
    }
    if (name == "policy_eval") {
      Json gen;
      gen["name"] = "policy_eval_random";
      gen["n"] = cfg.bench.value("n", 4);
      gen["T"] = cfg.bench.value("T", 50);
      gen["gamma"] = cfg.bench.value("gamma", 0.9);
      gen["seed"] = cfg.bench.value("seed", 0);
      return problem_from_generator(gen);
    }
    throw ValidationError("bench name must be huber_rof, affine_constrained or policy_eval");
  }();

  const ConditionProfile profile = build_condition_profile(problem);
  std::ostringstream csv;
  csv << "algorithm,condition,theorem,iters_to_tol,certified_rho,observed_worst_ratio\n";
  bool any_row = false;
  for (Algorithm alg :
       {Algorithm::kChambollePock, Algorithm::kSemiImplicit, Algorithm::kExplicitPdg,
        Algorithm::kPlainPdg, Algorithm::kPrecondGda}) {
    std::optional<Condition> chosen;
    for (Condition c : {Condition::C1, Condition::C2, Condition::C3})
      if (profile.has(c) && algorithm_supports(alg, c)) {
        chosen = c;
        break;
      }
    if (!chosen) continue;
    StepSizes steps;
    RateCertificate cert;
    try {
      steps = optimal_stepsizes(alg, *chosen, profile, cfg.epsilon).steps;
      cert = certify(profile, alg, *chosen, steps);
    } catch (const CapabilityError&) {
      continue;
    } catch (const ConditionError&) {
      continue;
    }
    // the step itself may need capabilities the problem lacks
    try {
      apply_step(problem, AlgorithmId(alg), steps, Iterate::zero(problem));
    } catch (const CapabilityError&) {
      continue;
    }
    SplitRng rng(cfg.verify_seed, 29);
    Iterate w0 = unstack(rng.uniform_ball(problem.n + problem.m, 5.0), problem.n,
                         problem.m);
    Trajectory traj = run(problem, AlgorithmId(alg), steps, w0, cfg.max_iters, 1e-8);
    double observed = 0;
    try {
      SaddleSolution ref = solve_reference(problem);
      QLinearReport q = check_qlinear(traj, ref, cert.rho,
                                      certificate_norm(cert, problem), 1e-10);
      observed = q.worst_step_ratio;
    } catch (const std::exception&) {
      for (size_t k = 1; k < traj.residuals.size(); ++k)
        if (traj.residuals[k - 1] > 1e-10)
          observed = std::max(observed, traj.residuals[k] / traj.residuals[k - 1]);
    }
    csv << to_string(alg) << ',' << to_string(*chosen) << ',' << cert.theorem << ','
        << (traj.stop_reason == StopReason::kResidualTol
                ? std::to_string(traj.iterates.size() - 1)
                : "unconverged")
        << ',' << format_double(cert.rho) << ',' << format_double(observed) << '\n';
    any_row = true;
  }
  if (!any_row) throw ValidationError("no applicable algorithm for this benchmark");
  write_text(cfg.out_path, csv.str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"primal-dual saddle-point rate certification toolkit"};
  app.require_subcommand(1);
  std::string config_path, out_path;
  std::optional<long> seed_flag;
  std::optional<double> eps_flag;
  std::optional<int> pairs_flag;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "experiment config JSON")->required();
    sub->add_option("--out", out_path, "output path (default: stdout)");
    sub->add_option("--seed", seed_flag, "override verification seed");
    sub->add_option("--eps", eps_flag, "override epsilon slack");
    sub->add_option("--pairs", pairs_flag, "override verification pair count");
  };
  CLI::App* rates = app.add_subcommand("rates", "compute a rate certificate");
  CLI::App* run_cmd = app.add_subcommand("run", "run an algorithm, emit trajectory CSV");
  CLI::App* verify = app.add_subcommand("verify", "run the verification suites");
  CLI::App* bench = app.add_subcommand("bench", "benchmark comparison CSV");
  for (CLI::App* sub : {rates, run_cmd, verify, bench}) add_common(sub);

  CLI11_PARSE(app, argc, argv);

  auto fail = [&](const std::string& reason, const std::string& detail, int code) {
    Json err;
    err["error"]["reason"] = reason;
    err["error"]["detail"] = detail;
    std::cerr << err.dump(2) << "\n";
    return code;
  };

  try {
    ExperimentConfig cfg = config_from_json(load_config(config_path));
    if (!out_path.empty()) cfg.out_path = out_path;
    if (seed_flag) cfg.verify_seed = static_cast<uint64_t>(*seed_flag);
    if (eps_flag) cfg.epsilon = *eps_flag;
    if (pairs_flag) cfg.verify_pairs = *pairs_flag;
    if (app.got_subcommand(rates)) return cmd_rates(cfg);
    if (app.got_subcommand(run_cmd)) return cmd_run(cfg);
    if (app.got_subcommand(verify)) return cmd_verify(cfg);
    if (app.got_subcommand(bench)) return cmd_bench(cfg);
    return 2;
  } catch (const StepSizeError& e) {
    return fail("step_bound", e.what(), 2);
  } catch (const ConditionError& e) {
    return fail("condition_not_satisfied", e.what(), 2);
  } catch (const DivergenceError& e) {
    return fail("divergence", std::string(e.what()) + " at iteration " +
                                  std::to_string(e.iteration()), 3);
  } catch (const UnsolvedError& e) {
    return fail("unsolved", e.what(), 2);
  } catch (const ValidationError& e) {
    return fail("invalid_config", e.what(), 2);
  } catch (const std::exception& e) {
    return fail("internal_error", e.what(), 2);
  }
}
