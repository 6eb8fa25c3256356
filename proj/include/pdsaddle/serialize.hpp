#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "pdsaddle/core.hpp"
#include "pdsaddle/oracle.hpp"
#include "pdsaddle/problem.hpp"
#include "pdsaddle/rates.hpp"
#include "pdsaddle/splitting.hpp"

namespace pdsaddle {

using Json = nlohmann::json;

inline Json to_json(const Vector& v) {
  Json arr = Json::array();
  for (int i = 0; i < v.size(); ++i) arr.push_back(v(i));
  return arr;
}

inline Vector vector_from_json(const Json& j) {
  if (!j.is_array()) throw ValidationError("expected a JSON array of numbers");
  Vector v(j.size());
  for (size_t i = 0; i < j.size(); ++i) v(i) = j[i].get<double>();
  return v;
}

inline Json to_json(const Matrix& m) {
  Json j;
  j["rows"] = m.rows();
  j["cols"] = m.cols();
  Json data = Json::array();
  for (int r = 0; r < m.rows(); ++r)
    for (int c = 0; c < m.cols(); ++c) data.push_back(m(r, c));
  j["data"] = data;
  return j;
}

inline Matrix matrix_from_json(const Json& j) {
  if (!j.contains("rows") || !j.contains("cols") || !j.contains("data"))
    throw ValidationError("matrix JSON needs rows, cols, data");
  const long rows = j["rows"].get<long>();
  const long cols = j["cols"].get<long>();
  const auto& data = j["data"];
  if (static_cast<long>(data.size()) != rows * cols)
    throw ValidationError("matrix data length does not match rows*cols");
  Matrix m(rows, cols);
  for (long r = 0; r < rows; ++r)
    for (long c = 0; c < cols; ++c) m(r, c) = data[r * cols + c].get<double>();
  return m;
}

inline Json region_to_json(const Region& region) {
  Json j;
  switch (region.kind) {
    case Region::Kind::kAll: j["type"] = "all"; break;
    case Region::Kind::kNonneg: j["type"] = "nonneg"; break;
    case Region::Kind::kBox:
      j["type"] = "box";
      j["lo"] = to_json(region.lo);
      j["hi"] = to_json(region.hi);
      break;
    case Region::Kind::kBall:
      j["type"] = "ball";
      j["radius"] = region.radius;
      break;
  }
  return j;
}

inline Region region_from_json(const Json& j, int dim) {
  const std::string type = j.at("type").get<std::string>();
  if (type == "all") return Region::all();
  if (type == "nonneg") return Region::nonneg();
  if (type == "box") {
    auto expand = [dim](const Json& side) {
      if (side.is_number()) return Vector::Constant(dim, side.get<double>()).eval();
      return vector_from_json(side);
    };
    return Region::box(expand(j.at("lo")), expand(j.at("hi")));
  }
  if (type == "ball") return Region::ball(j.at("radius").get<double>());
  throw ValidationError("unknown region type: " + type);
}

/// Serializes any oracle the library constructs. Catalog kinds use their
/// catalog tags; the composite projected-quadratic used by the application
/// builders round-trips under its own tag.
inline Json oracle_to_json(const FunctionOracle& oracle) {
  Json j;
  j["dim"] = oracle.dim();
  if (dynamic_cast<const ZeroOracle*>(&oracle)) {
    j["kind"] = "zero";
    return j;
  }
  if (const auto* o = dynamic_cast<const LinearOracle*>(&oracle)) {
    j["kind"] = "linear";
    j["b"] = to_json(o->slope());
    return j;
  }
  if (const auto* o = dynamic_cast<const QuadraticOracle*>(&oracle)) {
    j["kind"] = "quadratic";
    if (o->is_scalar())
      j["weight"] = o->scalar_weight();
    else
      j["weight"] = to_json(o->matrix());
    j["center"] = to_json(o->center());
    return j;
  }
  if (const auto* o = dynamic_cast<const QuadraticPlusLinearOracle*>(&oracle)) {
    j["kind"] = "quadratic_plus_linear";
    j["weight"] = to_json(o->matrix());
    j["b"] = to_json(o->linear());
    return j;
  }
  if (const auto* o = dynamic_cast<const ProjectionOracle*>(&oracle)) {
    switch (o->region().kind) {
      case Region::Kind::kNonneg: j["kind"] = "indicator_nonneg"; return j;
      case Region::Kind::kBall:
        j["kind"] = "indicator_ball";
        j["radius"] = o->region().radius;
        return j;
      case Region::Kind::kBox:
        j["kind"] = "indicator_box";
        j["lo"] = to_json(o->region().lo);
        j["hi"] = to_json(o->region().hi);
        return j;
      default: break;
    }
    throw ValidationError("cannot serialize projection oracle");
  }
  if (const auto* o = dynamic_cast<const L1Oracle*>(&oracle)) {
    j["kind"] = "l1";
    j["weight"] = o->weight();
    return j;
  }
  if (const auto* o = dynamic_cast<const ProjectedQuadraticOracle*>(&oracle)) {
    j["kind"] = "projected_quadratic";
    j["weight"] = o->weight();
    j["linear"] = to_json(o->linear());
    j["region"] = region_to_json(o->region());
    return j;
  }
  throw ValidationError("oracle type has no JSON representation");
}

inline OraclePtr oracle_from_json(const Json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  const int dim = j.at("dim").get<int>();
  if (kind == "zero") return make_oracle(OracleCatalogEntry::zero(dim));
  if (kind == "linear")
    return make_oracle(OracleCatalogEntry::linear(vector_from_json(j.at("b"))));
  if (kind == "quadratic") {
    Vector center = j.contains("center") ? vector_from_json(j["center"])
                                         : Vector::Zero(dim);
    if (j.at("weight").is_number())
      return make_oracle(
          OracleCatalogEntry::quadratic(dim, j["weight"].get<double>(), center));
    return make_oracle(
        OracleCatalogEntry::quadratic(matrix_from_json(j["weight"]), center));
  }
  if (kind == "quadratic_plus_linear")
    return make_oracle(OracleCatalogEntry::quadratic_plus_linear(
        matrix_from_json(j.at("weight")), vector_from_json(j.at("b"))));
  if (kind == "indicator_nonneg")
    return make_oracle(OracleCatalogEntry::indicator_nonneg(dim));
  if (kind == "indicator_ball")
    return make_oracle(OracleCatalogEntry::indicator_ball(dim, j.at("radius").get<double>()));
  if (kind == "indicator_box") {
    auto expand = [dim](const Json& side) {
      if (side.is_number()) return Vector::Constant(dim, side.get<double>()).eval();
      return vector_from_json(side);
    };
    return make_oracle(
        OracleCatalogEntry::indicator_box(expand(j.at("lo")), expand(j.at("hi"))));
  }
  if (kind == "l1")
    return make_oracle(OracleCatalogEntry::l1(dim, j.at("weight").get<double>()));
  if (kind == "projected_quadratic") {
    Vector linear = j.contains("linear") ? vector_from_json(j["linear"])
                                         : Vector::Zero(dim);
    const double weight = j.value("weight", 0.0);
    return std::make_shared<ProjectedQuadraticOracle>(
        dim, weight, linear, region_from_json(j.at("region"), dim));
  }
  throw ValidationError("unknown oracle kind: " + kind);
}

inline Json problem_to_json(const SaddleProblem& p) {
  Json j;
  j["f"] = oracle_to_json(*p.f);
  j["g"] = oracle_to_json(*p.g);
  j["A"] = to_json(p.A);
  return j;
}

inline SaddleProblem problem_from_generator(const Json& gen) {
  const std::string name = gen.at("name").get<std::string>();
  if (name == "huber_rof") {
    const int rows = gen.at("rows").get<int>();
    const int cols = gen.at("cols").get<int>();
    Vector image;
    if (gen.contains("image")) {
      image = vector_from_json(gen["image"]);
    } else {
      SplitRng rng(gen.value("image_seed", 0), 3);
      image.resize(static_cast<long>(rows) * cols);
      for (long i = 0; i < image.size(); ++i) image(i) = rng.uniform();
    }
    return make_huber_rof(image, gen.at("lambda").get<double>(),
                          gen.at("alpha").get<double>(), rows, cols);
  }
  if (name == "affine_constrained")
    return make_affine_constrained(oracle_from_json(gen.at("g")),
                                   matrix_from_json(gen.at("A")),
                                   vector_from_json(gen.at("b")));
  if (name == "policy_eval")
    return make_policy_eval(matrix_from_json(gen.at("features")),
                            vector_from_json(gen.at("rewards")),
                            gen.at("gamma").get<double>());
  if (name == "policy_eval_random") {
    const int n = gen.at("n").get<int>();
    const long T = gen.at("T").get<long>();
    SplitRng rng(gen.value("seed", 0), 5);
    Matrix features(T + 1, n);
    for (long t = 0; t <= T; ++t) features.row(t) = rng.gaussian(n).transpose();
    Vector rewards(T);
    for (long t = 0; t < T; ++t) rewards(t) = rng.uniform(-1.0, 1.0);
    return make_policy_eval(features, rewards, gen.at("gamma").get<double>());
  }
  if (name == "random") {
    const std::string cond = gen.at("condition").get<std::string>();
    Condition condition = cond == "C1"   ? Condition::C1
                          : cond == "C2" ? Condition::C2
                          : cond == "C3" ? Condition::C3
                                         : throw ValidationError("bad condition");
    RandomProblemSpec spec;
    spec.mu_f = gen.value("mu_f", 0.0);
    spec.mu_g = gen.value("mu_g", 0.0);
    spec.L_f = gen.value("L_f", 0.0);
    spec.L_g = gen.value("L_g", 0.0);
    spec.sing_min = gen.value("sing_min", 0.0);
    spec.sing_max = gen.value("sing_max", 0.0);
    return make_random(condition, gen.at("n").get<int>(), gen.at("m").get<int>(), spec,
                       gen.value("seed", 0));
  }
  if (name == "counterexample") {
    const std::string which = gen.at("which").get<std::string>();
    if (which == "I") return make_counterexample(1);
    if (which == "II") return make_counterexample(2);
    if (which == "III") return make_counterexample(3);
    throw ValidationError("counterexample must be I, II or III");
  }
  throw ValidationError("unknown generator: " + name);
}

inline SaddleProblem problem_from_json(const Json& j) {
  if (j.contains("generator")) return problem_from_generator(j["generator"]);
  return SaddleProblem::make(oracle_from_json(j.at("f")), oracle_from_json(j.at("g")),
                             matrix_from_json(j.at("A")));
}

inline Json certificate_to_json(const RateCertificate& cert) {
  Json j;
  j["schema"] = "1";
  j["algorithm"] = to_string(cert.algorithm);
  j["condition"] = to_string(cert.condition);
  j["theorem"] = cert.theorem;
  j["rho"] = cert.rho;
  Json norm;
  norm["kind"] = cert.norm;
  if (cert.norm == "phi_plus_psi_b") {
    norm["gamma_x"] = cert.psi_b.gamma_x;
    norm["gamma_y"] = cert.psi_b.gamma_y;
  }
  j["norm"] = norm;
  Json steps;
  steps["tau"] = cert.steps.tau;
  steps["sigma"] = cert.steps.sigma;
  steps["alpha"] = cert.steps.alpha;
  steps["eta"] = cert.steps.eta;
  steps["nu"] = cert.steps.nu;
  steps["epsilon"] = cert.steps.epsilon;
  j["steps"] = steps;
  j["constants"] = cert.constants;
  j["flags"] = cert.flags;
  return j;
}

inline Algorithm algorithm_from_string(const std::string& s) {
  if (s == "chambolle_pock") return Algorithm::kChambollePock;
  if (s == "semi_implicit") return Algorithm::kSemiImplicit;
  if (s == "explicit_pdg") return Algorithm::kExplicitPdg;
  if (s == "plain_pdg") return Algorithm::kPlainPdg;
  if (s == "precond_gda") return Algorithm::kPrecondGda;
  throw ValidationError("unknown algorithm: " + s);
}

inline Condition condition_from_string(const std::string& s) {
  if (s == "C1") return Condition::C1;
  if (s == "C2") return Condition::C2;
  if (s == "C3") return Condition::C3;
  throw ValidationError("unknown condition: " + s);
}

/// Parsed CLI experiment configuration (schema "1").
struct ExperimentConfig {
  Json problem_json;
  Algorithm algorithm = Algorithm::kChambollePock;
  double theta = 1.0;
  std::optional<Condition> condition;
  bool optimal_steps = true;
  StepSizes steps;
  double epsilon = 1e-3;
  long max_iters = 20000;
  double residual_tol = 1e-10;
  enum class W0 { kZero, kRandom, kExplicit };
  W0 w0_kind = W0::kZero;
  uint64_t w0_seed = 0;
  Vector w0_values;
  int verify_pairs = 1000;
  double verify_radius = 10.0;
  uint64_t verify_seed = 1;
  std::optional<double> rho_override;
  std::vector<std::string> checks = {"contraction"};
  Json bench;
  std::string out_path;
  std::string out_format = "csv";
};

inline ExperimentConfig config_from_json(const Json& j) {
  if (j.value("schema", "") != "1")
    throw ValidationError(R"(config needs "schema": "1")");
  ExperimentConfig cfg;
  if (j.contains("problem")) cfg.problem_json = j["problem"];
  if (j.contains("algorithm"))
    cfg.algorithm = algorithm_from_string(j["algorithm"].get<std::string>());
  cfg.theta = j.value("theta", 1.0);
  if (j.contains("condition"))
    cfg.condition = condition_from_string(j["condition"].get<std::string>());
  cfg.epsilon = j.value("epsilon", 1e-3);
  cfg.steps.epsilon = cfg.epsilon;
  if (j.contains("steps")) {
    const Json& s = j["steps"];
    if (s.is_string()) {
      if (s.get<std::string>() != "optimal")
        throw ValidationError("steps must be \"optimal\" or an object");
      cfg.optimal_steps = true;
    } else {
      cfg.optimal_steps = false;
      cfg.steps.tau = s.value("tau", 0.0);
      cfg.steps.sigma = s.value("sigma", 0.0);
      cfg.steps.alpha = s.value("alpha", 0.0);
      cfg.steps.eta = s.value("eta", 0.0);
      cfg.steps.nu = s.value("nu", 1.0);
      cfg.steps.epsilon = s.value("epsilon", cfg.epsilon);
    }
  }
  if (j.contains("run")) {
    const Json& r = j["run"];
    cfg.max_iters = r.value("max_iters", 20000L);
    cfg.residual_tol = r.value("residual_tol", 1e-10);
    if (r.contains("w0")) {
      const Json& w = r["w0"];
      if (w.is_string() && w.get<std::string>() == "zero") {
        cfg.w0_kind = ExperimentConfig::W0::kZero;
      } else if (w.is_object() && w.contains("random")) {
        cfg.w0_kind = ExperimentConfig::W0::kRandom;
        cfg.w0_seed = w["random"].get<uint64_t>();
      } else if (w.is_array()) {
        cfg.w0_kind = ExperimentConfig::W0::kExplicit;
        cfg.w0_values = vector_from_json(w);
      } else {
        throw ValidationError("run.w0 must be \"zero\", {\"random\": seed} or an array");
      }
    }
  }
  if (j.contains("verify")) {
    const Json& v = j["verify"];
    cfg.verify_pairs = v.value("pairs", 1000);
    cfg.verify_radius = v.value("radius", 10.0);
    cfg.verify_seed = v.value("seed", 1UL);
    if (v.contains("rho_override")) cfg.rho_override = v["rho_override"].get<double>();
    if (v.contains("checks")) {
      cfg.checks.clear();
      for (const auto& c : v["checks"]) cfg.checks.push_back(c.get<std::string>());
    }
  }
  if (j.contains("bench")) cfg.bench = j["bench"];
  if (j.contains("output")) {
    cfg.out_path = j["output"].value("path", "");
    cfg.out_format = j["output"].value("format", "csv");
  }
  return cfg;
}

inline Json config_to_json(const ExperimentConfig& cfg) {
  Json j;
  j["schema"] = "1";
  if (!cfg.problem_json.is_null()) j["problem"] = cfg.problem_json;
  j["algorithm"] = to_string(cfg.algorithm);
  j["theta"] = cfg.theta;
  if (cfg.condition) j["condition"] = to_string(*cfg.condition);
  j["epsilon"] = cfg.epsilon;
  if (cfg.optimal_steps) {
    j["steps"] = "optimal";
  } else {
    Json s;
    s["tau"] = cfg.steps.tau;
    s["sigma"] = cfg.steps.sigma;
    s["alpha"] = cfg.steps.alpha;
    s["eta"] = cfg.steps.eta;
    s["nu"] = cfg.steps.nu;
    s["epsilon"] = cfg.steps.epsilon;
    j["steps"] = s;
  }
  Json r;
  r["max_iters"] = cfg.max_iters;
  r["residual_tol"] = cfg.residual_tol;
  switch (cfg.w0_kind) {
    case ExperimentConfig::W0::kZero: r["w0"] = "zero"; break;
    case ExperimentConfig::W0::kRandom: r["w0"] = Json{{"random", cfg.w0_seed}}; break;
    case ExperimentConfig::W0::kExplicit: r["w0"] = to_json(cfg.w0_values); break;
  }
  j["run"] = r;
  Json v;
  v["pairs"] = cfg.verify_pairs;
  v["radius"] = cfg.verify_radius;
  v["seed"] = cfg.verify_seed;
  if (cfg.rho_override) v["rho_override"] = *cfg.rho_override;
  v["checks"] = cfg.checks;
  j["verify"] = v;
  if (!cfg.bench.is_null()) j["bench"] = cfg.bench;
  Json o;
  o["path"] = cfg.out_path;
  o["format"] = cfg.out_format;
  j["output"] = o;
  return j;
}

}  // namespace pdsaddle
