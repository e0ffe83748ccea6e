#include "gaitrep/cli/config.h"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "gaitrep/errors.h"

namespace gaitrep::cli {
namespace {

using nlohmann::json;

void RejectUnknown(const json& j, const std::set<std::string>& known, const std::string& where) {
  if (!j.is_object()) throw ValidationError("config: '" + where + "' must be an object");
  for (const auto& [key, value] : j.items()) {
    if (!known.contains(key)) {
      throw ValidationError("config: unknown key '" + key + "' in " + where);
    }
  }
}

template <int N>
Eigen::Matrix<double, N, N> SquareOrDiagonal(const json& j, const std::string& name) {
  if (!j.is_array()) throw ValidationError("config: '" + name + "' must be an array");
  Eigen::Matrix<double, N, N> m = Eigen::Matrix<double, N, N>::Zero();
  if (j.size() != static_cast<std::size_t>(N)) {
    throw ValidationError("config: '" + name + "' needs " + std::to_string(N) + " entries");
  }
  if (j.front().is_array()) {
    for (int r = 0; r < N; ++r) {
      if (!j[r].is_array() || j[r].size() != static_cast<std::size_t>(N)) {
        throw ValidationError("config: '" + name + "' must be square");
      }
      for (int c = 0; c < N; ++c) m(r, c) = j[r][c].get<double>();
    }
  } else {
    for (int r = 0; r < N; ++r) m(r, r) = j[r].get<double>();
  }
  return m;
}

JointVector Pair(const json& j, const std::string& name) {
  if (!j.is_array() || j.size() != 2) {
    throw ValidationError("config: '" + name + "' needs two entries");
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

template <int N>
json MatrixJson(const Eigen::Matrix<double, N, N>& m) {
  json rows = json::array();
  for (int r = 0; r < N; ++r) {
    json row = json::array();
    for (int c = 0; c < N; ++c) row.push_back(m(r, c));
    rows.push_back(row);
  }
  return rows;
}

void ApplyLeg(RunConfig& c, const json& j) {
  RejectUnknown(j, {"l1", "l2", "m1", "m2", "mc1", "mc2", "g"}, "leg");
  const LegParams& o = c.leg;
  c.leg = LegParams(j.value("l1", o.l1()), j.value("l2", o.l2()), j.value("m1", o.m1()),
                    j.value("m2", o.m2()), j.value("mc1", o.mc1()), j.value("mc2", o.mc2()),
                    j.value("g", o.g()));
}

void ApplyGains(RunConfig& c, const json& j) {
  RejectUnknown(j, {"Q", "R", "eta"}, "gains");
  if (j.contains("Q")) c.gains.Q = SquareOrDiagonal<5>(j["Q"], "gains.Q");
  if (j.contains("R")) c.gains.R = SquareOrDiagonal<2>(j["R"], "gains.R");
  if (j.contains("eta")) c.gains.eta = j["eta"].get<double>();
}

CurvatureMode ParseMode(const std::string& s) {
  if (s == "accel") return CurvatureMode::kAcceleration;
  if (s == "graph") return CurvatureMode::kGraph;
  throw ValidationError("config: curvature mode must be 'accel' or 'graph', got '" + s + "'");
}

void ApplyNodes(RunConfig& c, const json& j) {
  RejectUnknown(j, {"min_separation", "prominence", "prominence_fraction", "curvature_mode"},
                "nodes");
  if (j.contains("min_separation")) c.nodes.min_separation = j["min_separation"].get<double>();
  if (j.contains("prominence")) {
    if (j["prominence"].is_null()) {
      c.nodes.prominence.reset();
    } else {
      c.nodes.prominence = j["prominence"].get<double>();
    }
  }
  if (j.contains("prominence_fraction")) {
    c.nodes.prominence_fraction = j["prominence_fraction"].get<double>();
  }
  if (j.contains("curvature_mode")) c.nodes.mode = ParseMode(j["curvature_mode"]);
}

void ApplyOptimizer(RunConfig& c, const json& j) {
  RejectUnknown(j, {"starts", "perturbation", "max_evaluations", "initial_step", "max_restarts"},
                "optimizer");
  auto& o = c.optimizer;
  if (j.contains("starts")) o.starts = j["starts"].get<int>();
  if (j.contains("perturbation")) o.perturbation = j["perturbation"].get<double>();
  if (j.contains("max_evaluations")) o.nelder_mead.max_evaluations = j["max_evaluations"].get<int>();
  if (j.contains("initial_step")) o.nelder_mead.initial_step = j["initial_step"].get<double>();
  if (j.contains("max_restarts")) o.nelder_mead.max_restarts = j["max_restarts"].get<int>();
}

void ApplyBounds(RunConfig& c, const json& j) {
  RejectUnknown(j, {"w_min", "w_max", "alpha_min", "alpha_max"}, "bounds");
  c.bounds.w_min = j.value("w_min", c.bounds.w_min);
  c.bounds.w_max = j.value("w_max", c.bounds.w_max);
  c.bounds.alpha_min = j.value("alpha_min", c.bounds.alpha_min);
  c.bounds.alpha_max = j.value("alpha_max", c.bounds.alpha_max);
}

std::string ModeName(CurvatureMode m) {
  return m == CurvatureMode::kAcceleration ? "accel" : "graph";
}

}  // namespace

void RunConfig::Validate() const {
  gains.Validate();
  if (!((W.array() > 0.0).all())) throw ValidationError("config: W must be positive");
  if (!(dt_sim > 0.0) || !std::isfinite(dt_sim)) throw ValidationError("config: dt must be > 0");
  if (care_every < 1) throw ValidationError("config: care_every must be >= 1");
  if (!(divergence_bound > 0.0)) throw ValidationError("config: divergence_bound must be > 0");
  if (!init_error.allFinite()) throw ValidationError("config: init_error not finite");
  if (smoothing_window < 1) throw ValidationError("config: smoothing window must be >= 1");
  if (!(nodes.min_separation >= 0.0)) throw ValidationError("config: min_separation must be >= 0");
  if (nodes.prominence && !(*nodes.prominence >= 0.0)) {
    throw ValidationError("config: prominence must be >= 0");
  }
  if (!(nodes.prominence_fraction >= 0.0 && nodes.prominence_fraction <= 1.0)) {
    throw ValidationError("config: prominence_fraction must lie in [0, 1]");
  }
  if (optimizer.starts < 1) throw ValidationError("config: optimizer needs at least one start");
  if (!(optimizer.perturbation >= 0.0)) throw ValidationError("config: perturbation must be >= 0");
  if (optimizer.nelder_mead.max_evaluations < 1) {
    throw ValidationError("config: max_evaluations must be >= 1");
  }
  if (!(optimizer.nelder_mead.initial_step > 0.0 && optimizer.nelder_mead.initial_step <= 1.0)) {
    throw ValidationError("config: initial_step must lie in (0, 1]");
  }
  if (check_points < 1) throw ValidationError("config: check_points must be >= 1");
  bounds.Validate();
}

SimulationOptions RunConfig::Simulation() const {
  SimulationOptions o;
  o.dt = dt_sim;
  o.care_every = care_every;
  o.divergence_bound = divergence_bound;
  o.initial_angle_error = init_error;
  return o;
}

void ApplyJson(RunConfig& c, const json& j) {
  RejectUnknown(j,
                {"leg", "gains", "W", "dt", "care_every", "divergence_bound", "init_error",
                 "smoothing_window", "nodes", "optimizer", "bounds", "reference", "seed",
                 "check_points"},
                "config");
  try {
    if (j.contains("leg")) ApplyLeg(c, j["leg"]);
    if (j.contains("gains")) ApplyGains(c, j["gains"]);
    if (j.contains("W")) c.W = Pair(j["W"], "W");
    if (j.contains("dt")) c.dt_sim = j["dt"].get<double>();
    if (j.contains("care_every")) c.care_every = j["care_every"].get<int>();
    if (j.contains("divergence_bound")) c.divergence_bound = j["divergence_bound"].get<double>();
    if (j.contains("init_error")) c.init_error = Pair(j["init_error"], "init_error");
    if (j.contains("smoothing_window")) c.smoothing_window = j["smoothing_window"].get<int>();
    if (j.contains("nodes")) ApplyNodes(c, j["nodes"]);
    if (j.contains("optimizer")) ApplyOptimizer(c, j["optimizer"]);
    if (j.contains("bounds")) ApplyBounds(c, j["bounds"]);
    if (j.contains("reference")) {
      const std::string r = j["reference"];
      if (r == "sdre") {
        c.reference = ReferenceSource::kSdre;
      } else if (r == "human") {
        c.reference = ReferenceSource::kHuman;
      } else {
        throw ValidationError("config: reference must be 'sdre' or 'human'");
      }
    }
    if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("check_points")) c.check_points = j["check_points"].get<int>();
  } catch (const json::exception& e) {
    throw ValidationError(std::string("config: ") + e.what());
  }
}

RunConfig LoadConfigFile(const std::filesystem::path& path, RunConfig base) {
  std::ifstream in(path);
  if (!in) throw ValidationError("config: cannot open '" + path.string() + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError("config: " + path.string() + ": " + e.what());
  }
  ApplyJson(base, j);
  return base;
}

json ToJson(const RunConfig& c) {
  json j;
  j["leg"] = {{"l1", c.leg.l1()}, {"l2", c.leg.l2()}, {"m1", c.leg.m1()}, {"m2", c.leg.m2()},
              {"mc1", c.leg.mc1()}, {"mc2", c.leg.mc2()}, {"g", c.leg.g()}};
  j["gains"] = {{"Q", MatrixJson<5>(c.gains.Q)}, {"R", MatrixJson<2>(c.gains.R)},
                {"eta", c.gains.eta}};
  j["W"] = {c.W(0), c.W(1)};
  j["dt"] = c.dt_sim;
  j["care_every"] = c.care_every;
  j["divergence_bound"] = c.divergence_bound;
  j["init_error"] = {c.init_error(0), c.init_error(1)};
  j["smoothing_window"] = c.smoothing_window;
  j["nodes"] = {{"min_separation", c.nodes.min_separation},
                {"prominence", c.nodes.prominence ? json(*c.nodes.prominence) : json(nullptr)},
                {"prominence_fraction", c.nodes.prominence_fraction},
                {"curvature_mode", ModeName(c.nodes.mode)}};
  j["optimizer"] = {{"starts", c.optimizer.starts},
                    {"perturbation", c.optimizer.perturbation},
                    {"max_evaluations", c.optimizer.nelder_mead.max_evaluations},
                    {"initial_step", c.optimizer.nelder_mead.initial_step},
                    {"max_restarts", c.optimizer.nelder_mead.max_restarts}};
  j["bounds"] = {{"w_min", c.bounds.w_min}, {"w_max", c.bounds.w_max},
                 {"alpha_min", c.bounds.alpha_min}, {"alpha_max", c.bounds.alpha_max}};
  j["reference"] = c.reference == ReferenceSource::kSdre ? "sdre" : "human";
  j["seed"] = c.seed;
  j["check_points"] = c.check_points;
  return j;
}

std::string ConfigHash(const RunConfig& config) {
  const std::string canonical = ToJson(config).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char ch : canonical) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

PlanBounds ParseBounds(const std::string& text) {
  std::vector<double> v;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      v.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ValidationError("--bounds: '" + item + "' is not a number");
    }
  }
  if (v.size() != 4) throw ValidationError("--bounds expects w_min,w_max,a_min,a_max");
  PlanBounds b{v[0], v[1], v[2], v[3]};
  b.Validate();
  return b;
}

}  // namespace gaitrep::cli
