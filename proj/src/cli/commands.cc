#include "gaitrep/cli/commands.h"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <sstream>

#include "CLI11.hpp"
#include "gaitrep/cli/config.h"
#include "gaitrep/cli/report.h"
#include "gaitrep/csv.h"
#include "gaitrep/errors.h"
#include "gaitrep/riccati.h"

namespace gaitrep::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// Raw command-line values. They are layered over the config file, which is
// layered over the built-in defaults.
struct Flags {
  std::string profile;
  std::string config;
  std::string out_dir = "out";
  double dt = 0.0;
  double eta = 0.0;
  std::uint64_t seed = 0;
  int care_every = 1;
  std::vector<double> init_error;
  int smoothing = 1;
  bool stamp = false;

  std::string bounds;
  std::string reference = "sdre";
  std::string reference_plan;
  std::string curvature_mode = "accel";
  int starts = 5;
  int max_evals = 8000;
  double min_separation = 0.05;
  double prominence = 0.0;

  std::string sdre_dir;
  std::string param_dir;
  int points = 100;

  std::string kind = "walk";
  std::string out;
  double sample_dt = 0.01;

  // Options registered under the same name on several subcommands.
  std::map<std::string, std::vector<CLI::Option*>> given;

  void Register(const std::string& name, CLI::Option* option) { given[name].push_back(option); }

  bool Given(const std::string& name) const {
    const auto it = given.find(name);
    if (it == given.end()) return false;
    return std::any_of(it->second.begin(), it->second.end(),
                       [](const CLI::Option* o) { return o->count() > 0; });
  }
};

void AddCommon(CLI::App& sub, Flags& f) {
  f.Register("profile", sub.add_option("--profile", f.profile, "Joint-angle profile CSV")->required());
  f.Register("config", sub.add_option("--config", f.config, "JSON configuration file"));
  f.Register("out-dir", sub.add_option("--out-dir", f.out_dir, "Output directory"));
  f.Register("dt", sub.add_option("--dt", f.dt, "Simulation step (s)"));
  f.Register("eta", sub.add_option("--eta", f.eta, "Decay rate of the auxiliary state"));
  f.Register("seed", sub.add_option("--seed", f.seed, "Random seed"));
  f.Register("care-every", sub.add_option("--care-every", f.care_every, "Solve the CARE every N steps"));
  f.Register("init-error", sub.add_option("--init-error", f.init_error, "Initial angle error hip,knee (rad)")
          ->delimiter(',')
          ->expected(2));
  f.Register("smoothing", sub.add_option("--smoothing", f.smoothing, "Moving-average window before differencing"));
  sub.add_flag("--stamp", f.stamp, "Add a wall-clock timestamp to reports");
}

void AddPlanOptions(CLI::App& sub, Flags& f) {
  f.Register("bounds", sub.add_option("--bounds", f.bounds, "Motor limits w_min,w_max,a_min,a_max"));
  f.Register("reference", sub.add_option("--reference", f.reference, "Torque reference")
                             ->check(CLI::IsMember({"sdre", "human"})));
  f.Register("reference-plan", sub.add_option(
      "--reference-plan", f.reference_plan, "Fit against the torque of this plan JSON instead"));
  f.Register("curvature-mode", sub.add_option("--curvature-mode", f.curvature_mode, "Node-selection curvature")
          ->check(CLI::IsMember({"accel", "graph"})));
  f.Register("starts", sub.add_option("--starts", f.starts, "Optimizer starts"));
  f.Register("max-evals", sub.add_option("--max-evals", f.max_evals, "Cost evaluations of the final search"));
  f.Register("min-separation", sub.add_option("--min-separation", f.min_separation, "Minimum node spacing (s)"));
  f.Register("prominence", sub.add_option("--prominence", f.prominence, "Absolute curvature threshold for nodes"));
}

RunConfig Resolve(const Flags& f) {
  RunConfig c;
  if (f.Given("config")) c = LoadConfigFile(f.config);
  c.profile = f.profile;
  if (f.Given("out-dir")) c.out_dir = f.out_dir;
  if (f.Given("dt")) c.dt_sim = f.dt;
  if (f.Given("eta")) c.gains.eta = f.eta;
  if (f.Given("seed")) c.seed = f.seed;
  if (f.Given("care-every")) c.care_every = f.care_every;
  if (f.Given("init-error")) c.init_error = {f.init_error[0], f.init_error[1]};
  if (f.Given("smoothing")) c.smoothing_window = f.smoothing;
  if (f.Given("bounds")) c.bounds = ParseBounds(f.bounds);
  if (f.Given("reference")) {
    c.reference = f.reference == "human" ? ReferenceSource::kHuman : ReferenceSource::kSdre;
  }
  if (f.Given("reference-plan")) c.reference_plan = f.reference_plan;
  if (f.Given("curvature-mode")) {
    c.nodes.mode = f.curvature_mode == "graph" ? CurvatureMode::kGraph
                                               : CurvatureMode::kAcceleration;
  }
  if (f.Given("starts")) c.optimizer.starts = f.starts;
  if (f.Given("max-evals")) c.optimizer.nelder_mead.max_evaluations = f.max_evals;
  if (f.Given("min-separation")) c.nodes.min_separation = f.min_separation;
  if (f.Given("prominence")) c.nodes.prominence = f.prominence;
  if (f.Given("points")) c.check_points = f.points;
  c.optimizer.seed = c.seed;
  c.Validate();
  if (!fs::exists(c.profile)) {
    throw ValidationError("profile '" + c.profile.string() + "' does not exist");
  }
  if (c.reference_plan && !fs::exists(*c.reference_plan)) {
    throw ValidationError("reference plan '" + c.reference_plan->string() + "' does not exist");
  }
  return c;
}

std::string Side(const GaitProfile& leg) { return leg.label.empty() ? "leg" : leg.label; }

json Pair(const JointVector& v) { return json::array({v(0), v(1)}); }

std::string Timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::ostringstream out;
  out << std::put_time(std::gmtime(&now), "%Y-%m-%dT%H:%M:%SZ");
  return out.str();
}

json Header(const std::string& command, const RunConfig& c, bool stamp) {
  json j;
  j["command"] = command;
  j["config_hash"] = ConfigHash(c);
  j["config"] = ToJson(c);
  if (stamp) j["timestamp"] = Timestamp();
  return j;
}

void WriteJson(const fs::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write '" + path.string() + "'");
  out << j.dump(2) << '\n';
}

void WriteText(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write '" + path.string() + "'");
  out << text;
}

std::vector<GaitProfile> Profiles(const RunConfig& c) {
  return LoadProfiles(c.profile, c.smoothing_window);
}

void PrepareOutDir(const RunConfig& c) {
  std::error_code ec;
  fs::create_directories(c.out_dir, ec);
  if (ec) throw ValidationError("cannot create '" + c.out_dir.string() + "': " + ec.message());
}

std::vector<double> GridTimes(double T, double dt) {
  std::vector<double> t;
  for (std::size_t k = 0;; ++k) {
    const double tk = static_cast<double>(k) * dt;
    if (tk > T - 1e-12 * std::max(1.0, T)) break;
    t.push_back(tk);
  }
  t.push_back(T);
  return t;
}

TrackingResult Track(const RunConfig& c, const GaitProfile& leg) {
  return SimulateTracking(c.leg, FromProfile(leg), c.gains, c.Simulation());
}

struct LegFit {
  NodeSequence nodes;
  OptimizationResult result;
  TrackingResult trajectory;  // plan against the desired profile
};

LegFit Parameterize(const RunConfig& c, const GaitProfile& leg) {
  LegFit fit;
  TorqueReference reference;
  if (c.reference_plan) {
    const LegPlan planted = ReadPlanJson(*c.reference_plan);
    fit.nodes = NodesAtTimes(leg, planted.joints[0].nodes);
    reference = TorqueReference::FromPlan(c.leg, planted, c.dt_sim);
  } else {
    fit.nodes = SelectNodes(leg, c.nodes);
    reference = c.reference == ReferenceSource::kSdre
                    ? TorqueReference::FromTracking(Track(c, leg))
                    : TorqueReference::FromProfile(c.leg, leg);
  }
  const LegPlan init = InitialPlan(leg, fit.nodes, c.bounds);
  fit.result = OptimizePlan(c.leg, fit.nodes, reference, c.bounds, WeightMatrix(c.W), init,
                            c.optimizer);
  fit.trajectory = PlanTrackingResult(c.leg, fit.result.plan, FromProfile(leg),
                                      GridTimes(leg.Duration(), c.dt_sim));
  return fit;
}

void Warn(const std::string& kind, const std::string& message) {
  std::cerr << json{{"warning", {{"kind", kind}, {"message", message}}}}.dump() << '\n';
}

// --- simulate ---------------------------------------------------------------

void Simulate(const RunConfig& c, bool stamp) {
  PrepareOutDir(c);
  json summary = Header("simulate", c, stamp);
  for (const GaitProfile& leg : Profiles(c)) {
    const TrackingResult r = Track(c, leg);
    const std::string side = Side(leg);
    WriteTrackingCsv(c.out_dir / ("tracking_" + side + ".csv"), r);
    const TrackingDiagnostics& d = r.diagnostics;
    const JointVector rmse = r.AngleRmse().unaryExpr(&Degrees);
    summary["legs"].push_back({{"side", side},
                               {"samples", r.size()},
                               {"rmse_deg", Pair(rmse)},
                               {"peak_torque", Pair(r.PeakAbsTorque())},
                               {"peak_control", Pair(r.PeakAbsControl())},
                               {"care_solves", d.care_solves},
                               {"max_care_residual", d.max_care_residual},
                               {"max_closed_loop_real", d.max_closed_loop_real},
                               {"max_decomposition_residual", d.max_decomposition_residual}});
    std::cout << side << ": RMSE hip " << rmse(0) << " deg, knee " << rmse(1)
              << " deg; peak torque " << r.PeakAbsTorque()(0) << ", " << r.PeakAbsTorque()(1)
              << " N*m\n";
  }
  WriteJson(c.out_dir / "summary.json", summary);
}

// --- parameterize -----------------------------------------------------------

void WriteTrace(const fs::path& path, const std::vector<CostTraceEntry>& trace) {
  CsvTable table;
  table.header = {"start", "iteration", "cost"};
  for (const CostTraceEntry& e : trace) {
    table.rows.push_back({static_cast<double>(e.start), static_cast<double>(e.iteration), e.cost});
  }
  WriteCsv(path, table);
}

void ParameterizeCommand(const RunConfig& c, bool stamp) {
  PrepareOutDir(c);
  json summary = Header("parameterize", c, stamp);
  for (const GaitProfile& leg : Profiles(c)) {
    const LegFit fit = Parameterize(c, leg);
    const OptimizationResult& r = fit.result;
    const std::string side = Side(leg);
    const std::string status = r.hit_max_iterations ? "max_iterations" : "converged";
    if (r.hit_max_iterations) {
      Warn("MaxIterations", side + ": evaluation budget reached; best plan kept");
    }
    WritePlanCsv(c.out_dir / ("plan_" + side + ".csv"), r.plan);
    WriteCommandsCsv(c.out_dir / ("commands_" + side + ".csv"), r.plan);
    WriteTrace(c.out_dir / ("cost_trace_" + side + ".csv"), r.trace);
    WriteTrackingCsv(c.out_dir / ("trajectory_" + side + ".csv"), fit.trajectory);
    json plan = PlanToJson(r.plan);
    plan["initial_cost"] = r.initial_cost;
    plan["final_cost"] = r.final_cost;
    plan["feasibility_penalty"] = r.feasibility_penalty;
    plan["status"] = status;
    WriteJson(c.out_dir / ("plan_" + side + ".json"), plan);
    summary["legs"].push_back({{"side", side},
                               {"nodes", fit.nodes.times},
                               {"segments", fit.nodes.segments()},
                               {"initial_cost", r.initial_cost},
                               {"final_cost", r.final_cost},
                               {"feasibility_penalty", r.feasibility_penalty},
                               {"best_start", r.best_start},
                               {"evaluations", r.evaluations},
                               {"status", status}});
    std::cout << side << ": " << fit.nodes.segments() << " segments, cost " << r.initial_cost
              << " -> " << r.final_cost << " (" << status << ")\n";
  }
  WriteJson(c.out_dir / "summary.json", summary);
}

// --- compare ----------------------------------------------------------------

std::string FormatTable(const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> width(rows.front().size(), 0);
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) width[i] = std::max(width[i], row[i].size());
  }
  std::ostringstream out;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t i = 0; i < rows[r].size(); ++i) {
      out << (i ? "  " : "") << std::setw(static_cast<int>(width[i]))
          << (i ? std::right : std::left) << rows[r][i];
    }
    out << '\n';
    if (r == 0) {
      std::size_t total = 0;
      for (const std::size_t w : width) total += w + 2;
      out << std::string(total - 2, '-') << '\n';
    }
  }
  return out.str();
}

std::string Fixed(double v, int digits) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(digits) << v;
  return out.str();
}

void Compare(const RunConfig& c, const Flags& f, bool stamp) {
  PrepareOutDir(c);
  json report = Header("compare", c, stamp);
  std::string csv = "leg,joint,rmse_sdre_deg,rmse_param_deg,torque_rmse_sdre,torque_rmse_param\n";
  std::vector<std::vector<std::string>> pretty{
      {"leg", "joint", "SDRE RMSE (deg)", "param RMSE (deg)", "SDRE torque RMSE (N*m)",
       "param torque RMSE (N*m)"}};
  const char* joints[2] = {"hip", "knee"};
  const auto legs = Profiles(c);
  for (const GaitProfile& leg : legs) {
    const std::string side = Side(leg);
    const TrackingResult human = HumanTrajectory(c.leg, leg);
    const TrackingResult sdre =
        f.Given("sdre-dir") ? ReadTrackingCsv(fs::path(f.sdre_dir) / ("tracking_" + side + ".csv"))
                            : Track(c, leg);
    const TrackingResult param =
        f.Given("param-dir")
            ? ReadTrackingCsv(fs::path(f.param_dir) / ("trajectory_" + side + ".csv"))
            : Parameterize(c, leg).trajectory;
    const ErrorStats s = CompareTrajectories(human, sdre);
    const ErrorStats q = CompareTrajectories(human, param);

    CsvTable torque;
    torque.header = {"t", "tau_human1", "tau_human2", "tau_sdre1", "tau_sdre2",
                     "tau_param1", "tau_param2"};
    CsvTable error;
    error.header = {"t", "err_sdre1", "err_sdre2", "err_param1", "err_param2"};
    for (std::size_t i = 0; i < human.size(); ++i) {
      const double t = human.t[i];
      const JointVector h = human.tau[i];
      const JointVector a = InterpolateTau(sdre, t), b = InterpolateTau(param, t);
      torque.rows.push_back({t, h(0), h(1), a(0), a(1), b(0), b(1)});
      error.rows.push_back({t, a(0) - h(0), a(1) - h(1), b(0) - h(0), b(1) - h(1)});
    }
    WriteCsv(c.out_dir / ("torque_" + side + ".csv"), torque);
    WriteCsv(c.out_dir / ("torque_error_" + side + ".csv"), error);

    json entry{{"side", side}, {"samples", human.size()}, {"duration", human.Duration()}};
    for (int j = 0; j < 2; ++j) {
      csv += side + "," + joints[j];
      for (const double v : {s.angle_rmse_deg(j), q.angle_rmse_deg(j), s.torque_rmse(j),
                             q.torque_rmse(j)}) {
        csv += "," + FormatDouble(v);
      }
      csv += '\n';
      pretty.push_back({side, joints[j], Fixed(s.angle_rmse_deg(j), 4),
                        Fixed(q.angle_rmse_deg(j), 4), Fixed(s.torque_rmse(j), 4),
                        Fixed(q.torque_rmse(j), 4)});
      entry[joints[j]] = {{"rmse_sdre_deg", s.angle_rmse_deg(j)},
                          {"rmse_param_deg", q.angle_rmse_deg(j)},
                          {"torque_rmse_sdre", s.torque_rmse(j)},
                          {"torque_rmse_param", q.torque_rmse(j)}};
    }
    report["legs"].push_back(entry);
  }
  WriteText(c.out_dir / "rmse_table.csv", csv);
  const std::string text = FormatTable(pretty);
  WriteText(c.out_dir / "rmse_table.txt", text);
  WriteJson(c.out_dir / "report.json", report);
  std::cout << text;
}

// --- check ------------------------------------------------------------------

struct CheckCounts {
  int points = 0;
  int stabilizable_failures = 0;
  int detectable_angle_failures = 0;
  int detectable_state_failures = 0;
  int detectable_weight_failures = 0;
  int care_failures = 0;
  double worst_care_residual = 0.0;
  double max_closed_loop_real = -std::numeric_limits<double>::infinity();
  double min_mass_condition = std::numeric_limits<double>::infinity();
  double max_mass_condition = 0.0;
};

double MassCondition(const LegParams& p, const JointVector& theta) {
  const Eigen::Vector2d ev =
      Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d>(MassMatrix(p, theta)).eigenvalues();
  return ev(1) / ev(0);
}

void Check(const RunConfig& c, bool stamp) {
  PrepareOutDir(c);
  json report = Header("check", c, stamp);
  std::mt19937_64 rng(c.seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  Eigen::MatrixXd c_angles = Eigen::MatrixXd::Zero(2, 5);
  c_angles.leftCols(2).setIdentity();
  const Eigen::MatrixXd c_state = Eigen::MatrixXd::Identity(5, 5);
  const Eigen::MatrixXd c_weight = PsdSqrt(c.gains.Q);
  int total_unstabilizable = 0;
  for (const GaitProfile& leg : Profiles(c)) {
    CheckCounts n;
    const double T = leg.Duration();
    for (int i = 0; i < c.check_points; ++i) {
      const double t =
          c.check_points == 1 ? 0.0 : T * static_cast<double>(i) / (c.check_points - 1);
      const JointKinematics d = leg.At(t);
      // On the desired path and at a random nearby state.
      for (int variant = 0; variant < 2; ++variant) {
        ErrorState x;
        if (variant == 1) {
          x.x_theta = {0.05 * unit(rng), 0.05 * unit(rng)};
          x.x_w = {0.2 * unit(rng), 0.2 * unit(rng)};
        }
        const SdcModel m = BuildSdc(c.leg, x, d, c.gains);
        ++n.points;
        if (!HautusStabilizable(m.A, m.B)) ++n.stabilizable_failures;
        if (!HautusDetectable(m.A, c_angles)) ++n.detectable_angle_failures;
        if (!HautusDetectable(m.A, c_state)) ++n.detectable_state_failures;
        if (!HautusDetectable(m.A, c_weight)) ++n.detectable_weight_failures;
        try {
          const CareSolution s = SolveCare({m.A, m.B, c.gains.Q, c.gains.R});
          n.worst_care_residual = std::max(n.worst_care_residual, s.residual_norm);
          n.max_closed_loop_real = std::max(n.max_closed_loop_real, s.MaxClosedLoopRealPart());
        } catch (const NumericalError&) {
          ++n.care_failures;
        }
        const double cond = MassCondition(c.leg, d.theta + x.x_theta);
        n.min_mass_condition = std::min(n.min_mass_condition, cond);
        n.max_mass_condition = std::max(n.max_mass_condition, cond);
      }
    }
    total_unstabilizable += n.stabilizable_failures;
    const std::string side = Side(leg);
    report["legs"].push_back({{"side", side},
                              {"points", n.points},
                              {"stabilizable", n.stabilizable_failures == 0},
                              {"stabilizable_failures", n.stabilizable_failures},
                              {"detectable_angles_failures", n.detectable_angle_failures},
                              {"detectable_state_failures", n.detectable_state_failures},
                              {"detectable_q_failures", n.detectable_weight_failures},
                              {"care_failures", n.care_failures},
                              {"worst_care_residual", n.worst_care_residual},
                              {"max_closed_loop_real", n.max_closed_loop_real},
                              {"mass_condition_min", n.min_mass_condition},
                              {"mass_condition_max", n.max_mass_condition}});
    std::cout << side << ": " << n.points << " points, stabilizable "
              << (n.stabilizable_failures == 0 ? "yes" : "NO") << ", detectable (angles/state/Q) "
              << (n.detectable_angle_failures == 0 ? "yes" : "NO") << "/"
              << (n.detectable_state_failures == 0 ? "yes" : "NO") << "/"
              << (n.detectable_weight_failures == 0 ? "yes" : "NO")
              << ", worst CARE residual " << n.worst_care_residual << ", cond(M) in ["
              << n.min_mass_condition << ", " << n.max_mass_condition << "]\n";
  }
  WriteJson(c.out_dir / "check.json", report);
  if (total_unstabilizable > 0) {
    throw NotStabilizable("check: " + std::to_string(total_unstabilizable) +
                          " SDC points fail the stabilizability test");
  }
}

// --- gen-profile ------------------------------------------------------------

void GenProfile(const Flags& f) {
  if (f.out.empty()) throw ValidationError("gen-profile: --out is required");
  if (!(f.sample_dt > 0.0)) throw ValidationError("gen-profile: --sample-dt must be > 0");
  const fs::path out = f.out;
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  if (f.kind == "walk") {
    GaitProfile left = WalkProfile(f.sample_dt, 0.0);
    GaitProfile right = WalkProfile(f.sample_dt, 0.6);
    left.label = "left";
    right.label = "right";
    WriteProfiles(out, {left, right});
  } else if (f.kind == "squat") {
    GaitProfile left = SquatProfile(f.sample_dt);
    GaitProfile right = left;
    left.label = "left";
    right.label = "right";
    WriteProfiles(out, {left, right});
  } else if (f.kind == "planted") {
    const LegPlan plan = PlantedPlan();
    std::vector<double> t = GridTimes(plan.Duration(), f.sample_dt);
    std::vector<JointVector> theta;
    for (const double ti : t) {
      theta.emplace_back(EvalPlan(plan.joints[0], plan.theta0(0), ti).theta,
                         EvalPlan(plan.joints[1], plan.theta0(1), ti).theta);
    }
    WriteProfiles(out, {MakeProfile(std::move(t), std::move(theta))});
    fs::path plan_path = out;
    plan_path.replace_filename(out.stem().string() + "_plan.json");
    WriteJson(plan_path, PlanToJson(plan));
  } else {
    throw ValidationError("gen-profile: unknown kind '" + f.kind + "'");
  }
}

int ExitCodeFor(const Error& e) {
  if (dynamic_cast<const InfeasibleBounds*>(&e)) return kInfeasible;
  if (dynamic_cast<const NumericalError*>(&e)) return kNumerical;
  if (dynamic_cast<const ValidationError*>(&e)) return kValidation;
  return kFailure;
}

int ReportError(std::string_view kind, const std::string& message, int code) {
  std::cerr << json{{"error", {{"kind", kind}, {"message", message}, {"exit_code", code}}}}.dump()
            << '\n';
  return code;
}

}  // namespace

int RunCli(const std::vector<std::string>& args) {
  CLI::App app{"Gait replication on a double-pendulum leg: SDRE tracking and motor plans"};
  app.name("gaitrep");
  app.require_subcommand(1);
  Flags f;

  CLI::App* simulate = app.add_subcommand("simulate", "SDRE tracking of a profile");
  AddCommon(*simulate, f);
  CLI::App* parameterize =
      app.add_subcommand("parameterize", "Fit a piecewise-linear velocity plan");
  AddCommon(*parameterize, f);
  AddPlanOptions(*parameterize, f);
  CLI::App* compare = app.add_subcommand("compare", "Compare SDRE and plan against the profile");
  AddCommon(*compare, f);
  AddPlanOptions(*compare, f);
  f.Register("sdre-dir", compare->add_option("--sdre-dir", f.sdre_dir, "Reuse tracking_<leg>.csv from here"));
  f.Register("param-dir", compare->add_option("--param-dir", f.param_dir, "Reuse trajectory_<leg>.csv from here"));
  CLI::App* check = app.add_subcommand("check", "Controllability and solver diagnostics");
  AddCommon(*check, f);
  f.Register("points", check->add_option("--points", f.points, "SDC points per leg"));
  CLI::App* gen = app.add_subcommand("gen-profile", "Write a bundled synthetic profile");
  gen->add_option("--kind", f.kind, "walk, squat or planted")
      ->check(CLI::IsMember({"walk", "squat", "planted"}));
  gen->add_option("--out", f.out, "Output CSV")->required();
  gen->add_option("--sample-dt", f.sample_dt, "Sample spacing (s)");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return ReportError("UsageError", e.what(), kValidation);
  }

  try {
    if (gen->parsed()) {
      GenProfile(f);
      return kSuccess;
    }
    const RunConfig c = Resolve(f);
    if (simulate->parsed()) Simulate(c, f.stamp);
    if (parameterize->parsed()) ParameterizeCommand(c, f.stamp);
    if (compare->parsed()) Compare(c, f, f.stamp);
    if (check->parsed()) Check(c, f.stamp);
    return kSuccess;
  } catch (const Error& e) {
    return ReportError(e.kind(), e.what(), ExitCodeFor(e));
  } catch (const std::exception& e) {
    return ReportError("InternalError", e.what(), kFailure);
  }
}

}  // namespace gaitrep::cli
