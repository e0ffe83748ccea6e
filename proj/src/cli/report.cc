#include "gaitrep/cli/report.h"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "gaitrep/errors.h"

namespace gaitrep::cli {
namespace {

using nlohmann::json;

JointVector Interpolate(const std::vector<double>& t, const std::vector<JointVector>& v,
                        double time) {
  if (t.empty() || v.size() != t.size()) throw ValidationError("trajectory: no samples");
  if (time <= t.front()) return v.front();
  if (time >= t.back()) return v.back();
  const auto it = std::upper_bound(t.begin(), t.end(), time);
  const std::size_t i = static_cast<std::size_t>(it - t.begin());
  const double h = t[i] - t[i - 1];
  const double s = h > 0.0 ? (time - t[i - 1]) / h : 0.0;
  return (1.0 - s) * v[i - 1] + s * v[i];
}

std::vector<double> Numbers(const json& j, const std::string& name) {
  if (!j.is_array()) throw ValidationError("plan: '" + name + "' must be an array");
  return j.get<std::vector<double>>();
}

}  // namespace

TrackingResult HumanTrajectory(const LegParams& p, const GaitProfile& profile) {
  TrackingResult r;
  r.t = profile.t;
  r.theta = profile.theta;
  r.theta_d = profile.theta;
  r.omega = profile.theta_dot;
  for (std::size_t i = 0; i < profile.size(); ++i) {
    r.tau.push_back(
        InverseDynamics(p, profile.theta[i], profile.theta_dot[i], profile.theta_ddot[i]));
  }
  r.tau_d = r.tau;
  return r;
}

DesiredTrajectory FromProfile(const GaitProfile& profile) {
  return {[profile](double t) { return profile.At(t); }, profile.Duration()};
}

JointVector InterpolateTheta(const TrackingResult& r, double t) {
  return Interpolate(r.t, r.theta, t);
}

JointVector InterpolateTau(const TrackingResult& r, double t) {
  return Interpolate(r.t, r.tau, t);
}

ErrorStats CompareTrajectories(const TrackingResult& reference,
                               const TrackingResult& candidate) {
  if (reference.size() == 0 || candidate.size() == 0) {
    throw ValidationError("compare: empty trajectory");
  }
  const double T = reference.Duration();
  const double tol = 1e-9 * std::max(1.0, T);
  if (std::abs(candidate.Duration() - T) > tol ||
      std::abs(candidate.t.front() - reference.t.front()) > tol) {
    throw DomainMismatch("compare: reference covers [" + std::to_string(reference.t.front()) +
                         ", " + std::to_string(T) + "] but candidate covers [" +
                         std::to_string(candidate.t.front()) + ", " +
                         std::to_string(candidate.Duration()) + "]");
  }
  ErrorStats s;
  for (std::size_t i = 0; i < reference.size(); ++i) {
    const double t = reference.t[i];
    const JointVector de = InterpolateTheta(candidate, t) - reference.theta[i];
    const JointVector dt = InterpolateTau(candidate, t) - reference.tau[i];
    s.angle_rmse_deg += de.cwiseAbs2();
    s.torque_rmse += dt.cwiseAbs2();
  }
  const double n = static_cast<double>(reference.size());
  s.angle_rmse_deg = (s.angle_rmse_deg / n).cwiseSqrt().unaryExpr(&Degrees);
  s.torque_rmse = (s.torque_rmse / n).cwiseSqrt();
  return s;
}

json PlanToJson(const LegPlan& plan) {
  json j;
  j["nodes"] = plan.joints[0].nodes;
  j["theta0"] = {plan.theta0(0), plan.theta0(1)};
  const char* names[2] = {"hip", "knee"};
  for (int k = 0; k < 2; ++k) {
    const VelocityPlan& v = plan.joints[k];
    j["joints"].push_back({{"name", names[k]}, {"w0", v.w0}, {"w", v.w}, {"alpha", v.alpha}});
  }
  return j;
}

LegPlan PlanFromJson(const json& j) {
  try {
    LegPlan plan;
    const std::vector<double> nodes = Numbers(j.at("nodes"), "nodes");
    const std::vector<double> theta0 = Numbers(j.at("theta0"), "theta0");
    if (theta0.size() != 2) throw ValidationError("plan: theta0 needs two entries");
    plan.theta0 = {theta0[0], theta0[1]};
    const json& joints = j.at("joints");
    if (!joints.is_array() || joints.size() != 2) {
      throw ValidationError("plan: 'joints' must list hip and knee");
    }
    for (int k = 0; k < 2; ++k) {
      VelocityPlan& v = plan.joints[k];
      v.nodes = nodes;
      v.w0 = joints[k].at("w0").get<double>();
      v.w = Numbers(joints[k].at("w"), "w");
      v.alpha = Numbers(joints[k].at("alpha"), "alpha");
      v.Validate();
    }
    return plan;
  } catch (const json::exception& e) {
    throw ParseError(std::string("plan: ") + e.what());
  }
}

LegPlan ReadPlanJson(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("plan: cannot open '" + path.string() + "'");
  try {
    return PlanFromJson(json::parse(in));
  } catch (const json::parse_error& e) {
    throw ParseError("plan: " + path.string() + ": " + e.what());
  }
}

LegPlan PlantedPlan() {
  const std::vector<double> nodes{0.0, 0.3, 0.6, 0.9, 1.2};
  LegPlan plan;
  plan.joints[0] = {nodes, 0.0, {1.2, -0.8, 0.5, 0.0}, {10.0, -12.0, 8.0, -6.0}};
  plan.joints[1] = {nodes, 0.0, {-1.5, 1.0, 1.5, -0.5}, {-10.0, 12.0, 8.0, -9.0}};
  plan.theta0 = {0.1, -0.2};
  return plan;
}

NodeSequence NodesAtTimes(const GaitProfile& profile, const std::vector<double>& times) {
  if (times.size() < 2) throw ValidationError("nodes: need at least two node times");
  NodeSequence nodes;
  for (const double t : times) {
    const auto it = std::lower_bound(profile.t.begin(), profile.t.end(), t);
    std::size_t i = static_cast<std::size_t>(it - profile.t.begin());
    if (i == profile.size() || (i > 0 && t - profile.t[i - 1] < profile.t[i] - t)) --i;
    if (!nodes.indices.empty() && i <= nodes.indices.back()) {
      throw ValidationError("nodes: node times must be increasing and at least one sample apart");
    }
    nodes.indices.push_back(i);
    nodes.times.push_back(profile.t[i]);
  }
  if (nodes.indices.front() != 0 || nodes.indices.back() != profile.size() - 1) {
    throw ValidationError("nodes: first and last node must coincide with the profile ends");
  }
  return nodes;
}

}  // namespace gaitrep::cli
