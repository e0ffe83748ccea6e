#include "gaitrep/param_control.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <future>
#include <random>
#include <string>

#include "gaitrep/csv.h"
#include "gaitrep/errors.h"

namespace gaitrep {
namespace {

double HorizonTolerance(double T) { return 1e-9 * std::max(1.0, T); }

double Sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

// Precomputes the angle at each node so samples cost O(log n).
class PlanEvaluator {
 public:
  PlanEvaluator(const VelocityPlan& plan, double theta0) : plan_(plan) {
    node_theta_.reserve(plan.segments() + 1);
    node_theta_.push_back(theta0);
    for (std::size_t k = 0; k < plan.segments(); ++k) {
      node_theta_.push_back(
          InSegment(k, plan.nodes[k + 1] - plan.nodes[k]).theta);
    }
  }

  PlanSample At(double t) const {
    const double T = plan_.Duration();
    if (t < -HorizonTolerance(T) || t > T + HorizonTolerance(T)) {
      throw OutOfDomain("plan: time " + std::to_string(t) + " outside [0, " +
                        std::to_string(T) + "]");
    }
    t = std::clamp(t, 0.0, T);
    const auto it = std::upper_bound(plan_.nodes.begin(), plan_.nodes.end(), t);
    std::size_t k = it == plan_.nodes.begin()
                        ? 0
                        : static_cast<std::size_t>(it - plan_.nodes.begin()) - 1;
    k = std::min(k, plan_.segments() - 1);
    return InSegment(k, t - plan_.nodes[k]);
  }

 private:
  PlanSample InSegment(std::size_t k, double tau) const {
    const double v0 = plan_.StartVelocity(k);
    const double a = plan_.alpha[k];
    const double ramp = plan_.RampEnd(k) - plan_.nodes[k];
    const double base = node_theta_.size() > k ? node_theta_[k] : 0.0;
    PlanSample s;
    if (tau <= ramp) {
      s.theta = base + v0 * tau + 0.5 * a * tau * tau;
      s.omega = v0 + a * tau;
      s.alpha = ramp > 0.0 ? a : 0.0;
    } else {
      s.theta = base + v0 * ramp + 0.5 * a * ramp * ramp + plan_.w[k] * (tau - ramp);
      s.omega = plan_.w[k];
      s.alpha = 0.0;
    }
    return s;
  }

  const VelocityPlan& plan_;
  std::vector<double> node_theta_;
};

void CheckSameNodes(const LegPlan& plan) {
  if (plan.joints[0].nodes != plan.joints[1].nodes) {
    throw ValidationError("plan: joints must share node times");
  }
}

void CheckReference(const LegPlan& plan, const TorqueReference& reference) {
  const double T = plan.Duration();
  if (reference.t.size() < 2 || reference.t.size() != reference.tau.size()) {
    throw ValidationError("plan cost: reference needs at least two samples");
  }
  if (std::abs(reference.Duration() - T) > HorizonTolerance(T) ||
      std::abs(reference.t.front()) > HorizonTolerance(T)) {
    throw DomainMismatch("plan cost: reference covers [" + std::to_string(reference.t.front()) +
                         ", " + std::to_string(reference.Duration()) + "] but plan covers [0, " +
                         std::to_string(T) + "]");
  }
}

// Trapezoidal ∫ eᵀWe dt over reference samples [begin, end).
double ErrorIntegral(const LegParams& p, const LegPlan& plan, const TorqueReference& reference,
                     const WeightMatrix& W, std::size_t begin, std::size_t end) {
  const PlanEvaluator hip(plan.joints[0], plan.theta0(0));
  const PlanEvaluator knee(plan.joints[1], plan.theta0(1));
  const Eigen::Vector2d& w = W.diagonal();
  double integral = 0.0;
  double previous = 0.0;
  for (std::size_t i = begin; i < end; ++i) {
    const double t = reference.t[i];
    const PlanSample a = hip.At(t), b = knee.At(t);
    const JointVector approx =
        InverseDynamics(p, {a.theta, b.theta}, {a.omega, b.omega}, {a.alpha, b.alpha});
    const JointVector e = reference.tau[i] - approx;
    const double q = w(0) * e(0) * e(0) + w(1) * e(1) * e(1);
    if (i > begin) integral += 0.5 * (q + previous) * (t - reference.t[i - 1]);
    previous = q;
  }
  return integral;
}

std::vector<double> SampleTimes(double T, double dt) {
  if (!(dt > 0.0)) throw ValidationError("plan: sampling step must be > 0");
  std::vector<double> t;
  for (std::size_t k = 0;; ++k) {
    const double tk = static_cast<double>(k) * dt;
    if (tk > T - 1e-12 * std::max(1.0, T)) break;
    t.push_back(tk);
  }
  t.push_back(T);
  return t;
}

}  // namespace

void PlanBounds::Validate() const {
  if (!std::isfinite(w_min) || !std::isfinite(w_max) || !std::isfinite(alpha_min) ||
      !std::isfinite(alpha_max)) {
    throw InfeasibleBounds("bounds: non-finite value");
  }
  if (w_min > w_max) throw InfeasibleBounds("bounds: w_min > w_max");
  if (alpha_min < 0.0) throw InfeasibleBounds("bounds: alpha_min < 0 (alpha bounds are magnitudes)");
  if (alpha_min > alpha_max) throw InfeasibleBounds("bounds: alpha_min > alpha_max");
  if (alpha_max <= 0.0) throw InfeasibleBounds("bounds: alpha_max must be > 0");
}

double VelocityPlan::RampEnd(std::size_t k) const {
  const double dw = w[k] - StartVelocity(k);
  if (dw == 0.0 || alpha[k] == 0.0) return nodes[k];
  return std::min(nodes[k] + dw / alpha[k], nodes[k + 1]);
}

void VelocityPlan::Validate() const {
  if (nodes.size() < 2 || w.size() != nodes.size() - 1 || alpha.size() != w.size()) {
    throw ValidationError("plan: need n >= 2 nodes and n-1 (w, alpha) pairs");
  }
  if (nodes.front() != 0.0) throw ValidationError("plan: first node must be 0");
  for (std::size_t i = 1; i < nodes.size(); ++i) {
    if (!(nodes[i] > nodes[i - 1])) throw ValidationError("plan: nodes must increase");
  }
  if (!std::isfinite(w0)) throw ValidationError("plan: w0 not finite");
  for (std::size_t k = 0; k < segments(); ++k) {
    const double dw = w[k] - StartVelocity(k);
    if (!std::isfinite(w[k]) || !std::isfinite(alpha[k])) {
      throw ValidationError("plan: non-finite parameter in segment " + std::to_string(k + 1));
    }
    if (dw == 0.0) continue;
    if (Sign(alpha[k]) != Sign(dw)) {
      throw ValidationError("plan: acceleration sign disagrees with velocity change in segment " +
                            std::to_string(k + 1));
    }
    const double span = nodes[k + 1] - nodes[k];
    if (dw / alpha[k] > span * (1.0 + 1e-12) + 1e-15) {
      throw ValidationError("plan: ramp does not fit segment " + std::to_string(k + 1));
    }
  }
}

WeightMatrix::WeightMatrix(const Eigen::Vector2d& diagonal) : diagonal_(diagonal) {
  if (!diagonal.allFinite() || (diagonal.array() < 0.0).any()) {
    throw ValidationError("weight matrix entries must be finite and >= 0");
  }
}

double EvalVelocity(const VelocityPlan& plan, double t) {
  return PlanEvaluator(plan, 0.0).At(t).omega;
}

PlanSample EvalPlan(const VelocityPlan& plan, double theta0, double t) {
  return PlanEvaluator(plan, theta0).At(t);
}

PlanTrajectory IntegratePlan(const VelocityPlan& plan, double theta0, double dt) {
  plan.Validate();
  const PlanEvaluator eval(plan, theta0);
  PlanTrajectory out;
  out.t = SampleTimes(plan.Duration(), dt);
  for (const double t : out.t) {
    const PlanSample s = eval.At(t);
    out.theta.push_back(s.theta);
    out.omega.push_back(s.omega);
    out.alpha.push_back(s.alpha);
  }
  return out;
}

TorqueReference TorqueReference::FromTracking(const TrackingResult& result) {
  return {result.t, result.tau};
}

TorqueReference TorqueReference::FromProfile(const LegParams& p, const GaitProfile& profile) {
  TorqueReference ref;
  ref.t = profile.t;
  for (std::size_t i = 0; i < profile.size(); ++i) {
    ref.tau.push_back(InverseDynamics(p, profile.theta[i], profile.theta_dot[i],
                                      profile.theta_ddot[i]));
  }
  return ref;
}

TorqueReference TorqueReference::FromPlan(const LegParams& p, const LegPlan& plan, double dt) {
  CheckSameNodes(plan);
  const PlanEvaluator hip(plan.joints[0], plan.theta0(0));
  const PlanEvaluator knee(plan.joints[1], plan.theta0(1));
  TorqueReference ref;
  ref.t = SampleTimes(plan.Duration(), dt);
  for (const double t : ref.t) {
    const PlanSample a = hip.At(t), b = knee.At(t);
    ref.tau.push_back(InverseDynamics(p, {a.theta, b.theta}, {a.omega, b.omega},
                                      {a.alpha, b.alpha}));
  }
  return ref;
}

double PlanCost(const LegParams& p, const LegPlan& plan, const TorqueReference& reference,
                const WeightMatrix& W) {
  CheckSameNodes(plan);
  CheckReference(plan, reference);
  return std::sqrt(ErrorIntegral(p, plan, reference, W, 0, reference.t.size()) /
                   reference.Duration());
}

VelocityPlan RealizePlan(const std::vector<double>& nodes, double w0,
                         const std::vector<double>& w_target,
                         const std::vector<double>& alpha_magnitude,
                         const PlanBounds& bounds, double* penalty) {
  if (nodes.size() < 2 || w_target.size() != nodes.size() - 1 ||
      alpha_magnitude.size() != w_target.size()) {
    throw ValidationError("plan: need n >= 2 nodes and n-1 (w, alpha) pairs");
  }
  VelocityPlan plan;
  plan.nodes = nodes;
  plan.w0 = std::clamp(w0, bounds.w_min, bounds.w_max);
  double adjustment = 0.0;
  double previous = plan.w0;
  for (std::size_t k = 0; k < w_target.size(); ++k) {
    const double span = nodes[k + 1] - nodes[k];
    double wk = std::clamp(w_target[k], bounds.w_min, bounds.w_max);
    double a = std::clamp(std::abs(alpha_magnitude[k]), bounds.alpha_min, bounds.alpha_max);
    double dw = wk - previous;
    if (dw != 0.0) {
      const double needed = std::abs(dw) / span;
      if (a < needed) {
        if (needed <= bounds.alpha_max) {
          adjustment += needed - a;
          a = needed;
        } else {
          adjustment += (bounds.alpha_max - a) + (std::abs(dw) - bounds.alpha_max * span);
          a = bounds.alpha_max;
          wk = previous + Sign(dw) * bounds.alpha_max * span;
          dw = wk - previous;
        }
      }
    }
    plan.w.push_back(wk);
    plan.alpha.push_back(dw < 0.0 ? -a : a);
    previous = wk;
  }
  if (penalty) *penalty += adjustment;
  return plan;
}

LegPlan InitialPlan(const GaitProfile& profile, const NodeSequence& nodes,
                    const PlanBounds& bounds) {
  bounds.Validate();
  if (nodes.size() < 2) throw ValidationError("plan: need at least two nodes");
  LegPlan plan;
  plan.theta0 = profile.theta.front();
  const double mid = 0.5 * (bounds.alpha_min + bounds.alpha_max);
  for (int j = 0; j < 2; ++j) {
    std::vector<double> w, a;
    for (std::size_t k = 0; k + 1 < nodes.size(); ++k) {
      const std::size_t lo = nodes.indices[k], hi = nodes.indices[k + 1];
      double area = 0.0;
      for (std::size_t i = lo; i < hi; ++i) {
        area += 0.5 * (profile.theta_dot[i](j) + profile.theta_dot[i + 1](j)) *
                (profile.t[i + 1] - profile.t[i]);
      }
      w.push_back(area / (profile.t[hi] - profile.t[lo]));
      a.push_back(mid);
    }
    plan.joints[j] =
        RealizePlan(nodes.times, profile.theta_dot.front()(j), w, a, bounds);
  }
  return plan;
}

OptimizationResult OptimizePlan(const LegParams& p, const NodeSequence& nodes,
                                const TorqueReference& reference, const PlanBounds& bounds,
                                const WeightMatrix& W, const LegPlan& init,
                                const OptimizerOptions& options) {
  bounds.Validate();
  CheckSameNodes(init);
  if (init.joints[0].nodes != nodes.times) {
    throw ValidationError("optimizer: initial plan does not use the given nodes");
  }
  if (options.starts < 1) throw ValidationError("optimizer: need at least one start");
  if (options.segment_starts < 0) throw ValidationError("optimizer: segment_starts must be >= 0");
  const auto S = static_cast<Eigen::Index>(nodes.segments());
  const Eigen::Index dim = 4 * S;

  Eigen::VectorXd lower(dim), upper(dim), x0(dim);
  for (int j = 0; j < 2; ++j) {
    const Eigen::Index off = 2 * j * S;
    lower.segment(off, S).setConstant(bounds.w_min);
    upper.segment(off, S).setConstant(bounds.w_max);
    lower.segment(off + S, S).setConstant(bounds.alpha_min);
    upper.segment(off + S, S).setConstant(bounds.alpha_max);
    for (Eigen::Index k = 0; k < S; ++k) {
      x0(off + k) = init.joints[j].w[k];
      x0(off + S + k) = std::abs(init.joints[j].alpha[k]);
    }
  }
  x0 = x0.cwiseMax(lower).cwiseMin(upper);

  const auto build = [&](const Eigen::VectorXd& x, double* penalty) {
    LegPlan plan;
    plan.theta0 = init.theta0;
    for (int j = 0; j < 2; ++j) {
      const Eigen::Index off = 2 * j * S;
      std::vector<double> w(S), a(S);
      for (Eigen::Index k = 0; k < S; ++k) {
        w[k] = x(off + k);
        a[k] = x(off + S + k);
      }
      plan.joints[j] = RealizePlan(nodes.times, init.joints[j].w0, w, a, bounds, penalty);
    }
    return plan;
  };
  const std::function<double(const Eigen::VectorXd&)> objective =
      [&](const Eigen::VectorXd& x) { return PlanCost(p, build(x, nullptr), reference, W); };

  OptimizationResult result;
  result.initial_cost = objective(x0);

  // Reference samples of segment k are [first[k], first[k+1]): half-open so
  // a window never sees the acceleration of the following segment.
  std::vector<std::size_t> first(S + 1, reference.t.size());
  for (Eigen::Index k = 0; k < S; ++k) {
    const double from = nodes.times[k] - HorizonTolerance(nodes.times.back());
    first[k] = static_cast<std::size_t>(
        std::lower_bound(reference.t.begin(), reference.t.end(), from) - reference.t.begin());
  }

  struct Run {
    NelderMeadResult search;
    int evaluations = 0;
    bool converged = true;
    std::vector<double> trace;
  };

  // The torque on [0, t_{k+1}) depends only on segments up to k, so a sweep
  // fitting one segment at a time (4 parameters) against its own window
  // gives the global search a start close to the optimum.
  const auto sweep = [&](Eigen::VectorXd x, std::mt19937_64& rng, Run& run) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (Eigen::Index k = 0; k < S; ++k) {
      const std::array<Eigen::Index, 4> idx{k, S + k, 2 * S + k, 3 * S + k};
      Eigen::VectorXd local(4), lo(4), hi(4);
      for (int i = 0; i < 4; ++i) {
        local(i) = x(idx[i]);
        lo(i) = lower(idx[i]);
        hi(i) = upper(idx[i]);
      }
      const std::function<double(const Eigen::VectorXd&)> window =
          [&](const Eigen::VectorXd& v) {
            Eigen::VectorXd y = x;
            for (int i = 0; i < 4; ++i) y(idx[i]) = v(i);
            return ErrorIntegral(p, build(y, nullptr), reference, W, first[k], first[k + 1]);
          };
      NelderMeadResult best = MinimizeInBox(window, local, lo, hi, options.segment_search);
      run.evaluations += best.evaluations;
      run.converged = run.converged && best.converged;
      for (int m = 0; m < options.segment_starts; ++m) {
        Eigen::VectorXd v(4);
        for (int i = 0; i < 4; ++i) v(i) = lo(i) + unit(rng) * (hi(i) - lo(i));
        NelderMeadResult r = MinimizeInBox(window, v, lo, hi, options.segment_search);
        run.evaluations += r.evaluations;
        if (r.f < best.f) best = std::move(r);
      }
      for (int i = 0; i < 4; ++i) x(idx[i]) = best.x(i);
    }
    return x;
  };

  const auto run = [&](const Eigen::VectorXd& start, std::uint64_t stream) {
    Run out;
    std::mt19937_64 local_rng(stream);
    const double f_start = objective(start);
    const Eigen::VectorXd swept = sweep(start, local_rng, out);
    const double f_swept = objective(swept);
    out.trace = {f_start, std::min(f_start, f_swept)};
    out.search = MinimizeInBox(objective, f_swept < f_start ? swept : start, lower, upper,
                               options.nelder_mead);
    out.evaluations += out.search.evaluations + 2;
    out.converged = out.converged && out.search.converged;
    out.trace.insert(out.trace.end(), out.search.trace.begin(), out.search.trace.end());
    return out;
  };

  // All start points are drawn up front from one stream so the outcome does
  // not depend on thread scheduling.
  std::mt19937_64 rng(options.seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::vector<Eigen::VectorXd> starts{x0};
  std::vector<std::uint64_t> streams{rng()};
  for (int s = 1; s < options.starts; ++s) {
    streams.push_back(rng());
    Eigen::VectorXd x = x0;
    for (Eigen::Index i = 0; i < dim; ++i) {
      x(i) += options.perturbation * unit(rng) * (upper(i) - lower(i));
    }
    starts.push_back(x.cwiseMax(lower).cwiseMin(upper));
  }

  std::vector<Run> runs;
  if (options.parallel && starts.size() > 1) {
    std::vector<std::future<Run>> futures;
    for (std::size_t s = 0; s < starts.size(); ++s) {
      futures.push_back(std::async(std::launch::async, run, starts[s], streams[s]));
    }
    for (auto& f : futures) runs.push_back(f.get());
  } else {
    for (std::size_t s = 0; s < starts.size(); ++s) runs.push_back(run(starts[s], streams[s]));
  }

  std::size_t best = 0;
  for (std::size_t s = 0; s < runs.size(); ++s) {
    if (runs[s].search.f < runs[best].search.f) best = s;
    result.evaluations += runs[s].evaluations;
    result.hit_max_iterations = result.hit_max_iterations || !runs[s].converged;
    for (std::size_t it = 0; it < runs[s].trace.size(); ++it) {
      result.trace.push_back({static_cast<int>(s), static_cast<int>(it), runs[s].trace[it]});
    }
  }
  result.best_start = static_cast<int>(best);
  result.plan = build(runs[best].search.x, &result.feasibility_penalty);
  result.final_cost = runs[best].search.f;
  return result;
}

std::vector<MotorCommand> PlanToCommands(const VelocityPlan& plan) {
  std::vector<MotorCommand> commands;
  for (std::size_t k = 0; k < plan.segments(); ++k) {
    commands.push_back({plan.nodes[k], plan.w[k], plan.alpha[k]});
  }
  return commands;
}

VelocityPlan PlanFromCommands(const std::vector<MotorCommand>& commands, double w0,
                              double duration) {
  VelocityPlan plan;
  plan.w0 = w0;
  for (const MotorCommand& c : commands) {
    plan.nodes.push_back(c.t0);
    plan.w.push_back(c.w);
    plan.alpha.push_back(c.alpha);
  }
  plan.nodes.push_back(duration);
  plan.Validate();
  return plan;
}

TrackingResult PlanTrackingResult(const LegParams& p, const LegPlan& plan,
                                  const DesiredTrajectory& desired,
                                  const std::vector<double>& times) {
  CheckSameNodes(plan);
  const PlanEvaluator hip(plan.joints[0], plan.theta0(0));
  const PlanEvaluator knee(plan.joints[1], plan.theta0(1));
  TrackingResult r;
  for (const double t : times) {
    const PlanSample a = hip.At(t), b = knee.At(t);
    const JointKinematics d = desired.at(t);
    const JointVector theta(a.theta, b.theta), omega(a.omega, b.omega);
    r.t.push_back(t);
    r.theta.push_back(theta);
    r.omega.push_back(omega);
    r.tau.push_back(InverseDynamics(p, theta, omega, {a.alpha, b.alpha}));
    r.tau_d.push_back(InverseDynamics(p, d.theta, d.omega, d.alpha));
    r.theta_d.push_back(d.theta);
    Vector5d x;
    x << theta - d.theta, omega - d.omega, 0.0;
    r.x.push_back(x);
  }
  return r;
}

void WritePlanCsv(const std::filesystem::path& path, const LegPlan& plan) {
  CheckSameNodes(plan);
  CsvTable table;
  table.header = {"k", "t0", "w1", "w2", "alpha1", "alpha2"};
  const auto& hip = plan.joints[0];
  const auto& knee = plan.joints[1];
  for (std::size_t k = 0; k < hip.segments(); ++k) {
    table.rows.push_back({static_cast<double>(k + 1), hip.nodes[k], hip.w[k], knee.w[k],
                          hip.alpha[k], knee.alpha[k]});
  }
  WriteCsv(path, table);
}

void WriteCommandsCsv(const std::filesystem::path& path, const LegPlan& plan) {
  CsvTable table;
  table.header = {"joint", "k", "t0", "w", "alpha"};
  for (int j = 0; j < 2; ++j) {
    const auto commands = PlanToCommands(plan.joints[j]);
    for (std::size_t k = 0; k < commands.size(); ++k) {
      table.rows.push_back({static_cast<double>(j + 1), static_cast<double>(k + 1),
                            commands[k].t0, commands[k].w, commands[k].alpha});
    }
  }
  WriteCsv(path, table);
}

}  // namespace gaitrep
