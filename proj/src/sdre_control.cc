#include "gaitrep/sdre_control.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "gaitrep/csv.h"
#include "gaitrep/errors.h"

namespace gaitrep {

ControlGains ControlGains::Reference() {
  ControlGains gains;
  gains.Q = Vector5d(500, 500, 20, 20, 1).asDiagonal();
  gains.R = Eigen::Vector2d(20, 20).asDiagonal();
  gains.eta = 1.0;
  return gains;
}

void ControlGains::Validate() const {
  if (!Q.allFinite() || !R.allFinite() || !std::isfinite(eta)) {
    throw ValidationError("gains: non-finite entries");
  }
  if ((Q - Q.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, Q.cwiseAbs().maxCoeff())) {
    throw ValidationError("gains: Q must be symmetric");
  }
  if (Eigen::SelfAdjointEigenSolver<Matrix5d>(Q).eigenvalues().minCoeff() < -1e-10) {
    throw ValidationError("gains: Q must be positive semi-definite");
  }
  if ((R - R.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, R.cwiseAbs().maxCoeff()) ||
      R.llt().info() != Eigen::Success) {
    throw ValidationError("gains: R must be symmetric positive definite");
  }
  if (!(eta > 0.0)) throw ValidationError("gains: eta must be > 0");
}

Vector5d ErrorState::Stacked() const {
  Vector5d x;
  x << x_theta, x_w, zeta;
  return x;
}

ErrorState ErrorState::FromStacked(const Vector5d& x) {
  return {x.head<2>(), x.segment<2>(2), x(4)};
}

ErrorState ErrorState::Between(const JointState& actual, const JointKinematics& desired,
                               double zeta) {
  return {actual.theta - desired.theta, actual.omega - desired.omega, zeta};
}

JointVector GfTerm(const LegParams& p, const JointState& actual,
                   const JointKinematics& d) {
  return (MassMatrix(p, actual.theta) - MassMatrix(p, d.theta)) * d.alpha +
         (CoriolisMatrix(p, actual.theta, actual.omega) -
          CoriolisMatrix(p, d.theta, d.omega)) * d.omega +
         (GravityMatrix(p, actual.theta) - GravityMatrix(p, d.theta)) * d.theta;
}

SdcModel BuildSdc(const LegParams& p, const ErrorState& x, const JointKinematics& desired,
                  const ControlGains& gains) {
  const JointState actual{desired.theta + x.x_theta, desired.omega + x.x_w};
  const Eigen::Matrix2d M = MassMatrix(p, actual.theta);
  const Eigen::Matrix2d Minv = M.inverse();
  const Eigen::Matrix2d V = CoriolisMatrix(p, actual.theta, actual.omega);
  const Eigen::Matrix2d G = GravityMatrix(p, actual.theta);
  const JointVector gf = GfTerm(p, actual, desired);

  SdcModel model;
  model.A.block<2, 2>(0, 2) = Eigen::Matrix2d::Identity();
  model.A.block<2, 2>(2, 0) = -Minv * G;
  model.A.block<2, 2>(2, 2) = -Minv * V;
  model.A.block<2, 1>(2, 4) = -Minv * gf;
  model.A(4, 4) = -gains.eta;
  model.B.block<2, 2>(2, 0) = Minv;
  return model;
}

JointVector FeedbackFromRiccati(const SdcModel& model, const ControlGains& gains,
                                const Eigen::MatrixXd& P, const ErrorState& x) {
  const Vector5d px = P * x.Stacked();
  return -gains.R.llt().solve(model.B.transpose() * px);
}

Feedback SdreFeedback(const SdcModel& model, const ControlGains& gains,
                      const ErrorState& x) {
  Feedback fb;
  fb.care = SolveCare({model.A, model.B, gains.Q, gains.R});
  fb.u = FeedbackFromRiccati(model, gains, fb.care.P, x);
  return fb;
}

JointVector TrackingResult::AngleRmse() const {
  JointVector sum = JointVector::Zero();
  for (std::size_t i = 0; i < t.size(); ++i) {
    sum += (theta[i] - theta_d[i]).cwiseAbs2();
  }
  return t.empty() ? sum : (sum / static_cast<double>(t.size())).cwiseSqrt();
}

JointVector TrackingResult::PeakAbsTorque() const {
  JointVector peak = JointVector::Zero();
  for (const auto& v : tau) peak = peak.cwiseMax(v.cwiseAbs());
  return peak;
}

JointVector TrackingResult::PeakAbsControl() const {
  JointVector peak = JointVector::Zero();
  for (std::size_t i = 0; i < tau.size(); ++i) {
    peak = peak.cwiseMax((tau[i] - tau_d[i]).cwiseAbs());
  }
  return peak;
}

TrackingResult SimulateTracking(const LegParams& p, const DesiredTrajectory& desired,
                                const ControlGains& gains,
                                const SimulationOptions& options) {
  gains.Validate();
  if (!(options.dt > 0.0)) throw ValidationError("simulation: dt must be > 0");
  if (options.care_every < 1) throw ValidationError("simulation: care_every must be >= 1");
  if (!(desired.duration > 0.0) || !desired.at) {
    throw ValidationError("simulation: desired trajectory must have positive duration");
  }
  const double T = desired.duration;
  const auto full_steps = static_cast<std::size_t>(std::floor(T / options.dt + 1e-9));
  std::vector<double> times;
  for (std::size_t k = 0; k <= full_steps; ++k) times.push_back(static_cast<double>(k) * options.dt);
  if (T - times.back() > 1e-12 * std::max(1.0, T)) times.push_back(T);

  TrackingResult out;
  TrackingDiagnostics& diag = out.diagnostics;
  const std::size_t n = times.size();
  out.t = times;
  out.theta.reserve(n);
  out.omega.reserve(n);
  out.tau.reserve(n);
  out.tau_d.reserve(n);
  out.theta_d.reserve(n);
  out.x.reserve(n);

  const JointKinematics start = desired.at(0.0);
  JointState state{start.theta + options.initial_angle_error,
                   start.omega + options.initial_velocity_error};
  double zeta = options.zeta0;
  Eigen::MatrixXd P;

  for (std::size_t i = 0; i < n; ++i) {
    const double t = times[i];
    const JointKinematics d = desired.at(t);
    const ErrorState x = ErrorState::Between(state, d, zeta);
    const Vector5d xs = x.Stacked();
    if (!xs.allFinite() || xs.cwiseAbs().maxCoeff() > options.divergence_bound) {
      throw SimulationDiverged("simulation: tracking error exceeded bound at t = " +
                               std::to_string(t));
    }

    const SdcModel model = BuildSdc(p, x, d, gains);
    if (i % static_cast<std::size_t>(options.care_every) == 0) {
      if (options.check_hautus) {
        ++diag.hautus_checks;
        if (!HautusStabilizable(model.A, model.B)) ++diag.hautus_failures;
      }
      const CareSolution care = SolveCare({model.A, model.B, gains.Q, gains.R});
      ++diag.care_solves;
      diag.max_care_residual = std::max(diag.max_care_residual, care.residual_norm);
      diag.max_closed_loop_real =
          std::max(diag.max_closed_loop_real, care.MaxClosedLoopRealPart());
      P = care.P;
    }
    const JointVector u = FeedbackFromRiccati(model, gains, P, x);
    const JointVector tau_d = InverseDynamics(p, d.theta, d.omega, d.alpha);
    const JointVector tau = tau_d + u;

    // τ − τ_d = M(θ)Δθ̈ + V(θ,θ̇)Δθ̇ + G_sd(θ)Δθ + g_f
    const JointVector accel = ForwardDynamics(p, state, tau);
    const JointVector decomposition =
        MassMatrix(p, state.theta) * (accel - d.alpha) +
        CoriolisMatrix(p, state.theta, state.omega) * x.x_w +
        GravityMatrix(p, state.theta) * x.x_theta + GfTerm(p, state, d);
    diag.max_decomposition_residual = std::max(
        diag.max_decomposition_residual, (u - decomposition).cwiseAbs().maxCoeff());

    out.theta.push_back(state.theta);
    out.omega.push_back(state.omega);
    out.tau.push_back(tau);
    out.tau_d.push_back(tau_d);
    out.theta_d.push_back(d.theta);
    out.x.push_back(xs);

    if (i + 1 < n) {
      const double h = times[i + 1] - t;
      state = Rk4Step(p, state, tau, h);
      zeta *= std::exp(-gains.eta * h);
    }
  }
  return out;
}

void WriteTrackingCsv(const std::filesystem::path& path, const TrackingResult& r) {
  CsvTable table;
  table.header = {"t",    "theta1", "theta2", "omega1", "omega2", "tau1",
                  "tau2", "tau_d1", "tau_d2", "err1",   "err2"};
  for (std::size_t i = 0; i < r.size(); ++i) {
    const JointVector err = r.theta[i] - r.theta_d[i];
    table.rows.push_back({r.t[i], r.theta[i](0), r.theta[i](1), r.omega[i](0),
                          r.omega[i](1), r.tau[i](0), r.tau[i](1), r.tau_d[i](0),
                          r.tau_d[i](1), err(0), err(1)});
  }
  WriteCsv(path, table);
}

TrackingResult ReadTrackingCsv(const std::filesystem::path& path) {
  const CsvTable table = ReadCsv(path);
  const auto col = [&](const char* name) { return table.Column(name); };
  const std::size_t t = col("t"), th1 = col("theta1"), th2 = col("theta2"),
                    w1 = col("omega1"), w2 = col("omega2"), tq1 = col("tau1"),
                    tq2 = col("tau2"), td1 = col("tau_d1"), td2 = col("tau_d2"),
                    e1 = col("err1"), e2 = col("err2");
  TrackingResult r;
  for (const auto& row : table.rows) {
    r.t.push_back(row[t]);
    r.theta.emplace_back(row[th1], row[th2]);
    r.omega.emplace_back(row[w1], row[w2]);
    r.tau.emplace_back(row[tq1], row[tq2]);
    r.tau_d.emplace_back(row[td1], row[td2]);
    r.theta_d.push_back(r.theta.back() - JointVector(row[e1], row[e2]));
  }
  if (r.t.empty()) throw ValidationError(path.string() + ": trajectory has no samples");
  return r;
}

}  // namespace gaitrep
