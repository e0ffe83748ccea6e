#include "gaitrep/gait.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <numbers>

#include "gaitrep/csv.h"
#include "gaitrep/errors.h"

namespace gaitrep {
namespace {

constexpr std::size_t kMinSamples = 3;

double TimeTolerance(double duration) { return 1e-12 * std::max(1.0, duration); }

std::vector<JointVector> MovingAverage(const std::vector<JointVector>& x,
                                       int window) {
  if (window <= 1) return x;
  const auto half = static_cast<std::ptrdiff_t>(window / 2);
  const auto n = static_cast<std::ptrdiff_t>(x.size());
  std::vector<JointVector> out(x.size());
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    // Symmetric window shrunk near the ends so the filter stays centered.
    const std::ptrdiff_t reach = std::min({half, i, n - 1 - i});
    JointVector sum = JointVector::Zero();
    for (std::ptrdiff_t k = i - reach; k <= i + reach; ++k) sum += x[k];
    out[i] = sum / static_cast<double>(2 * reach + 1);
  }
  return out;
}

// Second-order first derivative on a possibly non-uniform grid.
std::vector<JointVector> FirstDerivative(const std::vector<double>& t,
                                         const std::vector<JointVector>& f) {
  const std::size_t n = t.size();
  std::vector<JointVector> d(n);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double h1 = t[i] - t[i - 1];
    const double h2 = t[i + 1] - t[i];
    d[i] = -h2 / (h1 * (h1 + h2)) * f[i - 1] + (h2 - h1) / (h1 * h2) * f[i] +
           h1 / (h2 * (h1 + h2)) * f[i + 1];
  }
  {
    const double h1 = t[1] - t[0];
    const double h2 = t[2] - t[1];
    d[0] = -(2 * h1 + h2) / (h1 * (h1 + h2)) * f[0] + (h1 + h2) / (h1 * h2) * f[1] -
           h1 / (h2 * (h1 + h2)) * f[2];
  }
  {
    const double h1 = t[n - 2] - t[n - 3];
    const double h2 = t[n - 1] - t[n - 2];
    d[n - 1] = h2 / (h1 * (h1 + h2)) * f[n - 3] - (h1 + h2) / (h1 * h2) * f[n - 2] +
               (2 * h2 + h1) / (h2 * (h1 + h2)) * f[n - 1];
  }
  return d;
}

template <typename T>
T Lerp(const T& a, const T& b, double s) {
  return a + s * (b - a);
}

// Index i with t[i] <= time <= t[i+1], plus the interpolation weight.
std::pair<std::size_t, double> Locate(const std::vector<double>& t, double time) {
  const double tol = TimeTolerance(t.back());
  if (time < t.front() - tol || time > t.back() + tol) {
    throw OutOfDomain("time " + std::to_string(time) + " outside [0, " +
                      std::to_string(t.back()) + "]");
  }
  auto it = std::upper_bound(t.begin(), t.end(), time);
  std::size_t i = it == t.begin() ? 0 : static_cast<std::size_t>(it - t.begin()) - 1;
  if (i + 1 >= t.size()) i = t.size() - 2;
  if (std::abs(time - t[i]) <= tol) return {i, 0.0};
  if (std::abs(time - t[i + 1]) <= tol) return {i, 1.0};
  return {i, (time - t[i]) / (t[i + 1] - t[i])};
}

GaitProfile FromAnalytic(double dt, double duration, const std::string& label,
                         const std::function<JointVector(double)>& theta_of) {
  if (!(dt > 0.0) || !(duration > 0.0)) {
    throw ValidationError("synthetic profile needs dt > 0 and duration > 0");
  }
  const auto steps = static_cast<std::size_t>(std::floor(duration / dt + 1e-9));
  std::vector<double> t;
  std::vector<JointVector> theta;
  for (std::size_t k = 0; k <= steps; ++k) {
    t.push_back(static_cast<double>(k) * dt);
  }
  if (duration - t.back() > TimeTolerance(duration)) t.push_back(duration);
  for (const double tk : t) theta.push_back(theta_of(tk));
  return MakeProfile(std::move(t), std::move(theta), label);
}

}  // namespace

JointKinematics GaitProfile::At(double time) const {
  const auto [i, s] = Locate(t, time);
  return {Lerp(theta[i], theta[i + 1], s), Lerp(theta_dot[i], theta_dot[i + 1], s),
          Lerp(theta_ddot[i], theta_ddot[i + 1], s)};
}

GaitProfile MakeProfile(std::vector<double> t, std::vector<JointVector> theta,
                        std::string label, int smoothing_window) {
  if (t.size() != theta.size()) {
    throw ValidationError("profile: time and angle arrays differ in length");
  }
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (!std::isfinite(t[i]) || !theta[i].allFinite()) {
      throw ValidationError("profile: non-finite value at sample " + std::to_string(i));
    }
    if (theta[i].cwiseAbs().maxCoeff() >= std::numbers::pi) {
      throw ValidationError("profile: |angle| >= pi at sample " + std::to_string(i) +
                            " (angles must be in radians)");
    }
    if (i > 0 && !(t[i] > t[i - 1])) {
      throw ValidationError("profile: time is not strictly increasing at sample " +
                            std::to_string(i));
    }
  }
  if (t.size() < kMinSamples) {
    throw TooFewSamples("profile: need at least " + std::to_string(kMinSamples) +
                        " samples, got " + std::to_string(t.size()));
  }
  if (!(t.back() > t.front())) throw ValidationError("profile: duration must be > 0");
  const double t0 = t.front();
  if (t0 != 0.0) {
    for (double& ti : t) ti -= t0;
  }
  GaitProfile profile;
  profile.t = std::move(t);
  profile.theta = std::move(theta);
  profile.label = std::move(label);
  return Differentiate(std::move(profile), smoothing_window);
}

GaitProfile Differentiate(GaitProfile profile, int smoothing_window) {
  if (profile.size() < kMinSamples) {
    throw TooFewSamples("profile: differentiation needs at least " +
                        std::to_string(kMinSamples) + " samples, got " +
                        std::to_string(profile.size()));
  }
  if (smoothing_window < 1) {
    throw ValidationError("profile: smoothing window must be >= 1");
  }
  profile.smoothing_window = smoothing_window;
  const auto smoothed = MovingAverage(profile.theta, smoothing_window);
  profile.theta_dot = FirstDerivative(profile.t, smoothed);
  profile.theta_ddot = FirstDerivative(profile.t, profile.theta_dot);
  return profile;
}

GaitProfile Resample(const GaitProfile& profile, double dt) {
  if (!(dt > 0.0)) throw ValidationError("resample: dt must be > 0");
  const double duration = profile.Duration();
  std::vector<double> t;
  for (std::size_t k = 0;; ++k) {
    const double tk = static_cast<double>(k) * dt;
    if (tk > duration - TimeTolerance(duration)) break;
    t.push_back(tk);
  }
  t.push_back(duration);
  std::vector<JointVector> theta;
  theta.reserve(t.size());
  for (const double tk : t) {
    const auto [i, s] = Locate(profile.t, tk);
    theta.push_back(s == 0.0   ? profile.theta[i]
                    : s == 1.0 ? profile.theta[i + 1]
                               : Lerp(profile.theta[i], profile.theta[i + 1], s));
  }
  return MakeProfile(std::move(t), std::move(theta), profile.label,
                     profile.smoothing_window);
}

static std::vector<GaitProfile> ProfilesFromTable(const CsvTable& table,
                                           const std::string& source,
                                           int smoothing_window) {
  struct Leg {
    std::string label;
    std::string hip, knee;
  };
  std::vector<Leg> legs;
  const auto& h = table.header;
  if (h == std::vector<std::string>{"t", "hip", "knee"}) {
    legs = {{"", "hip", "knee"}};
  } else if (h == std::vector<std::string>{"t", "hip_l", "knee_l", "hip_r", "knee_r"}) {
    legs = {{"left", "hip_l", "knee_l"}, {"right", "hip_r", "knee_r"}};
  } else {
    throw ParseError(source + ": header must be 't,hip,knee' or "
                              "'t,hip_l,knee_l,hip_r,knee_r'");
  }
  std::vector<GaitProfile> out;
  for (const Leg& leg : legs) {
    const std::size_t ih = table.Column(leg.hip), ik = table.Column(leg.knee);
    std::vector<double> t;
    std::vector<JointVector> theta;
    for (const auto& row : table.rows) {
      t.push_back(row[0]);
      theta.emplace_back(row[ih], row[ik]);
    }
    out.push_back(MakeProfile(std::move(t), std::move(theta), leg.label,
                              smoothing_window));
  }
  return out;
}

std::vector<GaitProfile> ParseProfiles(const std::string& csv_text,
                                       const std::string& source,
                                       int smoothing_window) {
  return ProfilesFromTable(ParseCsv(csv_text, source), source, smoothing_window);
}

std::vector<GaitProfile> LoadProfiles(const std::filesystem::path& path,
                                      int smoothing_window) {
  return ProfilesFromTable(ReadCsv(path), path.string(), smoothing_window);
}

void WriteProfiles(const std::filesystem::path& path,
                   const std::vector<GaitProfile>& legs) {
  CsvTable table;
  if (legs.size() == 1) {
    table.header = {"t", "hip", "knee"};
  } else if (legs.size() == 2) {
    if (legs[0].t != legs[1].t) {
      throw ValidationError("profile: legs must share one time grid");
    }
    table.header = {"t", "hip_l", "knee_l", "hip_r", "knee_r"};
  } else {
    throw ValidationError("profile: expected one or two legs");
  }
  for (std::size_t i = 0; i < legs[0].size(); ++i) {
    std::vector<double> row{legs[0].t[i]};
    for (const auto& leg : legs) {
      row.push_back(leg.theta[i](0));
      row.push_back(leg.theta[i](1));
    }
    table.rows.push_back(std::move(row));
  }
  WriteCsv(path, table);
}

std::vector<double> CurvatureSignal(const GaitProfile& profile, int joint,
                                    CurvatureMode mode) {
  std::vector<double> signal(profile.size());
  for (std::size_t i = 0; i < profile.size(); ++i) {
    const double acc = std::abs(profile.theta_ddot[i](joint));
    if (mode == CurvatureMode::kAcceleration) {
      signal[i] = acc;
    } else {
      const double slope = profile.theta_dot[i](joint);
      signal[i] = acc / std::pow(1.0 + slope * slope, 1.5);
    }
  }
  return signal;
}

NodeSequence SelectNodes(const GaitProfile& profile, const NodeOptions& options) {
  if (profile.theta_ddot.size() != profile.size() || profile.size() < kMinSamples) {
    throw ValidationError("node selection: profile has no derivatives");
  }
  const std::size_t n = profile.size();
  const double duration = profile.Duration();

  const std::array<std::vector<double>, 2> signals = {
      CurvatureSignal(profile, 0, options.mode),
      CurvatureSignal(profile, 1, options.mode)};
  double threshold = 0.0;
  if (options.prominence) {
    threshold = *options.prominence;
  } else {
    double peak = 0.0;
    for (const auto& s : signals) peak = std::max(peak, *std::max_element(s.begin(), s.end()));
    threshold = options.prominence_fraction * peak;
  }
  // Finite-difference noise of an exactly linear profile must not count.
  threshold = std::max(threshold, 1e-6);

  struct Candidate {
    double height;
    std::size_t index;
  };
  std::vector<Candidate> candidates;
  for (const auto& s : signals) {
    for (std::size_t i = 1; i + 1 < n; ++i) {
      if (s[i] > s[i - 1] && s[i] >= s[i + 1] && s[i] > threshold) {
        candidates.push_back({s[i], i});
      }
    }
  }
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const Candidate& a, const Candidate& b) { return a.height > b.height; });

  const double sep = options.min_separation;
  std::vector<std::size_t> kept;
  for (const Candidate& c : candidates) {
    const double tc = profile.t[c.index];
    if (tc < sep || duration - tc < sep) continue;
    const bool clear = std::all_of(kept.begin(), kept.end(), [&](std::size_t k) {
      return std::abs(profile.t[k] - tc) >= sep && k != c.index;
    });
    if (clear) kept.push_back(c.index);
  }
  std::sort(kept.begin(), kept.end());

  NodeSequence nodes;
  nodes.indices.push_back(0);
  nodes.indices.insert(nodes.indices.end(), kept.begin(), kept.end());
  nodes.indices.push_back(n - 1);
  for (const std::size_t i : nodes.indices) nodes.times.push_back(profile.t[i]);
  return nodes;
}

GaitProfile WalkProfile(double dt, double phase, double period) {
  const double omega = 2.0 * std::numbers::pi / period;
  return FromAnalytic(dt, period, "walk", [&](double t) {
    const double s = t + phase;
    return JointVector(0.3 * std::sin(omega * s), 0.5 * std::sin(omega * s + 0.4));
  });
}

GaitProfile SquatProfile(double dt, double duration) {
  const double omega = 2.0 * std::numbers::pi / duration;
  return FromAnalytic(dt, duration, "squat", [&](double t) {
    const double s = 0.5 * (1.0 - std::cos(omega * t));
    return JointVector(0.8 * s, -0.6 * s);
  });
}

}  // namespace gaitrep
