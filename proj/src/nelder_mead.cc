#include "gaitrep/nelder_mead.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "gaitrep/errors.h"

namespace gaitrep {
namespace {

using Eigen::VectorXd;

struct Vertex {
  VectorXd u;  // normalized free coordinates
  double f;
};

class BoxObjective {
 public:
  BoxObjective(const std::function<double(const VectorXd&)>& f, const VectorXd& x0,
               const VectorXd& lower, const VectorXd& upper)
      : f_(f), base_(x0.cwiseMax(lower).cwiseMin(upper)), lower_(lower), upper_(upper) {
    for (Eigen::Index i = 0; i < x0.size(); ++i) {
      if (upper(i) > lower(i)) free_.push_back(i);
    }
  }

  Eigen::Index dim() const { return static_cast<Eigen::Index>(free_.size()); }

  VectorXd Normalize(const VectorXd& x) const {
    VectorXd u(dim());
    for (Eigen::Index k = 0; k < dim(); ++k) {
      const auto i = free_[k];
      u(k) = (x(i) - lower_(i)) / (upper_(i) - lower_(i));
    }
    return u.cwiseMax(0.0).cwiseMin(1.0);
  }

  VectorXd Expand(const VectorXd& u) const {
    VectorXd x = base_;
    for (Eigen::Index k = 0; k < dim(); ++k) {
      const auto i = free_[k];
      x(i) = lower_(i) + std::clamp(u(k), 0.0, 1.0) * (upper_(i) - lower_(i));
    }
    return x;
  }

  Vertex Evaluate(VectorXd u) {
    u = u.cwiseMax(0.0).cwiseMin(1.0);
    ++evaluations;
    double value = f_(Expand(u));
    if (std::isnan(value)) value = std::numeric_limits<double>::infinity();
    return {std::move(u), value};
  }

  const VectorXd& base() const { return base_; }
  int evaluations = 0;

 private:
  const std::function<double(const VectorXd&)>& f_;
  VectorXd base_, lower_, upper_;
  std::vector<Eigen::Index> free_;
};

std::vector<Vertex> MakeSimplex(BoxObjective& obj, const Vertex& center, double step) {
  std::vector<Vertex> simplex{center};
  for (Eigen::Index k = 0; k < obj.dim(); ++k) {
    VectorXd u = center.u;
    // Step inward when the center sits on the upper face.
    u(k) += (u(k) + step <= 1.0) ? step : -step;
    simplex.push_back(obj.Evaluate(u));
  }
  return simplex;
}

double Diameter(const std::vector<Vertex>& s) {
  double d = 0.0;
  for (std::size_t i = 1; i < s.size(); ++i) {
    d = std::max(d, (s[i].u - s[0].u).lpNorm<Eigen::Infinity>());
  }
  return d;
}

}  // namespace

NelderMeadResult MinimizeInBox(const std::function<double(const VectorXd&)>& f,
                               const VectorXd& x0, const VectorXd& lower,
                               const VectorXd& upper, const NelderMeadOptions& options) {
  if (x0.size() != lower.size() || x0.size() != upper.size()) {
    throw ValidationError("Nelder-Mead: dimension mismatch");
  }
  if ((lower.array() > upper.array()).any()) {
    throw InfeasibleBounds("Nelder-Mead: lower bound exceeds upper bound");
  }
  BoxObjective obj(f, x0, lower, upper);
  NelderMeadResult result;
  Vertex best = obj.Evaluate(obj.Normalize(obj.base()));
  result.trace.push_back(best.f);

  const Eigen::Index n = obj.dim();
  if (n == 0) {
    result.x = obj.Expand(best.u);
    result.f = best.f;
    result.evaluations = obj.evaluations;
    result.converged = true;
    return result;
  }

  const double dn = static_cast<double>(n);
  const double reflect = 1.0;
  const double expand = 1.0 + 2.0 / dn;
  const double contract = 0.75 - 1.0 / (2.0 * dn);
  const double shrink = 1.0 - 1.0 / dn;

  for (int restart = 0; restart <= options.max_restarts; ++restart) {
    const double f_at_restart = best.f;
    std::vector<Vertex> s = MakeSimplex(obj, best, options.initial_step);
    bool converged = false;
    while (obj.evaluations < options.max_evaluations) {
      std::sort(s.begin(), s.end(), [](const Vertex& a, const Vertex& b) { return a.f < b.f; });
      if (s[0].f < best.f) best = s[0];
      result.trace.push_back(best.f);

      const double spread = s.back().f - s[0].f;
      if (spread <= options.f_tolerance * (std::abs(s[0].f) + options.f_floor) &&
          Diameter(s) <= options.x_tolerance) {
        converged = true;
        break;
      }
      if (Diameter(s) <= options.x_tolerance * 1e-3) {
        converged = true;
        break;
      }

      VectorXd centroid = VectorXd::Zero(n);
      for (Eigen::Index i = 0; i < n; ++i) centroid += s[i].u;
      centroid /= dn;
      Vertex& worst = s.back();

      const Vertex r = obj.Evaluate(centroid + reflect * (centroid - worst.u));
      if (r.f < s[0].f) {
        const Vertex e = obj.Evaluate(centroid + expand * (r.u - centroid));
        worst = e.f < r.f ? e : r;
        continue;
      }
      if (r.f < s[n - 1].f) {
        worst = r;
        continue;
      }
      const bool outside = r.f < worst.f;
      const Vertex c = outside ? obj.Evaluate(centroid + contract * (r.u - centroid))
                               : obj.Evaluate(centroid + contract * (worst.u - centroid));
      if (c.f < std::min(r.f, worst.f) || (outside && c.f <= r.f)) {
        worst = c;
        continue;
      }
      for (Eigen::Index i = 1; i <= n; ++i) {
        s[i] = obj.Evaluate(s[0].u + shrink * (s[i].u - s[0].u));
      }
    }
    for (const Vertex& v : s) {
      if (v.f < best.f) best = v;
    }
    result.converged = converged;
    if (!converged) break;
    const double gain = f_at_restart - best.f;
    if (restart > 0 && gain <= options.f_tolerance * (std::abs(best.f) + options.f_floor)) {
      break;
    }
  }
  result.trace.push_back(best.f);
  result.x = obj.Expand(best.u);
  result.f = best.f;
  result.evaluations = obj.evaluations;
  return result;
}

}  // namespace gaitrep
