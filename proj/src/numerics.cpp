#include "nru/numerics.hpp"

#include <algorithm>
#include <vector>

namespace nru {

namespace {

double fill_level(double mu, double t, double a, double c, double u) {
  double q = t * (a * mu - 1.0 / c);
  return std::clamp(q, 0.0, u);
}

}  // namespace

WaterFill water_fill(const Eigen::Ref<const Eigen::VectorXd>& t,
                     const Eigen::Ref<const Eigen::VectorXd>& a,
                     const Eigen::Ref<const Eigen::VectorXd>& c,
                     const Eigen::Ref<const Eigen::VectorXd>& u, double budget) {
  const Eigen::Index n = t.size();
  WaterFill out;
  out.q = Eigen::VectorXd::Zero(n);
  if (!(budget >= 0)) throw DomainError("water_fill: budget must be >= 0");

  std::vector<Eigen::Index> live;
  for (Eigen::Index i = 0; i < n; ++i)
    if (t[i] > 0 && c[i] > 0 && a[i] > 0 && u[i] > 0) live.push_back(i);
  if (live.empty()) {
    out.degenerate = true;
    out.mu = 0;
    return out;
  }

  const double inf = std::numeric_limits<double>::infinity();
  double cap_sum = 0;
  for (auto i : live) cap_sum += u[i];
  if (cap_sum <= budget) {
    for (auto i : live) out.q[i] = u[i];
    out.mu = inf;
    out.budget_slack = true;
    return out;
  }

  auto total = [&](double mu) {
    double s = 0;
    for (auto i : live) s += fill_level(mu, t[i], a[i], c[i], u[i]);
    return s;
  };

  std::vector<double> bp;
  for (auto i : live) {
    bp.push_back(1.0 / (a[i] * c[i]));
    if (std::isfinite(u[i])) bp.push_back((u[i] / t[i] + 1.0 / c[i]) / a[i]);
  }
  std::sort(bp.begin(), bp.end());

  // S(mu) is piecewise linear; locate the segment holding the budget and solve on it.
  double lo = bp.front();
  double s_lo = 0;
  double mu = inf;
  for (std::size_t k = 1; k <= bp.size(); ++k) {
    double hi = k < bp.size() ? bp[k] : inf;
    double slope = 0;
    double probe = std::isfinite(hi) ? 0.5 * (lo + hi) : lo + 1.0;
    for (auto i : live) {
      double l = 1.0 / (a[i] * c[i]);
      double h = std::isfinite(u[i]) ? (u[i] / t[i] + 1.0 / c[i]) / a[i] : inf;
      if (probe > l && probe < h) slope += t[i] * a[i];
    }
    double s_hi = std::isfinite(hi) ? total(hi) : inf;
    if (s_hi >= budget) {
      mu = slope > 0 ? lo + (budget - s_lo) / slope : lo;
      break;
    }
    lo = hi;
    s_lo = s_hi;
  }
  out.mu = mu;
  for (auto i : live) out.q[i] = fill_level(mu, t[i], a[i], c[i], u[i]);
  return out;
}

}  // namespace nru
