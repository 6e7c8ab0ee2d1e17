#pragma once

#include <cmath>
#include <limits>
#include <numbers>

#include <Eigen/Dense>

#include "nru/error.hpp"

namespace nru {

// h(x) = log2(1+x) - x / ((1+x) ln 2), the time-marginal of the perspective rate.
template <typename Scalar>
Scalar h_func(Scalar x) {
  using std::log1p;
  const Scalar ln2 = std::numbers::ln2_v<Scalar>;
  if (x < Scalar(0)) throw DomainError("h_func: x must be >= 0");
  if (x < Scalar(1e-4)) {
    // series x^2/2 - 2x^3/3 + 3x^4/4, avoids cancellation near zero
    return x * x * (Scalar(0.5) - x * (Scalar(2) / 3 - Scalar(0.75) * x)) / ln2;
  }
  return (log1p(x) - x / (Scalar(1) + x)) / ln2;
}

namespace detail {

template <typename Scalar>
Scalar halley_w0(Scalar z, Scalar w) {
  using std::abs;
  using std::exp;
  const Scalar eps = std::numeric_limits<Scalar>::epsilon();
  for (int it = 0; it < 64; ++it) {
    Scalar ew = exp(w);
    Scalar f = w * ew - z;
    Scalar wp1 = w + Scalar(1);
    if (wp1 == Scalar(0)) break;
    Scalar step = f / (ew * wp1 - (w + Scalar(2)) * f / (Scalar(2) * wp1));
    w -= step;
    if (abs(step) <= Scalar(4) * eps * (Scalar(1) + abs(w))) break;
  }
  return w;
}

// Start near the branch point from the series in p = sqrt(2(ez+1)).
template <typename Scalar>
Scalar branch_series(Scalar p) {
  return Scalar(-1) + p - p * p / 3 + Scalar(11) / 72 * p * p * p;
}

}  // namespace detail

// Principal branch W0 on [-1/e, inf).
template <typename Scalar>
Scalar lambert_w0(Scalar z) {
  using std::log;
  using std::log1p;
  using std::sqrt;
  const Scalar e = std::numbers::e_v<Scalar>;
  const Scalar ez1 = e * z + Scalar(1);
  if (ez1 < -Scalar(8) * std::numeric_limits<Scalar>::epsilon())
    throw DomainError("lambert_w0: z < -1/e");
  if (ez1 <= Scalar(0)) return Scalar(-1);
  if (z == Scalar(0)) return Scalar(0);
  Scalar w;
  if (ez1 < Scalar(0.5)) {
    w = detail::branch_series(sqrt(Scalar(2) * ez1));
  } else if (z < Scalar(3)) {
    Scalar l = log1p(z);
    w = l * (Scalar(1) - log1p(l) / (Scalar(2) + l));
  } else {
    Scalar l1 = log(z);
    Scalar l2 = log(l1);
    w = l1 - l2 + l2 / l1;
  }
  return detail::halley_w0(z, w);
}

// Solves h(x) = y for x >= 0 through x = -(1 + 1/W0(-exp(-a))), a = y ln2 + 1,
// then polishes with Newton on h itself (h'(x) = x / ((1+x)^2 ln2)).
template <typename Scalar>
Scalar inverse_h(Scalar y) {
  using std::abs;
  using std::exp;
  using std::expm1;
  using std::sqrt;
  if (y < Scalar(0)) throw DomainError("inverse_h: y must be >= 0");
  if (y == Scalar(0)) return Scalar(0);
  const Scalar ln2 = std::numbers::ln2_v<Scalar>;
  const Scalar a = y * ln2 + Scalar(1);
  // distance to the branch point, 1 + e z with z = -exp(-a)
  const Scalar ez1 = -expm1(Scalar(1) - a);
  Scalar x;
  if (ez1 < Scalar(1e-2)) {
    Scalar p = sqrt(Scalar(2) * ez1);
    Scalar wp1 = p - p * p / 3 + Scalar(11) / 72 * p * p * p - Scalar(43) / 540 * p * p * p * p;
    x = wp1 / (Scalar(1) - wp1);
  } else {
    Scalar w = lambert_w0(-exp(-a));
    x = -(Scalar(1) + Scalar(1) / w);
  }
  const Scalar eps = std::numeric_limits<Scalar>::epsilon();
  for (int it = 0; it < 8; ++it) {
    Scalar d = x / ((Scalar(1) + x) * (Scalar(1) + x) * ln2);
    if (!(d > Scalar(0))) break;
    Scalar step = (h_func(x) - y) / d;
    Scalar next = x - step;
    if (next <= Scalar(0)) next = x / 2;
    bool done = abs(next - x) <= Scalar(4) * eps * abs(next);
    x = next;
    if (done) break;
  }
  return x;
}

// Bisection for a monotone function with f(lo) and f(hi) of opposite sign.
template <typename F>
double bisect(F&& f, double lo, double hi, double xtol, int max_iter = 400) {
  double flo = f(lo);
  double fhi = f(hi);
  if (flo == 0) return lo;
  if (fhi == 0) return hi;
  if ((flo > 0) == (fhi > 0)) throw Error("bisect: root not bracketed");
  for (int it = 0; it < max_iter && hi - lo > xtol; ++it) {
    double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    double fm = f(mid);
    if (fm == 0) return mid;
    if ((fm > 0) == (flo > 0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

// Water-filling: q_i = clamp(t_i (a_i mu - 1/c_i), 0, u_i) with sum q = budget.
// mu is the inverse of the power price. Links with t_i = 0 or c_i = 0 receive nothing.
struct WaterFill {
  Eigen::VectorXd q;
  double mu = 0;          // inf when every cap fits inside the budget
  bool budget_slack = false;
  bool degenerate = false;  // no link can take power
};

WaterFill water_fill(const Eigen::Ref<const Eigen::VectorXd>& t,
                     const Eigen::Ref<const Eigen::VectorXd>& a,
                     const Eigen::Ref<const Eigen::VectorXd>& c,
                     const Eigen::Ref<const Eigen::VectorXd>& u, double budget);

}  // namespace nru
