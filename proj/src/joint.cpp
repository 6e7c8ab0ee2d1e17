#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "nru/allocator.hpp"
#include "nru/error.hpp"
#include "nru/numerics.hpp"

namespace nru {

namespace {

constexpr double kLn2 = std::numbers::ln2;

// Normalized problem: tau = t / MCOT, rho = q / P_ref with P_ref the budget of
// the link's direction. Then c q / t = e rho / tau with e = |h|^2 P_ref / sigma2.
struct Link {
  int k = 0;
  int user = 0;
  bool dl = false;
  double e = 0;
  double omega = 0;
};

struct Problem {
  std::vector<Link> links;
  int K = 0;
  double kappa = 0;  // P_dk_max / P_gnb_max
  bool has_dl = false, has_ul = false;
  int n() const { return static_cast<int>(links.size()); }
  int constraints() const {
    int m = 2 * n();
    for (const Link& l : links) m += l.dl;
    return m + has_dl + has_ul;
  }
};

double rate_sum(const Problem& P, const Eigen::VectorXd& x) {
  const int n = P.n();
  double f = 0;
  for (int i = 0; i < n; ++i) {
    const Link& l = P.links[i];
    f += l.omega * x[i] * std::log1p(l.e * x[n + i] / x[i]) / kLn2;
  }
  return f;
}

// Slacks of every inequality, or false if one is not strictly positive.
bool slacks(const Problem& P, const Eigen::VectorXd& x, double& log_sum) {
  const int n = P.n();
  double acc = 0, dl = 1, ul = 1;
  for (int i = 0; i < n; ++i) {
    double tau = x[i], rho = x[n + i];
    if (!(tau > 0) || !(rho > 0)) return false;
    acc += std::log(tau) + std::log(rho);
    if (P.links[i].dl) {
      double sc = P.kappa * tau - rho;
      if (!(sc > 0)) return false;
      acc += std::log(sc);
      dl -= rho;
    } else {
      ul -= rho;
    }
  }
  if (P.has_dl) {
    if (!(dl > 0)) return false;
    acc += std::log(dl);
  }
  if (P.has_ul) {
    if (!(ul > 0)) return false;
    acc += std::log(ul);
  }
  log_sum = acc;
  return true;
}

}  // namespace

Allocation joint_maximize(const Scenario& s, const Eigen::VectorXd& w, const JointOptions& opt) {
  s.validate();
  const int K = s.K(), D = s.D(), U = s.U();
  const double wmax = w.maxCoeff();
  if (!(wmax > 0)) return baseline_etep(s);

  Problem P;
  P.K = K;
  P.kappa = s.P_dk_max / s.P_gnb_max;
  P.has_dl = D > 0;
  P.has_ul = U > 0;
  const double ref_dl = s.P_gnb_max;
  const double ref_ul = U * s.P_avg;
  for (int k = 0; k < K; ++k) {
    for (int d = 0; d < D; ++d)
      P.links.push_back({k, d, true, s.g_d(d, k) * ref_dl / s.sigma2, w[k] / wmax});
    for (int u = 0; u < U; ++u)
      P.links.push_back({k, u, false, s.g_u(u, k) * ref_ul / s.sigma2, w[k] / wmax});
  }
  const int n = P.n();
  const int m = P.constraints();

  // strictly feasible start
  Eigen::VectorXd x(2 * n);
  for (int i = 0; i < n; ++i) {
    const Link& l = P.links[i];
    x[i] = 1.0 / (D + U);
    x[n + i] = l.dl ? std::min(0.5 * P.kappa * x[i], 0.5 / (D * K)) : 0.5 / (U * K);
  }

  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(K, 2 * n);
  for (int i = 0; i < n; ++i) A(P.links[i].k, i) = 1.0;

  double f = rate_sum(P, x);
  double sp = m / std::max(f, 1e-6);
  Eigen::VectorXd g(2 * n);
  Eigen::MatrixXd H(2 * n, 2 * n);
  for (int stage = 0; stage < 60; ++stage) {
    for (int it = 0; it < opt.max_newton; ++it) {
      g.setZero();
      H.setZero();
      double dl_sum = 0, ul_sum = 0;
      for (int i = 0; i < n; ++i) {
        const Link& l = P.links[i];
        const double tau = x[i], rho = x[n + i];
        const double z = l.e * rho / tau;
        g[i] -= sp * l.omega * h_func(z);
        g[n + i] -= sp * l.omega * l.e / ((1 + z) * kLn2);
        // -sp f has Hessian coef v v^T with v = (z, -e)
        const double coef = sp * l.omega / (tau * (1 + z) * (1 + z) * kLn2);
        H(i, i) += coef * z * z;
        H(i, n + i) -= coef * z * l.e;
        H(n + i, i) -= coef * z * l.e;
        H(n + i, n + i) += coef * l.e * l.e;
        g[i] -= 1 / tau;
        H(i, i) += 1 / (tau * tau);
        g[n + i] -= 1 / rho;
        H(n + i, n + i) += 1 / (rho * rho);
        if (l.dl) {
          const double sc = P.kappa * tau - rho;
          g[i] -= P.kappa / sc;
          g[n + i] += 1 / sc;
          H(i, i) += P.kappa * P.kappa / (sc * sc);
          H(i, n + i) -= P.kappa / (sc * sc);
          H(n + i, i) -= P.kappa / (sc * sc);
          H(n + i, n + i) += 1 / (sc * sc);
          dl_sum += rho;
        } else {
          ul_sum += rho;
        }
      }
      for (int pass = 0; pass < 2; ++pass) {
        const bool dl = pass == 0;
        if (dl ? !P.has_dl : !P.has_ul) continue;
        const double slack = 1 - (dl ? dl_sum : ul_sum);
        for (int i = 0; i < n; ++i) {
          if (P.links[i].dl != dl) continue;
          g[n + i] += 1 / slack;
          for (int j = 0; j < n; ++j)
            if (P.links[j].dl == dl) H(n + i, n + j) += 1 / (slack * slack);
        }
      }

      // Equality-constrained Newton step through the Schur complement, on a
      // diagonally rescaled Hessian.
      Eigen::VectorXd scale = H.diagonal().cwiseSqrt().cwiseInverse();
      Eigen::MatrixXd Hs = scale.asDiagonal() * H * scale.asDiagonal();
      // LDLT with pivoting: far along the path the rate term dwarfs the barrier
      // and plain Cholesky can lose positive definiteness to rounding
      Eigen::LDLT<Eigen::MatrixXd> llt(Hs);
      if (llt.info() != Eigen::Success) break;
      Eigen::MatrixXd As = A * scale.asDiagonal();
      Eigen::VectorXd gs = scale.cwiseProduct(g);
      Eigen::VectorXd u = llt.solve(gs);
      Eigen::MatrixXd Y = llt.solve(As.transpose());
      Eigen::MatrixXd S = As * Y;
      // the right-hand side also removes any drift off sum(tau) = 1
      Eigen::VectorXd drift = Eigen::VectorXd::Ones(K) - A * x;
      Eigen::VectorXd nu = S.ldlt().solve(-(As * u) - drift);
      Eigen::VectorXd dx = scale.cwiseProduct(-u - Y * nu);
      const double dec = -g.dot(dx);
      if (!(dec > 0) || dec < 1e-11) break;

      double ls0 = 0;
      slacks(P, x, ls0);
      const double F0 = -sp * rate_sum(P, x) - ls0;
      const double noise = 1e-13 * (std::abs(sp * rate_sum(P, x)) + std::abs(ls0) + 1);
      double step = 1.0;
      Eigen::VectorXd trial;
      bool moved = false;
      for (int ls = 0; ls < 80; ++ls, step *= 0.5) {
        trial = x + step * dx;
        double lsum = 0;
        if (!slacks(P, trial, lsum)) continue;
        const double F1 = -sp * rate_sum(P, trial) - lsum;
        if (F1 <= F0 - 0.01 * step * dec || F1 - F0 <= noise) {
          moved = true;
          break;
        }
      }
      if (!moved) break;
      x = trial;
      if (dec < noise) break;
    }
    f = rate_sum(P, x);
    if (m / sp <= opt.gap * std::max(f, 1e-300)) break;
    sp *= 10;
  }

  // Links the barrier keeps just off zero are inactive at the optimum; their
  // time goes to the longest link of the channel, which also absorbs rounding.
  for (int k = 0; k < K; ++k) {
    int longest = -1;
    double sum = 0;
    for (int i = 0; i < n; ++i) {
      if (P.links[i].k != k) continue;
      if (x[i] < 1e-9) x[i] = x[n + i] = 0;
      if (longest < 0 || x[i] > x[longest]) longest = i;
      sum += x[i];
    }
    x[longest] += 1 - sum;
  }

  Allocation a = zero_allocation(s);
  for (int i = 0; i < n; ++i) {
    const Link& l = P.links[i];
    const double t = s.MCOT * x[i];
    if (l.dl) {
      a.t_d(l.user, l.k) = t;
      a.q_d(l.user, l.k) = ref_dl * x[n + i];
    } else {
      a.t_u(l.user, l.k) = t;
      a.q_u(l.user, l.k) = ref_ul * x[n + i];
    }
  }
  // rounding can leave the budgets a few ulps over
  if (D > 0) {
    a.q_d = a.q_d.cwiseMin((a.t_d * (s.P_dk_max / s.MCOT)));
    if (a.q_d.sum() > s.P_gnb_max) a.q_d *= s.P_gnb_max / a.q_d.sum();
  }
  if (U > 0 && a.q_u.sum() > ref_ul) a.q_u *= ref_ul / a.q_u.sum();
  return a;
}

}  // namespace nru
