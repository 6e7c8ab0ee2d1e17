#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "doctest.h"
#include "nru/allocator.hpp"
#include "nru/channel.hpp"
#include "nru/error.hpp"
#include "nru/numerics.hpp"
#include "oracles.hpp"

using namespace nru;
using namespace nru::testing;

TEST_SUITE("allocator") {
  TEST_CASE("rate substitution round trip") {
    Rng rng(3);
    const double sigma2 = noise_power(20e6);
    for (int i = 0; i < 1000; ++i) {
      double MCOT = 8e-3;
      double t = MCOT * (0.01 + 0.99 * rng.uniform());
      double p_inst = 0.01 + 3 * rng.uniform();
      double q = p_inst * t / MCOT;
      double g = std::pow(10.0, -(70 + 40 * rng.uniform()) / 10);
      double B = 20e6, pk = 50;
      double direct = pk * t * B * std::log2(1 + p_inst * g / sigma2);
      CHECK(rate_dl(t, q, g, sigma2, B, pk, MCOT) == doctest::Approx(direct).epsilon(1e-12));
      CHECK(rate_ul(t, q, g, sigma2, B, pk, MCOT) == doctest::Approx(direct).epsilon(1e-12));
    }
    CHECK(rate_dl(0.0, 0.0, 1e-9, sigma2, 20e6, 50, 8e-3) == 0.0);
    CHECK(rate_dl(1e-3, 0.0, 1e-9, sigma2, 20e6, 50, 8e-3) == 0.0);
    CHECK_THROWS_AS(rate_dl(0.0, 0.1, 1e-9, sigma2, 20e6, 50, 8e-3), DomainError);
  }

  TEST_CASE("gradients match central differences") {
    Rng rng(17);
    double worst = 0;
    for (int i = 0; i < 1000; ++i) {
      double t = 1e-4 + 8e-3 * rng.uniform();
      double q = 1e-3 + 3 * rng.uniform();
      double c = std::pow(10.0, 6 * rng.uniform() - 2);
      double bp = 1e9 * rng.uniform() + 1e6;
      double ht = 1e-6 * t, hq = 1e-6 * q;
      double fd_t = (link_rate(t + ht, q, c, bp) - link_rate(t - ht, q, c, bp)) / (2 * ht);
      double fd_q = (link_rate(t, q + hq, c, bp) - link_rate(t, q - hq, c, bp)) / (2 * hq);
      worst = std::max(worst, std::abs(fd_t - link_rate_dt(t, q, c, bp)) / std::abs(fd_t));
      worst = std::max(worst, std::abs(fd_q - link_rate_dq(t, q, c, bp)) / std::abs(fd_q));
    }
    CHECK(worst < 1e-5);
  }

  TEST_CASE("objective is concave on random feasible pairs") {
    Rng rng(23);
    int violations = 0;
    for (int i = 0; i < 1000; ++i) {
      Scenario s = random_scenario(rng, 1 + static_cast<int>(rng.below(3)),
                                   static_cast<int>(rng.below(3)) + 1, static_cast<int>(rng.below(3)) + 1);
      Allocation x = random_feasible(s, rng), y = random_feasible(s, rng);
      double lam = rng.uniform();
      Allocation z = blend(x, y, lam);
      double fz = objective(s, z), fx = objective(s, x), fy = objective(s, y);
      double rhs = lam * fx + (1 - lam) * fy;
      if (fz < rhs - 1e-9 * std::max(1.0, std::abs(rhs))) ++violations;
    }
    CHECK(violations == 0);
  }

  TEST_CASE("time step: symmetric users share MCOT evenly") {
    Scenario s = symmetric_scenario(2, 2);
    Eigen::VectorXd alpha = Eigen::VectorXd::Zero(1);
    Allocation e = baseline_etep(s);
    TimeStep ts = time_allocation(s, e.q_d, e.q_u, alpha);
    for (int i = 0; i < 2; ++i) {
      CHECK(ts.t_d(i, 0) == doctest::Approx(s.MCOT / 4).epsilon(1e-10));
      CHECK(ts.t_u(i, 0) == doctest::Approx(s.MCOT / 4).epsilon(1e-10));
    }
  }

  TEST_CASE("time step matches a 1e5-point simplex search") {
    Rng rng(5);
    for (int trial = 0; trial < 10; ++trial) {
      Scenario s = random_scenario(rng, 1, 1, 1);
      Eigen::VectorXd alpha = Eigen::VectorXd::Zero(1);
      Eigen::MatrixXd q_d(1, 1), q_u(1, 1);
      q_d(0, 0) = s.P_dk_max * (0.05 + 0.4 * rng.uniform());
      q_u(0, 0) = s.P_avg * (0.1 + 0.9 * rng.uniform());
      TimeStep ts = time_allocation(s, q_d, q_u, alpha);
      CHECK(ts.t_d(0, 0) + ts.t_u(0, 0) == doctest::Approx(s.MCOT).epsilon(1e-12));
      Allocation a{ts.t_d, ts.t_u, q_d, q_u};
      double got = objective(s, a);
      double best = 0;
      const double lower = s.MCOT * q_d(0, 0) / s.P_dk_max;
      for (int i = 0; i <= 100000; ++i) {
        double td = lower + (s.MCOT - lower) * i / 100000.0;
        Allocation g{Eigen::MatrixXd::Constant(1, 1, td), Eigen::MatrixXd::Constant(1, 1, s.MCOT - td), q_d,
                     q_u};
        if (s.MCOT - td <= 0) g.q_u.setZero();
        best = std::max(best, objective(s, g));
      }
      CHECK(got >= best * (1 - 1e-12));
      CHECK(got <= best * (1 + 1e-3));
      // the interior optimum has equal time marginals
      if (ts.t_d(0, 0) > lower * (1 + 1e-9)) {
        double c_d = s.MCOT * s.g_d(0, 0) / s.sigma2, c_u = s.MCOT * s.g_u(0, 0) / s.sigma2;
        CHECK(h_func(c_d * q_d(0, 0) / ts.t_d(0, 0)) ==
              doctest::Approx(h_func(c_u * q_u(0, 0) / ts.t_u(0, 0))).epsilon(1e-6));
      }
    }
  }

  TEST_CASE("uplink power: budget tight, closed form, clamps") {
    Scenario s = symmetric_scenario(1, 1);
    Eigen::VectorXd alpha = Eigen::VectorXd::Zero(1);
    Eigen::MatrixXd t_u = Eigen::MatrixXd::Constant(1, 1, s.MCOT / 2);
    UplinkPower up = uplink_power(s, t_u, alpha);
    CHECK(up.q_u(0, 0) == doctest::Approx(s.P_avg).epsilon(1e-12));
    // closed form: q = t (w U / (theta ln2) - 1/c)
    const double c = s.MCOT * s.g_u(0, 0) / s.sigma2;
    const double w = s.B[0] * s.p[0];
    CHECK(up.q_u(0, 0) == doctest::Approx(t_u(0, 0) * (w / (up.theta * std::log(2.0)) - 1 / c)).epsilon(1e-10));

    Scenario two = symmetric_scenario(0, 2);
    Eigen::MatrixXd tt = Eigen::MatrixXd::Constant(2, 1, two.MCOT / 2);
    UplinkPower eq = uplink_power(two, tt, alpha);
    CHECK(eq.q_u(0, 0) == doctest::Approx(eq.q_u(1, 0)));
    CHECK(eq.q_u.sum() == doctest::Approx(2 * two.P_avg).epsilon(1e-12));

    // a very weak user below the water level gets nothing
    two.g_u(1, 0) *= 1e-9;
    UplinkPower weak = uplink_power(two, tt, alpha);
    CHECK(weak.q_u(1, 0) == 0.0);
    CHECK(weak.q_u(0, 0) == doctest::Approx(2 * two.P_avg).epsilon(1e-12));

    Eigen::MatrixXd zero = Eigen::MatrixXd::Zero(2, 1);
    CHECK(uplink_power(two, zero, alpha).degenerate);
  }

  TEST_CASE("downlink power: slack total, tight total, grid oracle") {
    Eigen::VectorXd alpha = Eigen::VectorXd::Zero(1);
    Scenario s = symmetric_scenario(2, 0);
    s.P_gnb_max = 1e6;
    Eigen::MatrixXd t_d = Eigen::MatrixXd::Constant(2, 1, s.MCOT / 2);
    DownlinkPower slack = downlink_power(s, t_d, alpha);
    CHECK(slack.total_slack);
    CHECK(slack.gamma == 0.0);
    CHECK(slack.q_d(0, 0) == doctest::Approx(s.P_dk_max / 2));
    CHECK(slack.xi(0, 0) > 0);

    s.P_gnb_max = 0.5 * s.P_dk_max;
    DownlinkPower tight = downlink_power(s, t_d, alpha);
    CHECK_FALSE(tight.total_slack);
    CHECK(tight.q_d(0, 0) == doctest::Approx(tight.q_d(1, 0)));
    CHECK(tight.q_d.sum() == doctest::Approx(s.P_gnb_max).epsilon(1e-12));
    CHECK(tight.gamma > 0);
    CHECK(tight.xi.maxCoeff() == 0.0);

    Rng rng(31);
    for (int trial = 0; trial < 5; ++trial) {
      Scenario a = random_scenario(rng, 1, 2, 0);
      a.P_gnb_max = a.P_dk_max * (0.2 + 0.6 * rng.uniform());
      Eigen::MatrixXd td(2, 1);
      td << a.MCOT * (0.2 + 0.6 * rng.uniform()), 0;
      td(1, 0) = a.MCOT - td(0, 0);
      DownlinkPower dp = downlink_power(a, td, alpha);
      Allocation got{td, Eigen::MatrixXd::Zero(0, 1), dp.q_d, Eigen::MatrixXd::Zero(0, 1)};
      // 2-D grid over the capped box, both sides of the total budget
      double best = 0;
      const int n = 2000;
      double cap0 = td(0, 0) * a.P_dk_max / a.MCOT, cap1 = td(1, 0) * a.P_dk_max / a.MCOT;
      for (int i = 0; i <= n; ++i) {
        double q0 = std::min(cap0, a.P_gnb_max) * i / n;
        double q1 = std::min(cap1, a.P_gnb_max - q0);
        Allocation g = got;
        g.q_d << q0, std::max(0.0, q1);
        best = std::max(best, objective(a, g));
      }
      double obj = objective(a, got);
      CHECK(obj >= best * (1 - 1e-9));
      CHECK(obj <= best * (1 + 1e-3));
      // complementary slackness
      for (int d = 0; d < 2; ++d) {
        double cap = td(d, 0) * a.P_dk_max / a.MCOT;
        CHECK(dp.xi(d, 0) * (cap - dp.q_d(d, 0)) <= 1e-6 * dp.xi(d, 0) * cap + 1e-300);
      }
      CHECK(dp.gamma * (a.P_gnb_max - dp.q_d.sum()) <= 1e-6 * dp.gamma * a.P_gnb_max + 1e-300);
    }
  }

  TEST_CASE("algorithm 1 matches the 50^4 grid for K=1, D=U=1") {
    Rng rng(101);
    for (int trial = 0; trial < 4; ++trial) {
      Scenario s = random_scenario(rng, 1, 1, 1);
      auto t0 = std::chrono::steady_clock::now();
      AlgorithmResult r = run_algorithm1(s);
      double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      double grid = grid_oracle_1x1(s);
      CHECK(r.converged);
      CHECK(r.objective >= grid * (1 - 1e-9));
      CHECK(std::abs(r.objective - grid) / grid < 5e-3);
      CHECK(constraint_violations(s, r.alloc).max_budget() < 1e-8);
      KktResiduals kkt = kkt_residuals(s, r.alloc, r.dual);
      CHECK(kkt.max() < 1e-6);
      CHECK(secs < 60);
    }
  }

  TEST_CASE("algorithm 1 matches a time-grid oracle for K=1, D=U=2") {
    Rng rng(202);
    for (int trial = 0; trial < 4; ++trial) {
      Scenario s = random_scenario(rng, 1, 2, 2);
      AlgorithmResult r = run_algorithm1(s);
      double grid = grid_oracle_time(s);
      CHECK(r.objective >= grid * (1 - 1e-9));
      CHECK(std::abs(r.objective - grid) / grid < 5e-3);
      CHECK(constraint_violations(s, r.alloc).max_budget() < 1e-8);
      CHECK(kkt_residuals(s, r.alloc, r.dual).max() < 1e-6);
    }
  }

  TEST_CASE("every channel uses the full MCOT") {
    Rng rng(303);
    for (int trial = 0; trial < 20; ++trial) {
      Scenario s = random_scenario(rng, 1 + static_cast<int>(rng.below(3)), 1 + static_cast<int>(rng.below(3)),
                                   1 + static_cast<int>(rng.below(3)));
      AlgorithmResult r = run_algorithm1(s);
      for (int k = 0; k < s.K(); ++k) {
        double sum = r.alloc.t_d.col(k).sum() + r.alloc.t_u.col(k).sum();
        CHECK(std::abs(sum - s.MCOT) / s.MCOT < 1e-8);
      }
      CHECK(constraint_violations(s, r.alloc).max_budget() < 1e-8);
    }
  }

  TEST_CASE("zero floor keeps alpha at zero") {
    Rng rng(404);
    Scenario s = random_scenario(rng, 2, 2, 2);
    AlgorithmResult r = run_algorithm1(s);
    CHECK(r.dual.alpha.maxCoeff() == 0.0);
    CHECK(r.converged);
    CHECK(r.dual.outer_iterations == 1);
    CHECK(r.objective == doctest::Approx(objective(s, joint_maximize(s, s.weights(r.dual.alpha)))).epsilon(1e-8));
  }

  TEST_CASE("trace is nondecreasing within each outer iteration") {
    Rng rng(505);
    for (int trial = 0; trial < 10; ++trial) {
      Scenario s = random_scenario(rng, 2, 2, 1);
      s.rate_floor[0] = 0.8 * reachable(s, 0);
      AlgorithmResult r = run_algorithm1(s);
      for (size_t i = 1; i < r.trace.size(); ++i) {
        if (r.trace[i].outer != r.trace[i - 1].outer) continue;
        CHECK(r.trace[i].lagrangian >= r.trace[i - 1].lagrangian * (1 - 1e-9));
      }
    }
  }

  TEST_CASE("active fairness floor is met") {
    Rng rng(606);
    int active = 0;
    for (int trial = 0; trial < 10; ++trial) {
      Scenario s = random_scenario(rng, 2, 2, 2);
      AlgorithmResult free_run = run_algorithm1(s);
      Eigen::VectorXd r0 = channel_rates(s, free_run.alloc);
      // ask channel 0 for more than it gets when unconstrained
      double reach = reachable(s, 0);
      s.rate_floor[0] = r0[0] + 0.5 * (reach - r0[0]);
      AlgorithmResult r = run_algorithm1(s);
      CHECK_FALSE(r.infeasible);
      Eigen::VectorXd rates = channel_rates(s, r.alloc);
      CHECK(rates[0] >= s.rate_floor[0] * (1 - 1e-6));
      CHECK(r.objective <= free_run.objective * (1 + 1e-9));
      CHECK(constraint_violations(s, r.alloc).max_budget() < 1e-8);
      CHECK(r.converged);
      for (int k = 0; k < s.K(); ++k)
        if (r.dual.alpha[k] > 0) CHECK(rates[k] <= s.rate_floor[k] * (1 + 1e-6));
      if (r.dual.alpha.maxCoeff() > 0) ++active;
    }
    CHECK(active > 0);
  }

  TEST_CASE("unreachable floor is reported") {
    Rng rng(707);
    Scenario s = random_scenario(rng, 2, 1, 1);
    s.rate_floor[1] = 1.5 * reachable(s, 1);
    AlgorithmResult r = run_algorithm1(s);
    CHECK(r.infeasible);
    CHECK(r.note.find("channel 1") != std::string::npos);
  }

  TEST_CASE("baseline ordering on 50 random scenarios") {
    Rng rng(808);
    for (int trial = 0; trial < 50; ++trial) {
      Scenario s = random_scenario(rng, 1 + static_cast<int>(rng.below(3)), 1 + static_cast<int>(rng.below(3)),
                                   1 + static_cast<int>(rng.below(3)));
      double prop = run_algorithm1(s).objective;
      double etep = objective(s, baseline_etep(s));
      double etop = objective(s, baseline_etop(s));
      double otep = objective(s, baseline_otep(s));
      CHECK(prop >= etop * (1 - 1e-9));
      CHECK(prop >= otep * (1 - 1e-9));
      CHECK(prop >= etep * (1 - 1e-9));
      CHECK(etop >= etep * (1 - 1e-9));
      for (const Allocation& a : {baseline_etep(s), baseline_etop(s), baseline_otep(s)})
        CHECK(constraint_violations(s, a).max_budget() < 1e-8);
    }
  }

  TEST_CASE("symmetric scenario: all methods coincide") {
    Scenario s = symmetric_scenario(2, 2);
    double prop = run_algorithm1(s).objective;
    CHECK(objective(s, baseline_etep(s)) == doctest::Approx(prop).epsilon(1e-8));
    CHECK(objective(s, baseline_etop(s)) == doctest::Approx(prop).epsilon(1e-8));
    CHECK(objective(s, baseline_otep(s)) == doctest::Approx(prop).epsilon(1e-8));
  }

  TEST_CASE("throughput nondecreasing in the gNB power budget and MCOT") {
    Rng rng(909);
    for (int trial = 0; trial < 5; ++trial) {
      Scenario s = random_scenario(rng, 3, 2, 2);
      s.P_dk_max = dbm_to_watts(35);
      double prev = 0;
      for (double dbm = 23; dbm <= 35; dbm += 2) {
        s.P_gnb_max = dbm_to_watts(dbm);
        double obj = run_algorithm1(s).objective;
        CHECK(obj >= prev * (1 - 1e-9));
        prev = obj;
      }
      s.MCOT = 8e-3;
      double at8 = run_algorithm1(s).objective;
      s.MCOT = 10e-3;
      CHECK(run_algorithm1(s).objective >= at8);
    }
  }

  TEST_CASE("binding total downlink budget across channels") {
    Rng rng(1001);
    for (int trial = 0; trial < 5; ++trial) {
      Scenario s = random_scenario(rng, 3, 2, 1);
      s.P_dk_max = dbm_to_watts(35);
      s.P_gnb_max = dbm_to_watts(30);
      AlgorithmResult r = run_algorithm1(s);
      CHECK(r.alloc.q_d.sum() == doctest::Approx(s.P_gnb_max).epsilon(1e-8));
      CHECK(r.dual.gamma > 0);
      CHECK(kkt_residuals(s, r.alloc, r.dual).max() < 1e-6);
      CHECK(r.objective >= objective(s, baseline_etop(s)) * (1 - 1e-9));
    }
  }
}
