#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "doctest.h"
#include "nru/channel.hpp"
#include "nru/numerics.hpp"

using namespace nru;

TEST_SUITE("numerics") {
  TEST_CASE("h_func hand values") {
    CHECK(h_func(0.0) == 0.0);
    CHECK(h_func(1.0) == doctest::Approx(1.0 - 1.0 / (2.0 * std::numbers::ln2)).epsilon(1e-14));
    CHECK(h_func(1.0) == doctest::Approx(0.278652).epsilon(1e-6));
    // series branch joins the direct formula
    double x = 1e-4;
    double direct = (std::log1p(x) - x / (1 + x)) / std::numbers::ln2;
    CHECK(h_func(x) == doctest::Approx(direct).epsilon(1e-8));
    CHECK_THROWS_AS(h_func(-1.0), DomainError);
  }

  TEST_CASE("h_func strictly increasing on a 1e4 grid of [0, 1e6]") {
    double prev = -1;
    for (int i = 0; i < 10000; ++i) {
      double x = 1e6 * i / 9999.0;
      double h = h_func(x);
      CHECK(h > prev);
      prev = h;
    }
  }

  TEST_CASE("lambert_w0 hand values") {
    CHECK(lambert_w0(0.0) == 0.0);
    CHECK(lambert_w0(-1.0 / std::numbers::e) == doctest::Approx(-1.0).epsilon(1e-7));
    CHECK(lambert_w0(1.0) == doctest::Approx(0.5671432904097838).epsilon(1e-15));
    CHECK(lambert_w0(std::numbers::e) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK_THROWS_AS(lambert_w0(-0.5), DomainError);
  }

  TEST_CASE("lambert_w0 residual on a 1e4 grid") {
    const double z0 = -1.0 / std::numbers::e;
    double worst = 0;
    for (int i = 0; i < 10000; ++i) {
      double z = z0 + (10.0 - z0) * i / 9999.0;
      double w = lambert_w0(z);
      worst = std::max(worst, std::abs(w * std::exp(w) - z));
    }
    CHECK(worst < 1e-12);
    // large arguments, relative residual
    for (double z : {1e2, 1e5, 1e10, 1e100}) {
      double w = lambert_w0(z);
      CHECK(std::abs(w * std::exp(w) - z) / z < 1e-13);
    }
  }

  TEST_CASE("inverse_h round trip") {
    for (double x : {1e-6, 1e-3, 0.1, 1.0, 7.0, 1e3, 1e6, 1e9}) {
      double y = h_func(x);
      CHECK(inverse_h(y) == doctest::Approx(x).epsilon(1e-10));
    }
    CHECK(inverse_h(0.0) == 0.0);
  }

  TEST_CASE("bisect reaches its tolerance") {
    double r = bisect([](double x) { return x * x - 2; }, 0.0, 2.0, 1e-14);
    CHECK(std::abs(r - std::sqrt(2.0)) < 1e-14);
    CHECK_THROWS(bisect([](double x) { return x + 1; }, 0.0, 1.0, 1e-10));
  }

  TEST_CASE("water_fill matches a multiplier bisection") {
    Rng rng(7);
    for (int trial = 0; trial < 200; ++trial) {
      const int n = 1 + static_cast<int>(rng.below(6));
      Eigen::VectorXd t(n), a(n), c(n), u(n);
      for (int i = 0; i < n; ++i) {
        t[i] = rng.uniform() < 0.15 ? 0.0 : rng.uniform();
        a[i] = 0.5 + rng.uniform();
        c[i] = std::pow(10.0, 4 * rng.uniform() - 2);
        u[i] = rng.uniform() < 0.5 ? std::numeric_limits<double>::infinity() : rng.uniform();
      }
      double budget = 2 * rng.uniform() + 0.01;
      WaterFill wf = water_fill(t, a, c, u, budget);
      if (wf.degenerate) {
        CHECK(wf.q.sum() == 0.0);
        continue;
      }
      auto alloc = [&](double mu) {
        Eigen::VectorXd q(n);
        for (int i = 0; i < n; ++i)
          q[i] = t[i] > 0 ? std::clamp(t[i] * (a[i] * mu - 1 / c[i]), 0.0, u[i]) : 0.0;
        return q;
      };
      if (wf.budget_slack) {
        CHECK(wf.q.sum() <= budget * (1 + 1e-12));
        for (int i = 0; i < n; ++i)
          if (t[i] > 0) CHECK(wf.q[i] == doctest::Approx(u[i]));
        continue;
      }
      double mu = bisect([&](double m) { return alloc(m).sum() - budget; }, 0.0, 1e12, 0.0, 3000);
      Eigen::VectorXd ref = alloc(mu);
      CHECK(wf.q.sum() == doctest::Approx(budget).epsilon(1e-12));
      CHECK((wf.q - ref).lpNorm<Eigen::Infinity>() < 1e-9 * budget);
    }
  }
}
