#include <cmath>

#include "doctest.h"
#include "nru/channel.hpp"
#include "nru/error.hpp"

using namespace nru;

TEST_SUITE("channel") {
  TEST_CASE("path loss hand values") {
    CHECK(umi_breakpoint(UmiGeometry{}) == doctest::Approx(300.0).epsilon(1e-12));
    CHECK(umi_pathloss(100.0) == doctest::Approx(32.4 + 42.0 + 20 * std::log10(5.0)).epsilon(1e-12));
    CHECK(umi_pathloss(100.0) == doctest::Approx(88.3794).epsilon(1e-6));
    CHECK(umi_pathloss(300.0) == doctest::Approx(32.4 + 21 * std::log10(300.0) + 13.9794).epsilon(1e-6));
    CHECK(umi_pathloss(300.0) == doctest::Approx(98.39).epsilon(1e-4));
    CHECK(umi_pathloss(10.0) == doctest::Approx(32.4 + 21.0 + 13.9794).epsilon(1e-6));
    // second branch, straight from the formula
    double d = 1000;
    double expect = 32.4 + 40 * std::log10(d) + 20 * std::log10(5.0) - 9.5 * std::log10(300.0 * 300.0 + 8.5 * 8.5);
    CHECK(umi_pathloss(d) == doctest::Approx(expect).epsilon(1e-12));
    CHECK_THROWS_AS(umi_pathloss(9.99), DomainError);
    CHECK_THROWS_AS(umi_pathloss(5000.1), DomainError);
  }

  TEST_CASE("path loss grows with distance on each branch") {
    double prev = 0;
    for (double d = 10; d <= 300; d += 1) {
      CHECK(umi_pathloss(d) > prev);
      prev = umi_pathloss(d);
    }
    prev = umi_pathloss(301);
    for (double d = 302; d <= 5000; d += 7) {
      CHECK(umi_pathloss(d) > prev);
      prev = umi_pathloss(d);
    }
  }

  TEST_CASE("noise power") {
    CHECK(noise_power_dbm(20e6) == doctest::Approx(-100.9897).epsilon(1e-6));
    CHECK(noise_power(20e6) == doctest::Approx(7.96e-14).epsilon(1e-3));
    CHECK(noise_power_dbm(1.0) == -174.0);
    CHECK(noise_power_dbm(40e6) - noise_power_dbm(20e6) == doctest::Approx(10 * std::log10(2.0)));
    CHECK_THROWS_AS(noise_power(0.0), DomainError);
    CHECK(watts_to_dbm(dbm_to_watts(23.0)) == doctest::Approx(23.0));
    CHECK(dbm_to_watts(30.0) == doctest::Approx(1.0));
  }

  TEST_CASE("Rayleigh gain mean over 1e6 draws") {
    Rng rng(12345);
    const double pl = 88.3794;
    const double mean_gain = std::pow(10.0, -pl / 10);
    double acc = 0;
    const int n = 1000000;
    for (int i = 0; i < n; ++i) acc += sample_gain(pl, rng);
    CHECK(std::abs(acc / n - mean_gain) / mean_gain < 5e-3);
  }

  TEST_CASE("fading disabled gives the path loss exactly") {
    GainDraw g = draw_gains(3, 2, 10, 200, 5, 1, false);
    for (int u = 0; u < 3; ++u)
      for (int k = 0; k < 2; ++k) CHECK(g.gain(u, k) == std::pow(10.0, -g.pathloss[u] / 10));
  }

  TEST_CASE("seeded draws are reproducible and stream-independent") {
    GainDraw a = draw_gains(4, 3, 10, 300, 77, 0);
    GainDraw b = draw_gains(4, 3, 10, 300, 77, 0);
    CHECK(a.gain == b.gain);
    CHECK(a.distance == b.distance);
    // adding users or channels leaves existing draws untouched
    GainDraw c = draw_gains(6, 5, 10, 300, 77, 0);
    CHECK(c.gain.topLeftCorner(4, 3) == a.gain);
    GainDraw d = draw_gains(4, 3, 10, 300, 78, 0);
    CHECK(d.gain != a.gain);
    GainDraw e = draw_gains(4, 3, 10, 300, 77, 1);
    CHECK(e.gain != a.gain);
    for (int u = 0; u < 4; ++u) {
      CHECK(a.distance[u] >= 10);
      CHECK(a.distance[u] <= 300);
      CHECK((a.gain.row(u).array() > 0).all());
    }
  }

  TEST_CASE("Rng mappings") {
    Rng r(1);
    for (int i = 0; i < 10000; ++i) {
      double u = r.uniform();
      CHECK((u >= 0 && u < 1));
      CHECK(r.below(7) < 7);
    }
    Rng x(42), y(42);
    for (int i = 0; i < 100; ++i) CHECK(x.next() == y.next());
    CHECK(stream_seed(1, {2}) != stream_seed(1, {3}));
    CHECK(stream_seed(1, {2, 3}) != stream_seed(1, {3, 2}));
  }
}
