#include <cmath>
#include <numeric>

#include "doctest.h"
#include "nru/error.hpp"
#include "nru/fairness.hpp"
#include "nru/macsim.hpp"

using namespace nru;

namespace {

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

}  // namespace

TEST_SUITE("macsim") {
  TEST_CASE("single node without gNB attempts with probability 2/(W+1)") {
    WifiParams wifi;
    NruParams nru;
    SimOptions opt;
    opt.gnb_enabled = false;
    SimStats s = simulate(wifi, nru, 1, 10000000, 3, opt);
    CHECK(rel(s.tau_w(), 2.0 / 17.0) < 0.02);
    CHECK(s.p_w() == 0.0);
    CHECK(s.gnb_attempts == 0);
  }

  TEST_CASE("WiFi-only network matches the standalone fixed point") {
    WifiParams wifi;
    NruParams nru;
    SimOptions opt;
    opt.gnb_enabled = false;
    SimStats s = simulate(wifi, nru, 10, 4000000, 11, opt);
    WifiNetwork net = standalone_wifi(wifi, 10);
    CHECK(rel(s.tau_w(), net.tau) < 0.05);
    CHECK(rel(s.p_w(), net.p) < 0.05);
  }

  TEST_CASE("outcome conservation") {
    WifiParams wifi;
    NruParams nru;
    nru.W_l = 64;
    SimStats s = simulate(wifi, nru, 7, 200000, 5);
    std::int64_t n = std::accumulate(s.counts.begin(), s.counts.end(), std::int64_t{0});
    CHECK(n == s.slots);
    double secs = std::accumulate(s.seconds.begin(), s.seconds.end(), 0.0);
    CHECK(secs == doctest::Approx(s.total_seconds).epsilon(1e-9));
    double air = std::accumulate(s.node_airtime.begin(), s.node_airtime.end(), 0.0);
    CHECK(air + s.gnb_airtime <= s.total_seconds);
    std::int64_t succ = std::accumulate(s.node_successes.begin(), s.node_successes.end(), std::int64_t{0});
    CHECK(succ == s.counts[static_cast<int>(Outcome::wifi_success)]);
    CHECK(s.gnb_attempts - s.gnb_collisions == s.counts[static_cast<int>(Outcome::gnb_success)]);
    CHECK(s.gnb_collisions == s.counts[static_cast<int>(Outcome::cross_collision)]);
    CHECK(s.gnb_drops <= s.gnb_collisions);
  }

  TEST_CASE("seed determinism") {
    WifiParams wifi;
    NruParams nru;
    SimStats a = simulate(wifi, nru, 5, 100000, 42);
    SimStats b = simulate(wifi, nru, 5, 100000, 42);
    SimStats c = simulate(wifi, nru, 5, 100000, 43);
    CHECK(a.counts == b.counts);
    CHECK(a.total_seconds == b.total_seconds);
    CHECK(a.node_airtime == b.node_airtime);
    CHECK(a.counts != c.counts);
  }

  TEST_CASE("Monte-Carlo error shrinks as one over root n") {
    WifiParams wifi;
    NruParams nru;
    nru.W_l = 128;
    std::vector<double> spread;
    for (std::int64_t horizon : {100000, 400000, 1600000}) {
      std::vector<double> v;
      for (int r = 0; r < 16; ++r) v.push_back(simulate(wifi, nru, 5, horizon, 1000 + r).tau_w());
      double m = std::accumulate(v.begin(), v.end(), 0.0) / v.size();
      double ss = 0;
      for (double x : v) ss += (x - m) * (x - m);
      spread.push_back(std::sqrt(ss / (v.size() - 1)));
    }
    // each 4x horizon should halve the spread; 16 replicates leave a wide sampling band
    CHECK(spread[0] / spread[1] > 1.3);
    CHECK(spread[0] / spread[1] < 3.0);
    CHECK(spread[1] / spread[2] > 1.3);
    CHECK(spread[1] / spread[2] < 3.0);
    CHECK(spread[0] / spread[2] > 2.5);
    CHECK(spread[0] / spread[2] < 6.5);
  }

  TEST_CASE("empirical throughput") {
    WifiParams wifi;
    NruParams nru;
    SimStats s = simulate(wifi, nru, 5, 100000, 8);
    EmpiricalThroughput e1 = empirical_throughputs(s, 12000);
    EmpiricalThroughput e2 = empirical_throughputs(s, 24000);
    CHECK(e2.wifi_bits_per_s == doctest::Approx(2 * e1.wifi_bits_per_s));
    CHECK(e1.gnb_airtime_fraction > 0);
    CHECK(e1.gnb_airtime_fraction < 1);

    SimStats none = s;
    none.counts[static_cast<int>(Outcome::wifi_success)] = 0;
    CHECK(empirical_throughputs(none, 12000).wifi_bits_per_s == 0.0);
    CHECK_THROWS_AS(empirical_throughputs(SimStats{}, 12000), DomainError);
  }

  TEST_CASE("per-node payloads are honoured") {
    WifiParams wifi;
    NruParams nru;
    SimOptions opt;
    opt.gnb_enabled = false;
    opt.payloads = {8000, 16000};
    SimStats s = simulate(wifi, nru, 2, 200000, 4, opt);
    double expect = s.node_successes[0] * 8000.0 + s.node_successes[1] * 16000.0;
    CHECK(s.wifi_payload_bits == doctest::Approx(expect));
    opt.payloads = {8000};
    CHECK_THROWS_AS(simulate(wifi, nru, 2, 1000, 4, opt), DomainError);
  }
}
