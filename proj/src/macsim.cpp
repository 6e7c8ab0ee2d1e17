#include "nru/macsim.hpp"

#include <algorithm>
#include <cmath>

#include "nru/channel.hpp"
#include "nru/error.hpp"

namespace nru {

double SimStats::tau_w() const { return wifi_attempts / (static_cast<double>(N_k) * slots); }
double SimStats::tau_l() const { return gnb_attempts / static_cast<double>(slots); }
double SimStats::p_w() const {
  return wifi_attempts ? wifi_collisions / static_cast<double>(wifi_attempts) : 0.0;
}
double SimStats::p_l() const {
  return gnb_attempts ? gnb_collisions / static_cast<double>(gnb_attempts) : 0.0;
}
double SimStats::time_fraction(Outcome o) const {
  return seconds[static_cast<int>(o)] / total_seconds;
}

namespace {

void redraw(NodeState& n, double W, Rng& rng) {
  n.window = static_cast<std::int64_t>(std::ldexp(W, n.stage));
  n.counter = static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(n.window)));
}

}  // namespace

SimStats simulate(const WifiParams& wifi, const NruParams& nru, int N_k, std::int64_t horizon_slots,
                  std::uint64_t seed, const SimOptions& opt) {
  wifi.validate();
  nru.validate();
  if (N_k < 1) throw DomainError("simulate: N_k must be >= 1");
  if (horizon_slots < 1) throw DomainError("simulate: horizon must be positive");
  if (!opt.payloads.empty() && static_cast<int>(opt.payloads.size()) != N_k)
    throw DomainError("simulate: need one payload per WiFi node");

  Rng rng(stream_seed(seed, {0x5111ull}));
  const double W_w = std::round(wifi.W_w);
  // the analytic model treats W_l as real; the simulator needs whole slots
  const double W_l = std::max(1.0, std::round(nru.W_l));

  std::vector<double> payload(N_k, wifi.payload_mean);
  if (!opt.payloads.empty()) payload = opt.payloads;
  std::vector<double> success_time(N_k);
  for (int i = 0; i < N_k; ++i) success_time[i] = wifi.success_duration(payload[i]);
  const double T_c = wifi.collision_duration();
  const double T_l = nru.occupancy();
  const double T_lw = std::max(T_c, T_l);

  SimStats st;
  st.N_k = N_k;
  st.slots = horizon_slots;
  st.node_successes.assign(N_k, 0);
  st.node_airtime.assign(N_k, 0.0);

  std::vector<NodeState> node(N_k);
  for (auto& n : node) redraw(n, W_w, rng);
  GnbState gnb;

  std::vector<int> tx;
  tx.reserve(N_k);
  for (std::int64_t slot = 0; slot < horizon_slots; ++slot) {
    tx.clear();
    for (int i = 0; i < N_k; ++i)
      if (node[i].counter == 0) tx.push_back(i);
    bool g = false;
    if (opt.gnb_enabled) {
      g = gnb.phase == GnbPhase::icca ? gnb.idle_run == nru.L : gnb.backoff.counter == 0;
    }
    const int ntx = static_cast<int>(tx.size());

    Outcome o;
    double dur;
    if (g) {
      o = ntx > 0 ? Outcome::cross_collision : Outcome::gnb_success;
      dur = ntx > 0 ? T_lw : T_l;
    } else if (ntx == 0) {
      o = Outcome::idle;
      dur = wifi.T_sigma;
    } else if (ntx == 1) {
      o = Outcome::wifi_success;
      dur = success_time[tx[0]];
    } else {
      o = Outcome::wifi_collision;
      dur = T_c;
    }
    st.counts[static_cast<int>(o)]++;
    st.seconds[static_cast<int>(o)] += dur;
    st.total_seconds += dur;

    // WiFi: stations that sent redraw, the rest count down one virtual slot.
    for (int i = 0; i < N_k; ++i) {
      NodeState& n = node[i];
      if (n.counter != 0) {
        --n.counter;
        continue;
      }
      st.wifi_attempts++;
      if (ntx > 1 || g) {
        st.wifi_collisions++;
        n.stage = std::min(n.stage + 1, wifi.m_w);
      } else {
        n.stage = 0;
        st.node_successes[i]++;
        st.node_airtime[i] += success_time[i];
        st.wifi_payload_bits += payload[i];
      }
      redraw(n, W_w, rng);
    }

    if (!opt.gnb_enabled) continue;
    const bool busy = g || ntx > 0;
    if (g) {
      st.gnb_attempts++;
      if (ntx > 0) {
        st.gnb_collisions++;
        int next = gnb.phase == GnbPhase::icca ? 1 : gnb.backoff.stage + 1;
        if (next >= nru.m_l) {
          // packet dropped, the next one starts over in ICCA
          st.gnb_drops++;
          gnb.phase = GnbPhase::icca;
          gnb.idle_run = 0;
          gnb.backoff.stage = 0;
        } else {
          gnb.phase = GnbPhase::ecca;
          gnb.backoff.stage = next;
          redraw(gnb.backoff, W_l, rng);
        }
      } else {
        st.gnb_airtime += T_l;
        gnb.phase = GnbPhase::icca;
        gnb.idle_run = 0;
        gnb.backoff.stage = 0;
      }
    } else if (gnb.phase == GnbPhase::icca) {
      if (busy) {
        gnb.phase = GnbPhase::ecca;
        gnb.backoff.stage = 0;
        redraw(gnb.backoff, W_l, rng);
      } else {
        gnb.idle_run++;
      }
    } else {
      // the defer after a busy period is folded into that period's trailing
      // inter-frame space, so the counter moves once per virtual slot
      --gnb.backoff.counter;
    }
  }
  return st;
}

EmpiricalThroughput empirical_throughputs(const SimStats& s, double payload) {
  if (!(s.total_seconds > 0)) throw DomainError("empirical_throughputs: zero-duration run");
  EmpiricalThroughput e;
  e.wifi_bits_per_s = s.counts[static_cast<int>(Outcome::wifi_success)] * payload / s.total_seconds;
  e.gnb_airtime_fraction = s.gnb_airtime / s.total_seconds;
  double air = 0;
  for (double a : s.node_airtime) air += a;
  e.wifi_airtime_per_node = air / (s.N_k * s.total_seconds);
  return e;
}

}  // namespace nru
