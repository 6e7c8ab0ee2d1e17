#include "nru/channel.hpp"

#include <cmath>

#include "nru/error.hpp"

namespace nru {

double Rng::exponential() { return -std::log1p(-uniform()); }

std::uint64_t Rng::below(std::uint64_t n) {
  if (n == 0) throw DomainError("Rng::below: empty range");
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
  for (;;) {
    std::uint64_t x = eng_();
    if (x < limit) return x % n;
  }
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

std::uint64_t stream_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> tags) {
  std::uint64_t s = splitmix64(seed);
  for (std::uint64_t t : tags) s = splitmix64(s ^ splitmix64(t + 0x632BE59BD9B4E019ull));
  return s;
}

double umi_breakpoint(const UmiGeometry& g) {
  return 4.0 * (g.h_bs - g.h_e) * (g.h_ut - g.h_e) * g.f_c_ghz * 1e9 / 3e8;
}

double umi_pathloss(double d, const UmiGeometry& g) {
  if (!(d >= 10.0 && d <= 5000.0)) throw DomainError("umi_pathloss: distance outside [10 m, 5 km]");
  const double fc = 20.0 * std::log10(g.f_c_ghz);
  const double dbp = umi_breakpoint(g);
  if (d <= dbp) return 32.4 + 21.0 * std::log10(d) + fc;
  const double dh = g.h_bs - g.h_ut;
  return 32.4 + 40.0 * std::log10(d) + fc - 9.5 * std::log10(dbp * dbp + dh * dh);
}

double sample_gain(double pathloss_db, Rng& rng) {
  return std::pow(10.0, -pathloss_db / 10.0) * rng.exponential();
}

double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

double watts_to_dbm(double w) { return 10.0 * std::log10(w) + 30.0; }

double noise_power_dbm(double bandwidth) {
  if (!(bandwidth > 0)) throw DomainError("noise_power: bandwidth must be > 0");
  return -174.0 + 10.0 * std::log10(bandwidth);
}

double noise_power(double bandwidth) { return dbm_to_watts(noise_power_dbm(bandwidth)); }

GainDraw draw_gains(int users, int channels, double d_min, double d_max, std::uint64_t seed,
                    std::uint64_t group, bool fading, const UmiGeometry& geo) {
  GainDraw g;
  g.distance.resize(users);
  g.pathloss.resize(users);
  g.gain.resize(users, channels);
  for (int u = 0; u < users; ++u) {
    Rng place(stream_seed(seed, {group, static_cast<std::uint64_t>(u), 0xD157ull}));
    g.distance[u] = d_min + (d_max - d_min) * place.uniform();
    g.pathloss[u] = umi_pathloss(g.distance[u], geo);
    for (int k = 0; k < channels; ++k) {
      if (!fading) {
        g.gain(u, k) = std::pow(10.0, -g.pathloss[u] / 10.0);
        continue;
      }
      Rng fade(stream_seed(seed, {group, static_cast<std::uint64_t>(u),
                                  1000 + static_cast<std::uint64_t>(k)}));
      g.gain(u, k) = sample_gain(g.pathloss[u], fade);
    }
  }
  return g;
}

}  // namespace nru
