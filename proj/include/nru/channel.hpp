#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

#include <Eigen/Dense>

namespace nru {

// Portable random source. mt19937_64's output sequence is fixed by the C++
// standard; the mappings to uniform/exponential/integers below are ours, since
// the std distributions differ between library implementations.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}
  std::uint64_t next() { return eng_(); }
  // uniform on [0,1) with 53 random bits
  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }
  // unit-mean exponential
  double exponential();
  // uniform integer on [0, n), unbiased
  std::uint64_t below(std::uint64_t n);

private:
  std::mt19937_64 eng_;
};

std::uint64_t splitmix64(std::uint64_t x);

// Seed of an independent stream identified by (seed, tags...).
std::uint64_t stream_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> tags);

struct UmiGeometry {
  double f_c_ghz = 5.0;
  double h_bs = 10.0;
  double h_ut = 1.5;
  double h_e = 1.0;
};

// Breakpoint distance 4 (h_bs - h_e)(h_ut - h_e) f_c / c.
double umi_breakpoint(const UmiGeometry& g);

// UMi street-canyon path loss in dB, 10 m <= d <= 5 km.
double umi_pathloss(double distance, const UmiGeometry& g = {});

// |h|^2 = 10^(-PL/10) X with X unit-mean exponential drawn from `rng`.
double sample_gain(double pathloss_db, Rng& rng);

double dbm_to_watts(double dbm);
double watts_to_dbm(double w);

// Thermal noise -174 dBm/Hz over `bandwidth` Hz, in watts.
double noise_power(double bandwidth);
double noise_power_dbm(double bandwidth);

struct GainDraw {
  Eigen::VectorXd distance;  // per user (m)
  Eigen::VectorXd pathloss;  // per user (dB)
  Eigen::MatrixXd gain;      // users x channels, |h|^2
};

// Distances uniform on [d_min, d_max], one Rayleigh draw per (user, channel),
// every draw from its own stream. `group` separates DL and UL user sets.
GainDraw draw_gains(int users, int channels, double d_min, double d_max, std::uint64_t seed,
                    std::uint64_t group, bool fading = true, const UmiGeometry& geo = {});

}  // namespace nru
