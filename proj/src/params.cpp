#include "nru/params.hpp"

#include <cmath>
#include <limits>

#include "nru/error.hpp"

namespace nru {

void WifiParams::validate() const {
  if (!(W_w >= 1)) throw DomainError("W_w must be >= 1");
  if (m_w < 1) throw DomainError("m_w must be >= 1");
  for (double d : {T_sigma, SIFS, DIFS, PIFS, delta, RTS, CTS, H, ACK})
    if (!(d > 0)) throw DomainError("WiFi durations and frame sizes must be > 0");
  if (!(r_w > 0)) throw DomainError("r_w must be > 0");
  if (!(payload_mean > 0)) throw DomainError("payload_mean must be > 0");
}

double WifiParams::handshake_overhead() const {
  return (RTS + CTS + H + ACK) / r_w + 3 * SIFS + DIFS + 4 * delta;
}

double WifiParams::success_duration(double payload) const {
  return handshake_overhead() + payload / r_w;
}

double WifiParams::collision_duration() const { return RTS / r_w + DIFS + delta; }

std::string to_string(GnbAccessModel m) {
  return m == GnbAccessModel::renewal ? "renewal" : "published";
}

GnbAccessModel gnb_access_model_from_string(const std::string& s) {
  if (s == "renewal") return GnbAccessModel::renewal;
  if (s == "published") return GnbAccessModel::published;
  throw DomainError("unknown gNB access model '" + s + "'");
}

const LbtClass& lbt_class(int priority_class) {
  static const LbtClass classes[4] = {
      {1, {3, 7}, 1, {2e-3}},
      {2, {7, 15}, 1, {3e-3}},
      {3, {15, 31, 63}, 3, {8e-3, 10e-3}},
      {4, {15, 31, 63, 127, 255, 511, 1023}, 7, {8e-3, 10e-3}},
  };
  if (priority_class < 1 || priority_class > 4)
    throw DomainError("priority class must be in 1..4");
  return classes[priority_class - 1];
}

void NruParams::validate() const {
  if (!(W_l >= 1)) throw DomainError("W_l must be >= 1");
  if (m_l < 1) throw DomainError("m_l must be >= 1");
  if (L < 1) throw DomainError("L must be >= 1");
  if (!(T_f > 0) || !(T_gnb >= 0)) throw DomainError("T_f must be > 0 and T_gnb >= 0");
  const LbtClass& c = lbt_class(priority_class);
  double longest = 0;
  for (double m : c.mcot) longest = std::max(longest, m);
  // MCOT is a ceiling, so shorter occupancies stay admissible.
  if (!(MCOT > 0) || MCOT > longest * (1 + 1e-12))
    throw DomainError("MCOT exceeds the priority class limit");
}

int NruParams::nearest_class_window(double W) const {
  const LbtClass& c = lbt_class(priority_class);
  int best = c.windows.front();
  double gap = std::numeric_limits<double>::infinity();
  for (int w : c.windows) {
    if (std::abs(w - W) < gap) {
      gap = std::abs(w - W);
      best = w;
    }
  }
  return best;
}

bool NruParams::window_in_class(double W) const {
  for (int w : lbt_class(priority_class).windows)
    if (w == W) return true;
  return false;
}

int icca_slots(double T_f, int m_p, double T_sigma) {
  return static_cast<int>(std::floor((T_f + m_p * T_sigma) / T_sigma + 1e-9));
}

}  // namespace nru
