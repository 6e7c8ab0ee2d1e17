#pragma once

#include <string>
#include <vector>

namespace nru {

// All fields in SI units (seconds, bits, bits/s).
struct WifiParams {
  double W_w = 16;
  int m_w = 6;
  double T_sigma = 9e-6;
  double SIFS = 16e-6;
  double DIFS = 34e-6;
  double PIFS = 25e-6;  // kept for completeness, no model uses it
  double RTS = 288;
  double CTS = 352;
  double H = 400;
  double ACK = 364;
  double r_w = 54e6;
  double delta = 0.1e-6;
  double payload_mean = 1500 * 8;

  void validate() const;

  // Successful RTS/CTS exchange carrying `payload` bits.
  double success_duration(double payload) const;
  double success_duration() const { return success_duration(payload_mean); }
  double collision_duration() const;
  // Payload-free overhead of a successful exchange.
  double handshake_overhead() const;
};

enum class GnbAccessModel { renewal, published };

std::string to_string(GnbAccessModel m);
GnbAccessModel gnb_access_model_from_string(const std::string& s);

struct LbtClass {
  int priority_class;
  std::vector<int> windows;
  int m_p;
  std::vector<double> mcot;  // seconds
};

const LbtClass& lbt_class(int priority_class);

struct NruParams {
  double W_l = 16;
  int m_l = 6;
  int L = 8;
  double T_f = 16e-6;
  int m_p = 7;
  double MCOT = 8e-3;
  double T_gnb = 0.25e-3;
  int priority_class = 4;
  GnbAccessModel model = GnbAccessModel::renewal;

  void validate() const;

  double occupancy() const { return MCOT + T_gnb; }
  // Nearest window of the priority class's admissible set.
  int nearest_class_window(double W) const;
  bool window_in_class(double W) const;
};

// ICCA slot count floor((T_f + m_p T_sigma) / T_sigma).
int icca_slots(double T_f, int m_p, double T_sigma);

}  // namespace nru
