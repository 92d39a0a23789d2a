#pragma once

#include <stdexcept>

namespace dickesim {

/// One of the three scattering channels of the master equation:
/// S = collective spontaneous emission (jump J-),
/// L = local nonradiative loss (jumps J-_n),
/// D = local pure dephasing (jumps Jz_n).
enum class Channel { S, L, D };

inline const char* channel_name(Channel ch) {
  switch (ch) {
    case Channel::S: return "S";
    case Channel::L: return "L";
    case Channel::D: return "D";
  }
  return "?";
}

/// The three scattering rates of the master equation plus the transition
/// frequency, all in inverse-time units.
struct RateSet {
  double gamma_s = 0.0;  ///< collective spontaneous emission
  double gamma_l = 0.0;  ///< local nonradiative loss
  double gamma_d = 0.0;  ///< local pure dephasing
  double omega0 = 0.0;   ///< transition frequency (rotating frame: 0)

  bool nonnegative() const {
    return gamma_s >= 0.0 && gamma_l >= 0.0 && gamma_d >= 0.0;
  }
  bool any_positive() const {
    return gamma_s > 0.0 || gamma_l > 0.0 || gamma_d > 0.0;
  }
  void require_valid_for_evolution() const {
    if (!nonnegative())
      throw std::invalid_argument("RateSet: negative scattering rate");
    if (!any_positive())
      throw std::invalid_argument("RateSet: all scattering rates are zero");
  }
};

}  // namespace dickesim
