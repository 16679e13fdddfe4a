#pragma once

#include <cmath>
#include <string>

#include "condkin/constants.hpp"
#include "condkin/errors.hpp"

namespace condkin {

enum class WindowKind { lorentzian, gaussian, box };

inline std::string to_string(WindowKind k) {
  switch (k) {
    case WindowKind::lorentzian: return "lorentzian";
    case WindowKind::gaussian: return "gaussian";
    case WindowKind::box: return "box";
  }
  return "?";
}

// Smoothed energy-conservation window delta^(Gamma)(Delta); Delta and gamma in
// rad/s, value in seconds.  Normalized to unit integral over the real line
// (box: on its support).
struct EnergyWindow {
  WindowKind kind = WindowKind::lorentzian;
  double gamma = 0.0;        // rad/s
  double support_cut = 40.0; // terms beyond support_cut*gamma are pruned (box: gamma)

  void validate() const {
    if (!(gamma > 0.0)) throw ConfigError("energy window: gamma must be > 0");
    if (!(support_cut > 0.0)) throw ConfigError("energy window: support cut must be > 0");
  }

  // half-width of the pruning support in rad/s
  double support() const {
    return kind == WindowKind::box ? gamma : support_cut * gamma;
  }
};

inline double energy_window_value(const EnergyWindow& w, double delta) {
  switch (w.kind) {
    case WindowKind::lorentzian:
      return (w.gamma / pi) / (delta * delta + w.gamma * w.gamma);
    case WindowKind::gaussian:
      return std::exp(-delta * delta / (2.0 * w.gamma * w.gamma)) /
             (w.gamma * std::sqrt(2.0 * pi));
    case WindowKind::box:
      return std::abs(delta) <= w.gamma ? 1.0 / (2.0 * w.gamma) : 0.0;
  }
  return 0.0;
}

}  // namespace condkin
