#pragma once

#include "nvmag/common.hpp"

namespace nvmag {

/// SI constants entering the resonance and field-conversion arithmetic.
/// electron_g is the NV electronic g factor, not the free-electron value.
struct PhysicalConstants {
  double planck_h = 6.62607015e-34;        // J s
  double bohr_magneton = 9.2740100783e-24;  // J/T
  double electron_g = 2.0028;
  double electron_charge = 1.602176634e-19;  // C

  /// g * mu_B / h, about 28.0 GHz/T.
  double gyromagnetic_hz_per_t() const {
    return electron_g * bohr_magneton / planck_h;
  }

  void validate() const {
    if (!(planck_h > 0.0 && bohr_magneton > 0.0 && electron_g > 0.0 &&
          electron_charge > 0.0)) {
      throw ConfigError("PhysicalConstants: all constants must be > 0");
    }
  }
};

}  // namespace nvmag
