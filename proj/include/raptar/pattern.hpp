#pragma once

#include <string>
#include <vector>

#include "raptar/se3.hpp"

namespace raptar {

/// Ground-truth radiation pattern queried by the analyzer mock and the
/// metrics engine. Analytic form: parabolic main lobe with a sidelobe floor
/// and optional azimuth ripple; tabulated form: bilinear interpolation over a
/// regular (φ, θ) gain table. Both add free-space spreading loss relative to
/// r_ref.
struct PatternModel {
  enum class Kind { kAnalytic, kTabulated };
  Kind kind = Kind::kAnalytic;

  // analytic
  double boresight_power_dbm = -30.0;  // at r_ref
  double theta_3db_deg = 25.0;
  double sidelobe_floor_db = -25.0;    // relative to peak, negative
  double azimuth_ripple_db = 0.0;

  // tabulated
  std::vector<double> table_phi_deg;    // ascending, covers [0, 360)
  std::vector<double> table_theta_deg;  // ascending
  std::vector<double> table_gain_db;    // row-major: phi rows, theta columns

  double r_ref_m = 0.15;
  double noise_sigma_db = 0.0;

  void validate() const;

  // Stable digest of the model configuration, recorded in scan logs.
  std::string digest() const;
};

// Noise-free power at a probe coordinate. Throws OutOfTableRangeError for
// tabulated queries outside the grid.
double true_power(const PatternModel& model, const SphericalCoord& c);

// Text table with header "phi_deg,theta_deg,gain_db", row-major φ then θ.
PatternModel load_pattern_table(const std::string& path, double r_ref_m,
                                double noise_sigma_db);

// 16-bit reporting resolution used for extracted powers (0.01 dB steps).
double quantize_dbm(double power_dbm);

}  // namespace raptar
