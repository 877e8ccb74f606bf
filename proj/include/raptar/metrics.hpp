#pragma once

#include <optional>
#include <string>
#include <vector>

#include "raptar/acquisition.hpp"
#include "raptar/pattern.hpp"
#include "raptar/se3.hpp"

namespace raptar {

/// Pattern samples keyed by (φ, θ, r), ordered consistently with the scan
/// grid that produced them.
struct PatternGrid {
  std::vector<SphericalCoord> coords;
  std::vector<double> power_dbm;

  std::size_t size() const { return coords.size(); }
};

// Measured pattern from a scan log (rows already ordered by index).
PatternGrid grid_from_log(const ScanLog& log);

// Reference pattern from a model, evaluated at the given coordinates through
// the same 0.01 dB reporting quantization the instrument applies.
PatternGrid grid_from_model(const PatternModel& model,
                            const std::vector<SphericalCoord>& coords,
                            bool quantize = true);

struct ErrorDistribution {
  double median_db = 0.0;
  double std_db = 0.0;
  double max_db = 0.0;
  double min_db = 0.0;
};

struct MetricsReport {
  std::size_t points = 0;
  double mae_db = 0.0;
  double rmse_db = 0.0;
  double std_error_db = 0.0;              // population stddev of signed error
  std::optional<double> snr_db;           // absent when reference is constant
  std::optional<double> r_squared;        // absent when a variance vanishes
  double max_power_dbm = 0.0;
  double main_lobe_phi_deg = 0.0;
  double main_lobe_theta_deg = 0.0;
  ErrorDistribution error_distribution;   // over |error|
};

// SNR is reported as 10·log10(Var(reference)/MSE), capped at 99 dB for zero
// error; R² is the squared Pearson correlation of the two dB vectors. Errors
// are computed in the dB domain. Throws KeyMismatchError when the key sets
// differ and ValidationError for fewer than 2 points.
MetricsReport compare(const PatternGrid& measured,
                      const PatternGrid& reference);

constexpr double kSnrCapDb = 99.0;

struct RepeatabilityReport {
  std::size_t runs = 0;
  double mean_pairwise_mad_db = 0.0;
  double worst_pair_mad_db = 0.0;
};

// Mean over unordered run pairs of the per-point mean absolute difference.
RepeatabilityReport repeatability(const std::vector<PatternGrid>& runs);

// 100 × |valid acquired rows| / |grid|. An empty grid reports 100.
double coverage(const ScanLog& log, const ScanGrid& grid);

// Human-readable table mirroring the benchmark columns.
std::string format_metrics_report(const MetricsReport& report);

// Machine-readable key-value rendering (full precision).
std::string metrics_report_kv(const MetricsReport& report);

// Per-point export: phi,theta,r,measured_dbm,reference_dbm,error_db.
void write_error_export(const std::string& path, const PatternGrid& measured,
                        const PatternGrid& reference);

}  // namespace raptar
