#include "raptar/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace raptar {

PatternGrid grid_from_log(const ScanLog& log) {
  PatternGrid grid;
  grid.coords.reserve(log.samples.size());
  grid.power_dbm.reserve(log.samples.size());
  for (const ScanSample& s : log.samples) {
    grid.coords.push_back(SphericalCoord{s.phi_deg, s.theta_deg, s.radius_m});
    grid.power_dbm.push_back(s.power_dbm);
  }
  return grid;
}

PatternGrid grid_from_model(const PatternModel& model,
                            const std::vector<SphericalCoord>& coords,
                            bool quantize) {
  PatternGrid grid;
  grid.coords = coords;
  grid.power_dbm.reserve(coords.size());
  for (const SphericalCoord& c : coords) {
    const double p = true_power(model, c);
    grid.power_dbm.push_back(quantize ? quantize_dbm(p) : p);
  }
  return grid;
}

namespace {

void require_matching_keys(const PatternGrid& a, const PatternGrid& b) {
  if (a.size() != b.size()) {
    throw KeyMismatchError("pattern grids differ in size: " +
                           std::to_string(a.size()) + " vs " +
                           std::to_string(b.size()));
  }
  std::vector<SphericalCoord::Key> ka, kb;
  ka.reserve(a.size());
  kb.reserve(b.size());
  for (const auto& c : a.coords) ka.push_back(c.key());
  for (const auto& c : b.coords) kb.push_back(c.key());
  std::sort(ka.begin(), ka.end());
  std::sort(kb.begin(), kb.end());
  if (ka != kb) {
    throw KeyMismatchError("pattern grids cover different (phi,theta,r) keys");
  }
}

double population_std(const std::vector<double>& v, double mean) {
  double acc = 0.0;
  for (double x : v) acc += (x - mean) * (x - mean);
  return std::sqrt(acc / static_cast<double>(v.size()));
}

}  // namespace

MetricsReport compare(const PatternGrid& measured,
                      const PatternGrid& reference) {
  require_matching_keys(measured, reference);
  if (measured.size() < 2) {
    throw ValidationError("pattern comparison needs at least 2 points");
  }

  // Align reference values to the measured ordering.
  std::vector<double> ref_aligned(measured.size());
  if (std::equal(measured.coords.begin(), measured.coords.end(),
                 reference.coords.begin(),
                 [](const SphericalCoord& x, const SphericalCoord& y) {
                   return x.key() == y.key();
                 })) {
    ref_aligned = reference.power_dbm;
  } else {
    std::vector<std::pair<SphericalCoord::Key, double>> lookup;
    lookup.reserve(reference.size());
    for (std::size_t i = 0; i < reference.size(); ++i) {
      lookup.emplace_back(reference.coords[i].key(), reference.power_dbm[i]);
    }
    std::sort(lookup.begin(), lookup.end());
    for (std::size_t i = 0; i < measured.size(); ++i) {
      const auto key = measured.coords[i].key();
      const auto it = std::lower_bound(
          lookup.begin(), lookup.end(), key,
          [](const auto& entry, const SphericalCoord::Key& k) {
            return entry.first < k;
          });
      ref_aligned[i] = it->second;
    }
  }

  const std::size_t n = measured.size();
  std::vector<double> err(n), abs_err(n);
  for (std::size_t i = 0; i < n; ++i) {
    err[i] = measured.power_dbm[i] - ref_aligned[i];
    abs_err[i] = std::abs(err[i]);
  }

  MetricsReport report;
  report.points = n;
  double sum_abs = 0.0, sum_sq = 0.0, sum_err = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sum_abs += abs_err[i];
    sum_sq += err[i] * err[i];
    sum_err += err[i];
  }
  report.mae_db = sum_abs / static_cast<double>(n);
  const double mse = sum_sq / static_cast<double>(n);
  report.rmse_db = std::sqrt(mse);
  report.std_error_db = population_std(err, sum_err / static_cast<double>(n));

  double mean_meas = 0.0, mean_ref = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mean_meas += measured.power_dbm[i];
    mean_ref += ref_aligned[i];
  }
  mean_meas /= static_cast<double>(n);
  mean_ref /= static_cast<double>(n);
  double var_meas = 0.0, var_ref = 0.0, cov = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dm = measured.power_dbm[i] - mean_meas;
    const double dr = ref_aligned[i] - mean_ref;
    var_meas += dm * dm;
    var_ref += dr * dr;
    cov += dm * dr;
  }
  var_meas /= static_cast<double>(n);
  var_ref /= static_cast<double>(n);
  cov /= static_cast<double>(n);

  if (var_ref > 0.0) {
    report.snr_db = mse == 0.0
                        ? kSnrCapDb
                        : std::min(kSnrCapDb, 10.0 * std::log10(var_ref / mse));
  }
  if (var_ref > 0.0 && var_meas > 0.0) {
    const double r = cov / std::sqrt(var_meas * var_ref);
    report.r_squared = r * r;
  }

  std::size_t argmax = 0;
  for (std::size_t i = 1; i < n; ++i) {
    if (measured.power_dbm[i] > measured.power_dbm[argmax]) argmax = i;
  }
  report.max_power_dbm = measured.power_dbm[argmax];
  report.main_lobe_phi_deg = measured.coords[argmax].phi_deg;
  report.main_lobe_theta_deg = measured.coords[argmax].theta_deg;

  std::vector<double> sorted_abs = abs_err;
  std::sort(sorted_abs.begin(), sorted_abs.end());
  const double median =
      n % 2 == 1 ? sorted_abs[n / 2]
                 : 0.5 * (sorted_abs[n / 2 - 1] + sorted_abs[n / 2]);
  double mean_abs = report.mae_db;
  report.error_distribution.median_db = median;
  report.error_distribution.std_db = population_std(abs_err, mean_abs);
  report.error_distribution.max_db = sorted_abs.back();
  report.error_distribution.min_db = sorted_abs.front();
  return report;
}

RepeatabilityReport repeatability(const std::vector<PatternGrid>& runs) {
  if (runs.size() < 2) {
    throw ValidationError("repeatability needs at least 2 runs");
  }
  for (std::size_t i = 1; i < runs.size(); ++i) {
    require_matching_keys(runs[0], runs[i]);
  }
  RepeatabilityReport report;
  report.runs = runs.size();
  double sum = 0.0;
  std::size_t pairs = 0;
  for (std::size_t a = 0; a < runs.size(); ++a) {
    for (std::size_t b = a + 1; b < runs.size(); ++b) {
      double mad = 0.0;
      for (std::size_t i = 0; i < runs[a].size(); ++i) {
        mad += std::abs(runs[a].power_dbm[i] - runs[b].power_dbm[i]);
      }
      mad /= static_cast<double>(runs[a].size());
      sum += mad;
      ++pairs;
      report.worst_pair_mad_db = std::max(report.worst_pair_mad_db, mad);
    }
  }
  report.mean_pairwise_mad_db = sum / static_cast<double>(pairs);
  return report;
}

double coverage(const ScanLog& log, const ScanGrid& grid) {
  if (grid.empty()) return 100.0;
  std::vector<SphericalCoord::Key> keys;
  keys.reserve(grid.size());
  for (const auto& c : grid.points) keys.push_back(c.key());
  std::sort(keys.begin(), keys.end());

  std::vector<bool> seen(grid.size(), false);
  std::size_t valid = 0;
  for (const ScanSample& s : log.samples) {
    if (s.index >= grid.size() || seen[s.index]) continue;
    if (!(s.power_dbm > kPowerMinDbm && s.power_dbm < kPowerMaxDbm)) continue;
    const auto key = SphericalCoord{s.phi_deg, s.theta_deg, s.radius_m}.key();
    if (!std::binary_search(keys.begin(), keys.end(), key)) continue;
    seen[s.index] = true;
    ++valid;
  }
  return 100.0 * static_cast<double>(valid) /
         static_cast<double>(grid.size());
}

std::string format_metrics_report(const MetricsReport& r) {
  std::ostringstream os;
  char line[256];
  os << "points  MAE (dB)  RMSE (dB)  Std. Error (dB)  SNR (dB)  R^2     "
        "Max Power (dBm)  Main Lobe (phi,theta deg)\n";
  std::snprintf(line, sizeof(line),
                "%-7zu %-9.3f %-10.3f %-16.3f %-9s %-7s %-16.2f (%g, %g)\n",
                r.points, r.mae_db, r.rmse_db, r.std_error_db,
                r.snr_db ? [&] {
                  static char b[32];
                  std::snprintf(b, sizeof(b), "%.1f", *r.snr_db);
                  return b;
                }() : "n/a",
                r.r_squared ? [&] {
                  static char b[32];
                  std::snprintf(b, sizeof(b), "%.4f", *r.r_squared);
                  return b;
                }() : "n/a",
                r.max_power_dbm, r.main_lobe_phi_deg, r.main_lobe_theta_deg);
  os << line;
  std::snprintf(line, sizeof(line),
                "abs-error distribution (dB): median %.3f, std %.3f, max "
                "%.3f, min %.3f\n",
                r.error_distribution.median_db, r.error_distribution.std_db,
                r.error_distribution.max_db, r.error_distribution.min_db);
  os << line;
  return os.str();
}

std::string metrics_report_kv(const MetricsReport& r) {
  std::ostringstream os;
  os.precision(17);
  os << "points = " << r.points << "\n";
  os << "mae_db = " << r.mae_db << "\n";
  os << "rmse_db = " << r.rmse_db << "\n";
  os << "std_error_db = " << r.std_error_db << "\n";
  if (r.snr_db) os << "snr_db = " << *r.snr_db << "\n";
  if (r.r_squared) os << "r_squared = " << *r.r_squared << "\n";
  os << "max_power_dbm = " << r.max_power_dbm << "\n";
  os << "main_lobe_phi_deg = " << r.main_lobe_phi_deg << "\n";
  os << "main_lobe_theta_deg = " << r.main_lobe_theta_deg << "\n";
  os << "error_median_db = " << r.error_distribution.median_db << "\n";
  os << "error_std_db = " << r.error_distribution.std_db << "\n";
  os << "error_max_db = " << r.error_distribution.max_db << "\n";
  os << "error_min_db = " << r.error_distribution.min_db << "\n";
  return os.str();
}

void write_error_export(const std::string& path, const PatternGrid& measured,
                        const PatternGrid& reference) {
  require_matching_keys(measured, reference);
  std::ofstream out(path);
  if (!out) throw IoError("cannot write error export " + path);
  out << "phi_deg,theta_deg,radius_m,measured_dbm,reference_dbm,error_db\n";
  char line[192];
  for (std::size_t i = 0; i < measured.size(); ++i) {
    std::snprintf(line, sizeof(line), "%.6f,%.6f,%.6f,%.6f,%.6f,%.6f\n",
                  measured.coords[i].phi_deg, measured.coords[i].theta_deg,
                  measured.coords[i].radius_m, measured.power_dbm[i],
                  reference.power_dbm[i],
                  measured.power_dbm[i] - reference.power_dbm[i]);
    out << line;
  }
  if (!out) throw IoError("failed writing error export " + path);
}

}  // namespace raptar
