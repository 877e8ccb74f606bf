#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "raptar/net.hpp"
#include "raptar/pattern.hpp"
#include "raptar/planner.hpp"
#include "raptar/se3.hpp"

namespace raptar {

/// Scan time source. The simulated clock advances instantly so desk-scale
/// runs finish in seconds; the real clock sleeps for timing-fidelity runs.
class ScanClock {
 public:
  virtual ~ScanClock() = default;
  virtual void advance(double seconds) = 0;
  virtual double now_s() const = 0;  // seconds since the Unix epoch
  std::string timestamp() const;     // ISO-8601 with milliseconds
};

class SimulatedClock final : public ScanClock {
 public:
  explicit SimulatedClock(double epoch_s = 1767225600.0);  // 2026-01-01T00:00Z
  void advance(double seconds) override { now_ += seconds; }
  double now_s() const override { return now_; }

 private:
  double now_;
};

class RealClock final : public ScanClock {
 public:
  void advance(double seconds) override;  // sleeps
  double now_s() const override;
};

/// One logged measurement row.
struct ScanSample {
  std::string timestamp;
  std::size_t index = 0;
  double phi_deg = 0.0;
  double theta_deg = 0.0;
  double radius_m = 0.0;
  double power_dbm = 0.0;
  int attempts = 1;
};

// Validated reporting range for extracted powers, exclusive bounds.
constexpr double kPowerMinDbm = -100.0;
constexpr double kPowerMaxDbm = 30.0;

/// Parsed scan log: header metadata plus samples ordered by index.
struct ScanLog {
  std::map<std::string, std::string> metadata;
  std::vector<ScanSample> samples;
  std::size_t corrupt_rows = 0;  // complete lines that failed to parse

  std::optional<ScanSample> find(std::size_t index) const;
};

// Serializes one row and appends it with a single write syscall, so a row is
// either fully durable or absent; partial rows are never visible to readers.
// Throws IoError.
void append_atomic(const std::string& log_path, const ScanSample& sample);

// Creates the log file with '#'-prefixed metadata lines and the CSV header.
void write_log_header(const std::string& log_path,
                      const std::map<std::string, std::string>& metadata);

ScanLog load_scan_log(const std::string& log_path);

std::string format_sample_row(const ScanSample& sample);

/// Runs one full acquisition cycle at a probe coordinate: position the
/// virtual probe, reset, arm max-hold, sweep across the dwell window, fetch
/// the trace, and extract the quantized center bin. Out-of-range readings
/// are retried up to max_retries, then ValidationExhaustedError is thrown.
ScanSample acquire_point(LineSession& conn, const SphericalCoord& c,
                         std::size_t index, double dwell_s,
                         int sweeps_per_dwell, int max_retries,
                         ScanClock& clock);

struct ScanOptions {
  double dwell_s = 0.1;
  int sweeps_per_dwell = 10;
  int max_retries = 3;
  std::uint64_t seed = 0;
  bool resume = false;
  PlanParams plan;
  std::map<std::string, std::string> metadata;  // extra header entries
};

struct ScanFailure {
  std::size_t index = 0;
  std::string reason;
};

struct ScanSummary {
  std::size_t total_points = 0;
  std::size_t acquired = 0;
  std::size_t resumed = 0;
  double coverage_pct = 100.0;
  std::string note;
  std::vector<ScanFailure> failures;
  double wall_time_s = 0.0;
  double clock_time_s = 0.0;
  double dwell_time_s = 0.0;
  double plan_time_s = 0.0;
  double exec_time_s = 0.0;
  int recoveries = 0;
  int retried_points = 0;

  double per_point_s() const {
    return acquired == 0 ? 0.0
                         : (dwell_time_s + plan_time_s + exec_time_s) /
                               static_cast<double>(acquired);
  }
};

struct ScanResult {
  ScanLog log;
  ScanSummary summary;
};

// Full Algorithm-2 loop over the grid: plan to each pose (with recovery),
// simulate execution, acquire, append atomically; failures are recorded and
// retried once at the end of the scan. Never throws for per-point failures.
ScanResult run_scan(const Scene& scene, const ArmDescription& arm,
                    const ScanGrid& grid, const ScanFrame& frame,
                    LineSession& conn, const std::string& log_path,
                    ScanClock& clock, const ScanOptions& options);

std::string format_scan_summary(const ScanSummary& summary);

}  // namespace raptar
