#include "raptar/acquisition.hpp"

#include <fcntl.h>
#include <sys/stat.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <ctime>
#include <fstream>
#include <sstream>
#include <thread>

namespace raptar {

std::string ScanClock::timestamp() const {
  const double now = now_s();
  const std::time_t whole = static_cast<std::time_t>(std::floor(now));
  const int millis =
      static_cast<int>(std::floor((now - static_cast<double>(whole)) * 1e3));
  std::tm tm{};
  gmtime_r(&whole, &tm);
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02d.%03dZ",
                tm.tm_year + 1900, tm.tm_mon + 1, tm.tm_mday, tm.tm_hour,
                tm.tm_min, tm.tm_sec, millis);
  return buf;
}

SimulatedClock::SimulatedClock(double epoch_s) : now_(epoch_s) {}

void RealClock::advance(double seconds) {
  std::this_thread::sleep_for(std::chrono::duration<double>(seconds));
}

double RealClock::now_s() const {
  return std::chrono::duration<double>(
             std::chrono::system_clock::now().time_since_epoch())
      .count();
}

std::string format_sample_row(const ScanSample& s) {
  char buf[192];
  std::snprintf(buf, sizeof(buf), "%s,%zu,%.6f,%.6f,%.6f,%.2f,%d",
                s.timestamp.c_str(), s.index, s.phi_deg, s.theta_deg,
                s.radius_m, s.power_dbm, s.attempts);
  return buf;
}

void append_atomic(const std::string& log_path, const ScanSample& sample) {
  std::string row = format_sample_row(sample);
  row.push_back('\n');
  const int fd = ::open(log_path.c_str(), O_WRONLY | O_APPEND | O_CREAT, 0644);
  if (fd < 0) {
    throw IoError("cannot open log " + log_path + ": " +
                  std::strerror(errno));
  }
  // One write call: the row lands in the file entirely or not at all, even
  // if the process dies immediately afterwards.
  const ssize_t n = ::write(fd, row.data(), row.size());
  const int saved = errno;
  ::close(fd);
  if (n != static_cast<ssize_t>(row.size())) {
    throw IoError("short append to " + log_path + ": " +
                  std::strerror(saved));
  }
}

void write_log_header(const std::string& log_path,
                      const std::map<std::string, std::string>& metadata) {
  std::ostringstream os;
  for (const auto& [key, value] : metadata) {
    os << "# " << key << " = " << value << "\n";
  }
  os << "timestamp,index,phi_deg,theta_deg,radius_m,power_dbm,attempts\n";
  const std::string text = os.str();
  const int fd =
      ::open(log_path.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
  if (fd < 0) {
    throw IoError("cannot create log " + log_path + ": " +
                  std::strerror(errno));
  }
  const ssize_t n = ::write(fd, text.data(), text.size());
  const int saved = errno;
  ::close(fd);
  if (n != static_cast<ssize_t>(text.size())) {
    throw IoError("short header write to " + log_path + ": " +
                  std::strerror(saved));
  }
}

ScanLog load_scan_log(const std::string& log_path) {
  std::ifstream in(log_path);
  if (!in) throw IoError("cannot open log " + log_path);
  ScanLog log;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto eq = line.find('=');
      if (eq != std::string::npos) {
        std::string key = line.substr(1, eq - 1);
        std::string value = line.substr(eq + 1);
        const auto strip = [](std::string& s) {
          const auto b = s.find_first_not_of(" \t");
          const auto e = s.find_last_not_of(" \t");
          s = b == std::string::npos ? "" : s.substr(b, e - b + 1);
        };
        strip(key);
        strip(value);
        log.metadata[key] = value;
      }
      continue;
    }
    if (line.rfind("timestamp,", 0) == 0) continue;  // column header
    ScanSample s;
    char ts[64];
    unsigned long long idx = 0;
    if (std::sscanf(line.c_str(), "%63[^,],%llu,%lf,%lf,%lf,%lf,%d", ts, &idx,
                    &s.phi_deg, &s.theta_deg, &s.radius_m, &s.power_dbm,
                    &s.attempts) != 7) {
      ++log.corrupt_rows;
      continue;
    }
    s.timestamp = ts;
    s.index = static_cast<std::size_t>(idx);
    log.samples.push_back(std::move(s));
  }
  std::sort(log.samples.begin(), log.samples.end(),
            [](const ScanSample& a, const ScanSample& b) {
              return a.index < b.index;
            });
  return log;
}

std::optional<ScanSample> ScanLog::find(std::size_t index) const {
  for (const auto& s : samples) {
    if (s.index == index) return s;
  }
  return std::nullopt;
}

namespace {

std::string format_coord(const SphericalCoord& c) {
  char buf[96];
  std::snprintf(buf, sizeof(buf), "%.6f,%.6f,%.6f", c.phi_deg, c.theta_deg,
                c.radius_m);
  return buf;
}

double extract_center_bin(const std::string& trace_csv) {
  std::vector<double> values;
  values.reserve(2048);
  const char* p = trace_csv.c_str();
  char* end = nullptr;
  while (*p) {
    const double v = std::strtod(p, &end);
    if (end == p) {
      throw ProtocolError("malformed trace response near '" +
                          std::string(p).substr(0, 16) + "'");
    }
    values.push_back(v);
    p = end;
    if (*p == ',') ++p;
  }
  if (values.size() < 6 || values.size() % 2 != 0) {
    throw ProtocolError("trace response is not a freq,power pair list");
  }
  const std::size_t bins = values.size() / 2;
  if (bins % 2 == 0) {
    throw ProtocolError("trace has no center bin");
  }
  // values alternate freq,power; center power sits at pair index bins/2.
  return values[(bins / 2) * 2 + 1];
}

void expect_silent(LineSession& conn, const std::string& cmd) {
  conn.send_line(cmd);
}

}  // namespace

ScanSample acquire_point(LineSession& conn, const SphericalCoord& c,
                         std::size_t index, double dwell_s,
                         int sweeps_per_dwell, int max_retries,
                         ScanClock& clock) {
  if (dwell_s < 0.0) throw ValidationError("dwell must be >= 0");
  if (sweeps_per_dwell < 1) {
    throw ValidationError("sweeps_per_dwell must be >= 1");
  }
  double last_power = 0.0;
  for (int attempt = 1; attempt <= 1 + max_retries; ++attempt) {
    expect_silent(conn, ":SYST:PROBe " + format_coord(c));
    expect_silent(conn, ":INIT:REST");
    expect_silent(conn, ":TRAC1:TYPE MAXH");
    for (int s = 0; s < sweeps_per_dwell; ++s) {
      clock.advance(dwell_s / sweeps_per_dwell);
      expect_silent(conn, ":SWE:IMM");
    }
    const std::string trace = conn.query_line(":FETCh:SAN1?");
    if (trace.rfind("ERR:", 0) == 0) {
      throw ProtocolError("analyzer rejected fetch: " + trace);
    }
    const double power = quantize_dbm(extract_center_bin(trace));
    last_power = power;
    if (power > kPowerMinDbm && power < kPowerMaxDbm) {
      ScanSample sample;
      sample.timestamp = clock.timestamp();
      sample.index = index;
      sample.phi_deg = c.phi_deg;
      sample.theta_deg = c.theta_deg;
      sample.radius_m = c.radius_m;
      sample.power_dbm = power;
      sample.attempts = attempt;
      return sample;
    }
  }
  std::ostringstream os;
  os << "reading " << last_power << " dBm outside (" << kPowerMinDbm << ", "
     << kPowerMaxDbm << ") after " << (1 + max_retries) << " attempts";
  throw ValidationExhaustedError(os.str());
}

namespace {

struct PointAttemptResult {
  bool ok = false;
  std::string reason;
};

}  // namespace

ScanResult run_scan(const Scene& scene, const ArmDescription& arm,
                    const ScanGrid& grid, const ScanFrame& frame,
                    LineSession& conn, const std::string& log_path,
                    ScanClock& clock, const ScanOptions& options) {
  const auto wall_start = std::chrono::steady_clock::now();
  const double clock_start = clock.now_s();

  ScanResult result;
  ScanSummary& summary = result.summary;
  summary.total_points = grid.size();

  std::vector<bool> acquired(grid.size(), false);

  if (options.resume) {
    ScanLog existing;
    try {
      existing = load_scan_log(log_path);
    } catch (const IoError&) {
      throw ValidationError("--resume given but log " + log_path +
                            " cannot be read");
    }
    for (const ScanSample& s : existing.samples) {
      if (s.index >= grid.size()) {
        throw ValidationError("resume log row index " +
                              std::to_string(s.index) +
                              " outside the configured grid");
      }
      const SphericalCoord& c = grid.points[s.index];
      if (SphericalCoord{s.phi_deg, s.theta_deg, s.radius_m}.key() !=
          c.key()) {
        throw ValidationError("resume log row " + std::to_string(s.index) +
                              " does not match the configured grid point");
      }
      if (!acquired[s.index]) {
        acquired[s.index] = true;
        ++summary.resumed;
      }
    }
  } else {
    std::map<std::string, std::string> meta = options.metadata;
    char grid_desc[160];
    std::snprintf(grid_desc, sizeof(grid_desc),
                  "phi_step=%g theta=[%g,%g] theta_step=%g radii=%zu",
                  grid.phi_step_deg, grid.theta_min_deg, grid.theta_max_deg,
                  grid.theta_step_deg, grid.radii_m.size());
    meta.emplace("grid", grid_desc);
    meta.emplace("dwell_s", std::to_string(options.dwell_s));
    meta.emplace("sweeps_per_dwell", std::to_string(options.sweeps_per_dwell));
    meta.emplace("seed", std::to_string(options.seed));
    write_log_header(log_path, meta);
  }

  JointConfig q_now = arm.home();

  const auto attempt_point = [&](std::size_t i) -> PointAttemptResult {
    const SphericalCoord& c = grid.points[i];
    const RigidTransform target = frame.target_for(c);
    PlanOutcome outcome = plan_pose(scene, arm, q_now, target,
                                    options.seed + i, options.plan);
    if (!outcome.ok()) {
      return {false, "plan: " + outcome.failure_reason};
    }
    const Trajectory& traj = *outcome.trajectory;
    summary.plan_time_s += traj.planning_time_s;
    summary.recoveries += outcome.recovery_count;
    clock.advance(traj.duration_s());
    summary.exec_time_s += traj.duration_s();
    q_now = traj.waypoints.back();
    try {
      const ScanSample sample =
          acquire_point(conn, c, i, options.dwell_s, options.sweeps_per_dwell,
                        options.max_retries, clock);
      summary.dwell_time_s += options.dwell_s * sample.attempts;
      append_atomic(log_path, sample);
      return {true, ""};
    } catch (const IoError&) {
      throw;  // a dead log file is fatal, not a per-point condition
    } catch (const Error& e) {
      return {false, e.what()};
    }
  };

  std::vector<std::size_t> missed;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (acquired[i]) continue;
    const PointAttemptResult r = attempt_point(i);
    if (r.ok) {
      acquired[i] = true;
    } else {
      missed.push_back(i);
      summary.failures.push_back({i, r.reason});
    }
  }

  // One retry pass over missed or invalid points at the end of the scan.
  for (std::size_t i : missed) {
    ++summary.retried_points;
    const PointAttemptResult r = attempt_point(i);
    if (r.ok) {
      acquired[i] = true;
      // Drop the provisional failure entry.
      summary.failures.erase(
          std::remove_if(summary.failures.begin(), summary.failures.end(),
                         [&](const ScanFailure& f) { return f.index == i; }),
          summary.failures.end());
    } else {
      summary.failures.push_back({i, "retry: " + r.reason});
    }
  }

  summary.acquired = static_cast<std::size_t>(
      std::count(acquired.begin(), acquired.end(), true));
  if (summary.total_points == 0) {
    summary.coverage_pct = 100.0;
    summary.note = "empty grid: coverage reported as 100% of zero points";
  } else {
    summary.coverage_pct = 100.0 * static_cast<double>(summary.acquired) /
                           static_cast<double>(summary.total_points);
  }
  summary.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                    wall_start)
          .count();
  summary.clock_time_s = clock.now_s() - clock_start;

  result.log = load_scan_log(log_path);
  return result;
}

std::string format_scan_summary(const ScanSummary& s) {
  std::ostringstream os;
  os << "points:    " << s.acquired << "/" << s.total_points << " acquired";
  if (s.resumed) os << " (" << s.resumed << " resumed)";
  os << "\n";
  char line[160];
  std::snprintf(line, sizeof(line), "coverage:  %.2f%%\n", s.coverage_pct);
  os << line;
  std::snprintf(line, sizeof(line),
                "time:      wall %.2f s, scan clock %.2f s (dwell %.2f + "
                "plan %.2f + exec %.2f)\n",
                s.wall_time_s, s.clock_time_s, s.dwell_time_s, s.plan_time_s,
                s.exec_time_s);
  os << line;
  std::snprintf(line, sizeof(line), "per point: %.3f s\n", s.per_point_s());
  os << line;
  os << "recoveries: " << s.recoveries
     << ", end-of-scan retries: " << s.retried_points << "\n";
  if (!s.note.empty()) os << "note: " << s.note << "\n";
  if (!s.failures.empty()) {
    os << "failures (" << s.failures.size() << "):\n";
    for (const auto& f : s.failures) {
      os << "  point " << f.index << ": " << f.reason << "\n";
    }
  }
  return os.str();
}

}  // namespace raptar
