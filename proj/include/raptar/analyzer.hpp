#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "raptar/pattern.hpp"
#include "raptar/se3.hpp"

namespace raptar {

enum class TraceMode { kClearWrite, kMaxHold };

struct AnalyzerConfig {
  int trace_points = 1001;
  double center_freq_hz = 60e9;
  double span_hz = 2e9;
  double noise_floor_dbm = -120.0;
  std::uint64_t seed = 1;
};

/// Session state of the emulated spectrum analyzer. One instance per client
/// connection; not shared across threads.
class AnalyzerState {
 public:
  AnalyzerState(const PatternModel& model, const AnalyzerConfig& config);

  // Parses one SCPI-style line. Queries return a response; commands return
  // nullopt. Malformed input yields "ERR:UNKNOWN_CMD <verb>" or
  // "ERR:BAD_ARG ..." and never throws.
  std::optional<std::string> handle_command(const std::string& line);

  double center_freq_hz() const { return center_freq_hz_; }
  double span_hz() const { return span_hz_; }
  TraceMode trace_mode() const { return mode_; }
  const std::vector<double>& held_trace() const { return trace_; }
  const SphericalCoord& probe() const { return probe_; }
  int sweeps_since_reset() const { return sweeps_since_reset_; }

 private:
  void reset_trace();
  void sweep();
  std::string fetch() const;

  PatternModel model_;
  AnalyzerConfig config_;
  double center_freq_hz_;
  double span_hz_;
  TraceMode mode_ = TraceMode::kClearWrite;
  std::vector<double> trace_;
  SphericalCoord probe_{0.0, 0.0, 0.15};
  std::mt19937_64 rng_;
  int sweeps_since_reset_ = 0;
};

/// Single-session TCP service speaking the analyzer protocol: ASCII lines,
/// queries end in '?', one response line per query, commands are silent.
/// Lines over 4096 bytes are rejected with an error response.
class AnalyzerServer {
 public:
  // Binds immediately (port 0 picks an ephemeral port). Throws IoError when
  // the port is busy.
  AnalyzerServer(const PatternModel& model, const AnalyzerConfig& config,
                 std::uint16_t port);
  ~AnalyzerServer();

  AnalyzerServer(const AnalyzerServer&) = delete;
  AnalyzerServer& operator=(const AnalyzerServer&) = delete;

  std::uint16_t port() const { return port_; }

  // Serves until stop(); accepts one client at a time.
  void run();
  void stop();

  // Optional per-line observer (CLI logging).
  void set_command_logger(std::function<void(const std::string&)> logger) {
    logger_ = std::move(logger);
  }

 private:
  void serve_client(int client_fd);

  PatternModel model_;
  AnalyzerConfig config_;
  int listen_fd_ = -1;
  std::uint16_t port_ = 0;
  std::atomic<bool> stop_{false};
  std::function<void(const std::string&)> logger_;
};

constexpr std::size_t kMaxCommandLineBytes = 4096;
constexpr const char* kAnalyzerIdentity = "RAPTARKIT,MOCK-PXA,0,1.0";

}  // namespace raptar
