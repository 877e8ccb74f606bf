#include "raptar/analyzer.hpp"

#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <cctype>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <sstream>

namespace raptar {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

std::string upper(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::toupper(c); });
  return s;
}

bool parse_number(const std::string& raw, double* out) {
  const std::string v = trim(raw);
  if (v.empty()) return false;
  char* end = nullptr;
  errno = 0;
  const double d = std::strtod(v.c_str(), &end);
  if (end == v.c_str() || *end != '\0' || errno == ERANGE ||
      !std::isfinite(d)) {
    return false;
  }
  *out = d;
  return true;
}

}  // namespace

AnalyzerState::AnalyzerState(const PatternModel& model,
                             const AnalyzerConfig& config)
    : model_(model),
      config_(config),
      center_freq_hz_(config.center_freq_hz),
      span_hz_(config.span_hz),
      rng_(config.seed) {
  model_.validate();
  if (config_.trace_points < 3 || config_.trace_points % 2 == 0) {
    throw ValidationError("trace length must be odd and >= 3");
  }
  reset_trace();
}

void AnalyzerState::reset_trace() {
  trace_.assign(static_cast<std::size_t>(config_.trace_points),
                config_.noise_floor_dbm);
  sweeps_since_reset_ = 0;
}

void AnalyzerState::sweep() {
  double base;
  try {
    base = true_power(model_, probe_);
  } catch (const Error&) {
    base = config_.noise_floor_dbm;  // probe outside the table: floor only
  }
  std::normal_distribution<double> noise(0.0, 1.0);
  const double sigma = model_.noise_sigma_db;
  for (double& bin : trace_) {
    const double sample = sigma > 0.0 ? base + sigma * noise(rng_) : base;
    if (mode_ == TraceMode::kMaxHold && sweeps_since_reset_ > 0) {
      bin = std::max(bin, sample);
    } else {
      bin = sample;
    }
  }
  ++sweeps_since_reset_;
}

std::string AnalyzerState::fetch() const {
  std::ostringstream os;
  os.precision(17);
  const int n = config_.trace_points;
  const double start = center_freq_hz_ - span_hz_ / 2.0;
  const double step = span_hz_ / (n - 1);
  for (int i = 0; i < n; ++i) {
    if (i) os << ",";
    os << (start + i * step) << "," << trace_[static_cast<std::size_t>(i)];
  }
  return os.str();
}

std::optional<std::string> AnalyzerState::handle_command(
    const std::string& raw_line) {
  const std::string line = trim(raw_line);
  if (line.empty()) return std::nullopt;

  const auto space = line.find_first_of(" \t");
  std::string verb = upper(line.substr(0, space));
  const std::string args =
      space == std::string::npos ? "" : trim(line.substr(space + 1));
  if (!verb.empty() && verb.front() != '*' && verb.front() != ':') {
    verb.insert(verb.begin(), ':');
  }

  if (verb == "*IDN?") {
    return std::string(kAnalyzerIdentity);
  }
  if (verb == ":INIT:REST") {
    reset_trace();
    return std::nullopt;
  }
  if (verb == ":TRAC1:TYPE") {
    const std::string mode = upper(args);
    if (mode == "MAXH") {
      mode_ = TraceMode::kMaxHold;
      return std::nullopt;
    }
    if (mode == "CLEARW") {
      mode_ = TraceMode::kClearWrite;
      return std::nullopt;
    }
    return "ERR:BAD_ARG trace type '" + args + "'";
  }
  if (verb == ":FREQ:CENT" || verb == ":FREQ:SPAN") {
    double value = 0.0;
    if (!parse_number(args, &value) || value <= 0.0) {
      return "ERR:BAD_ARG frequency '" + args + "'";
    }
    (verb == ":FREQ:CENT" ? center_freq_hz_ : span_hz_) = value;
    return std::nullopt;
  }
  if (verb == ":SWE:IMM") {
    sweep();
    return std::nullopt;
  }
  if (verb == ":FETCH:SAN1?" || verb == ":FETC:SAN1?") {
    return fetch();
  }
  if (verb == ":SYST:PROBE" || verb == ":SYST:PROB") {
    double phi = 0.0, theta = 0.0, r = 0.0;
    std::istringstream in(args);
    std::string part;
    std::vector<std::string> parts;
    while (std::getline(in, part, ',')) parts.push_back(part);
    if (parts.size() != 3 || !parse_number(parts[0], &phi) ||
        !parse_number(parts[1], &theta) || !parse_number(parts[2], &r)) {
      return "ERR:BAD_ARG probe coordinate '" + args + "'";
    }
    if (!(r > 0.0) || theta < 0.0 || theta > 90.0) {
      return "ERR:BAD_ARG probe coordinate out of range";
    }
    probe_ = SphericalCoord{phi, theta, r};
    return std::nullopt;
  }
  return "ERR:UNKNOWN_CMD " + verb;
}

AnalyzerServer::AnalyzerServer(const PatternModel& model,
                               const AnalyzerConfig& config,
                               std::uint16_t port)
    : model_(model), config_(config) {
  model_.validate();
  listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (listen_fd_ < 0) {
    throw IoError("socket: " + std::string(std::strerror(errno)));
  }
  int one = 1;
  ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));

  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  addr.sin_port = htons(port);
  if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) !=
      0) {
    const std::string err = std::strerror(errno);
    ::close(listen_fd_);
    listen_fd_ = -1;
    throw IoError("bind to port " + std::to_string(port) + " failed: " + err);
  }
  if (::listen(listen_fd_, 4) != 0) {
    const std::string err = std::strerror(errno);
    ::close(listen_fd_);
    listen_fd_ = -1;
    throw IoError("listen failed: " + err);
  }
  sockaddr_in bound{};
  socklen_t len = sizeof(bound);
  ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&bound), &len);
  port_ = ntohs(bound.sin_port);
}

AnalyzerServer::~AnalyzerServer() {
  stop();
  if (listen_fd_ >= 0) ::close(listen_fd_);
}

void AnalyzerServer::stop() { stop_.store(true); }

void AnalyzerServer::run() {
  while (!stop_.load()) {
    pollfd pfd{listen_fd_, POLLIN, 0};
    const int rc = ::poll(&pfd, 1, 100);
    if (rc <= 0) continue;
    const int client = ::accept(listen_fd_, nullptr, nullptr);
    if (client < 0) continue;
    int one = 1;
    ::setsockopt(client, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
    serve_client(client);
    ::close(client);
  }
}

void AnalyzerServer::serve_client(int client_fd) {
  AnalyzerState state(model_, config_);
  std::string buffer;
  char chunk[65536];
  bool discarding = false;  // swallowing an over-long line

  while (!stop_.load()) {
    pollfd pfd{client_fd, POLLIN, 0};
    const int rc = ::poll(&pfd, 1, 100);
    if (rc < 0) return;
    if (rc == 0) continue;
    const ssize_t n = ::recv(client_fd, chunk, sizeof(chunk), 0);
    if (n <= 0) return;  // client gone
    buffer.append(chunk, static_cast<std::size_t>(n));

    for (;;) {
      const auto nl = buffer.find('\n');
      if (nl == std::string::npos) {
        if (buffer.size() > kMaxCommandLineBytes) {
          discarding = true;
          buffer.clear();
        }
        break;
      }
      std::string line = buffer.substr(0, nl);
      buffer.erase(0, nl + 1);

      std::optional<std::string> response;
      if (discarding || line.size() > kMaxCommandLineBytes) {
        discarding = false;
        response = "ERR:BAD_ARG line exceeds " +
                   std::to_string(kMaxCommandLineBytes) + " bytes";
      } else {
        if (logger_) logger_(line);
        response = state.handle_command(line);
      }
      if (response) {
        std::string framed = *response;
        framed.push_back('\n');
        std::size_t sent = 0;
        while (sent < framed.size()) {
          const ssize_t w = ::send(client_fd, framed.data() + sent,
                                   framed.size() - sent, MSG_NOSIGNAL);
          if (w <= 0) return;
          sent += static_cast<std::size_t>(w);
        }
      }
    }
  }
}

}  // namespace raptar
