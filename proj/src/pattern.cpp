#include "raptar/pattern.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace raptar {

void PatternModel::validate() const {
  if (kind == Kind::kAnalytic) {
    if (!(theta_3db_deg > 0.0)) {
      throw ValidationError("pattern theta_3db must be positive");
    }
    if (!(sidelobe_floor_db < 0.0)) {
      throw ValidationError("pattern sidelobe floor must be negative");
    }
  } else {
    if (table_phi_deg.size() < 2 || table_theta_deg.size() < 2) {
      throw ValidationError("pattern table needs at least a 2x2 grid");
    }
    if (table_gain_db.size() !=
        table_phi_deg.size() * table_theta_deg.size()) {
      throw ValidationError("pattern table size mismatch");
    }
  }
  if (!(r_ref_m > 0.0)) {
    throw ValidationError("pattern reference radius must be positive");
  }
  if (noise_sigma_db < 0.0) {
    throw ValidationError("pattern noise sigma must be >= 0");
  }
}

std::string PatternModel::digest() const {
  // FNV-1a over the canonical parameter string.
  std::ostringstream os;
  os.precision(17);
  if (kind == Kind::kAnalytic) {
    os << "analytic," << boresight_power_dbm << "," << theta_3db_deg << ","
       << sidelobe_floor_db << "," << azimuth_ripple_db;
  } else {
    os << "tabulated," << table_phi_deg.size() << "x"
       << table_theta_deg.size();
    for (double g : table_gain_db) os << "," << g;
  }
  os << ";" << r_ref_m << ";" << noise_sigma_db;
  const std::string s = os.str();
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  std::ostringstream hex;
  hex << std::hex << h;
  return hex.str();
}

namespace {

double interp_gain(const PatternModel& m, double phi_deg, double theta_deg) {
  const auto& thetas = m.table_theta_deg;
  if (theta_deg < thetas.front() - 1e-9 || theta_deg > thetas.back() + 1e-9) {
    std::ostringstream os;
    os << "theta " << theta_deg << " deg outside table range ["
       << thetas.front() << ", " << thetas.back() << "]";
    throw OutOfTableRangeError(os.str());
  }
  // φ is periodic over 360 deg; wrap into [first, first + 360).
  double phi = std::fmod(phi_deg - m.table_phi_deg.front(), 360.0);
  if (phi < 0.0) phi += 360.0;
  phi += m.table_phi_deg.front();

  const auto& phis = m.table_phi_deg;
  const std::size_t np = phis.size();
  const std::size_t nt = thetas.size();

  std::size_t ip = np - 1;
  double tp = 0.0;
  for (std::size_t i = 0; i < np; ++i) {
    const double lo = phis[i];
    const double hi = (i + 1 < np) ? phis[i + 1] : phis.front() + 360.0;
    if (phi >= lo - 1e-9 && phi < hi - 1e-9) {
      ip = i;
      tp = (phi - lo) / (hi - lo);
      break;
    }
  }
  const std::size_t ip1 = (ip + 1) % np;

  std::size_t it = 0;
  double tt = 0.0;
  if (theta_deg >= thetas.back()) {
    it = nt - 2;
    tt = 1.0;
  } else {
    for (std::size_t i = 0; i + 1 < nt; ++i) {
      if (theta_deg >= thetas[i] - 1e-9 && theta_deg <= thetas[i + 1] + 1e-9) {
        it = i;
        tt = (theta_deg - thetas[i]) / (thetas[i + 1] - thetas[i]);
        break;
      }
    }
  }
  tt = std::min(1.0, std::max(0.0, tt));

  const auto g = [&](std::size_t p, std::size_t t) {
    return m.table_gain_db[p * nt + t];
  };
  const double g0 = g(ip, it) * (1.0 - tt) + g(ip, it + 1) * tt;
  const double g1 = g(ip1, it) * (1.0 - tt) + g(ip1, it + 1) * tt;
  return g0 * (1.0 - tp) + g1 * tp;
}

}  // namespace

double true_power(const PatternModel& model, const SphericalCoord& c) {
  if (!(c.radius_m > 0.0)) {
    throw ValidationError("probe radius must be positive");
  }
  const double spreading = -20.0 * std::log10(c.radius_m / model.r_ref_m);
  if (model.kind == PatternModel::Kind::kAnalytic) {
    const double ratio = c.theta_deg / model.theta_3db_deg;
    const double rolloff =
        std::min(12.0 * ratio * ratio, std::abs(model.sidelobe_floor_db));
    const double ripple =
        model.azimuth_ripple_db * std::cos(2.0 * c.phi_deg * kDegToRad);
    return model.boresight_power_dbm - rolloff + ripple + spreading;
  }
  return interp_gain(model, c.phi_deg, c.theta_deg) + spreading;
}

PatternModel load_pattern_table(const std::string& path, double r_ref_m,
                                double noise_sigma_db) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open pattern table " + path);
  std::string header;
  if (!std::getline(in, header) ||
      header.find("phi_deg,theta_deg,gain_db") == std::string::npos) {
    throw ValidationError(path + ": expected header phi_deg,theta_deg,gain_db");
  }
  struct Row {
    double phi, theta, gain;
  };
  std::vector<Row> rows;
  std::string line;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    Row r{};
    if (std::sscanf(line.c_str(), "%lf,%lf,%lf", &r.phi, &r.theta, &r.gain) !=
        3) {
      throw ValidationError(path + ":" + std::to_string(lineno) +
                            ": malformed row");
    }
    rows.push_back(r);
  }
  if (rows.empty()) throw ValidationError(path + ": empty pattern table");

  std::vector<double> phis, thetas;
  for (const Row& r : rows) {
    if (phis.empty() || std::abs(phis.back() - r.phi) > 1e-9) {
      if (std::find_if(phis.begin(), phis.end(), [&](double p) {
            return std::abs(p - r.phi) < 1e-9;
          }) == phis.end()) {
        phis.push_back(r.phi);
      }
    }
  }
  for (const Row& r : rows) {
    if (std::find_if(thetas.begin(), thetas.end(), [&](double t) {
          return std::abs(t - r.theta) < 1e-9;
        }) == thetas.end()) {
      thetas.push_back(r.theta);
    }
  }
  std::sort(phis.begin(), phis.end());
  std::sort(thetas.begin(), thetas.end());
  if (rows.size() != phis.size() * thetas.size()) {
    throw ValidationError(path + ": table is not a full phi x theta grid");
  }

  PatternModel m;
  m.kind = PatternModel::Kind::kTabulated;
  m.table_phi_deg = phis;
  m.table_theta_deg = thetas;
  m.table_gain_db.assign(rows.size(), 0.0);
  const auto index_of = [](const std::vector<double>& v, double x) {
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (std::abs(v[i] - x) < 1e-9) return i;
    }
    throw ValidationError("pattern table index lookup failed");
  };
  for (const Row& r : rows) {
    m.table_gain_db[index_of(phis, r.phi) * thetas.size() +
                    index_of(thetas, r.theta)] = r.gain;
  }
  m.r_ref_m = r_ref_m;
  m.noise_sigma_db = noise_sigma_db;
  m.validate();
  return m;
}

double quantize_dbm(double power_dbm) {
  return std::round(power_dbm * 100.0) / 100.0;
}

}  // namespace raptar
