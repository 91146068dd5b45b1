#include "morphquad/telemetry.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "morphquad/errors.hpp"

namespace morphquad {

namespace {

void add3(std::vector<std::string>& cols, const std::string& base) {
  cols.push_back(base + "_x");
  cols.push_back(base + "_y");
  cols.push_back(base + "_z");
}

std::vector<std::string> make_columns() {
  std::vector<std::string> c{"t"};
  add3(c, "p");
  add3(c, "pd");
  add3(c, "zeta");
  add3(c, "zetad");
  add3(c, "v");
  add3(c, "omega");
  add3(c, "f");
  add3(c, "tau");
  add3(c, "fhat");
  add3(c, "tauhat");
  c.push_back("mhat");
  add3(c, "bhat");
  c.push_back("V");
  c.push_back("Vdot");
  c.push_back("alpha");
  c.push_back("sat_flag");
  add3(c, "s1");
  add3(c, "s2");
  add3(c, "delta1");
  add3(c, "delta2");
  add3(c, "fd");
  add3(c, "taud");
  c.push_back("payload");
  return c;
}

// Flattens a row in column order. Shared by writer and reader.
template <typename Visit>
void for_each_field(LogRow& r, Visit&& visit) {
  auto v3 = [&](Vec3& x) {
    visit(x.x());
    visit(x.y());
    visit(x.z());
  };
  visit(r.t);
  v3(r.p);
  v3(r.pd);
  v3(r.zeta);
  v3(r.zetad);
  v3(r.v);
  v3(r.omega);
  v3(r.f);
  v3(r.tau);
  v3(r.fhat);
  v3(r.tauhat);
  visit(r.mhat);
  v3(r.bhat);
  visit(r.V);
  visit(r.Vdot);
  visit(r.alpha);
  double sat = r.sat_flag;
  visit(sat);
  r.sat_flag = static_cast<int>(sat);
  v3(r.s1);
  v3(r.s2);
  v3(r.delta1);
  v3(r.delta2);
  v3(r.fd);
  v3(r.taud);
  visit(r.payload);
}

void append_number(std::string& line, double x) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  line.append(buf, ptr);
}

}  // namespace

const std::vector<std::string>& log_columns() {
  static const std::vector<std::string> cols = make_columns();
  return cols;
}

std::string log_header() {
  std::string h;
  for (const auto& c : log_columns()) {
    if (!h.empty()) h += ',';
    h += c;
  }
  return h;
}

void write_log(std::ostream& out, const std::vector<LogRow>& rows) {
  out << log_header() << '\n';
  std::string line;
  for (LogRow row : rows) {
    line.clear();
    bool first = true;
    for_each_field(row, [&](double& x) {
      if (!first) line += ',';
      first = false;
      append_number(line, x);
    });
    line += '\n';
    out << line;
  }
}

void write_log(const std::filesystem::path& path, const std::vector<LogRow>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw LogError("cannot write " + path.string());
  write_log(out, rows);
  if (!out) throw LogError("write failed for " + path.string());
}

std::vector<LogRow> read_log(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw LogError("empty log");
  if (line != log_header()) throw LogError("log header does not match the telemetry schema");
  const std::size_t ncols = log_columns().size();

  std::vector<LogRow> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<double> values;
    values.reserve(ncols);
    const char* p = line.data();
    const char* end = line.data() + line.size();
    while (p <= end) {
      const char* comma = std::find(p, end, ',');
      double x = 0.0;
      const auto [ptr, ec] = std::from_chars(p, comma, x);
      if (ec != std::errc() || ptr != comma) {
        throw LogError("line " + std::to_string(lineno) + ": malformed number");
      }
      values.push_back(x);
      p = comma + 1;
    }
    if (values.size() != ncols) {
      throw LogError("line " + std::to_string(lineno) + ": expected " + std::to_string(ncols) + " columns, got " +
                     std::to_string(values.size()));
    }
    LogRow row;
    std::size_t i = 0;
    for_each_field(row, [&](double& x) { x = values[i++]; });
    rows.push_back(row);
  }
  return rows;
}

std::vector<LogRow> read_log(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LogError("cannot open " + path.string());
  return read_log(in);
}

std::vector<std::pair<double, EventKind>> detect_events(const std::vector<LogRow>& rows) {
  std::vector<std::pair<double, EventKind>> events;
  for (std::size_t k = 1; k < rows.size(); ++k) {
    const bool moving = rows[k].alpha != rows[k - 1].alpha;
    const bool was_resting = k < 2 || rows[k - 1].alpha == rows[k - 2].alpha;
    if (moving && was_resting) events.emplace_back(rows[k - 1].t, EventKind::Morph);
    if (rows[k].payload != rows[k - 1].payload) events.emplace_back(rows[k - 1].t, EventKind::Payload);
  }
  return events;
}

RunMetrics compute_metrics(const std::vector<LogRow>& rows, double settle_tolerance) {
  RunMetrics m;
  if (rows.empty()) return m;

  Vec3 sq = Vec3::Zero();
  double f_sq = 0.0;
  double t_sq = 0.0;
  std::size_t unsaturated = 0;
  m.min_Vdot = rows.front().Vdot;
  m.max_Vdot = rows.front().Vdot;
  for (const LogRow& r : rows) {
    const Vec3 e = r.p - r.pd;
    sq += e.cwiseAbs2();
    m.max_abs_error = m.max_abs_error.cwiseMax(e.cwiseAbs());
    m.max_error = std::max(m.max_error, e.norm());
    m.min_Vdot = std::min(m.min_Vdot, r.Vdot);
    m.max_Vdot = std::max(m.max_Vdot, r.Vdot);
    if (r.sat_flag != 0) {
      ++m.saturation_ticks;
    } else {
      f_sq += (r.fhat - r.fd).squaredNorm();
      t_sq += (r.tauhat - r.taud).squaredNorm();
      ++unsaturated;
    }
  }
  const double n = static_cast<double>(rows.size());
  m.rms_error = (sq / n).cwiseSqrt();
  if (unsaturated > 0) {
    m.observer_force_rms = std::sqrt(f_sq / static_cast<double>(unsaturated));
    m.observer_torque_rms = std::sqrt(t_sq / static_cast<double>(unsaturated));
  }

  const auto events = detect_events(rows);
  for (std::size_t i = 0; i < events.size(); ++i) {
    const double t0 = events[i].first;
    const double t1 = i + 1 < events.size() ? events[i + 1].first : rows.back().t;
    EventSettling s{t0, events[i].second, std::nullopt};
    // Last tick in the window with the error outside tolerance.
    std::optional<double> last_violation;
    bool any = false;
    for (const LogRow& r : rows) {
      if (r.t < t0 || r.t > t1) continue;
      any = true;
      if ((r.p - r.pd).norm() >= settle_tolerance) last_violation = r.t;
    }
    if (any) {
      if (!last_violation) {
        s.settle_time = 0.0;
      } else if (*last_violation < t1) {
        // Settled from the next tick on.
        double next = t1;
        for (const LogRow& r : rows) {
          if (r.t > *last_violation) {
            next = r.t;
            break;
          }
        }
        s.settle_time = next - t0;
      }
    }
    m.settling.push_back(s);
  }
  return m;
}

}  // namespace morphquad
