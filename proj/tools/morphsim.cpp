// morphsim: run, compare and sweep morphing-quadrotor scenarios.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <future>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "morphquad/errors.hpp"
#include "morphquad/harness.hpp"
#include "morphquad/units.hpp"

namespace fs = std::filesystem;
using namespace morphquad;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitDivergence = 3;

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::string observer;  // "", "on" or "off"
  std::string out_dir = ".";
};

ScenarioConfig apply(ScenarioConfig cfg, const Overrides& o) {
  if (o.seed) cfg.seed = *o.seed;
  if (o.observer == "on") cfg.observer = true;
  if (o.observer == "off") cfg.observer = false;
  return cfg;
}

const char* kind_name(EventKind k) { return k == EventKind::Morph ? "morph" : "payload"; }

std::string fmt(std::optional<double> x) {
  if (!x) return "unsettled";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", *x);
  return buf;
}

void print_metrics(const std::string& name, const RunMetrics& m) {
  std::printf("%s\n", name.c_str());
  std::printf("  rms error   [m]  x %.5f  y %.5f  z %.5f\n", m.rms_error.x(), m.rms_error.y(), m.rms_error.z());
  std::printf("  max |error| [m]  x %.5f  y %.5f  z %.5f  norm %.5f\n", m.max_abs_error.x(), m.max_abs_error.y(),
              m.max_abs_error.z(), m.max_error);
  std::printf("  saturated ticks  %zu\n", m.saturation_ticks);
  std::printf("  Vdot range       [%.4g, %.4g]\n", m.min_Vdot, m.max_Vdot);
  std::printf("  observer rms     force %.4f N  torque %.5f N*m\n", m.observer_force_rms, m.observer_torque_rms);
  for (const auto& s : m.settling) {
    std::printf("  %-7s @ %7.3f s  settle %s s\n", kind_name(s.kind), s.time, fmt(s.settle_time).c_str());
  }
}

int run_one(const fs::path& path, const Overrides& o) {
  ScenarioConfig cfg;
  try {
    cfg = apply(load_config(path), o);
    cfg.validate();
  } catch (const ConfigError& e) {
    std::cerr << path.string() << ": " << e.what() << '\n';
    return kExitConfig;
  }
  try {
    const RunResult r = run_scenario(cfg, o.out_dir);
    print_metrics(cfg.name + " -> " + r.log_path.string(), r.sim.metrics);
    if (r.sim.gap_crossing) {
      const auto& g = *r.sim.gap_crossing;
      std::printf("  gap crossing     t %.3f s  alpha %.1f deg  width %.3f m  clearance %.3f m  %s\n", g.time,
                  rad2deg(g.alpha), g.clearance.total_width, g.clearance.clearance, g.clearance.pass ? "pass" : "FAIL");
    }
  } catch (const DivergenceError& e) {
    std::cerr << cfg.name << ": diverged at tick " << e.tick() << ": " << e.what() << '\n';
    return kExitDivergence;
  }
  return kExitOk;
}

int sweep(const fs::path& dir, const Overrides& o) {
  if (!fs::is_directory(dir)) {
    std::cerr << dir.string() << ": not a directory\n";
    return kExitConfig;
  }
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());

  // Each scenario owns its config, RNG and output file.
  std::vector<std::future<std::pair<int, std::string>>> jobs;
  for (const auto& f : files) {
    jobs.push_back(std::async(std::launch::async, [f, o]() -> std::pair<int, std::string> {
      try {
        const ScenarioConfig cfg = apply(load_config(f), o);
        cfg.validate();
        const RunResult r = run_scenario(cfg, o.out_dir);
        char line[256];
        std::snprintf(line, sizeof line, "%-18s max error %.4f m  rms z %.4f m  -> %s", cfg.name.c_str(),
                      r.sim.metrics.max_error, r.sim.metrics.rms_error.z(), r.log_path.string().c_str());
        return {kExitOk, line};
      } catch (const ConfigError& e) {
        return {kExitConfig, f.string() + ": " + e.what()};
      } catch (const DivergenceError& e) {
        return {kExitDivergence, f.string() + ": diverged at tick " + std::to_string(e.tick()) + ": " + e.what()};
      }
    }));
  }
  int code = kExitOk;
  for (auto& j : jobs) {
    const auto [c, msg] = j.get();
    (c == kExitOk ? std::cout : std::cerr) << msg << '\n';
    code = std::max(code, c);
  }
  return code;
}

int compare(const fs::path& a, const fs::path& b) {
  ComparisonReport r;
  try {
    r = compare_runs(a, b);
  } catch (const LogError& e) {
    std::cerr << "compare: " << e.what() << '\n';
    return kExitConfig;
  }
  std::printf("ratio %s / %s\n", a.filename().string().c_str(), b.filename().string().c_str());
  std::printf("  rms  x %.4f  y %.4f  z %.4f\n", r.rms_ratio.x(), r.rms_ratio.y(), r.rms_ratio.z());
  std::printf("  max  x %.4f  y %.4f  z %.4f\n", r.max_ratio.x(), r.max_ratio.y(), r.max_ratio.z());
  std::printf("  %-8s %9s %10s %10s\n", "event", "time", "settle A", "settle B");
  for (const auto& s : r.settling) {
    std::printf("  %-8s %9.3f %10s %10s\n", kind_name(s.kind), s.time, fmt(s.settle_a).c_str(),
                fmt(s.settle_b).c_str());
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Morphing quadrotor scenario runner"};
  app.require_subcommand(1);

  Overrides o;
  std::uint64_t seed = 0;
  auto* seed_opt = app.add_option("--seed", seed, "RNG seed override");
  app.add_option("--observer", o.observer, "Disturbance observer override")->check(CLI::IsMember({"on", "off"}));
  app.add_option("--out", o.out_dir, "Output directory for CSV logs");

  std::string config_path;
  auto* run = app.add_subcommand("run", "Run one scenario");
  run->add_option("config", config_path, "Scenario file")->required();

  std::string log_a, log_b;
  auto* cmp = app.add_subcommand("compare", "Compare two logs");
  cmp->add_option("logA", log_a)->required();
  cmp->add_option("logB", log_b)->required();

  std::string config_dir;
  auto* sw = app.add_subcommand("sweep", "Run every scenario in a directory");
  sw->add_option("config-dir", config_dir)->required();

  std::string alpha_text, gap_text, margin_text = "0";
  auto* clr = app.add_subcommand("clearance", "Gap clearance at a fold angle");
  clr->add_option("--alpha", alpha_text, "Fold angle (deg unless suffixed)")->required();
  clr->add_option("--gap", gap_text, "Gap width (m unless suffixed)")->required();
  clr->add_option("--margin", margin_text, "Required margin");

  // Global flags are accepted after the subcommand too.
  for (auto* sub : {run, cmp, sw}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitConfig;
  }
  if (*seed_opt) o.seed = seed;

  if (*run) return run_one(config_path, o);
  if (*sw) return sweep(config_dir, o);
  if (*cmp) return compare(log_a, log_b);

  try {
    // A bare number is read as degrees here, matching the flag's unit.
    const bool bare = alpha_text.find_first_not_of("0123456789.+-eE") == std::string::npos;
    const double alpha = bare ? deg2rad(std::stod(alpha_text)) : parse_quantity(alpha_text, Dimension::Angle);
    const double gap = parse_quantity(gap_text, Dimension::Length);
    const double margin = parse_quantity(margin_text, Dimension::Length);
    const MorphGeometry geom;
    if (alpha < 0.0 || alpha > geom.alpha_max) throw std::invalid_argument("alpha outside [0, alpha_max]");
    const GapClearance g = gap_clearance(alpha, geom, gap, margin);
    std::printf("alpha %.2f deg  total width %.4f m  gap %.4f m  clearance %.4f m  margin %.4f m  %s\n",
                rad2deg(alpha), g.total_width, gap, g.clearance, margin, g.pass ? "pass" : "fail");
  } catch (const std::exception& e) {
    std::cerr << "clearance: " << e.what() << '\n';
    return kExitConfig;
  }
  return kExitOk;
}
