// Acceptance run: one [PASS]/[FAIL] line per criterion, nonzero exit on any failure.
// argv[1] is the path of the conenav CLI (needed for the determinism criterion).

#include "conenav/invariants.hpp"
#include "conenav/scenario.hpp"
#include "conenav/zermelo.hpp"

#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace conenav;
namespace fs = std::filesystem;

namespace {

int failures = 0;

void report(int id, const std::string& title, bool pass, const std::string& detail, double seconds) {
  std::printf("[%s] %2d %s: %s (%.1f s)\n", pass ? "PASS" : "FAIL", id, title.c_str(), detail.c_str(), seconds);
  std::fflush(stdout);
  if (!pass) ++failures;
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

double since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Vec v2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

FinslerSpec wind(const std::string& wx) {
  return zermelo_from_data(MatrixField::constant(Mat::Identity(2, 2)),
                           VectorField{{FieldExpr::parse(wx, 2), FieldExpr::constant(0.0, 2)}});
}

ZermeloScenario scenario(FinslerSpec Z, Vec target, double horizon) {
  ZermeloScenario sc;
  sc.Z = std::move(Z);
  sc.x_start = Vec::Zero(2);
  sc.target = std::move(target);
  sc.horizon = horizon;
  return sc;
}

// Positive root of |target - T W| = T.
double constant_wind_root(const Vec& target, const Vec& W) {
  const double a = 1.0 - W.squaredNorm();
  const double b = 2.0 * target.dot(W);
  const double c = -target.squaredNorm();
  return (-b + std::sqrt(b * b - 4 * a * c)) / (2 * a);
}

// 1: constant wind, analytic roots and brute force

void criterion_constant_wind() {
  const auto t0 = std::chrono::steady_clock::now();
  const Vec W = v2(0.5, 0.0);
  bool pass = true;
  std::string detail;
  for (const Vec& target : {v2(1, 0), v2(0, 1)}) {
    const double exact = constant_wind_root(target, W);
    const auto sc = scenario(wind("0.5"), target, 3.0);
    const double solved = solve_navigation(sc).arrival_time;
    OracleConfig oc;
    oc.dx = 0.02;
    oc.m = 64;
    oc.box_lo = v2(-1.5, -1.5);
    oc.box_hi = v2(1.5, 1.5);
    const double brute = dp_oracle(sc, oc);
    pass = pass && std::abs(solved - exact) <= 1e-6 && std::abs(brute - exact) <= 0.06;
    detail += fmt("T*=%.9f solver err %.1e oracle err %.1e; ", exact, std::abs(solved - exact), std::abs(brute - exact));
  }
  report(1, "constant-wind Zermelo", pass, detail, since(t0));
}

// 2: time-dependent uniform wind against a heading search

// Ground track for a fixed unit heading in W(t) = (0.5 cos t, 0), by RK4.
struct Track {
  double h = 1e-3;
  Vec u;

  static Vec rate(const Vec& u, double t) { return u + v2(0.5 * std::cos(t), 0.0); }

  static Vec step(const Vec& u, double t, const Vec& x, double h) {
    // the rate does not depend on x, so k2 = k3
    const Vec k1 = rate(u, t);
    const Vec k2 = rate(u, t + 0.5 * h);
    const Vec k4 = rate(u, t + h);
    return x + h / 6.0 * (k1 + 4.0 * k2 + k4);
  }

  // Closest approach to target up to time horizon: (distance, time).
  std::pair<double, double> closest(const Vec& target, double horizon) const {
    Vec x = Vec::Zero(2);
    double best = target.norm();
    std::size_t best_k = 0;
    std::vector<Vec> nodes{x};
    const auto steps = static_cast<std::size_t>(horizon / h);
    for (std::size_t k = 0; k < steps; ++k) {
      x = step(u, k * h, x, h);
      nodes.push_back(x);
      if ((x - target).norm() < best) {
        best = (x - target).norm();
        best_k = k + 1;
      }
    }
    // golden section on the time within the neighbouring steps
    const std::size_t k0 = best_k > 0 ? best_k - 1 : 0;
    auto at = [&](double t) {
      const auto k = std::min(static_cast<std::size_t>(t / h), nodes.size() - 1);
      return (step(u, k * h, nodes[k], t - k * h) - target).norm();
    };
    double a = k0 * h;
    double b = std::min(best_k + 1, nodes.size() - 1) * h;
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = b - g * (b - a);
    double d = a + g * (b - a);
    for (int it = 0; it < 100; ++it) {
      if (at(c) < at(d)) {
        b = d;
      } else {
        a = c;
      }
      c = b - g * (b - a);
      d = a + g * (b - a);
    }
    const double t = 0.5 * (a + b);
    return {at(t), t};
  }
};

double heading_search(const Vec& target, double horizon) {
  auto miss = [&](double theta) {
    return Track{1e-3, v2(std::cos(theta), std::sin(theta))}.closest(target, horizon);
  };
  const int scan = 360;
  double best_theta = 0.0;
  double best = 1e300;
  for (int i = 0; i < scan; ++i) {
    const double th = 2.0 * M_PI * i / scan;
    const double m = miss(th).first;
    if (m < best) {
      best = m;
      best_theta = th;
    }
  }
  double a = best_theta - 2.0 * M_PI / scan;
  double b = best_theta + 2.0 * M_PI / scan;
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  for (int it = 0; it < 80; ++it) {
    const double c = b - g * (b - a);
    const double d = a + g * (b - a);
    if (miss(c).first < miss(d).first) {
      b = d;
    } else {
      a = c;
    }
  }
  return miss(0.5 * (a + b)).second;
}

void criterion_time_dependent() {
  const auto t0 = std::chrono::steady_clock::now();
  const Vec target = v2(1, 1);
  const double solved = solve_navigation(scenario(wind("0.5*cos(t)"), target, 3.0)).arrival_time;
  const double searched = heading_search(target, 3.0);
  const double err = std::abs(solved - searched);
  report(2, "time-dependent wind vs heading search", err <= 1e-4,
         fmt("solver %.9f heading search %.9f diff %.1e", solved, searched, err), since(t0));
}

// 3-10: property suites

void criterion_suite(int id, const std::string& title, const SuiteResult& r, double seconds) {
  std::string detail = fmt("samples %.0f worst %.3e bound %.1e", r.samples, r.worst, r.bound);
  for (const auto& [k, v] : r.values) detail += " " + k + fmt("=%.3e", v);
  if (!r.note.empty()) detail += " [" + r.note + "]";
  report(id, title, r.pass, detail, seconds);
}

template <class F>
void timed_suite(int id, const std::string& title, F&& run) {
  const auto t0 = std::chrono::steady_clock::now();
  const SuiteResult r = run();
  criterion_suite(id, title, r, since(t0));
}

// 11: determinism of the CLI

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run_cli(const std::string& cli, const std::string& args, int threads) {
  const std::string cmd = "CONENAV_THREADS=" + std::to_string(threads) + " '" + cli + "' " + args + " >/dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::vector<std::pair<std::string, std::string>> golden_commands() {
  std::vector<std::pair<std::string, std::string>> out{{"selftest", ""}};
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(CONENAV_SCENARIO_DIR)) {
    if (e.path().extension() == ".json") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& f : files) {
    ScenarioFile sf;
    try {
      sf = load_scenario(f.string());
    } catch (const Error&) {
      out.push_back({"navigate", f.string()});  // rejected scenarios must fail identically
      continue;
    }
    if (sf.metric || sf.lorentz || sf.triple) out.push_back({"check-metric", f.string()});
    if (sf.zermelo) out.push_back({"navigate", f.string()});
    if (sf.zermelo && sf.oracle) out.push_back({"oracle", f.string()});
    if (sf.zermelo && !sf.isochrone_times.empty()) out.push_back({"isochrone", f.string()});
    if (sf.geodesic) out.push_back({"geodesic", f.string()});
    if (sf.smoothing) out.push_back({"smooth-demo", f.string()});
  }
  return out;
}

void criterion_determinism(const std::string& cli) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto root = fs::temp_directory_path() / ("conenav_accept_" + std::to_string(::getpid()));
  fs::remove_all(root);
  bool pass = true;
  std::size_t files = 0;
  std::string first_diff;
  const auto cmds = golden_commands();
  for (std::size_t c = 0; c < cmds.size(); ++c) {
    const auto& [sub, path] = cmds[c];
    std::vector<fs::path> outs;
    std::vector<int> codes;
    for (int threads : {1, 1, 8}) {
      outs.push_back(root / (std::to_string(c) + "_" + std::to_string(outs.size())));
      codes.push_back(run_cli(cli, sub + (path.empty() ? "" : " '" + path + "'") + " --out '" + outs.back().string() + "'",
                              threads));
    }
    const std::string label = sub + " " + fs::path(path).filename().string();
    if (codes[0] != codes[1] || codes[0] != codes[2] || codes[0] == 64 || codes[0] < 0) {
      pass = false;
      if (first_diff.empty()) first_diff = label + ": exit codes differ or usage error";
    }
    for (const auto& e : fs::directory_iterator(outs[0])) {
      ++files;
      const auto name = e.path().filename();
      const std::string ref = slurp(outs[0] / name);
      for (std::size_t k = 1; k < outs.size(); ++k) {
        if (!fs::exists(outs[k] / name) || slurp(outs[k] / name) != ref) {
          pass = false;
          if (first_diff.empty()) first_diff = label + ": " + name.string() + " differs";
        }
      }
    }
    for (std::size_t k = 1; k < outs.size(); ++k) {
      if (std::distance(fs::directory_iterator(outs[k]), fs::directory_iterator{}) !=
          std::distance(fs::directory_iterator(outs[0]), fs::directory_iterator{})) {
        pass = false;
        if (first_diff.empty()) first_diff = label + ": file sets differ";
      }
    }
  }
  fs::remove_all(root);
  std::string detail = std::to_string(cmds.size()) + " commands, " + std::to_string(files) +
                       " artifacts x 3 runs (threads 1, 1, 8)";
  if (!first_diff.empty()) detail += "; " + first_diff;
  report(11, "determinism", pass, detail, since(t0));
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::fprintf(stderr, "usage: acceptance <path to conenav>\n");
    return 64;
  }
  const std::uint64_t seed = 20261015;
  const SuiteSizes sz;
  try {
    criterion_constant_wind();
    criterion_time_dependent();
    timed_suite(3, "conjugate points", [] { return suite_conjugate(); });
    timed_suite(4, "tensor oracle", [&] { return suite_tensor_oracle(seed, sz.tensor); });
    timed_suite(5, "signature", [&] { return suite_signature(seed, sz.signature); });
    timed_suite(6, "reverse inequalities", [&] { return suite_reverse_inequalities(seed, sz.reverse); });
    timed_suite(7, "anisotropic invariance", [&] { return suite_anisotropic(seed, sz.factor); });
    timed_suite(8, "smoothing", [&] { return suite_smoothing(sz.smoothing_grid); });
    timed_suite(9, "maximality", [&] { return suite_maximality(seed, sz.maximality); });
    timed_suite(10, "round trip", [&] { return suite_round_trip(seed, sz.round_trip); });
    criterion_determinism(argv[1]);
  } catch (const std::exception& e) {
    std::printf("[FAIL] aborted: %s\n", e.what());
    return 1;
  }
  std::printf("%s: %d failing criteria\n", failures ? "FAIL" : "PASS", failures);
  return failures ? 1 : 0;
}
