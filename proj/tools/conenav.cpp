// conenav: command-line front end for scenario files.
//
// Exit status: 0 success, 1 validation failure (bad input or a failing
// condition report), 2 numerical failure, 64 usage error. Artifacts are
// collected in memory and written by a single writer at the end; timing goes
// to stderr only so that output files are byte-stable.

#include "conenav/invariants.hpp"
#include "conenav/scenario.hpp"

#include "CLI11.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>

using namespace conenav;

namespace {

constexpr int kOk = 0;
constexpr int kValidation = 1;
constexpr int kNumerical = 2;
constexpr int kUsage = 64;

struct Options {
  std::string command;
  std::string scenario;
  std::string out = "out";
  std::optional<std::uint64_t> seed;
  bool full = false;
};

struct Run {
  json results = json::object();
  std::vector<std::string> warnings;
  std::map<std::string, std::string> files;  // name -> contents
  int status = kOk;
};

json to_json(const Vec& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

json finite_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

class Csv {
 public:
  explicit Csv(const std::vector<std::string>& header) {
    for (std::size_t i = 0; i < header.size(); ++i) out_ += (i ? "," : "") + header[i];
    out_ += "\n";
  }

  void row(const std::vector<double>& values) {
    for (std::size_t i = 0; i < values.size(); ++i) out_ += (i ? "," : "") + fmt(values[i]);
    out_ += "\n";
  }

  const std::string& str() const { return out_; }

 private:
  std::string out_;
};

std::vector<std::string> indexed(const std::string& prefix, int count, int first) {
  std::vector<std::string> out;
  for (int i = 0; i < count; ++i) out.push_back(prefix + std::to_string(first + i));
  return out;
}

void append(std::vector<double>& row, const Vec& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) row.push_back(v(i));
}

std::uint64_t fnv1a(const std::string& s, std::uint64_t h = 14695981039346656037ULL) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open scenario file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

LorentzFinslerSpec spacetime_of(const ScenarioFile& sf, const char* command) {
  if (sf.lorentz) return *sf.lorentz;
  if (sf.triple) return make_triple_g(*sf.triple);
  throw ValidationError(std::string(command) + ": scenario needs a 'lorentz' or 'triple' block");
}

json checks_json(const ConditionReport& rep) {
  json a = json::array();
  for (const auto& c : rep.checks) {
    a.push_back({{"name", c.name}, {"pass", c.pass}, {"margin", finite_or_null(c.margin)}, {"t", c.t},
                 {"x", to_json(c.x)}, {"v", to_json(c.v)}});
  }
  return a;
}

// ---------------------------------------------------------------------------
// commands

void check_metric(const ScenarioFile& sf, std::uint64_t seed, Run& run) {
  const CheckBlock cb = sf.check.value_or(CheckBlock{0.0, Vec::Zero(sf.dimension), 16, {}});
  if (!sf.metric && !sf.lorentz && !sf.triple) {
    throw ValidationError("check-metric: scenario needs a 'metric', 'lorentz' or 'triple' block");
  }
  ConditionReport rep;
  if (sf.metric) {
    const int n = sf.metric->dim;
    for (const auto& d : unit_directions(n, n == 1 ? 2 : cb.samples)) {
      try {
        const Mat g = finsler_tensor_matrix(*sf.metric, cb.t, cb.x, d);
        const double lo = Eigen::SelfAdjointEigenSolver<Mat>(g).eigenvalues().minCoeff();
        rep.add("finsler.positive_definite", cb.t, cb.x, d, signature(g) == Signature{n, 0, 0, 0}, lo);
      } catch (const DomainError&) {
        // outside a conic domain (Kropina)
      }
    }
  }
  if (sf.lorentz || sf.triple) {
    const auto spec = spacetime_of(sf, "check-metric");
    if (std::holds_alternative<lorentz::OmegaMinusF>(spec.data) ||
        std::holds_alternative<lorentz::RiemannMinusF>(spec.data)) {
      rep.merge(check_construction_hypotheses(spec, cb.t, cb.x, cb.samples));
    }
    CausalSampler S(seed);
    int skipped = 0;
    for (int k = 0; k < cb.samples; ++k) {
      try {
        const Vec v = S.sample(spec, cb.t, cb.x, k % 2 == 1);
        rep.merge(check_lorentz_at(spec, cb.t, cb.x, v));
      } catch (const DomainError&) {
        ++skipped;
      } catch (const NumericalError&) {
        ++skipped;
      }
    }
    if (skipped > 0) {
      run.warnings.push_back(std::to_string(skipped) + " random causal samples skipped (tensor undefined or cone not bracketed)");
    }
    for (const auto& v : cb.vectors) {
      try {
        rep.merge(check_lorentz_at(spec, cb.t, cb.x, v));
      } catch (const DomainError& e) {
        rep.add("vector_in_domain", cb.t, cb.x, v, false, 0.0);
      }
    }
  }
  int failed = 0;
  for (const auto& c : rep.checks) failed += c.pass ? 0 : 1;
  run.results["overall"] = rep.overall;
  run.results["checks_total"] = rep.checks.size();
  run.results["checks_failed"] = failed;
  run.results["checks"] = checks_json(rep);
  if (!rep.overall) run.status = kValidation;
}

void geodesic(const ScenarioFile& sf, Run& run) {
  if (!sf.geodesic) throw ValidationError("geodesic: scenario needs a 'geodesic' block");
  const auto spec = spacetime_of(sf, "geodesic");
  const auto& gb = *sf.geodesic;
  GeodesicConfig cfg;
  cfg.h = gb.s_max / gb.steps;
  cfg.null_projection = gb.null_projection;
  const auto sol = integrate_geodesic(spec, {gb.q0, gb.v0, 0.0}, gb.s_max, cfg);
  const int N = spec.dim;
  std::vector<std::string> header{"s"};
  for (const auto& h : indexed("q", N, 0)) header.push_back(h);
  for (const auto& h : indexed("p", N, 0)) header.push_back(h);
  header.push_back("energy");
  header.push_back("null_residual");
  Csv csv(header);
  double drift = 0.0;
  double null_max = 0.0;
  for (std::size_t i = 0; i < sol.samples.size(); ++i) {
    std::vector<double> row{sol.samples[i].s};
    append(row, sol.samples[i].q);
    append(row, sol.samples[i].p);
    row.push_back(sol.energy[i]);
    row.push_back(sol.null_residuals[i]);
    csv.row(row);
    drift = std::max(drift, std::abs(sol.energy[i] - sol.energy.front()));
    null_max = std::max(null_max, sol.null_residuals[i]);
  }
  run.files["geodesic.csv"] = csv.str();
  run.results["termination"] = to_string(sol.termination);
  run.results["samples"] = sol.samples.size();
  run.results["s_final"] = sol.samples.back().s;
  run.results["q_final"] = to_json(sol.samples.back().q);
  run.results["p_final"] = to_json(sol.samples.back().p);
  run.results["energy_drift"] = drift;
  run.results["max_null_residual"] = null_max;
  run.results["csv"] = "geodesic.csv";
  if (sol.termination == Termination::left_domain) run.warnings.push_back("geodesic left the domain: " + sol.message);
  if (sol.termination == Termination::step_failure) {
    run.warnings.push_back("integration step failed: " + sol.message);
    run.status = kNumerical;
  }
}

const ZermeloScenario& need_zermelo(const ScenarioFile& sf, const char* command) {
  if (!sf.zermelo) throw ValidationError(std::string(command) + ": scenario needs 'metric' and 'zermelo' blocks");
  return *sf.zermelo;
}

void navigate(const ScenarioFile& sf, Run& run) {
  const auto& sc = need_zermelo(sf, "navigate");
  const auto res = solve_navigation(sc, sf.solver);
  const int n = sc.dim();
  std::vector<std::string> header{"t"};
  for (const auto& h : indexed("x", n, 1)) header.push_back(h);
  for (const auto& h : indexed("heading", n, 1)) header.push_back(h);
  header.push_back("Z");
  header.push_back("null_residual");
  Csv csv(header);
  double null_max = 0.0;
  for (std::size_t i = 0; i < res.times.size(); ++i) {
    std::vector<double> row{res.times[i]};
    append(row, res.trajectory[i]);
    append(row, res.headings[i]);
    row.push_back(res.z_values[i]);
    row.push_back(res.null_residuals[i]);
    csv.row(row);
    null_max = std::max(null_max, res.null_residuals[i]);
  }
  run.files["trajectory.csv"] = csv.str();
  json cands = json::array();
  for (const auto& c : res.candidates) {
    cands.push_back({{"heading", to_json(c.heading)}, {"arrival_time", c.arrival}, {"miss", c.miss}});
  }
  run.results["arrival_time"] = res.arrival_time;
  run.results["terminal_miss"] = res.terminal_miss;
  run.results["launch"] = to_json(res.launch);
  run.results["candidates"] = cands;
  run.results["samples"] = res.times.size();
  run.results["max_null_residual"] = null_max;
  run.results["first_conjugate_s"] =
      res.conjugate.first_conjugate_s ? json(*res.conjugate.first_conjugate_s) : json(nullptr);
  run.results["csv"] = "trajectory.csv";
  if (res.conjugate.first_conjugate_s) {
    run.warnings.push_back("conjugate point before arrival: the trajectory is not time-minimizing");
  }
  if (res.candidates.size() > 1) {
    run.warnings.push_back(std::to_string(res.candidates.size()) +
                           " converged candidates; minimality is relative to these");
  }
}

void isochrone(const ScenarioFile& sf, Run& run) {
  const auto& sc = need_zermelo(sf, "isochrone");
  if (sf.isochrone_times.empty()) throw ValidationError("isochrone: scenario needs an 'isochrone' block with times");
  const auto fronts = isochrones(sc, sf.isochrone_times, sf.isochrone_fan,
                                 sf.isochrone_steps > 0 ? sf.isochrone_steps : sf.solver.refine_steps);
  json items = json::array();
  for (std::size_t j = 0; j < fronts.size(); ++j) {
    char name[32];
    std::snprintf(name, sizeof name, "isochrone_%03zu.csv", j);
    Csv csv(indexed("x", sc.dim(), 1));
    double rmin = std::numeric_limits<double>::infinity();
    double rmax = 0.0;
    for (const auto& p : fronts[j]) {
      std::vector<double> row;
      append(row, p);
      csv.row(row);
      const double r = (p - sc.x_start).norm();
      rmin = std::min(rmin, r);
      rmax = std::max(rmax, r);
    }
    run.files[name] = csv.str();
    items.push_back({{"t", sf.isochrone_times[j]}, {"csv", name}, {"points", fronts[j].size()},
                     {"min_distance_from_start", rmin}, {"max_distance_from_start", rmax}});
  }
  run.results["fronts"] = items;
}

void oracle(const ScenarioFile& sf, Run& run) {
  const auto& sc = need_zermelo(sf, "oracle");
  if (!sf.oracle) throw ValidationError("oracle: scenario needs an 'oracle' block");
  const auto& oc = *sf.oracle;
  run.results["arrival_time"] = dp_oracle(sc, oc);
  run.results["dx"] = oc.dx;
  run.results["dt"] = oc.dt;
  run.results["m"] = oc.m;
  run.results["box_lo"] = to_json(oc.box_lo);
  run.results["box_hi"] = to_json(oc.box_hi);
}

void smooth_demo(const ScenarioFile& sf, Run& run) {
  if (!sf.metric || !sf.smoothing) throw ValidationError("smooth-demo: scenario needs 'metric' and 'smoothing' blocks");
  const int n = sf.metric->dim;
  if (n > 2) throw ValidationError("smooth-demo: dimension must be 1 or 2");
  const auto& sb = *sf.smoothing;
  const auto sg = smooth_indicatrix(*sf.metric, sb.t, sb.x, sb.eps, sb.D);
  std::vector<std::string> header = indexed("y", n, 1);
  for (const char* h : {"original", "smoothed", "difference"}) header.emplace_back(h);
  Csv csv(header);
  double sup = 0.0;
  double outside = 0.0;
  double min_eig = std::numeric_limits<double>::infinity();
  const int G = sb.grid;
  const long total = n == 1 ? G : static_cast<long>(G) * G;
  for (long k = 0; k < total; ++k) {
    Vec y(n);
    y(0) = -sb.D + 2.0 * sb.D * static_cast<double>(k % G) / (G - 1);
    if (n == 2) y(1) = -sb.D + 2.0 * sb.D * static_cast<double>(k / G) / (G - 1);
    const double a = sg.original(y);
    const double b = sg.smoothed(y);
    const ScalarFn f = sg.smoothed;
    const Mat H = numeric_hessian(f, y);
    min_eig = std::min(min_eig, Eigen::SelfAdjointEigenSolver<Mat>(0.5 * (H + H.transpose())).eigenvalues().minCoeff());
    sup = std::max(sup, std::abs(b - a));
    if (y.norm() >= sb.D / 2) outside = std::max(outside, std::abs(b - a));
    std::vector<double> row;
    append(row, y);
    row.push_back(a);
    row.push_back(b);
    row.push_back(b - a);
    csv.row(row);
  }
  run.files["smooth_grid.csv"] = csv.str();
  run.results["eps"] = sg.eps;
  run.results["eps_tilde"] = sg.eps_tilde;
  run.results["D"] = sg.D;
  run.results["delta"] = sg.delta;
  run.results["xi"] = to_json(sg.xi);
  run.results["sup_difference"] = sup;
  run.results["max_difference_outside_half_D"] = outside;
  run.results["min_hessian_eigenvalue"] = min_eig;
  run.results["csv"] = "smooth_grid.csv";
  if (!(min_eig > 0.0)) run.warnings.push_back("smoothed graph is not strictly convex on the grid");
}

void selftest(std::uint64_t seed, bool full, Run& run) {
  SuiteSizes sz;
  if (!full) sz = {50, 1100, 1100, 20, 200, 101, 100};
  json suites = json::array();
  bool all = true;
  for (const auto& r : run_invariant_suites(seed, sz)) {
    json values = json::object();
    for (const auto& [k, v] : r.values) values[k] = finite_or_null(v);
    suites.push_back({{"name", r.name}, {"pass", r.pass}, {"samples", r.samples}, {"worst", finite_or_null(r.worst)},
                      {"bound", r.bound}, {"values", values}, {"note", r.note}});
    all = all && r.pass;
  }
  run.results["suites"] = suites;
  run.results["overall"] = all;
  run.results["full"] = full;
  if (!all) run.status = kValidation;
}

// ---------------------------------------------------------------------------

void write_outputs(const std::string& dir, const json& report, const std::map<std::string, std::string>& files) {
  std::filesystem::create_directories(dir);
  auto put = [&](const std::string& name, const std::string& body) {
    const auto path = std::filesystem::path(dir) / name;
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write '" + path.string() + "'");
    f << body;
  };
  for (const auto& [name, body] : files) put(name, body);
  put("report.json", report.dump(2) + "\n");
}

int execute(const Options& opt) {
  const auto start = std::chrono::steady_clock::now();
  Run run;
  json command = {{"subcommand", opt.command}};
  std::string hash_input = opt.command + '\0';
  std::string error_kind;
  std::string error_message;
  try {
    std::uint64_t seed = opt.seed.value_or(20261015);
    if (opt.command == "selftest") {
      command["full"] = opt.full;
      command["seed"] = seed;
      hash_input += std::to_string(seed) + '\0' + (opt.full ? "full" : "quick");
      selftest(seed, opt.full, run);
    } else {
      command["scenario"] = opt.scenario;
      const std::string text = read_file(opt.scenario);
      json doc;
      try {
        doc = json::parse(text);
      } catch (const json::parse_error& e) {
        throw ValidationError("scenario '" + opt.scenario + "': malformed JSON: " + e.what());
      }
      const ScenarioFile sf = parse_scenario(doc);
      seed = opt.seed.value_or(sf.seed);
      command["seed"] = seed;
      hash_input += text + '\0' + std::to_string(seed);
      if (opt.command == "check-metric") check_metric(sf, seed, run);
      if (opt.command == "geodesic") geodesic(sf, run);
      if (opt.command == "navigate") navigate(sf, run);
      if (opt.command == "isochrone") isochrone(sf, run);
      if (opt.command == "oracle") oracle(sf, run);
      if (opt.command == "smooth-demo") smooth_demo(sf, run);
    }
  } catch (const ValidationError& e) {
    error_kind = "validation";
    error_message = e.what();
    run.status = kValidation;
  } catch (const ParseError& e) {
    error_kind = "parse";
    error_message = e.what();
    run.status = kValidation;
  } catch (const UnreachableError& e) {
    error_kind = "unreachable";
    error_message = e.what();
    run.status = kNumerical;
  } catch (const DomainError& e) {
    error_kind = "domain";
    error_message = e.what();
    run.status = kNumerical;
  } catch (const NumericalError& e) {
    error_kind = "numerical";
    error_message = e.what();
    run.status = kNumerical;
  }

  char hash[24];
  std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(fnv1a(hash_input)));
  json report = {{"command", command}, {"config_hash", hash}, {"warnings", run.warnings}, {"exit_code", run.status}};
  if (error_kind.empty()) {
    report["status"] = run.status == kOk ? "ok" : "fail";
    report["results"] = run.results;
  } else {
    report["status"] = "error";
    report["error"] = {{"kind", error_kind}, {"message", error_message}};
    run.files.clear();
    std::cerr << "conenav: " << error_message << "\n";
  }
  try {
    write_outputs(opt.out, report, run.files);
  } catch (const std::exception& e) {
    std::cerr << "conenav: " << e.what() << "\n";
    return kValidation;
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::cerr << "conenav " << opt.command << ": " << report["status"].get<std::string>() << " in " << secs << " s ("
            << thread_count() << " threads)\n";
  return run.status;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cone structures, Lorentz-Finsler metrics and time-dependent Zermelo navigation"};
  app.require_subcommand(1);
  Options opt;
  struct Sub {
    const char* name;
    const char* help;
  };
  const std::vector<Sub> subs{{"check-metric", "condition reports for the metric blocks of a scenario"},
                              {"geodesic", "integrate one geodesic to CSV"},
                              {"navigate", "solve the Zermelo navigation problem"},
                              {"isochrone", "reachable-set fronts to CSV"},
                              {"oracle", "brute-force arrival time on a grid"},
                              {"smooth-demo", "smoothed fiber-norm graph sampled on a grid"}};
  for (const auto& s : subs) {
    auto* sc = app.add_subcommand(s.name, s.help);
    sc->add_option("scenario", opt.scenario, "scenario file (JSON)")->required();
    sc->add_option("--out", opt.out, "output directory")->capture_default_str();
    sc->add_option("--seed", opt.seed, "seed for randomized sampling (default: scenario seed)");
  }
  auto* st = app.add_subcommand("selftest", "run the invariant suites");
  st->add_option("--out", opt.out, "output directory")->capture_default_str();
  st->add_option("--seed", opt.seed, "seed (default 20261015)");
  st->add_flag("--full", opt.full, "acceptance-size sample counts");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }
  opt.command = app.get_subcommands().front()->get_name();
  return execute(opt);
}
