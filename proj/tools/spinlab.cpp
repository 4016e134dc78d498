// spinlab: command-line front end.
// Exit codes: 0 success, 1 numeric check failed (JSON failure record on stdout),
// 2 usage or malformed input.

#include <omp.h>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "spinlab/errors.hpp"
#include "spinlab/gibbs.hpp"
#include "spinlab/glauber.hpp"
#include "spinlab/graphs.hpp"
#include "spinlab/poly.hpp"
#include "spinlab/potential.hpp"
#include "spinlab/report.hpp"
#include "spinlab/saw.hpp"
#include "spinlab/tree.hpp"
#include "spinlab/uniqueness.hpp"

using namespace spinlab;
using nlohmann::json;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// a numeric check failed; the record goes to stdout unless it is already there
struct CheckFailed {
  json record;
  bool printed = false;  // the record already went to stdout
};

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(item);
  return out;
}

int to_int(const std::string& s, const std::string& what) {
  try {
    std::size_t pos = 0;
    int v = std::stoi(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw UsageError("expected an integer for " + what + ", got '" + s + "'");
  }
}

// A file path, or gen:path:N, gen:cycle:N, gen:star:LEAVES, gen:complete:N,
// gen:random:N:MAXDEG:SEED, gen:regular:N:D:SEED, gen:tree:N:SEED
Graph load_graph(const std::string& spec) {
  if (spec.rfind("gen:", 0) != 0) return read_graph_file(spec);
  auto f = split(spec.substr(4), ':');
  if (f.empty()) throw UsageError("empty generator spec");
  auto need = [&](std::size_t k) {
    if (f.size() != k) throw UsageError("generator '" + spec + "' expects " + std::to_string(k - 1) + " arguments");
  };
  const std::string& kind = f[0];
  if (kind == "path") return need(2), path_graph(to_int(f[1], "n"));
  if (kind == "cycle") return need(2), cycle_graph(to_int(f[1], "n"));
  if (kind == "star") return need(2), star_graph(to_int(f[1], "leaves"));
  if (kind == "complete") return need(2), complete_graph(to_int(f[1], "n"));
  if (kind == "random") {
    need(4);
    CounterRng rng(static_cast<std::uint64_t>(to_int(f[3], "seed")));
    return random_bounded_degree(to_int(f[1], "n"), to_int(f[2], "max degree"), 0.5, rng, true);
  }
  if (kind == "regular") {
    need(4);
    CounterRng rng(static_cast<std::uint64_t>(to_int(f[3], "seed")));
    return random_regular(to_int(f[1], "n"), to_int(f[2], "d"), rng);
  }
  if (kind == "tree") {
    need(3);
    CounterRng rng(static_cast<std::uint64_t>(to_int(f[2], "seed")));
    return random_tree(to_int(f[1], "n"), rng);
  }
  throw UsageError("unknown generator '" + kind + "'");
}

SpinParams load_params(const std::string& path, int n) {
  if (path.empty()) throw UsageError("--params is required");
  return parse_params_json(read_json_file(path), n);
}

Boundary load_boundary(const std::string& path) {
  if (path.empty()) return {};
  return parse_boundary_json(read_json_file(path));
}

void emit(const json& j, const std::string& out) {
  if (out.empty()) {
    std::cout << j.dump(2) << "\n";
    return;
  }
  std::ofstream f(out);
  if (!f) throw Error(ErrorKind::MalformedInput, "cannot write " + out);
  f << j.dump(2) << "\n";
}

void emit_text(const std::string& text, const std::string& out) {
  if (out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(out);
  if (!f) throw Error(ErrorKind::MalformedInput, "cannot write " + out);
  f << text;
}

bool ends_with(const std::string& s, const std::string& suf) {
  return s.size() >= suf.size() && s.compare(s.size() - suf.size(), suf.size(), suf) == 0;
}

json ext_rat(const ExtRat& r) { return r.infinite ? json("inf") : json(rat_str(r.value)); }

json num(double x) {
  if (std::isnan(x)) return nullptr;
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return x;
}

void check_root(const Graph& g, int r) {
  if (r < 0 || r >= g.n) throw UsageError("root " + std::to_string(r) + " out of range");
}

// ---------------------------------------------------------------- commands

struct Common {
  std::string graph, params, boundary, out;
  bool dry_run = false;
};

json dry_ok(const std::string& cmd) { return {{"status", "ok"}, {"command", cmd}, {"dry_run", true}}; }

void cmd_exact(const Common& c, const std::string& csv) {
  Graph g = load_graph(c.graph);
  SpinParams p = load_params(c.params, g.n);
  Boundary bc = load_boundary(c.boundary);
  validate_boundary(g, bc);
  if (c.dry_run) return emit(dry_ok("exact"), c.out);
  GibbsSummary s = gibbs_summary(g, p, bc);
  InfluenceMatrix I = influence_matrix(g, p, bc);
  json j;
  j["kind"] = "exact";
  j["Z"] = rat_str(s.Z);
  j["free"] = s.free;
  for (std::size_t i = 0; i < s.free.size(); ++i) {
    j["marginals"][std::to_string(s.free[i])] = rat_str(s.M[i]);
    j["ratios"][std::to_string(s.free[i])] = ext_rat(s.R[i]);
  }
  j["influence"]["vertices"] = I.vertices;
  j["influence"]["excluded"] = I.excluded;
  json rows = json::array();
  for (const auto& row : I.exact) {
    json r = json::array();
    for (const auto& x : row) r.push_back(rat_str(x));
    rows.push_back(r);
  }
  j["influence"]["matrix"] = rows;
  if (!I.vertices.empty()) j["influence"]["lambda_max"] = influence_lambda_max(I);
  emit(j, c.out);
  if (!csv.empty()) {
    json t{{"kind", "table"}, {"columns", json::array({"u"})}, {"rows", json::array()}};
    for (int v : I.vertices) t["columns"].push_back(std::to_string(v));
    for (std::size_t i = 0; i < I.vertices.size(); ++i) {
      json r = json::array({std::to_string(I.vertices[i])});
      for (const auto& x : I.exact[i]) r.push_back(rat_str(x));
      t["rows"].push_back(r);
    }
    emit_text(report_render(t, ReportFormat::Csv), csv);
  }
}

void cmd_divcheck(const Common& c, int root, double budget, int lines, std::uint64_t seed) {
  Graph g = load_graph(c.graph);
  check_root(g, root);
  SpinParams p = load_params(c.params, g.n);
  Boundary bc = load_boundary(c.boundary);
  validate_boundary(g, bc);
  if (c.dry_run) return emit(dry_ok("divcheck"), c.out);
  DivisibilityOptions opt;
  opt.monomial_budget = budget;
  opt.lines = lines;
  opt.seed = seed;
  json j;
  j["kind"] = "divisibility";
  j["root"] = root;
  try {
    DivisibilityReport r = verify_divisibility(g, p, root, bc, opt);
    j["remainder_zero"] = r.remainder_zero;
    j["cross_identity"] = r.cross_identity;
    j["root_independent"] = r.root_independent;
    j["root_degree_one"] = r.root_degree_one;
    j["full"] = r.full;
    j["lines_checked"] = r.lines_checked;
    j["tree_nodes"] = r.tree_nodes;
    j["monomial_box"] = r.monomial_box;
    if (r.full) j["quotient"] = poly_to_json(r.quotient, g.n);
    j["status"] = r.ok() ? "ok" : "fail";
    if (!r.ok()) throw CheckFailed{j};
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::NotDivisible) throw;
    j["status"] = "fail";
    j["error"] = e.what();
    throw CheckFailed{j};
  }
  emit(j, c.out);
}

void cmd_saw(const Common& c, int root, const std::string& dot) {
  Graph g = load_graph(c.graph);
  check_root(g, root);
  Boundary bc = load_boundary(c.boundary);
  validate_boundary(g, bc);
  if (c.dry_run) return emit(dry_ok("saw"), c.out);
  ConditionedSawTree t = build_conditioned_saw(g, root, bc);
  json j = saw_to_json(t.tree);
  emit(j, c.out);
  if (!dot.empty()) emit_text(saw_to_dot(t.tree), dot);
}

void cmd_decay(const Common& c, int root, const std::string& potential, int levels, int Delta) {
  Graph g = load_graph(c.graph);
  check_root(g, root);
  SpinParams p = load_params(c.params, g.n);
  Boundary bc = load_boundary(c.boundary);
  validate_boundary(g, bc);
  PotentialKind kind = parse_potential_kind(potential);
  if (levels < 1) throw UsageError("--levels must be positive");
  if (Delta <= 0) Delta = std::max(3, g.max_degree());
  if (c.dry_run) return emit(dry_ok("decay"), c.out);
  ScalarParams sp = ScalarParams::from(p);
  Potential pot = Potential::make(kind, sp);
  ContractionResult cr = contraction_sup(pot, Delta);
  ConditionedSawTree t = build_conditioned_saw(g, root, bc);
  DecayProfile prof = decay_profile(t.tree, p, pot, cr.sup, levels);
  json j;
  j["kind"] = "decay";
  j["root"] = root;
  j["potential"] = potential_name(kind);
  j["Delta"] = Delta;
  j["kappa"] = cr.sup;
  j["A"] = prof.A;
  j["Delta_r"] = prof.Delta_r;
  j["levels"] = json::array();
  for (const auto& l : prof.levels)
    j["levels"].push_back({{"k", l.k},
                           {"s_k", l.s},
                           {"s_k_weighted", l.s_weighted},
                           {"bound_k", l.bound_defined ? num(l.bound) : json(nullptr)},
                           {"bound_k_weighted", l.bound_defined ? num(l.bound_weighted) : json(nullptr)}});
  bool ok = prof.bounds_hold();
  j["status"] = ok ? "ok" : "fail";
  if (ends_with(c.out, ".csv"))
    emit_text(report_render(j, ReportFormat::Csv), c.out);
  else
    emit(j, c.out);
  if (!ok) throw CheckFailed{j, c.out.empty()};
}

struct CertifyArgs {
  std::string beta, gamma, lambda, mode = "auto", potential = "auto", preset;
  int Delta = 0;
  double delta = -1;
  double gl18_alpha = 1;
  int grid = 512, multistarts = 64;
  std::uint64_t seed = 1;
};

void cmd_certify(const Common& c, const CertifyArgs& a) {
  if (a.Delta < 3) throw UsageError("--Delta (or --delta-max) must be at least 3");
  ScalarParams sp;
  json preset;
  if (!a.preset.empty()) {
    if (!(a.delta > 0 && a.delta < 1)) throw UsageError("presets need --delta in (0, 1)");
    if (a.preset == "hardcore") {
      Rat gamma = a.gamma.empty() ? Rat(1) : parse_rat(a.gamma);
      Rat lc = hardcore_critical_field(a.Delta, gamma);
      Rat lam = (1 - approx_rat(a.delta, 1L << 30)) * lc;
      sp = {0.0, to_double(gamma), to_double(lam)};
      preset = {{"name", "hardcore"}, {"delta", a.delta}, {"lambda_c", rat_str(lc)},
                {"lambda", rat_str(lam)}, {"claimed_alpha_floor", a.delta / 8}, {"claimed_c", 4}};
    } else if (a.preset == "ising") {
      double b = (a.Delta - 2 * (1 - a.delta)) / a.Delta;
      double lam = a.lambda.empty() ? 1.0 : to_double(parse_rat(a.lambda));
      sp = {b, b, lam};
      preset = {{"name", "ising"}, {"delta", a.delta}, {"beta", b},
                {"claimed_alpha_floor", a.delta}, {"claimed_c", 1.5}};
    } else {
      throw UsageError("unknown preset '" + a.preset + "' (hardcore | ising)");
    }
  } else if (!c.params.empty()) {
    sp = ScalarParams::from(load_params(c.params, 1));
  } else {
    if (a.beta.empty() || a.gamma.empty() || a.lambda.empty())
      throw UsageError("certify needs --beta --gamma --lambda, --params, or --preset");
    sp = {to_double(parse_rat(a.beta)), to_double(parse_rat(a.gamma)), to_double(parse_rat(a.lambda))};
  }
  if (sp.beta < 0 || !(sp.gamma > 0) || !(sp.lambda > 0))
    throw Error(ErrorKind::InvalidParams, "need beta >= 0, gamma > 0, lambda > 0");
  if (a.potential != "auto") parse_potential_kind(a.potential);
  if (a.mode != "auto" && a.mode != "boundedness" && a.mode != "general")
    throw UsageError("--mode must be auto, boundedness or general");
  if (c.dry_run) return emit(dry_ok("certify"), c.out);
  CertifyOptions opt;
  opt.potential = a.potential;
  opt.mode = a.mode;
  opt.gl18_interp = a.gl18_alpha;
  opt.contraction.grid = a.grid;
  opt.contraction.multistarts = a.multistarts;
  opt.contraction.seed = a.seed;
  json j;
  try {
    PotentialCertificate cert = certify(sp, a.Delta, opt);
    j = certificate_to_json(cert);
    j["kind"] = "certificate";
    bool ok = cert.passed();
    if (!preset.empty()) {
      preset["alpha_meets_claim"] = cert.alpha >= preset["claimed_alpha_floor"].get<double>();
      preset["c_meets_claim"] = cert.c <= preset["claimed_c"].get<double>();
      ok = ok && preset["alpha_meets_claim"].get<bool>() && preset["c_meets_claim"].get<bool>();
      j["preset"] = preset;
    }
    j["status"] = ok ? "ok" : "fail";
    emit(j, c.out);
    if (!ok) throw CheckFailed{j, c.out.empty()};
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::OutsideUniqueness) throw;
    j = {{"kind", "certificate"}, {"status", "fail"}, {"error", e.what()},
         {"error_kind", error_kind_name(e.kind())}};
    throw CheckFailed{j};
  }
}

void cmd_mix(const Common& c, bool simulate, long steps, long reps, std::uint64_t seed,
             const std::string& csv) {
  Graph g = load_graph(c.graph);
  SpinParams p = load_params(c.params, g.n);
  Boundary bc = load_boundary(c.boundary);
  validate_boundary(g, bc);
  if (simulate && (steps < 0 || reps < 1)) throw UsageError("--steps >= 0 and --reps >= 1 required");
  if (c.dry_run) return emit(dry_ok("mix"), c.out);
  if (!simulate) {
    SpectralReport r = transition_matrix(g, p, bc);
    json j = spectral_to_json(r);
    j["kind"] = "spectral";
    bool ok = r.psd && r.reversibility_residual <= 1e-12 && r.t_mix_exact >= 0 &&
              r.t_mix_exact <= r.t_mix_bound;
    j["status"] = ok ? "ok" : "fail";
    emit(j, c.out);
    if (!ok) throw CheckFailed{j, c.out.empty()};
    return;
  }
  auto trace = simulate_mixing(g, p, bc, steps, reps, seed);
  json j{{"kind", "mix_trace"}, {"steps", steps}, {"reps", reps}, {"seed", seed}, {"trace", json::array()}};
  for (const auto& t : trace)
    j["trace"].push_back({{"start", t.start}, {"t", t.t}, {"tv_exact", t.tv_exact},
                          {"tv_empirical", t.tv_empirical}, {"ci", t.ci}});
  emit(j, c.out);
  if (!csv.empty()) emit_text(report_render(j, ReportFormat::Csv), csv);
}

// ---------------------------------------------------------------- verify-all

struct Tally {
  json failures = json::array();
  long checks = 0;
  void check(bool ok, const std::string& what) {
    ++checks;
    if (!ok && failures.size() < 50) failures.push_back(what);
    else if (!ok) failures.push_back("...");
  }
};

SpinParams random_params(int n, CounterRng& rng) {
  for (;;) {
    Rat b(static_cast<long>(rng.below(5)), static_cast<long>(1 + rng.below(4)));
    Rat gm(static_cast<long>(1 + rng.below(5)), static_cast<long>(1 + rng.below(4)));
    Rat l(static_cast<long>(1 + rng.below(5)), static_cast<long>(1 + rng.below(4)));
    b.canonicalize(), gm.canonicalize(), l.canonicalize();
    if (b * gm != 1) return SpinParams::uniform(n, b, gm, l);
  }
}

std::string where(const Graph& g, int r, const Boundary& bc) {
  return graph_to_json(g).dump() + " root " + std::to_string(r) + " boundary " +
         boundary_to_json(bc).dump();
}

void cmd_verify_all(const Common& c, const std::string& suite, std::uint64_t seed) {
  int nmax;
  if (suite == "small") nmax = 4;
  else if (suite == "medium") nmax = 5;
  else throw UsageError("--suite must be small or medium");
  if (c.dry_run) return emit(dry_ok("verify-all"), c.out);
  CounterRng rng(seed);
  Tally t;
  for (int n = 1; n <= nmax; ++n)
    for (const Graph& g : connected_graphs_up_to_iso(n)) {
      SpinParams p = random_params(n, rng);
      DerivativeReport d = derivative_identity_check(g, p);
      t.check(d.passed(), "derivative identities on " + graph_to_json(g).dump());
      for (int r = 0; r < n; ++r) {
        std::vector<Boundary> bcs{{}};
        for (int v = 0; v < n; ++v)
          if (v != r)
            for (int s = 0; s < 2; ++s) bcs.push_back({{v, s}});
        for (const Boundary& bc : bcs) {
          std::vector<bool> keep(n, true);
          for (auto [v, s] : bc) keep[v] = false;
          if (!is_connected(g, keep)) continue;
          DivisibilityOptions o;
          o.keep_quotient = false;
          bool div_ok = false;
          std::string why;
          try {
            div_ok = verify_divisibility(g, p, r, bc, o).ok();
          } catch (const Error& e) {
            why = std::string(": ") + e.what();
          }
          t.check(div_ok, "divisibility " + where(g, r, bc) + why);
          PreservationReport pr = preservation_check(g, p, bc, r);
          t.check(pr.marginal_equal && (!pr.influence_defined || (pr.influence_equal && pr.covariance_equal)),
                  "preservation " + where(g, r, bc));
          ConditionedSawTree ct = build_conditioned_saw(g, r, bc);
          TreeExact te = tree_exact(ct.tree, p);
          if (te.root_marginal > 0 && te.root_marginal < 1) {
            TreeRatios tr = tree_log_ratios(ct.tree, p);
            auto I = tree_influences(ct.tree, tr, p);
            double dev = 0;
            for (std::size_t v = 0; v < ct.tree.size(); ++v)
              if (!ct.tree.nodes[v].fixed_spin)
                dev = std::max(dev, std::abs(I[v] - to_double(te.influence[v])));
            t.check(dev <= 1e-9, "tree influence " + where(g, r, bc));
            t.check(ratios_in_J(tr, ct.tree, p), "log-ratio interval " + where(g, r, bc));
          }
        }
      }
    }
  // certificates and the spectral chain on the reference systems
  struct Ref {
    const char* name;
    ScalarParams sp;
    Rat b, g, l;
  };
  std::vector<Ref> refs{{"hardcore lambda=2", {0, 1, 2}, 0, 1, 2},
                        {"ising beta=gamma=1/2", {0.5, 0.5, 1}, Rat(1, 2), Rat(1, 2), 1}};
  for (const auto& ref : refs) {
    CertifyOptions o;
    o.contraction.multistarts = 16;
    PotentialCertificate cert = certify(ref.sp, 3, o);
    t.check(cert.passed(), std::string("certificate ") + ref.name);
    for (int n = 2; n <= nmax; ++n)
      for (const Graph& g : connected_graphs_up_to_iso(n)) {
        if (g.max_degree() > 3) continue;
        EndToEndReport e = end_to_end_check(g, SpinParams::uniform(n, ref.b, ref.g, ref.l), cert);
        t.check(e.ok() && e.eta_within_q, std::string("end-to-end ") + ref.name + " " + graph_to_json(g).dump());
      }
  }
  json j{{"kind", "verify-all"}, {"suite", suite}, {"seed", seed}, {"checks", t.checks},
         {"failures", t.failures}, {"status", t.failures.empty() ? "ok" : "fail"}};
  emit(j, c.out);
  if (!t.failures.empty()) throw CheckFailed{j, c.out.empty()};
}

void cmd_render(const std::string& report, const std::string& format, const std::string& out,
                bool dry_run) {
  ReportFormat f = parse_report_format(format);
  json j = read_json_file(report);
  if (dry_run) return emit(dry_ok("render"), "");
  emit_text(report_render(j, f), out);
}

// config: {"command": "...", "args": {"flag": value, ...}}; true booleans become bare flags
std::vector<std::string> config_argv(const std::string& path) {
  json cfg = read_json_file(path);
  if (!cfg.is_object() || !cfg.contains("command") || !cfg["command"].is_string())
    throw Error(ErrorKind::MalformedInput, "config needs a string field 'command'");
  std::vector<std::string> argv{"spinlab", cfg["command"].get<std::string>()};
  if (argv[1] == "run") throw Error(ErrorKind::MalformedInput, "config may not nest 'run'");
  const json args = cfg.value("args", json::object());
  if (!args.is_object()) throw Error(ErrorKind::MalformedInput, "config 'args' must be an object");
  for (auto& [k, v] : args.items()) {
    if (v.is_boolean()) {
      if (v.get<bool>()) argv.push_back("--" + k);
    } else {
      argv.push_back("--" + k);
      argv.push_back(v.is_string() ? v.get<std::string>() : v.dump());
    }
  }
  return argv;
}

int run(std::vector<std::string> args);

int dispatch(CLI::App& app, std::vector<std::string>& args) {
  std::vector<const char*> argv;
  for (auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }
  return -1;
}

int run(std::vector<std::string> args) {
  CLI::App app{"spinlab: exact and analytic checks for 2-spin systems"};
  app.require_subcommand(1);
  Common c;
  auto add_common = [&](CLI::App* s, bool graph, bool params) {
    if (graph) s->add_option("--graph", c.graph, "graph file (JSON or edge list) or gen:KIND:ARGS")->required();
    if (params) s->add_option("--params", c.params, "params JSON with p/q rationals");
    s->add_option("--out", c.out, "output path (stdout if omitted)");
    s->add_flag("--dry-run", c.dry_run, "validate inputs only");
  };

  std::string csv, dot, potential = "lly", suite = "small", report, format = "csv", config;
  int root = 0, levels = 8, Delta = 0;
  double budget = 2e5;
  int lines = 3;
  long steps = 100, reps = 10000;
  std::uint64_t seed = 1;
  bool exact_flag = false, simulate = false;
  CertifyArgs ca;

  auto* ex = app.add_subcommand("exact", "partition function, marginals and influences");
  add_common(ex, true, true);
  ex->add_option("--boundary", c.boundary);
  ex->add_option("--csv", csv, "write the influence matrix as CSV");

  auto* dv = app.add_subcommand("divcheck", "check that Z_G divides Z_T");
  add_common(dv, true, true);
  dv->add_option("--root", root)->required();
  dv->add_option("--boundary", c.boundary);
  dv->add_option("--budget", budget, "largest degree box expanded in full");
  dv->add_option("--lines", lines, "random lines per variable above the budget");
  dv->add_option("--seed", seed);

  auto* sw = app.add_subcommand("saw", "build the conditioned SAW tree");
  add_common(sw, true, false);
  sw->add_option("--root", root)->required();
  sw->add_option("--boundary", c.boundary);
  sw->add_option("--dot", dot, "write a DOT rendering");

  auto* dc = app.add_subcommand("decay", "level-wise influence sums and their bounds");
  add_common(dc, true, true);
  dc->add_option("--root", root)->required();
  dc->add_option("--boundary", c.boundary);
  dc->add_option("--potential", potential, "lly | identity | gl18");
  dc->add_option("--levels", levels);
  dc->add_option("--Delta", Delta, "degree bound for the contraction factor");

  auto* ce = app.add_subcommand("certify", "pick a potential and certify (alpha, c)");
  ce->add_option("--out", c.out);
  ce->add_flag("--dry-run", c.dry_run);
  ce->add_option("--params", c.params);
  ce->add_option("--beta", ca.beta);
  ce->add_option("--gamma", ca.gamma);
  ce->add_option("--lambda", ca.lambda);
  ce->add_option("--Delta,--delta-max", ca.Delta, "maximum degree");
  ce->add_option("--mode", ca.mode, "auto | boundedness | general");
  ce->add_option("--potential", ca.potential, "auto | lly | identity | gl18");
  ce->add_option("--preset", ca.preset, "hardcore | ising");
  ce->add_option("--delta", ca.delta, "parameter gap for presets");
  ce->add_option("--gl18-alpha", ca.gl18_alpha, "GL18 interpolation constant in (0, 1]");
  ce->add_option("--grid", ca.grid);
  ce->add_option("--multistarts", ca.multistarts);
  ce->add_option("--seed", ca.seed);

  auto* mx = app.add_subcommand("mix", "Glauber spectral analysis or simulation");
  add_common(mx, true, true);
  mx->add_option("--boundary", c.boundary);
  auto* fe = mx->add_flag("--exact", exact_flag, "exact spectral report (default)");
  auto* fs = mx->add_flag("--simulate", simulate, "empirical TV trace");
  fe->excludes(fs);
  mx->add_option("--steps", steps);
  mx->add_option("--reps", reps);
  mx->add_option("--seed", seed);
  mx->add_option("--csv", csv, "trace CSV");

  auto* va = app.add_subcommand("verify-all", "property suite over small graphs");
  va->add_option("--suite", suite, "small | medium");
  va->add_option("--seed", seed);
  va->add_option("--out", c.out);
  va->add_flag("--dry-run", c.dry_run);

  auto* rd = app.add_subcommand("render", "render a report as CSV or Markdown");
  rd->add_option("--report", report)->required();
  rd->add_option("--format", format, "csv | md");
  rd->add_option("--out", c.out);
  rd->add_flag("--dry-run", c.dry_run);

  auto* rn = app.add_subcommand("run", "run a JSON experiment config");
  rn->add_option("--config", config)->required();

  int code = dispatch(app, args);
  if (code >= 0) return code;

  if (*rn) return run(config_argv(config));
  if (*ex) cmd_exact(c, csv);
  else if (*dv) cmd_divcheck(c, root, budget, lines, seed);
  else if (*sw) cmd_saw(c, root, dot);
  else if (*dc) cmd_decay(c, root, potential, levels, Delta);
  else if (*ce) cmd_certify(c, ca);
  else if (*mx) cmd_mix(c, simulate, steps, reps, seed, csv);
  else if (*va) cmd_verify_all(c, suite, seed);
  else if (*rd) cmd_render(report, format, c.out, c.dry_run);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  if (const char* t = std::getenv("SPINLAB_THREADS")) {
    int k = std::atoi(t);
    if (k > 0) omp_set_num_threads(k);
  }
  std::vector<std::string> args(argv, argv + argc);
  try {
    return run(args);
  } catch (const CheckFailed& f) {
    if (!f.printed) {
      json rec = f.record;
      if (!rec.contains("status")) rec["status"] = "fail";
      std::cout << rec.dump(2) << "\n";
    }
    return 1;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << error_kind_name(e.kind()) << ": " << e.what() << "\n";
    if (e.kind() == ErrorKind::MalformedInput || e.kind() == ErrorKind::InvalidParams) return 2;
    std::cout << json{{"status", "fail"}, {"error_kind", error_kind_name(e.kind())}, {"error", e.what()}}.dump(2)
              << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
