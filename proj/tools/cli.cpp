#include "cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>

#include "haantjes/chains.hpp"
#include "haantjes/model.hpp"
#include "haantjes/phasespace.hpp"
#include "haantjes/polynomial.hpp"

#ifndef HAANTJES_VERSION
#define HAANTJES_VERSION "0.0.0"
#endif

namespace haantjes::cli {

namespace {

using json = nlohmann::ordered_json;

struct Common {
  std::string model_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> samples;
  std::optional<double> tol;
  std::string json_out;
};

struct Context {
  Model model;
  std::string hash;
  SampleConfig cfg;
  double tol = 1e-9;

  SampleSet samples(std::vector<Expression> extra = {}) const {
    std::vector<Expression> guards = model.guards;
    for (auto& g : extra) guards.push_back(std::move(g));
    return admissible_samples(*model.chart, cfg, guards);
  }
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ModelError("cannot open model file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Context load(const Common& c, const char* env_seed) {
  const std::string text = read_file(c.model_path);
  Context ctx{load_model(text), content_hash(text), {}, 1e-9};
  ctx.cfg = ctx.model.sampling;
  if (c.seed) ctx.cfg.seed = *c.seed;
  if (env_seed && *env_seed) {
    try {
      ctx.cfg.seed = std::stoull(env_seed);
    } catch (const std::exception&) {
      throw ModelError(std::string("HAANTJES_SEED is not an unsigned integer: '") + env_seed + "'");
    }
  }
  if (c.samples) {
    if (*c.samples <= 0) throw ModelError("--samples must be positive");
    ctx.cfg.count = *c.samples;
  }
  ctx.tol = c.tol ? *c.tol : ctx.model.tolerance;
  return ctx;
}

json envelope(const std::string& command, const Context& ctx, const VerificationReport& report) {
  json j;
  j["tool"] = "haantjes-kit";
  j["version"] = HAANTJES_VERSION;
  j["command"] = command;
  j["model"] = ctx.model.name;
  j["model_hash"] = ctx.hash;
  j["seed"] = ctx.cfg.seed;
  j["samples"] = ctx.cfg.count;
  j["tolerance"] = format_double(ctx.tol);
  j["report"] = report.to_json();
  return j;
}

// Relative comparison of two functions at samples.
CheckResult agree(const std::string& name, const std::string& anchor,
                  const std::function<double(std::span<const double>)>& got,
                  const std::function<double(std::span<const double>)>& want,
                  const SampleSet& s, double tol) {
  CheckBuilder b(name, anchor, tol, s.seed);
  for (const auto& x : s.points) {
    b.count_sample();
    try {
      const double w = want(x);
      b.observe(std::abs(got(x) - w) / (1.0 + std::abs(w)), x);
    } catch (const EvalError& e) {
      b.fail(e.what(), x);
    }
  }
  return b.finish();
}

CheckResult matrices_agree(const std::string& name, const std::string& anchor,
                           const std::function<Eigen::MatrixXd(std::span<const double>)>& got,
                           const std::function<Eigen::MatrixXd(std::span<const double>)>& want,
                           const SampleSet& s, double tol) {
  CheckBuilder b(name, anchor, tol, s.seed);
  for (const auto& x : s.points) {
    b.count_sample();
    try {
      const Eigen::MatrixXd w = want(x);
      b.observe((got(x) - w).cwiseAbs().maxCoeff() / (1.0 + w.cwiseAbs().maxCoeff()), x);
    } catch (const EvalError& e) {
      b.fail(e.what(), x);
    }
  }
  return b.finish();
}

const StackelDecl& stackel_of(const Model& m) {
  if (!m.stackel) throw ModelError("model has no 'stackel' section");
  return *m.stackel;
}

json system_json(const StackelDecl& d, const StackelSystem& sys) {
  json j;
  j["generator"] = sys.generator;
  j["det"] = print(sys.det);
  json hs = json::object();
  for (std::size_t a = 0; a < sys.hamiltonians.size(); ++a) hs[d.names[a]] = print(sys.hamiltonians[a]);
  j["hamiltonians"] = std::move(hs);
  json ops = json::object();
  for (std::size_t a = 0; a < sys.operators.size(); ++a)
    ops["K" + std::to_string(a + 1)] = operator_json(sys.operators[a]);
  j["operators"] = std::move(ops);
  return j;
}

VerificationReport cmd_torsion(const Context& ctx, const std::vector<std::string>& ops,
                               const std::string& kind) {
  const auto& m = ctx.model;
  std::vector<std::string> names = ops;
  if (names.empty())
    for (const auto& [n, op] : m.operators) names.push_back(n);
  if (names.empty()) throw ModelError("model declares no operators");
  const auto s = ctx.samples();
  VerificationReport report("torsion");
  for (const auto& n : names) {
    const OperatorField op = m.operator_named(n);
    if (kind != "haantjes") report.merge(torsion_check(op, TorsionKind::Nijenhuis, s, ctx.tol, n));
    if (kind != "nijenhuis") report.merge(torsion_check(op, TorsionKind::Haantjes, s, ctx.tol, n));
  }
  return report;
}

VerificationReport cmd_algebra(const Context& ctx, const std::string& which) {
  const auto& m = ctx.model;
  if (m.algebras.empty()) throw ModelError("model declares no algebras");
  const auto s = ctx.samples();
  VerificationReport report("algebra");
  bool found = false;
  for (const auto& [name, members] : m.algebras) {
    if (!which.empty() && name != which) continue;
    found = true;
    std::vector<OperatorField> basis;
    for (const auto& n : members) basis.push_back(m.operator_named(n));
    HaantjesAlgebra alg(m.chart, std::move(basis), members);
    report.merge(verify_algebra(alg, s, 8, ctx.tol));
    report.merge(joint_distribution_check(alg, s));
    for (const auto& e : m.eigenvalues)
      if (std::find(members.begin(), members.end(), e.op) != members.end()) {
        auto r = eigenvalue_check(m.operator_named(e.op), e.candidates, s, 1e-8,
                                  e.minimal_polynomial_degree);
        VerificationReport named("eigenvalues " + e.op);
        for (auto c : r.checks()) {
          c.name = e.op + ": " + c.name;
          named.add(std::move(c));
        }
        report.merge(named);
      }
  }
  if (!found) throw ModelError("unknown algebra '" + which + "'");
  return report;
}

VerificationReport cmd_chain(const Context& ctx) {
  const auto& m = ctx.model;
  if (m.chains.empty()) throw ModelError("model declares no chains");
  const auto s = ctx.samples();
  VerificationReport report("chains");
  for (const auto& c : m.chains)
    report.merge(chain_verify(m.operator_named(c.op), m.hamiltonian(c.from), m.hamiltonian(c.to), s,
                              ctx.tol, c.op + " (" + c.from + " -> " + c.to + ")"));
  return report;
}

VerificationReport cmd_involution(const Context& ctx, const std::string& mode) {
  const auto hs = ctx.model.hamiltonian_list();
  if (hs.size() < 2) throw ModelError("involution needs at least two Hamiltonians");
  const auto s = ctx.samples();
  if (mode == "total") return t_involution_check(hs, s, ctx.tol);
  if (mode == "partial") return p_involution_check(hs, s, ctx.tol);
  return full_involution_check(hs, s, ctx.tol);
}

VerificationReport cmd_stackel_build(const Context& ctx, json& extra) {
  const auto& d = stackel_of(ctx.model);
  const StackelSystem sys = build_system(d.spec, d.generator);
  const auto s = ctx.samples(sys.guards());
  VerificationReport report = validate_spec(d.spec, s, d.det_min);
  extra["system"] = system_json(d, sys);
  return report;
}

VerificationReport cmd_stackel_verify(const Context& ctx, json& extra) {
  const auto& m = ctx.model;
  const auto& d = stackel_of(m);
  const StackelSystem sys = build_system(d.spec, d.generator);
  const auto s = ctx.samples(sys.guards());
  VerificationReport report = validate_spec(d.spec, s, d.det_min);
  report.merge(verify_system(d.spec, sys, s, ctx.tol, 1e-10));
  VerificationReport declared("declared system");
  for (std::size_t a = 0; a < sys.hamiltonians.size(); ++a) {
    const std::string& n = d.names[a];
    bool present = false;
    for (const auto& [hn, he] : m.hamiltonians) present |= hn == n;
    if (!present) continue;
    const Expression& built = sys.hamiltonians[a];
    const Expression& want = m.hamiltonian(n);
    declared.add(agree("built " + n + " = declared " + n, "H = S^{-1} F",
                       [&](auto x) { return eval(built, x); }, [&](auto x) { return eval(want, x); },
                       s, 1e-10));
  }
  for (std::size_t a = 0; a < sys.operators.size(); ++a) {
    const std::string n = "K" + std::to_string(a + 1);
    bool present = false;
    for (const auto& [on, op] : m.operators) present |= on == n;
    if (!present) continue;
    const OperatorField want = m.operator_named(n);
    const OperatorField& built = sys.operators[a];
    declared.add(matrices_agree("built " + n + " = declared " + n, "slot ratios of the adjugate",
                                [&](auto x) { return built.value(x); },
                                [&](auto x) { return want.value(x); }, s, ctx.tol));
  }
  report.merge(declared);
  extra["system"] = system_json(d, sys);
  return report;
}

VerificationReport cmd_se_residuals(const Context& ctx, const std::vector<double>& h,
                                    const std::vector<double>& point) {
  const auto& d = stackel_of(ctx.model);
  VerificationReport report("separation equations");
  CheckBuilder b("f_a - sum_b S_ab h_b = 0", "separation relations on the level set", ctx.tol,
                 ctx.cfg.seed);
  auto scale = [&](std::span<const double> x) {
    double m = 0.0;
    for (const auto& f : d.spec.vector) m = std::max(m, std::abs(eval(f, x)));
    return 1.0 + m;
  };
  auto observe = [&](std::span<const double> x, std::span<const double> hv) {
    b.count_sample();
    double worst = 0.0;
    for (double r : separation_residuals(d.spec, hv, x)) worst = std::max(worst, std::abs(r));
    b.observe(worst / scale(x), x);
  };
  if (!h.empty() || !point.empty()) {
    if (h.empty() || point.empty()) throw ModelError("--levels and --point go together");
    if (static_cast<int>(point.size()) != ctx.model.chart->dim()) throw ModelError("--point has the wrong dimension");
    observe(point, h);
  } else if (!ctx.model.se_points.empty()) {
    for (const auto& p : ctx.model.se_points) observe(p.x, p.h);
  } else {
    const StackelSystem sys = build_system(d.spec, 0);
    for (const auto& x : ctx.samples(sys.guards()).points) {
      std::vector<double> hv;
      for (const auto& e : sys.hamiltonians) hv.push_back(eval(e, x));
      observe(x, hv);
    }
  }
  report.add(b.finish());
  return report;
}

VerificationReport cmd_symmetry(const Context& ctx) {
  if (!ctx.model.symmetry) throw ModelError("model has no 'symmetry' section");
  const auto& d = *ctx.model.symmetry;
  return symmetry_check(d.relations, d.level, d.values, ctx.samples(), ctx.tol);
}

VerificationReport cmd_transform(const Context& ctx, const std::string& which) {
  const auto& m = ctx.model;
  if (m.maps.empty()) throw ModelError("model declares no chart maps");
  VerificationReport report("transform");
  bool found = false;
  for (const auto& d : m.maps) {
    if (!which.empty() && d.name != which) continue;
    found = true;
    const SampleSet target = admissible_samples(*d.map.target, ctx.cfg, d.target_guards);
    SampleSet source{{}, target.seed};
    for (const auto& y : target.points) source.points.push_back(d.map.to_source(y));
    VerificationReport part = canonicity_check(d.map, source, ctx.tol);
    for (const auto& [hn, want] : d.target_hamiltonians) {
      const Expression pushed = d.map.push_function(m.hamiltonian(hn));
      part.add(agree(hn + " in the new chart", "H o inverse = declared expression",
                     [&](auto y) { return eval(pushed, y); }, [&](auto y) { return eval(want, y); },
                     target, 1e-10));
    }
    for (const auto& [on, want] : d.target_operators) {
      const OperatorField op = m.operator_named(on);
      part.add(matrices_agree(on + " in the new chart", "J A J^{-1} = declared matrix",
                              [&](auto y) { return pushforward_operator(op, d.map, y); },
                              [&](auto y) { return want.value(y); }, target, ctx.tol));
    }
    if (!d.block_operators.empty()) {
      std::vector<OperatorField> ops;
      for (const auto& n : d.block_operators) ops.push_back(m.operator_named(n));
      part.merge(block_commutation_check(ops, d.block_operators, d.map, target, ctx.tol));
    }
    VerificationReport named("map " + d.name);
    for (auto c : part.checks()) {
      c.name = d.name + ": " + c.name;
      named.add(std::move(c));
    }
    report.merge(named);
  }
  if (!found) throw ModelError("unknown map '" + which + "'");
  return report;
}

VerificationReport cmd_flow(const Context& ctx, std::optional<double> t_end, std::optional<double> dt,
                            json& extra) {
  if (!ctx.model.flow) throw ModelError("model has no 'flow' section");
  const auto& d = *ctx.model.flow;
  std::vector<Expression> inv;
  for (const auto& [n, e] : d.invariants) inv.push_back(e);
  const double t = t_end.value_or(d.t_end), step = dt.value_or(d.dt);
  const FlowResult r = flow_conserve(d.hamiltonian, inv, d.x0, t, step);
  VerificationReport report("flow");
  for (std::size_t k = 0; k < inv.size(); ++k) {
    CheckBuilder b("drift of " + d.invariants[k].first, "invariant conserved along the flow",
                   d.tolerances[k], 0);
    b.count_sample();
    b.observe(r.drift[k], d.x0);
    report.add(b.finish());
  }
  json f;
  f["T"] = format_double(t);
  f["dt"] = format_double(step);
  f["steps"] = r.steps;
  json fp = json::array();
  for (double v : r.final_point) fp.push_back(format_double(v));
  f["final_point"] = std::move(fp);
  extra["flow"] = std::move(f);
  return report;
}

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("model", c.model_path, "model file (JSON, schema 1)")->required();
  sub->add_option("--seed", c.seed, "sampling seed (HAANTJES_SEED overrides)");
  sub->add_option("--samples", c.samples, "number of admissible sample points");
  sub->add_option("--tol", c.tol, "tolerance for the pass/fail decision");
  sub->add_option("--json", c.json_out, "also write the JSON report to this file");
}

}  // namespace

Result run(const std::vector<std::string>& args, const char* env_seed) {
  Result res;
  std::ostringstream out, err;

  CLI::App app{"Numerical verification of Haantjes structures on Hamiltonian systems",
               "haantjes-kit"};
  app.set_version_flag("--version", std::string(HAANTJES_VERSION));
  app.require_subcommand(1);
  Common common;

  std::vector<std::string> torsion_ops;
  std::string torsion_kind = "haantjes";
  auto* torsion = app.add_subcommand("torsion", "Nijenhuis / Haantjes torsion of model operators");
  torsion->add_option("--op", torsion_ops, "operator name (repeatable; default all)");
  torsion->add_option("--kind", torsion_kind, "nijenhuis, haantjes or both")
      ->check(CLI::IsMember({"nijenhuis", "haantjes", "both"}));
  add_common(torsion, common);

  std::string algebra_name;
  auto* algebra = app.add_subcommand("algebra", "closure, torsion and spectra of declared algebras");
  algebra->add_option("--name", algebra_name, "algebra name (default all)");
  add_common(algebra, common);

  auto* chain = app.add_subcommand("chain", "declared chains dH_to = K^T dH_from");
  add_common(chain, common);

  std::string mode = "full";
  auto* involution = app.add_subcommand("involution", "involution of the model Hamiltonians");
  involution->add_option("--mode", mode, "full, total or partial")
      ->check(CLI::IsMember({"full", "total", "partial"}));
  add_common(involution, common);

  auto* stackel = app.add_subcommand("stackel", "generalized Staeckel systems");
  stackel->require_subcommand(1);
  auto* st_build = stackel->add_subcommand("build", "build H and K from the Staeckel data");
  add_common(st_build, common);
  auto* st_verify = stackel->add_subcommand("verify", "build and verify the system");
  add_common(st_verify, common);

  std::vector<double> se_h, se_point;
  auto* se = app.add_subcommand("se-residuals", "residuals of the separation relations");
  se->add_option("--levels", se_h, "level values h_1..h_m")->delimiter(',');
  se->add_option("--point", se_point, "phase-space point")->delimiter(',');
  add_common(se, common);

  auto* symmetry = app.add_subcommand("symmetry", "symmetry test of the separation relations");
  add_common(symmetry, common);

  std::string map_name;
  auto* transform = app.add_subcommand("transform", "chart maps");
  transform->require_subcommand(1);
  auto* tr_verify = transform->add_subcommand("verify", "canonicity, images and block structure");
  tr_verify->add_option("--map", map_name, "map name (default all)");
  add_common(tr_verify, common);

  std::optional<double> flow_t, flow_dt;
  auto* flow = app.add_subcommand("flow", "conservation along an implicit midpoint flow");
  flow->add_option("--T", flow_t, "integration time");
  flow->add_option("--dt", flow_dt, "step size");
  add_common(flow, common);

  std::vector<std::string> argv_store{"haantjes-kit"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& a : argv_store) argv.push_back(a.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    res.exit_code = app.exit(e, out, err) == 0 ? 0 : 2;
    res.out = out.str();
    res.err = err.str();
    return res;
  }

  std::string command;
  try {
    const Context ctx = load(common, env_seed);
    json extra = json::object();
    VerificationReport report;
    if (torsion->parsed()) {
      command = "torsion";
      report = cmd_torsion(ctx, torsion_ops, torsion_kind);
    } else if (algebra->parsed()) {
      command = "algebra";
      report = cmd_algebra(ctx, algebra_name);
    } else if (chain->parsed()) {
      command = "chain";
      report = cmd_chain(ctx);
    } else if (involution->parsed()) {
      command = "involution " + mode;
      report = cmd_involution(ctx, mode);
    } else if (st_build->parsed()) {
      command = "stackel build";
      report = cmd_stackel_build(ctx, extra);
    } else if (st_verify->parsed()) {
      command = "stackel verify";
      report = cmd_stackel_verify(ctx, extra);
    } else if (se->parsed()) {
      command = "se-residuals";
      report = cmd_se_residuals(ctx, se_h, se_point);
    } else if (symmetry->parsed()) {
      command = "symmetry";
      report = cmd_symmetry(ctx);
    } else if (tr_verify->parsed()) {
      command = "transform verify";
      report = cmd_transform(ctx, map_name);
    } else {
      command = "flow";
      report = cmd_flow(ctx, flow_t, flow_dt, extra);
    }
    json j = envelope(command, ctx, report);
    for (auto& [k, v] : extra.items()) j[k] = v;
    const std::string text = j.dump(2) + "\n";
    out << text;
    if (!common.json_out.empty()) {
      std::ofstream f(common.json_out, std::ios::binary);
      if (!f) throw Error("cannot write '" + common.json_out + "'");
      f << text;
    }
    err << report.summary();
    res.exit_code = report.passed() ? 0 : 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    res.exit_code = 2;
  }
  res.out = out.str();
  res.err = err.str();
  return res;
}

}  // namespace haantjes::cli
