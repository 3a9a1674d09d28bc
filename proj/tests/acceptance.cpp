// One line per acceptance criterion; exit status 0 only when all pass.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <optional>
#include <random>
#include <sstream>
#include <string>

#include <json.hpp>

#include "cli.hpp"
#include "haantjes/algebra.hpp"
#include "haantjes/chains.hpp"
#include "haantjes/error.hpp"
#include "haantjes/phasespace.hpp"
#include "haantjes/polynomial.hpp"
#include "haantjes/stackel.hpp"
#include "haantjes/transform.hpp"
#include "models.hpp"
#include "oracles.hpp"
#include "random_stackel.hpp"

using namespace haantjes;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

// Collects sub-results of one criterion.
struct Tally {
  bool pass = true;
  std::ostringstream text;

  void item(const std::string& what, bool ok, double value = NAN) {
    pass = pass && ok;
    if (text.tellp() > 0) text << "; ";
    text << what;
    if (!std::isnan(value)) text << " " << format_short(value);
    if (!ok) text << " [FAIL]";
  }
  void report(const std::string& what, const VerificationReport& r) {
    item(what, r.passed(), r.max_residual());
  }
  static std::string format_short(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
  }
  Outcome done() { return {pass, text.str()}; }
};

SampleSet sampled(const ChartPtr& c, std::vector<Expression> guards, int count,
                  double guard_min = 0.1, std::uint64_t seed = kDefaultSeed) {
  SampleConfig cfg;
  cfg.count = count;
  cfg.guard_min = guard_min;
  cfg.seed = seed;
  return admissible_samples(*c, cfg, guards);
}

SampleSet raw_samples(const ChartPtr& raw, int count) {
  return sampled(raw, {parse("p1 + p3", raw)}, count);
}

SampleSet dh_samples(const ChartPtr& dh, int count) { return sampled(dh, {parse("p1", dh)}, count); }

Outcome torsion_suite() {
  Tally t;
  auto raw = models::raw_chart();
  const auto s = raw_samples(raw, 64);
  t.report("Haantjes torsion L2 max", torsion_check(models::raw_L2(raw), TorsionKind::Haantjes, s, 1e-9, "L2"));
  const auto l3 = models::raw_L3(raw);
  double worst = 0;
  for (const auto& x : s.points) worst = std::max(worst, nijenhuis_torsion(l3, x).max_abs());
  t.item("Nijenhuis torsion L3 max", worst == 0.0, worst);
  return t.done();
}

Outcome spectral_suite() {
  Tally t;
  auto raw = models::raw_chart();
  const auto s = raw_samples(raw, 16);
  const auto l2 = models::raw_L2(raw), l3 = models::raw_L3(raw);
  const std::vector<EigenCandidate> cands{{parse("1/(4*(p1 + p3))", raw), 4, 2},
                                          {constant(raw, 0), 2, 1}};
  t.report("L2 eigenvalues, Riesz (2,1), min poly degree 3",
           eigenvalue_check(l2, cands, s, 1e-8, 3));
  bool l2_defective = true, l3_semisimple = true;
  for (const auto& x : s.points) {
    l2_defective = l2_defective && !semisimple_at(l2, x);
    l3_semisimple = l3_semisimple && semisimple_at(l3, x);
  }
  t.item("semisimple(L2)=false", l2_defective);
  t.item("semisimple(L3)=true", l3_semisimple);
  return t.done();
}

Outcome chain_suite() {
  Tally t;
  auto raw = models::raw_chart();
  const auto h = models::raw_hamiltonians(raw);
  const auto s = raw_samples(raw, 64);
  t.report("L2: H1->H2", chain_verify(models::raw_L2(raw), h[0], h[1], s, 1e-9));
  t.report("L3: H1->H3", chain_verify(models::raw_L3(raw), h[0], h[2], s, 1e-9));
  auto c = models::stackel_chart();
  const auto g = models::stackel_hamiltonians(c);
  const auto sc = sampled(c, {parse("q1*q2", c), parse("q3", c), parse("q4", c)}, 64, 1e-3);
  t.report("K1: H2->H1", chain_verify(models::stackel_K1(c), g[1], g[0], sc, 1e-9));
  t.report("K3: H2->H3", chain_verify(models::stackel_K3(c), g[1], g[2], sc, 1e-9));
  return t.done();
}

Outcome transform_suite() {
  Tally t;
  auto raw = models::raw_chart(), dh = models::dh_chart();
  const auto map = models::raw_to_dh(raw, dh);
  t.report("canonicity", canonicity_check(map, raw_samples(raw, 64), 1e-9));

  const auto hraw = models::raw_hamiltonians(raw), hdh = models::dh_hamiltonians(dh);
  const auto s = dh_samples(dh, 64);
  double worst = 0;
  for (int a = 0; a < 3; ++a) {
    const Expression pushed = map.push_function(hraw[a]);
    for (const auto& y : s.points) {
      const double want = eval(hdh[a], y);
      worst = std::max(worst, std::abs(eval(pushed, y) - want) / (1 + std::abs(want)));
    }
  }
  t.item("Hamiltonians", worst <= 1e-10, worst);
  const std::vector<double> x{0, 0, 0, 1, 0, 1};
  const auto y = map.to_target(x);
  t.item("(0,0,0,1,0,1) -> (8,2,0)",
         eval(hdh[0], y) == 8.0 && eval(hdh[1], y) == 2.0 && eval(hdh[2], y) == 0.0);

  const auto l2 = models::raw_L2(raw), l3 = models::raw_L3(raw);
  double mat = 0;
  for (const auto& p : s.points) {
    const auto e2 = models::printed_in_chart_order(models::printed_dh_L2(), dh, "1/(4*p1^2)", p);
    const auto e3 = models::printed_in_chart_order(models::printed_dh_L3(), dh, "1/2", p);
    mat = std::max(mat, (pushforward_operator(l2, map, p) - e2).cwiseAbs().maxCoeff());
    mat = std::max(mat, (pushforward_operator(l3, map, p) - e3).cwiseAbs().maxCoeff());
  }
  t.item("reference block matrices", mat <= 1e-9, mat);

  std::vector<OperatorField> ops{l2, l3};
  std::vector<std::string> names{"L2", "L3"};
  t.report("block relations and skewness", block_commutation_check(ops, names, map, s, 1e-9));
  return t.done();
}

Outcome involution_suite() {
  Tally t;
  auto dh = models::dh_chart();
  const auto hdh = models::dh_hamiltonians(dh);
  t.report("P-involution (2,1)", p_involution_check(hdh, dh_samples(dh, 64), 1e-9));
  auto raw = models::raw_chart();
  const auto raw_t = t_involution_check(models::raw_hamiltonians(raw), raw_samples(raw, 64), 1e-9);
  t.item("T-involution raw chart fails", !raw_t.passed(), raw_t.max_residual());
  auto c = models::stackel_chart();
  const auto sc = sampled(c, {parse("q1*q2", c), parse("q3", c), parse("q4", c)}, 64, 1e-3);
  t.report("T-involution constructed system", t_involution_check(models::stackel_hamiltonians(c), sc, 1e-9));
  return t.done();
}

Outcome stackel_suite() {
  Tally t;
  std::mt19937_64 rng(20250101);
  const std::vector<std::vector<int>> layouts{{2, 1}, {1, 2}, {2, 1, 1}, {1, 2, 1}, {1, 1, 2}};
  int built = 0, rejected = 0, failed = 0;
  double worst = 0;
  std::string first_failure;
  while (built < 50) {
    const auto& blocks = layouts[static_cast<std::size_t>(built + rejected) % layouts.size()];
    const auto spec = models::random_spec(rng, blocks);
    if (identically_zero(determinant(spec.matrix))) {
      ++rejected;
      continue;
    }
    std::optional<StackelSystem> sys;
    for (int g = 1; g <= spec.m() && !sys; ++g) {
      try {
        sys = build_system(spec, g);
      } catch (const ConstructionError&) {
      }
    }
    if (!sys) {
      ++rejected;
      continue;
    }
    SampleSet s;
    try {
      s = sampled(spec.chart, sys->guards(), 64, 1e-3, 1000 + built);
    } catch (const Error&) {
      ++rejected;  // |det S| (or a generator cofactor) too small almost everywhere
      continue;
    }
    const auto r = verify_system(spec, *sys, s, 1e-9, 1e-10);
    worst = std::max(worst, r.max_residual());
    if (!r.passed()) {
      ++failed;
      if (first_failure.empty()) first_failure = r.summary();
    }
    ++built;
  }
  t.item(std::to_string(built) + " specs (" + std::to_string(rejected) + " redrawn), failures " +
             std::to_string(failed) + ", max residual",
         failed == 0, worst);
  if (!first_failure.empty()) std::fprintf(stderr, "%s\n", first_failure.c_str());
  return t.done();
}

Outcome oracle_suite() {
  Tally t;
  std::mt19937_64 rng(3);
  double fd_worst = 0;
  for (int trial = 0; trial < 20; ++trial) {
    auto c = make_chart({1 + trial % 2});
    const auto a = oracles::random_operator(rng, c);
    const auto x = oracles::random_point(rng, c->dim());
    const auto ad = nijenhuis_torsion(a, x);
    const auto fd = oracles::nijenhuis_fd(a, x, 1e-5);
    const double scale = std::max(1.0, ad.max_abs());
    for (std::size_t i = 0; i < ad.data().size(); ++i)
      fd_worst = std::max(fd_worst, std::abs(ad.data()[i] - fd.data()[i]) / scale);
  }
  t.item("AD vs central differences, 20 operators", fd_worst <= 1e-5, fd_worst);

  std::mt19937_64 srng(7);
  int specs = 0;
  double cf_worst = 0;
  while (specs < 16) {
    const auto spec = models::random_spec(srng, {2, 1, 1});
    if (identically_zero(determinant(spec.matrix))) continue;
    const auto sys = build_system(spec, 0);
    SampleSet s;
    try {
      s = sampled(spec.chart, sys.guards(), 16, 1e-3, 100 + specs);
    } catch (const Error&) {
      continue;
    }
    for (const auto& x : s.points) {
      const auto ref = oracles::closed_form(spec, x);
      for (int a = 0; a < 3; ++a)
        cf_worst = std::max(cf_worst, std::abs(eval(sys.hamiltonians[a], x) - ref[a]) / (1 + std::abs(ref[a])));
    }
    ++specs;
  }
  t.item("closed forms, 16 (2,1,1) specs", cf_worst <= 1e-10, cf_worst);
  return t.done();
}

Outcome dynamics_suite() {
  Tally t;
  auto raw = models::raw_chart();
  const auto h = models::raw_hamiltonians(raw);
  const std::vector<double> x0{0.1, -0.2, 0.3, 1.0, 0.2, 0.5};
  const auto r = flow_conserve(h[0], h, x0, 10.0, 1e-3);
  t.item("drift H1", r.drift[0] <= 1e-8, r.drift[0]);
  t.item("drift H2", r.drift[1] <= 1e-6, r.drift[1]);
  t.item("drift H3", r.drift[2] <= 1e-6, r.drift[2]);
  t.item("steps " + std::to_string(r.steps), r.steps == 10000);
  return t.done();
}

double cli_residual(const std::string& fixture, int& exit_code) {
  const auto r = cli::run({"symmetry", std::string(FIXTURE_DIR) + "/" + fixture});
  exit_code = r.exit_code;
  if (r.exit_code == 2) return NAN;
  const auto j = nlohmann::json::parse(r.out);
  double worst = 0;
  for (const auto& c : j["report"]["checks"])
    worst = std::max(worst, std::stod(c["max_residual"].get<std::string>()));
  return worst;
}

Outcome symmetry_suite() {
  Tally t;
  int code = 0;
  double v = cli_residual("symmetry_separated.json", code);
  t.item("totally separated", code == 0 && v == 0.0, v);
  v = cli_residual("symmetry_dh.json", code);
  t.item("DH-chart separation relations", code == 0 && v <= 1e-9, v);
  v = cli_residual("symmetry_coupled.json", code);
  t.item("coupled counterexample", code == 1 && v > 1e-3, v);
  return t.done();
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> run;
    double time_limit;  // seconds, 0 for none
  };
  const std::vector<Criterion> all{
      {1, "torsion suite", torsion_suite, 5},
      {2, "spectral suite", spectral_suite, 0},
      {3, "chain suite", chain_suite, 0},
      {4, "transform suite", transform_suite, 0},
      {5, "involution suite", involution_suite, 0},
      {6, "Staeckel property suite", stackel_suite, 60},
      {7, "oracle suite", oracle_suite, 0},
      {8, "dynamics suite", dynamics_suite, 10},
      {9, "symmetry suite", symmetry_suite, 0},
  };
  int failures = 0;
  for (const auto& c : all) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (c.time_limit > 0 && secs >= c.time_limit) {
      o.pass = false;
      o.detail += "; runtime over " + Tally::format_short(c.time_limit) + " s";
    }
    if (!o.pass) ++failures;
    std::printf("criterion %d %-24s %s  (%.2f s) %s\n", c.id, c.name, o.pass ? "PASS" : "FAIL", secs,
                o.detail.c_str());
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(all.size()) - failures, all.size());
  return failures == 0 ? 0 : 1;
}
