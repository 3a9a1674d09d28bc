#include "haantjes/transform.hpp"

#include <algorithm>
#include <cmath>

#include "haantjes/error.hpp"
#include "haantjes/phasespace.hpp"

namespace haantjes {

namespace {

std::vector<double> eval_all(std::span<const Expression> es, std::span<const double> x) {
  std::vector<double> out;
  out.reserve(es.size());
  for (const auto& e : es) out.push_back(eval(e, x));
  return out;
}

double inf_norm(std::span<const double> v) {
  double m = 0.0;
  for (double a : v) m = std::max(m, std::abs(a));
  return m;
}

double round_trip(std::span<const Expression> there, std::span<const Expression> back,
                  std::span<const double> x) {
  const auto y = eval_all(there, x);
  const auto z = eval_all(back, y);
  double m = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) m = std::max(m, std::abs(z[i] - x[i]));
  return m / (1.0 + inf_norm(x));
}

Eigen::MatrixXd poisson_tensor(int n) { return SymplecticMatrix(n).inverse(); }

}  // namespace

ChartMap::ChartMap(std::vector<Expression> fwd, std::vector<Expression> inv)
    : forward(std::move(fwd)), inverse(std::move(inv)) {
  if (forward.empty() || inverse.empty()) throw ShapeError("chart map needs both directions");
  source = forward.front().chart();
  target = inverse.front().chart();
  if (static_cast<int>(forward.size()) != source->dim() ||
      static_cast<int>(inverse.size()) != target->dim() || source->dim() != target->dim())
    throw ShapeError("chart map needs " + std::to_string(source->dim()) +
                     " expressions in each direction");
  for (const auto& e : forward)
    if (!(*e.chart() == *source)) throw ShapeError("forward map expressions must share one chart");
  for (const auto& e : inverse)
    if (!(*e.chart() == *target)) throw ShapeError("inverse map expressions must share one chart");
}

std::vector<double> ChartMap::to_target(std::span<const double> x_old) const {
  return eval_all(forward, x_old);
}

std::vector<double> ChartMap::to_source(std::span<const double> x_new) const {
  return eval_all(inverse, x_new);
}

Eigen::MatrixXd ChartMap::jacobian(std::span<const double> x_old) const {
  const int d = source->dim();
  Eigen::MatrixXd j(d, d);
  for (int i = 0; i < d; ++i) {
    const auto g = jet1(forward[i], x_old).gradient;
    for (int k = 0; k < d; ++k) j(i, k) = g[k];
  }
  return j;
}

Expression ChartMap::push_function(const Expression& f) const { return substitute(f, inverse); }

Expression ChartMap::pull_function(const Expression& g) const { return substitute(g, forward); }

ChartMap ChartMap::then(const ChartMap& next) const {
  if (!(*target == *next.source)) throw ShapeError("chart maps do not compose");
  std::vector<Expression> fwd, inv;
  for (const auto& e : next.forward) fwd.push_back(substitute(e, forward));
  for (const auto& e : inverse) inv.push_back(substitute(e, next.inverse));
  return ChartMap(std::move(fwd), std::move(inv));
}

VerificationReport canonicity_check(const ChartMap& map, const SampleSet& samples, double tol) {
  VerificationReport report("canonical transformation");
  const int n = map.source->n();
  const Chart& t = *map.target;

  CheckBuilder trip("inverse consistency", "inverse(forward(x)) = x and forward(inverse(y)) = y",
                    tol, samples.seed);
  for (const auto& x : samples.points) {
    trip.count_sample();
    try {
      const auto y = map.to_target(x);
      trip.observe(std::max(round_trip(map.forward, map.inverse, x),
                            round_trip(map.inverse, map.forward, y)),
                   x);
    } catch (const EvalError& err) {
      trip.fail(err.what(), x);
    }
  }
  report.add(trip.finish());

  CheckBuilder br("canonical brackets", "{Q^a, P_b} = delta, {Q, Q} = {P, P} = 0", tol,
                  samples.seed);
  const Eigen::MatrixXd p = poisson_tensor(n);
  for (const auto& x : samples.points) {
    br.count_sample();
    try {
      const Eigen::MatrixXd j = map.jacobian(x);
      const Eigen::MatrixXd pi = j * p * j.transpose();
      const double scale = 1.0 + j.rowwise().squaredNorm().maxCoeff();
      Eigen::Index r = 0, c = 0;
      const Eigen::MatrixXd diff = (pi - p).triangularView<Eigen::Upper>();
      const double worst = diff.cwiseAbs().maxCoeff(&r, &c);
      if (worst / scale > tol)
        br.note("{" + t.name(static_cast<int>(r)) + ", " + t.name(static_cast<int>(c)) +
                "} = " + format_double(pi(r, c)) + " (expected " + format_double(p(r, c)) + ")");
      br.observe(worst / scale, x);
    } catch (const EvalError& err) {
      br.fail(err.what(), x);
    }
  }
  report.add(br.finish());
  return report;
}

Eigen::MatrixXd pushforward_operator(const OperatorField& a, const ChartMap& map,
                                     std::span<const double> x_new) {
  if (!(*a.chart() == *map.source)) throw ShapeError("operator does not live on the map's source chart");
  const auto x_old = map.to_source(x_new);
  const Eigen::MatrixXd j = map.jacobian(x_old);
  Eigen::FullPivLU<Eigen::MatrixXd> lu(j);
  if (!lu.isInvertible()) throw EvalError("Jacobian of the chart map is singular");
  return j * a.value(x_old) * lu.inverse();
}

BlockDecomposition block_check(const Eigen::MatrixXd& k, const Chart& chart, double tol) {
  const int n = chart.n();
  if (k.rows() != chart.dim() || k.cols() != chart.dim())
    throw ShapeError("matrix does not match the chart dimension");
  BlockDecomposition out;
  for (int a = 0; a < chart.block_count(); ++a) {
    const auto [lo, hi] = chart.block_range(a);
    const int s = hi - lo;
    BlockMatrices m{k.block(lo, lo, s, s), k.block(lo, n + lo, s, s), k.block(n + lo, lo, s, s),
                    k.block(n + lo, n + lo, s, s)};
    for (const auto* b : {&m.a, &m.b, &m.c, &m.d})
      out.scale = std::max(out.scale, b->cwiseAbs().maxCoeff());
    out.compatibility = std::max({out.compatibility, (m.d.transpose() - m.a).cwiseAbs().maxCoeff(),
                                  (m.b + m.b.transpose()).cwiseAbs().maxCoeff(),
                                  (m.c + m.c.transpose()).cwiseAbs().maxCoeff()});
    out.blocks.push_back(std::move(m));
  }
  double off = 0.0;
  for (int i = 0; i < chart.dim(); ++i)
    for (int j = 0; j < chart.dim(); ++j)
      if (chart.block_of(i) != chart.block_of(j)) off = std::max(off, std::abs(k(i, j)));
  out.off_block = off / (1.0 + out.scale);
  if (out.off_block > tol)
    out.violations.push_back("off-block entries up to " + format_double(off));
  if (out.compatibility > tol * (1.0 + out.scale))
    out.violations.push_back("block compatibility residual " + format_double(out.compatibility));
  return out;
}

BlockCommutation block_commutation(const BlockDecomposition& ka, const BlockDecomposition& kb) {
  if (ka.blocks.size() != kb.blocks.size()) throw ShapeError("block partitions differ");
  BlockCommutation r;
  r.scale = 1.0 + ka.scale * kb.scale;
  auto sym = [](const Eigen::MatrixXd& m) { return (m + m.transpose()).cwiseAbs().maxCoeff(); };
  for (std::size_t i = 0; i < ka.blocks.size(); ++i) {
    const auto& x = ka.blocks[i];
    const auto& y = kb.blocks[i];
    const Eigen::MatrixXd ab = x.a * y.b - y.a * x.b;
    const Eigen::MatrixXd ca = x.c * y.a - y.c * x.a;
    r.aa = std::max(r.aa, (x.a * y.a - y.a * x.a + x.b * y.c - y.b * x.c).cwiseAbs().maxCoeff());
    r.ab = std::max(r.ab, (ab + x.b * y.a.transpose() - y.b * x.a.transpose()).cwiseAbs().maxCoeff());
    r.ca = std::max(r.ca, (ca + x.a.transpose() * y.c - y.a.transpose() * x.c).cwiseAbs().maxCoeff());
    r.ab_skew = std::max(r.ab_skew, sym(ab));
    r.ca_skew = std::max(r.ca_skew, sym(ca));
  }
  return r;
}

VerificationReport block_commutation_check(std::span<const OperatorField> ops,
                                           std::span<const std::string> names,
                                           const ChartMap& map, const SampleSet& target_samples,
                                           double tol) {
  const std::size_t m = ops.size();
  if (names.size() != m) throw ShapeError("one name per operator required");
  VerificationReport report("block structure");
  const Chart& chart = *map.target;
  std::vector<CheckBuilder> form, rel, skew;
  for (std::size_t i = 0; i < m; ++i)
    form.emplace_back("block form " + names[i], "off-block zero, D^T = A, B, C skew", tol,
                      target_samples.seed);
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i + 1; j < m; ++j) {
      const std::string label = "{" + names[i] + "," + names[j] + "}";
      pairs.emplace_back(i, j);
      rel.emplace_back("block relations " + label, "AA, AB and CA relations of an Abelian pair",
                       tol, target_samples.seed);
      skew.emplace_back("skew products " + label, "A^a B^b - A^b B^a and C^a A^b - C^b A^a skew",
                        tol, target_samples.seed);
    }
  for (const auto& x : target_samples.points) {
    std::vector<BlockDecomposition> dec;
    try {
      for (std::size_t i = 0; i < m; ++i) {
        dec.push_back(block_check(pushforward_operator(ops[i], map, x), chart, tol));
        form[i].count_sample();
        for (const auto& v : dec.back().violations) form[i].note(v);
        form[i].observe(std::max(dec.back().off_block,
                                 dec.back().compatibility / (1.0 + dec.back().scale)),
                        x);
      }
    } catch (const EvalError& err) {
      for (auto& b : form) b.fail(err.what(), x);
      continue;
    }
    for (std::size_t p = 0; p < pairs.size(); ++p) {
      const auto r = block_commutation(dec[pairs[p].first], dec[pairs[p].second]);
      rel[p].count_sample();
      skew[p].count_sample();
      rel[p].observe(std::max({r.aa, r.ab, r.ca}) / r.scale, x);
      skew[p].observe(std::max(r.ab_skew, r.ca_skew) / r.scale, x);
    }
  }
  for (auto& b : form) report.add(b.finish());
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    report.add(rel[p].finish());
    report.add(skew[p].finish());
  }
  return report;
}

FlowResult flow_conserve(const Expression& h, std::span<const Expression> invariants,
                         std::span<const double> x0, double t_end, double dt, double newton_tol) {
  if (!(dt > 0.0) || t_end < dt) throw ShapeError("flow needs dt > 0 and T >= dt");
  const int d = h.chart()->dim();
  if (static_cast<int>(x0.size()) != d) throw ShapeError("initial point has the wrong dimension");
  const Eigen::MatrixXd p = poisson_tensor(h.chart()->n());
  const int steps = static_cast<int>(std::llround(t_end / dt));

  FlowResult out;
  out.steps = steps;
  const auto start = eval_all(invariants, x0);
  out.drift.assign(invariants.size(), 0.0);
  Eigen::VectorXd x = Eigen::Map<const Eigen::VectorXd>(x0.data(), d);
  std::vector<double> buf(d);

  auto field = [&](const Eigen::VectorXd& y, Eigen::MatrixXd* jac) {
    for (int i = 0; i < d; ++i) buf[i] = y(i);
    const Jet2 j = jet2(h, buf);
    const Eigen::VectorXd g = Eigen::Map<const Eigen::VectorXd>(j.gradient.data(), d);
    if (jac) *jac = p * Eigen::Map<const Eigen::MatrixXd>(j.hessian_matrix().data(), d, d);
    return Eigen::VectorXd(p * g);
  };

  for (int s = 0; s < steps; ++s) {
    Eigen::VectorXd y = x + dt * field(x, nullptr);
    bool converged = false;
    Eigen::MatrixXd df;
    for (int it = 0; it < 50; ++it) {
      const Eigen::VectorXd mid = 0.5 * (x + y);
      const Eigen::VectorXd res = y - x - dt * field(mid, &df);
      const Eigen::MatrixXd jac = Eigen::MatrixXd::Identity(d, d) - 0.5 * dt * df;
      const Eigen::VectorXd delta = jac.partialPivLu().solve(res);
      y -= delta;
      if (!delta.allFinite()) break;
      if (delta.lpNorm<Eigen::Infinity>() <= newton_tol * (1.0 + y.lpNorm<Eigen::Infinity>())) {
        converged = true;
        break;
      }
    }
    if (!converged)
      throw Error("implicit midpoint Newton iteration did not converge at step " +
                  std::to_string(s + 1));
    x = y;
    for (int i = 0; i < d; ++i) buf[i] = x(i);
    for (std::size_t k = 0; k < invariants.size(); ++k)
      out.drift[k] = std::max(out.drift[k], std::abs(eval(invariants[k], buf) - start[k]));
  }
  out.final_point.assign(x.data(), x.data() + d);
  return out;
}

}  // namespace haantjes
