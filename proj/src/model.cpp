#include "haantjes/model.hpp"

#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

namespace haantjes {

namespace {

using json = nlohmann::ordered_json;

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw ModelError(where + ": " + what);
}

const json& require(const json& obj, const char* key, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key)) fail(where, std::string("missing field '") + key + "'");
  return obj.at(key);
}

std::string text_of(const json& v, const std::string& where) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number()) return v.dump();
  fail(where, "expected an expression string");
}

Expression expr(const json& v, const ChartPtr& chart, const std::string& where,
                const std::vector<std::string>& params = {}) {
  try {
    return parse(text_of(v, where), chart, params);
  } catch (const ParseError& e) {
    fail(where, e.what());
  }
}

double number(const json& v, const std::string& where) {
  if (!v.is_number()) fail(where, "expected a number");
  return v.get<double>();
}

int integer(const json& v, const std::string& where) {
  if (!v.is_number_integer()) fail(where, "expected an integer");
  return v.get<int>();
}

std::vector<double> numbers(const json& v, const std::string& where) {
  if (!v.is_array()) fail(where, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(number(v[i], where + "[" + std::to_string(i) + "]"));
  return out;
}

std::vector<std::string> strings(const json& v, const std::string& where) {
  if (!v.is_array()) fail(where, "expected an array of names");
  std::vector<std::string> out;
  for (const auto& e : v) {
    if (!e.is_string()) fail(where, "expected an array of names");
    out.push_back(e.get<std::string>());
  }
  return out;
}

ChartPtr chart_of(const json& c, const std::string& where) {
  const int n = integer(require(c, "n", where), where + ".n");
  if (n <= 0) fail(where, "n must be positive");
  std::vector<int> blocks{n};
  if (c.contains("blocks")) {
    blocks.clear();
    for (const auto& b : c.at("blocks")) blocks.push_back(integer(b, where + ".blocks"));
    if (std::accumulate(blocks.begin(), blocks.end(), 0) != n)
      fail(where, "block sizes must add up to n = " + std::to_string(n));
    for (int b : blocks)
      if (b <= 0) fail(where, "block sizes must be positive");
  }
  std::vector<std::string> names;
  if (c.contains("names")) {
    names = strings(c.at("names"), where + ".names");
    if (static_cast<int>(names.size()) != 2 * n) fail(where, "names must list 2n coordinates");
  }
  try {
    return make_chart(std::move(blocks), std::move(names));
  } catch (const Error& e) {
    fail(where, e.what());
  }
}

OperatorField operator_of(const json& o, const ChartPtr& chart, const std::string& where) {
  const int d = chart->dim();
  const int dim = integer(require(o, "dimension", where), where + ".dimension");
  if (dim != d)
    fail(where, "dimension " + std::to_string(dim) + " does not match the chart (" + std::to_string(d) + ")");
  const json& entries = require(o, "entries", where);
  if (!entries.is_array() || static_cast<int>(entries.size()) != d * d)
    fail(where, "expected " + std::to_string(d * d) + " row-major entries");
  std::string pre;
  if (o.contains("prefactor")) pre = text_of(o.at("prefactor"), where + ".prefactor");
  std::vector<Expression> out;
  for (int i = 0; i < d * d; ++i) {
    const std::string at = where + ".entries[" + std::to_string(i) + "]";
    const std::string e = text_of(entries[i], at);
    if (pre.empty() || e == "0")
      out.push_back(expr(json(e), chart, at));
    else
      out.push_back(expr(json("(" + pre + ")*(" + e + ")"), chart, at));
  }
  return OperatorField(chart, std::move(out));
}

template <class T>
bool has(const Named<T>& list, const std::string& name) {
  for (const auto& [n, v] : list)
    if (n == name) return true;
  return false;
}

Expression ham_or_expr(const Model& m, const json& v, const std::string& where) {
  if (v.is_string() && has(m.hamiltonians, v.get<std::string>())) return m.hamiltonian(v.get<std::string>());
  return expr(v, m.chart, where);
}

}  // namespace

const Expression& Model::hamiltonian(const std::string& name) const {
  for (const auto& [n, e] : hamiltonians)
    if (n == name) return e;
  throw ModelError("unknown Hamiltonian '" + name + "'");
}

OperatorField Model::operator_named(const std::string& name) const {
  for (const auto& [n, op] : operators)
    if (n == name) return op;
  if (name == "I") return OperatorField::identity(chart);
  throw ModelError("unknown operator '" + name + "'");
}

std::vector<Expression> Model::hamiltonian_list() const {
  std::vector<Expression> out;
  for (const auto& [n, e] : hamiltonians) out.push_back(e);
  return out;
}

Model load_model(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ModelError(std::string("model is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ModelError("model must be a JSON object");
  if (!doc.contains("schema") || doc.at("schema") != 1)
    throw ModelError("unsupported model schema (expected \"schema\": 1)");

  Model m;
  if (doc.contains("name")) m.name = doc.at("name").get<std::string>();
  m.chart = chart_of(require(doc, "chart", "model"), "chart");

  if (doc.contains("hamiltonians"))
    for (const auto& [k, v] : doc.at("hamiltonians").items())
      m.hamiltonians.emplace_back(k, expr(v, m.chart, "hamiltonians." + k));

  if (doc.contains("operators"))
    for (const auto& [k, v] : doc.at("operators").items())
      m.operators.emplace_back(k, operator_of(v, m.chart, "operators." + k));

  if (doc.contains("algebras"))
    for (const auto& [k, v] : doc.at("algebras").items()) {
      auto names = strings(v, "algebras." + k);
      for (const auto& n : names)
        if (n != "I" && !has(m.operators, n)) fail("algebras." + k, "unknown operator '" + n + "'");
      m.algebras.emplace_back(k, std::move(names));
    }

  if (doc.contains("chains"))
    for (std::size_t i = 0; i < doc.at("chains").size(); ++i) {
      const json& c = doc.at("chains")[i];
      const std::string where = "chains[" + std::to_string(i) + "]";
      ChainDecl d{require(c, "operator", where).get<std::string>(),
                  require(c, "from", where).get<std::string>(),
                  require(c, "to", where).get<std::string>()};
      if (d.op != "I" && !has(m.operators, d.op)) fail(where, "unknown operator '" + d.op + "'");
      for (const auto* h : {&d.from, &d.to})
        if (!has(m.hamiltonians, *h)) fail(where, "unknown Hamiltonian '" + *h + "'");
      m.chains.push_back(std::move(d));
    }

  if (doc.contains("eigenvalues"))
    for (std::size_t i = 0; i < doc.at("eigenvalues").size(); ++i) {
      const json& e = doc.at("eigenvalues")[i];
      const std::string where = "eigenvalues[" + std::to_string(i) + "]";
      EigenDecl d;
      d.op = require(e, "operator", where).get<std::string>();
      if (!has(m.operators, d.op)) fail(where, "unknown operator '" + d.op + "'");
      if (e.contains("minimal_polynomial_degree"))
        d.minimal_polynomial_degree = integer(e.at("minimal_polynomial_degree"), where);
      for (const auto& v : require(e, "values", where)) {
        EigenCandidate c{expr(require(v, "value", where), m.chart, where + ".value"), 1, 0};
        if (v.contains("multiplicity")) c.multiplicity = integer(v.at("multiplicity"), where);
        if (v.contains("riesz_index")) c.riesz_index = integer(v.at("riesz_index"), where);
        d.candidates.push_back(std::move(c));
      }
      m.eigenvalues.push_back(std::move(d));
    }

  if (doc.contains("guards"))
    for (std::size_t i = 0; i < doc.at("guards").size(); ++i)
      m.guards.push_back(expr(doc.at("guards")[i], m.chart, "guards[" + std::to_string(i) + "]"));

  if (doc.contains("sampling")) {
    const json& s = doc.at("sampling");
    if (s.contains("seed")) m.sampling.seed = s.at("seed").get<std::uint64_t>();
    if (s.contains("count")) m.sampling.count = integer(s.at("count"), "sampling.count");
    if (s.contains("box")) {
      const auto box = numbers(s.at("box"), "sampling.box");
      if (box.size() != 2 || !(box[0] < box[1])) fail("sampling.box", "expected [lo, hi] with lo < hi");
      m.sampling.lo = box[0];
      m.sampling.hi = box[1];
    }
    if (s.contains("guard_min")) m.sampling.guard_min = number(s.at("guard_min"), "sampling.guard_min");
  }
  if (doc.contains("tolerance")) m.tolerance = number(doc.at("tolerance"), "tolerance");

  if (doc.contains("stackel")) {
    const json& s = doc.at("stackel");
    StackelDecl d{StackelSpec{m.chart, {}, {}, false}, 1, 1e-6, {}};
    const json& mat = require(s, "matrix", "stackel");
    for (std::size_t a = 0; a < mat.size(); ++a) {
      std::vector<Expression> row;
      for (std::size_t b = 0; b < mat[a].size(); ++b)
        row.push_back(expr(mat[a][b], m.chart,
                           "stackel.matrix[" + std::to_string(a) + "][" + std::to_string(b) + "]"));
      d.spec.matrix.push_back(std::move(row));
    }
    const json& vec = require(s, "vector", "stackel");
    for (std::size_t a = 0; a < vec.size(); ++a)
      d.spec.vector.push_back(expr(vec[a], m.chart, "stackel.vector[" + std::to_string(a) + "]"));
    if (s.contains("momentum_rows")) d.spec.momentum_rows = s.at("momentum_rows").get<bool>();
    if (s.contains("generator")) d.generator = integer(s.at("generator"), "stackel.generator");
    if (s.contains("det_min")) d.det_min = number(s.at("det_min"), "stackel.det_min");
    if (s.contains("names")) {
      d.names = strings(s.at("names"), "stackel.names");
      if (d.names.size() != d.spec.vector.size()) fail("stackel.names", "one name per row required");
    } else {
      for (std::size_t a = 0; a < d.spec.vector.size(); ++a) d.names.push_back("H" + std::to_string(a + 1));
    }
    try {
      check_locality(d.spec);
    } catch (const Error& e) {
      fail("stackel", e.what());
    }
    m.stackel = std::move(d);
  }

  if (doc.contains("maps"))
    for (const auto& [k, v] : doc.at("maps").items()) {
      const std::string where = "maps." + k;
      const ChartPtr target = chart_of(require(v, "target", where), where + ".target");
      std::vector<Expression> fwd, inv;
      for (const auto& e : require(v, "forward", where)) fwd.push_back(expr(e, m.chart, where + ".forward"));
      for (const auto& e : require(v, "inverse", where)) inv.push_back(expr(e, target, where + ".inverse"));
      std::optional<ChartMap> map;
      try {
        map.emplace(std::move(fwd), std::move(inv));
      } catch (const ShapeError& e) {
        fail(where, e.what());
      }
      MapDecl d{k, *map, {}, {}, {}, {}};
      if (v.contains("guards"))
        for (const auto& g : v.at("guards")) d.target_guards.push_back(expr(g, target, where + ".guards"));
      if (v.contains("hamiltonians"))
        for (const auto& [hn, hv] : v.at("hamiltonians").items()) {
          if (!has(m.hamiltonians, hn)) fail(where, "unknown Hamiltonian '" + hn + "'");
          d.target_hamiltonians.emplace_back(hn, expr(hv, target, where + ".hamiltonians." + hn));
        }
      if (v.contains("operators"))
        for (const auto& [on, ov] : v.at("operators").items()) {
          if (!has(m.operators, on)) fail(where, "unknown operator '" + on + "'");
          d.target_operators.emplace_back(on, operator_of(ov, target, where + ".operators." + on));
        }
      if (v.contains("block_operators")) {
        d.block_operators = strings(v.at("block_operators"), where + ".block_operators");
        for (const auto& n : d.block_operators)
          if (n != "I" && !has(m.operators, n)) fail(where, "unknown operator '" + n + "'");
      }
      m.maps.push_back(std::move(d));
    }

  if (doc.contains("symmetry")) {
    const json& s = doc.at("symmetry");
    std::vector<std::string> params;
    if (s.contains("parameters")) params = strings(s.at("parameters"), "symmetry.parameters");
    SymmetryDecl d;
    for (const auto& r : require(s, "relations", "symmetry"))
      d.relations.push_back(expr(r, m.chart, "symmetry.relations", params));
    if (static_cast<int>(d.relations.size()) != m.chart->n())
      fail("symmetry", "need n = " + std::to_string(m.chart->n()) + " relations");
    if (s.contains("level"))
      for (const auto& l : s.at("level")) d.level.push_back(ham_or_expr(m, l, "symmetry.level"));
    if (s.contains("values")) d.values = numbers(s.at("values"), "symmetry.values");
    const std::size_t need = params.size();
    if ((d.level.empty() ? d.values.size() : d.level.size()) != need)
      fail("symmetry", "provide one level function or value per parameter");
    m.symmetry = std::move(d);
  }

  if (doc.contains("flow")) {
    const json& f = doc.at("flow");
    FlowDecl d{ham_or_expr(m, require(f, "hamiltonian", "flow"), "flow.hamiltonian"), {}, {}, {}, 10.0, 1e-3};
    for (const auto& i : require(f, "invariants", "flow")) {
      const std::string label = i.is_string() ? i.get<std::string>() : i.dump();
      d.invariants.emplace_back(label, ham_or_expr(m, i, "flow.invariants"));
    }
    if (f.contains("tolerances")) d.tolerances = numbers(f.at("tolerances"), "flow.tolerances");
    if (d.tolerances.empty()) d.tolerances.assign(d.invariants.size(), 1e-6);
    if (d.tolerances.size() != d.invariants.size()) fail("flow", "one tolerance per invariant required");
    d.x0 = numbers(require(f, "x0", "flow"), "flow.x0");
    if (static_cast<int>(d.x0.size()) != m.chart->dim()) fail("flow.x0", "wrong dimension");
    if (f.contains("T")) d.t_end = number(f.at("T"), "flow.T");
    if (f.contains("dt")) d.dt = number(f.at("dt"), "flow.dt");
    m.flow = std::move(d);
  }

  if (doc.contains("se_residuals"))
    for (const auto& p : doc.at("se_residuals")) {
      SePoint s{numbers(require(p, "x", "se_residuals"), "se_residuals.x"),
                numbers(require(p, "h", "se_residuals"), "se_residuals.h")};
      if (static_cast<int>(s.x.size()) != m.chart->dim()) fail("se_residuals.x", "wrong dimension");
      m.se_points.push_back(std::move(s));
    }
  return m;
}

Model load_model_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ModelError("cannot open model file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return load_model(ss.str());
}

std::string content_hash(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[40];
  std::snprintf(buf, sizeof buf, "fnv1a64:%016llx", static_cast<unsigned long long>(h));
  return buf;
}

nlohmann::ordered_json operator_json(const OperatorField& op) {
  json out;
  out["dimension"] = op.dim();
  json entries = json::array();
  for (int i = 0; i < op.dim(); ++i)
    for (int j = 0; j < op.dim(); ++j) entries.push_back(print(op(i, j)));
  out["entries"] = std::move(entries);
  return out;
}

}  // namespace haantjes
