#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "haantjes/algebra.hpp"
#include "haantjes/sampling.hpp"
#include "haantjes/stackel.hpp"
#include "haantjes/tensor.hpp"
#include "haantjes/transform.hpp"

namespace haantjes {

/// Malformed or inconsistent model file.
class ModelError : public Error {
 public:
  using Error::Error;
};

template <class T>
using Named = std::vector<std::pair<std::string, T>>;

struct ChainDecl {
  std::string op, from, to;
};

struct EigenDecl {
  std::string op;
  std::vector<EigenCandidate> candidates;
  int minimal_polynomial_degree = 0;
};

struct StackelDecl {
  StackelSpec spec;
  int generator = 1;
  double det_min = 1e-6;
  std::vector<std::string> names;  // names of the built Hamiltonians
};

struct MapDecl {
  std::string name;
  ChartMap map;
  std::vector<Expression> target_guards;
  Named<Expression> target_hamiltonians;  // expected images of source Hamiltonians
  Named<OperatorField> target_operators;  // expected pushforwards of source operators
  std::vector<std::string> block_operators;
};

struct SymmetryDecl {
  std::vector<Expression> relations;
  std::vector<Expression> level;  // h as functions of the point, or empty
  std::vector<double> values;     // fixed h otherwise
};

struct FlowDecl {
  Expression hamiltonian;
  Named<Expression> invariants;
  std::vector<double> tolerances;
  std::vector<double> x0;
  double t_end = 10.0;
  double dt = 1e-3;
};

struct SePoint {
  std::vector<double> x;
  std::vector<double> h;
};

struct Model {
  std::string name;
  ChartPtr chart;
  Named<Expression> hamiltonians;
  Named<OperatorField> operators;
  Named<std::vector<std::string>> algebras;
  std::vector<ChainDecl> chains;
  std::vector<EigenDecl> eigenvalues;
  std::vector<Expression> guards;
  SampleConfig sampling;
  double tolerance = 1e-9;
  std::optional<StackelDecl> stackel;
  std::vector<MapDecl> maps;
  std::optional<SymmetryDecl> symmetry;
  std::optional<FlowDecl> flow;
  std::vector<SePoint> se_points;

  const Expression& hamiltonian(const std::string& name) const;
  /// "I" resolves to the identity unless the model defines its own.
  OperatorField operator_named(const std::string& name) const;
  std::vector<Expression> hamiltonian_list() const;
};

/// Parses a schema-1 model document.
Model load_model(const std::string& text);
Model load_model_file(const std::string& path);

/// FNV-1a 64-bit digest of the raw bytes, as "fnv1a64:<16 hex digits>".
std::string content_hash(const std::string& bytes);

/// Operator in the model layout: {"dimension": d, "entries": [...]} in
/// row-major chart order.
nlohmann::ordered_json operator_json(const OperatorField& op);

}  // namespace haantjes
