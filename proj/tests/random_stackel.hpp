// Random generalized Staeckel data with small integer coefficients.
#pragma once

#include <random>
#include <string>
#include <vector>

#include "haantjes/stackel.hpp"

namespace models {

using namespace haantjes;

inline std::string random_poly(std::mt19937_64& rng, const std::vector<std::string>& vars,
                               int degree, double density) {
  std::uniform_int_distribution<int> coeff(-3, 3);
  std::bernoulli_distribution keep(density);
  std::vector<std::string> monos{"1"};
  for (std::size_t i = 0; i < vars.size(); ++i) {
    monos.push_back(vars[i]);
    if (degree >= 2)
      for (std::size_t j = i; j < vars.size(); ++j) monos.push_back(vars[i] + "*" + vars[j]);
  }
  std::string out;
  for (const auto& m : monos) {
    if (!keep(rng)) continue;
    int c = coeff(rng);
    if (c == 0) continue;
    out += (c < 0 ? " - " : " + ") + std::to_string(std::abs(c)) + "*" + m;
  }
  return out.empty() ? "1" : "0" + out;
}

/// Row a of S uses the positions of block a; f_a is p-quadratic plus a
/// random potential.
inline StackelSpec random_spec(std::mt19937_64& rng, std::vector<int> blocks) {
  const ChartPtr chart = make_chart(blocks);
  const int m = static_cast<int>(blocks.size());
  StackelSpec spec{chart, {}, {}, false};
  for (int a = 0; a < m; ++a) {
    const auto [lo, hi] = chart->block_range(a);
    std::vector<std::string> qs, ps;
    for (int k = lo; k < hi; ++k) {
      qs.push_back(chart->name(chart->q_index(k)));
      ps.push_back(chart->name(chart->p_index(k)));
    }
    std::vector<Expression> row;
    for (int b = 0; b < m; ++b) row.push_back(parse(random_poly(rng, qs, 2, 0.5), chart));
    spec.matrix.push_back(std::move(row));
    std::string f = random_poly(rng, qs, 2, 0.5);
    std::uniform_int_distribution<int> kin(1, 3);
    for (const auto& p : ps) f += " + " + std::to_string(kin(rng)) + "*" + p + "^2";
    spec.vector.push_back(parse(f, chart));
  }
  return spec;
}

}  // namespace models
