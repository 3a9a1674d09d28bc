#include "haantjes/sampling.hpp"

#include <cmath>

#include "haantjes/error.hpp"

namespace haantjes {

SampleSet admissible_samples(const Chart& chart, const SampleConfig& config,
                             std::span<const Expression> guards, std::span<const double> params) {
  if (config.count < 0) throw Error("sample count must be non-negative");
  if (!(config.hi > config.lo)) throw Error("empty sampling box");
  UniformStream stream(config.seed);
  SampleSet out;
  out.seed = config.seed;
  const int dim = chart.dim();
  std::vector<double> x(dim);
  for (int s = 0; s < config.count; ++s) {
    bool accepted = false;
    for (int attempt = 0; attempt < config.max_attempts_per_point && !accepted; ++attempt) {
      for (int i = 0; i < dim; ++i) x[i] = stream.next(config.lo, config.hi);
      accepted = true;
      for (const auto& g : guards) {
        try {
          const double v = eval(g, x, params);
          if (!std::isfinite(v) || std::abs(v) < config.guard_min) {
            accepted = false;
            break;
          }
        } catch (const EvalError&) {
          accepted = false;
          break;
        }
      }
    }
    if (!accepted)
      throw Error("no admissible sample point found after " +
                  std::to_string(config.max_attempts_per_point) + " draws");
    out.points.push_back(x);
  }
  return out;
}

}  // namespace haantjes
