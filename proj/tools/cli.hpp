#pragma once

#include <string>
#include <vector>

namespace haantjes::cli {

struct Result {
  int exit_code = 0;  // 0 pass, 1 a check failed, 2 usage / model / construction error
  std::string out;    // JSON report
  std::string err;    // human summary and diagnostics
};

/// Runs one haantjes-kit invocation; args excludes the program name.
/// `env_seed` plays the role of HAANTJES_SEED (nullptr when unset).
Result run(const std::vector<std::string>& args, const char* env_seed = nullptr);

}  // namespace haantjes::cli
