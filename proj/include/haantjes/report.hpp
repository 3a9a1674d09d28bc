#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace haantjes {

/// Outcome of one named check over a sample set.
struct CheckResult {
  std::string name;
  std::string anchor;  // short human label of the property being verified
  bool passed = true;
  double max_residual = 0.0;
  std::vector<double> worst_point;
  double tolerance = 0.0;
  std::uint64_t seed = 0;
  int samples = 0;
  std::vector<std::string> notes;
};

/// Accumulates residuals sample by sample; NaN residuals count as failures.
class CheckBuilder {
 public:
  CheckBuilder(std::string name, std::string anchor, double tolerance, std::uint64_t seed);

  void observe(double residual, std::span<const double> point);
  void fail(std::string note, std::span<const double> point = {});
  void note(std::string text);
  void count_sample() { ++result_.samples; }
  double max_residual() const { return result_.max_residual; }

  CheckResult finish() const;

 private:
  CheckResult result_;
  bool failed_ = false;
  bool has_point_ = false;
  int suppressed_ = 0;
};

class VerificationReport {
 public:
  VerificationReport() = default;
  explicit VerificationReport(std::string subject) : subject_(std::move(subject)) {}

  void add(CheckResult check) { checks_.push_back(std::move(check)); }
  void merge(const VerificationReport& other);

  bool passed() const;
  const std::vector<CheckResult>& checks() const { return checks_; }
  const CheckResult* find(std::string_view name) const;
  const std::string& subject() const { return subject_; }
  double max_residual() const;

  /// Fixed field order; doubles are written with 17 significant digits.
  nlohmann::ordered_json to_json() const;
  std::string summary() const;

 private:
  std::string subject_;
  std::vector<CheckResult> checks_;
};

/// Shortest round-trip-safe text: printf("%.17g").
std::string format_double(double value);

}  // namespace haantjes
