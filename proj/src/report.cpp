#include "haantjes/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace haantjes {

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buffer[40];
  std::snprintf(buffer, sizeof buffer, "%.17g", value);
  return buffer;
}

CheckBuilder::CheckBuilder(std::string name, std::string anchor, double tolerance,
                           std::uint64_t seed) {
  result_.name = std::move(name);
  result_.anchor = std::move(anchor);
  result_.tolerance = tolerance;
  result_.seed = seed;
}

void CheckBuilder::observe(double residual, std::span<const double> point) {
  if (std::isnan(residual)) {
    fail("residual is NaN", point);
    return;
  }
  if (!has_point_ || residual > result_.max_residual) {
    result_.max_residual = residual;
    result_.worst_point.assign(point.begin(), point.end());
    has_point_ = true;
  }
}

void CheckBuilder::fail(std::string note, std::span<const double> point) {
  failed_ = true;
  if (!point.empty() && result_.worst_point.empty())
    result_.worst_point.assign(point.begin(), point.end());
  if (std::find(result_.notes.begin(), result_.notes.end(), note) != result_.notes.end()) return;
  if (result_.notes.size() >= 8) {
    ++suppressed_;
    return;
  }
  result_.notes.push_back(std::move(note));
}

void CheckBuilder::note(std::string text) { result_.notes.push_back(std::move(text)); }

CheckResult CheckBuilder::finish() const {
  CheckResult out = result_;
  out.passed = !failed_ && out.max_residual <= out.tolerance;
  if (suppressed_ > 0) out.notes.push_back(std::to_string(suppressed_) + " further notes suppressed");
  return out;
}

void VerificationReport::merge(const VerificationReport& other) {
  checks_.insert(checks_.end(), other.checks_.begin(), other.checks_.end());
}

bool VerificationReport::passed() const {
  for (const auto& c : checks_)
    if (!c.passed) return false;
  return true;
}

const CheckResult* VerificationReport::find(std::string_view name) const {
  for (const auto& c : checks_)
    if (c.name == name) return &c;
  return nullptr;
}

double VerificationReport::max_residual() const {
  double worst = 0.0;
  for (const auto& c : checks_) worst = std::max(worst, c.max_residual);
  return worst;
}

nlohmann::ordered_json VerificationReport::to_json() const {
  nlohmann::ordered_json out;
  out["subject"] = subject_;
  out["passed"] = passed();
  auto checks = nlohmann::ordered_json::array();
  for (const auto& c : checks_) {
    nlohmann::ordered_json j;
    j["name"] = c.name;
    j["anchor"] = c.anchor;
    j["passed"] = c.passed;
    j["max_residual"] = format_double(c.max_residual);
    j["tolerance"] = format_double(c.tolerance);
    auto point = nlohmann::ordered_json::array();
    for (double v : c.worst_point) point.push_back(format_double(v));
    j["worst_point"] = point;
    j["samples"] = c.samples;
    j["seed"] = c.seed;
    j["notes"] = c.notes;
    checks.push_back(std::move(j));
  }
  out["checks"] = std::move(checks);
  return out;
}

std::string VerificationReport::summary() const {
  std::ostringstream os;
  if (!subject_.empty()) os << subject_ << "\n";
  for (const auto& c : checks_) {
    os << (c.passed ? "  PASS " : "  FAIL ") << c.name << "  max residual "
       << format_double(c.max_residual) << " (tol " << format_double(c.tolerance) << ", "
       << c.samples << " samples)";
    for (const auto& n : c.notes) os << "\n       " << n;
    os << "\n";
  }
  os << (passed() ? "PASS" : "FAIL") << "\n";
  return os.str();
}

}  // namespace haantjes
