// Check records and verdict reports shared by the validators and the CLI.
#pragma once

#include "mvops/matrixkit.hpp"

#include <json.hpp>

#include <algorithm>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace mvops {

/// One check: either a residual against a tolerance or a rank against its
/// expected value. `degree`/`direction` are -1 when not applicable;
/// direction is 1-based in reports.
struct CheckRecord {
  std::string name;
  int degree = -1;
  int direction = -1;
  std::optional<Real> residual;
  std::optional<Real> tolerance;
  std::optional<int> rank;
  std::optional<int> expected_rank;
  bool pass = true;
  std::string note;
};

inline CheckRecord residual_check(std::string name, int degree, int direction, Real residual, Real tol) {
  CheckRecord r;
  r.name = std::move(name);
  r.degree = degree;
  r.direction = direction;
  r.residual = residual;
  r.tolerance = tol;
  r.pass = residual <= tol;
  return r;
}

inline CheckRecord rank_check(std::string name, int degree, int direction, int rank, int expected) {
  CheckRecord r;
  r.name = std::move(name);
  r.degree = degree;
  r.direction = direction;
  r.rank = rank;
  r.expected_rank = expected;
  r.pass = rank == expected;
  return r;
}

inline CheckRecord flag_check(std::string name, bool pass, std::string note = "") {
  CheckRecord r;
  r.name = std::move(name);
  r.pass = pass;
  r.note = std::move(note);
  return r;
}

struct Report {
  std::vector<CheckRecord> records;

  void add(CheckRecord r) { records.push_back(std::move(r)); }
  void append(const Report& other) { records.insert(records.end(), other.records.begin(), other.records.end()); }
  bool pass() const {
    for (const auto& r : records)
      if (!r.pass) return false;
    return true;
  }
  /// First failing record in (degree, direction) order, if any.
  const CheckRecord* first_failure() const {
    const CheckRecord* best = nullptr;
    for (const auto& r : records)
      if (!r.pass && (!best || std::pair(r.degree, r.direction) < std::pair(best->degree, best->direction))) best = &r;
    return best;
  }
  Real max_residual(const std::string& name) const {
    Real m = 0;
    for (const auto& r : records)
      if (r.name == name && r.residual) m = std::max(m, *r.residual);
    return m;
  }
};

/// JSON numbers are doubles; long double values are narrowed on output.
inline nlohmann::json to_json(const CheckRecord& r) {
  nlohmann::json j{{"name", r.name}, {"pass", r.pass}};
  if (r.degree >= 0) j["degree"] = r.degree;
  if (r.direction >= 0) j["direction"] = r.direction;
  if (r.residual) j["residual"] = static_cast<double>(*r.residual);
  if (r.tolerance) j["tolerance"] = static_cast<double>(*r.tolerance);
  if (r.rank) j["rank"] = *r.rank;
  if (r.expected_rank) j["expected_rank"] = *r.expected_rank;
  if (!r.note.empty()) j["note"] = r.note;
  return j;
}

inline nlohmann::json to_json(const Report& rep) {
  nlohmann::json recs = nlohmann::json::array();
  for (const auto& r : rep.records) recs.push_back(to_json(r));
  return {{"pass", rep.pass()}, {"records", recs}};
}

}  // namespace mvops
