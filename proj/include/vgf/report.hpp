#pragma once

#include <cstdint>
#include <deque>
#include <string>
#include <vector>

#include "json.hpp"

namespace vgf {

using Json = nlohmann::ordered_json;

/// One asserted quantity: pass iff value <= tolerance (or >= for AtLeast).
struct Check {
  enum class Relation { AtMost, AtLeast };
  std::string name;
  double value = 0.0;
  double tolerance = 0.0;
  Relation relation = Relation::AtMost;
  bool pass = false;

  static Check at_most(std::string name, double value, double tolerance);
  static Check at_least(std::string name, double value, double tolerance);
  static Check flag(std::string name, bool ok);
};

struct Table {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<Json>> rows;

  void add(std::vector<Json> row);
};

struct Report {
  std::string suite;
  std::uint64_t seed = 0;
  Json params = Json::object();
  std::deque<Table> tables;  // table() hands out references
  std::vector<Check> checks;

  bool pass() const;
  Table& table(const std::string& name, std::vector<std::string> columns);
  void check(Check c) { checks.push_back(std::move(c)); }
  Json to_json() const;
  /// Every table followed by the checks, separated by "# name" lines.
  std::string to_csv() const;
  /// Short pass/fail listing, one line per check.
  std::string summary() const;
};

/// %.17g, with nan and inf spelled out.
std::string format_number(double x);

}  // namespace vgf
