#include "vgf/report.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace vgf {

Check Check::at_most(std::string name, double value, double tolerance) {
  return {std::move(name), value, tolerance, Relation::AtMost,
          std::isfinite(value) && value <= tolerance};
}

Check Check::at_least(std::string name, double value, double tolerance) {
  return {std::move(name), value, tolerance, Relation::AtLeast,
          std::isfinite(value) && value >= tolerance};
}

Check Check::flag(std::string name, bool ok) {
  return {std::move(name), ok ? 1.0 : 0.0, 1.0, Relation::AtLeast, ok};
}

void Table::add(std::vector<Json> row) { rows.push_back(std::move(row)); }

bool Report::pass() const {
  for (const auto& c : checks)
    if (!c.pass) return false;
  return true;
}

Table& Report::table(const std::string& name, std::vector<std::string> columns) {
  for (auto& t : tables)
    if (t.name == name) return t;
  tables.push_back({name, std::move(columns), {}});
  return tables.back();
}

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

namespace {

std::string cell_text(const Json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_float()) return format_number(v.get<double>());
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_null()) return "";
  return v.dump();
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

const char* relation_text(Check::Relation r) { return r == Check::Relation::AtMost ? "<=" : ">="; }

// NaN and inf are not JSON numbers; they go out as strings.
Json number(double x) {
  if (std::isfinite(x)) return x;
  return format_number(x);
}

}  // namespace

Json Report::to_json() const {
  Json out = Json::object();
  out["suite"] = suite;
  out["seed"] = seed;
  out["params"] = params;
  out["pass"] = pass();
  Json tabs = Json::array();
  for (const auto& t : tables) {
    Json rows = Json::array();
    for (const auto& r : t.rows) {
      Json obj = Json::object();
      for (std::size_t i = 0; i < t.columns.size() && i < r.size(); ++i) {
        const Json& v = r[i];
        obj[t.columns[i]] = v.is_number_float() ? number(v.get<double>()) : v;
      }
      rows.push_back(std::move(obj));
    }
    tabs.push_back({{"name", t.name}, {"rows", std::move(rows)}});
  }
  out["tables"] = std::move(tabs);
  Json cs = Json::array();
  for (const auto& c : checks)
    cs.push_back({{"name", c.name},
                  {"value", number(c.value)},
                  {"relation", relation_text(c.relation)},
                  {"tolerance", number(c.tolerance)},
                  {"pass", c.pass}});
  out["checks"] = std::move(cs);
  return out;
}

std::string Report::to_csv() const {
  std::ostringstream os;
  os << "# suite " << suite << " seed " << seed << "\n";
  for (const auto& t : tables) {
    os << "# " << t.name << "\n";
    for (std::size_t i = 0; i < t.columns.size(); ++i) os << (i ? "," : "") << csv_escape(t.columns[i]);
    os << "\n";
    for (const auto& r : t.rows) {
      for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << csv_escape(cell_text(r[i]));
      os << "\n";
    }
  }
  os << "# checks\ncheck,value,relation,tolerance,pass\n";
  for (const auto& c : checks)
    os << csv_escape(c.name) << "," << format_number(c.value) << "," << relation_text(c.relation)
       << "," << format_number(c.tolerance) << "," << (c.pass ? "true" : "false") << "\n";
  return os.str();
}

std::string Report::summary() const {
  std::ostringstream os;
  for (const auto& c : checks)
    os << (c.pass ? "PASS " : "FAIL ") << suite << ": " << c.name << " = " << format_number(c.value)
       << " " << relation_text(c.relation) << " " << format_number(c.tolerance) << "\n";
  return os.str();
}

}  // namespace vgf
