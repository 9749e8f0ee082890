#include "vgf/io.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include "vgf/error.hpp"

namespace vgf {

namespace {

template <class T>
T get(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) fail(ErrorCode::Parse, std::string("missing field '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::Parse, std::string("field '") + key + "': " + e.what());
  }
}

template <class T>
T get_or(const Json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  return get<T>(j, key);
}

double extent_from_json(const Json& v) {
  if (v.is_string()) {
    if (v.get<std::string>() == "pi") return std::numbers::pi;
    fail(ErrorCode::Parse, "half extent must be a number or \"pi\"");
  }
  if (!v.is_number()) fail(ErrorCode::Parse, "half extent must be a number or \"pi\"");
  return v.get<double>();
}

}  // namespace

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Parse, "cannot open '" + path + "'");
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::Parse, "'" + path + "': " + e.what());
  }
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::InvalidArgument, "cannot write '" + path + "'");
  out << text;
}

Json system_to_json(const RegularSystem& sys) {
  Json h = Json::array();
  for (double x : sys.box().half_extent) {
    if (x == std::numbers::pi)
      h.push_back("pi");
    else
      h.push_back(x);
  }
  Json c = Json::array();
  for (int m : sys.cells_per_axis()) c.push_back(m);
  return {{"half_extent", h}, {"cells", c}};
}

SystemPtr system_from_json(const Json& j) {
  if (!j.is_object()) fail(ErrorCode::Parse, "grid must be an object");
  const Json& h = j.contains("half_extent") ? j.at("half_extent") : Json();
  if (!h.is_array()) fail(ErrorCode::Parse, "grid.half_extent must be an array");
  std::vector<double> extent;
  for (const auto& v : h) extent.push_back(extent_from_json(v));
  auto cells = get<std::vector<int>>(j, "cells");
  if (cells.size() != extent.size()) fail(ErrorCode::Parse, "grid.cells and grid.half_extent differ in length");
  return share(RegularSystem::build(std::move(extent), std::move(cells)));
}

Json matrix_to_json(const CMatrix& m) {
  Json out = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back({m(r, c).real(), m(r, c).imag()});
    out.push_back(std::move(row));
  }
  return out;
}

CMatrix matrix_from_json(const Json& j, int d) {
  if (!j.is_array() || static_cast<int>(j.size()) != d)
    fail(ErrorCode::Parse, "matrix must have " + std::to_string(d) + " rows");
  CMatrix m(d, d);
  for (int r = 0; r < d; ++r) {
    const Json& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<int>(row.size()) != d)
      fail(ErrorCode::Parse, "matrix row must have " + std::to_string(d) + " entries");
    for (int c = 0; c < d; ++c) {
      const Json& e = row[static_cast<std::size_t>(c)];
      if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number())
        fail(ErrorCode::Parse, "matrix entries must be [re, im] pairs");
      m(r, c) = cplx(e[0].get<double>(), e[1].get<double>());
    }
  }
  return m;
}

Json measure_to_json(const RawMeasure& raw) {
  Json cells = Json::array();
  const auto& sys = *raw.system;
  for (int k = -sys.pair_count(); k <= sys.pair_count(); ++k) {
    if (k == 0) continue;
    cells.push_back({{"index", k},
                     {"mass", matrix_to_json(raw.masses[static_cast<std::size_t>(sys.slot_of(k))])}});
  }
  return {{"dim_field", raw.dim_field}, {"grid", system_to_json(sys)}, {"cells", cells}};
}

Json measure_to_json(const MatrixSpectralMeasure& g) { return measure_to_json(RawMeasure::from(g)); }

RawMeasure raw_measure_from_json(const Json& j) {
  RawMeasure raw;
  raw.dim_field = get<int>(j, "dim_field");
  if (raw.dim_field < 1) fail(ErrorCode::Parse, "dim_field must be positive");
  raw.system = system_from_json(j.contains("grid") ? j.at("grid") : Json());
  const auto& sys = *raw.system;
  raw.masses.assign(static_cast<std::size_t>(sys.slot_count()), CMatrix());
  const Json& cells = j.contains("cells") ? j.at("cells") : Json();
  if (!cells.is_array()) fail(ErrorCode::Parse, "cells must be an array");
  std::vector<bool> seen(static_cast<std::size_t>(sys.slot_count()), false);
  for (const auto& c : cells) {
    const int k = get<int>(c, "index");
    if (k == 0 || std::abs(k) > sys.pair_count())
      fail(ErrorCode::Parse, "cell index " + std::to_string(k) + " out of range");
    const auto slot = static_cast<std::size_t>(sys.slot_of(k));
    if (seen[slot]) fail(ErrorCode::Parse, "cell " + std::to_string(k) + " listed twice");
    seen[slot] = true;
    raw.masses[slot] = matrix_from_json(c.contains("mass") ? c.at("mass") : Json(), raw.dim_field);
  }
  for (int s = 0; s < sys.slot_count(); ++s)
    if (!seen[static_cast<std::size_t>(s)])
      fail(ErrorCode::Parse, "cell " + std::to_string(sys.index_of(s)) + " is missing");
  return raw;
}

RawMeasure load_raw_measure(const std::string& path) {
  return raw_measure_from_json(read_json_file(path));
}

MatrixSpectralMeasure load_measure(const std::string& path) {
  return to_measure(load_raw_measure(path));
}

Json kernel_to_json(const SimpleKernel& f) {
  const auto& sys = f.system();
  Json entries = Json::array();
  for (std::size_t e = 0; e < f.size(); ++e) {
    Json tup = Json::array();
    for (auto s : f.tuple(e)) tup.push_back(sys.index_of(s));
    entries.push_back({{"tuple", tup}, {"re", f.value(e).real()}, {"im", f.value(e).imag()}});
  }
  return {{"order", f.order()}, {"colours", f.colours()}, {"entries", entries}};
}

SimpleKernel kernel_from_json(const Json& j, SystemPtr system, int dim_field) {
  const int n = get<int>(j, "order");
  auto colours = get<std::vector<int>>(j, "colours");
  if (static_cast<int>(colours.size()) != n) fail(ErrorCode::Parse, "kernel needs one colour per variable");
  const Json& entries = j.contains("entries") ? j.at("entries") : Json();
  if (!entries.is_array()) fail(ErrorCode::Parse, "kernel entries must be an array");
  const auto& sys = *system;
  std::vector<std::pair<std::vector<int>, cplx>> list;
  for (const auto& e : entries) {
    auto idx = get<std::vector<int>>(e, "tuple");
    if (static_cast<int>(idx.size()) != n) fail(ErrorCode::Parse, "kernel tuple has the wrong length");
    std::vector<int> slots;
    for (int k : idx) {
      if (k == 0 || std::abs(k) > sys.pair_count())
        fail(ErrorCode::Parse, "kernel cell index " + std::to_string(k) + " out of range");
      slots.push_back(sys.slot_of(k));
    }
    list.emplace_back(std::move(slots), cplx(get<double>(e, "re"), get<double>(e, "im")));
  }
  return SimpleKernel::from_entries(std::move(system), dim_field, std::move(colours), std::move(list));
}

SimpleKernel load_kernel(const std::string& path, SystemPtr system, int dim_field) {
  return kernel_from_json(read_json_file(path), std::move(system), dim_field);
}

Json wick_spec_to_json(const WickSpec& spec) {
  Json terms = Json::array();
  for (const auto& [k, a] : spec.terms) terms.push_back({{"exponents", k}, {"coefficient", a}});
  return {{"order", spec.order}, {"dim_field", spec.dim_field}, {"terms", terms}};
}

WickSpec wick_spec_from_json(const Json& j) {
  WickSpec spec;
  spec.order = get<int>(j, "order");
  spec.dim_field = get<int>(j, "dim_field");
  const Json& terms = j.contains("terms") ? j.at("terms") : Json();
  if (!terms.is_array()) fail(ErrorCode::Parse, "wick.terms must be an array");
  for (const auto& t : terms)
    spec.terms.emplace_back(get<std::vector<int>>(t, "exponents"), get<double>(t, "coefficient"));
  spec.check();
  return spec;
}

Json limit_config_to_json(const LimitConfig& cfg) {
  Json out = {{"fixture", {{"beta", cfg.fixture.beta}, {"m", matrix_to_json(cfg.fixture.m)}}},
              {"wick", wick_spec_to_json(cfg.wick)},
              {"schedule", cfg.schedule},
              {"cells_per_period", cfg.cells_per_period},
              {"replicas", cfg.replicas},
              {"seed", cfg.seed},
              {"chunk", cfg.chunk},
              {"cf_points", cfg.cf_points},
              {"condition_a", {{"T", cfg.condition_a_T},
                               {"points", cfg.condition_a_points},
                               {"threshold", cfg.condition_a_threshold}}},
              {"epsilons", cfg.epsilons},
              {"tail_box_max", cfg.tail_box_max},
              {"lemma_box", cfg.lemma_box},
              {"final_tolerance", cfg.final_tolerance},
              {"calibration_probes", cfg.calibration_probes}};
  if (cfg.kappa) out["kappa"] = *cfg.kappa;
  return out;
}

LimitConfig limit_config_from_json(const Json& j) {
  LimitConfig cfg;
  const Json& fx = j.contains("fixture") ? j.at("fixture") : Json();
  cfg.fixture.beta = get<double>(fx, "beta");
  cfg.wick = wick_spec_from_json(j.contains("wick") ? j.at("wick") : Json());
  cfg.fixture.m = matrix_from_json(fx.contains("m") ? fx.at("m") : Json(), cfg.wick.dim_field);
  cfg.schedule = get_or(j, "schedule", cfg.schedule);
  cfg.cells_per_period = get_or(j, "cells_per_period", cfg.cells_per_period);
  cfg.replicas = get_or(j, "replicas", cfg.replicas);
  cfg.seed = get_or(j, "seed", cfg.seed);
  cfg.chunk = get_or(j, "chunk", cfg.chunk);
  cfg.cf_points = get_or(j, "cf_points", cfg.cf_points);
  if (j.contains("condition_a")) {
    const Json& a = j.at("condition_a");
    cfg.condition_a_T = get_or(a, "T", cfg.condition_a_T);
    cfg.condition_a_points = get_or(a, "points", cfg.condition_a_points);
    cfg.condition_a_threshold = get_or(a, "threshold", cfg.condition_a_threshold);
  }
  cfg.epsilons = get_or(j, "epsilons", cfg.epsilons);
  cfg.tail_box_max = get_or(j, "tail_box_max", cfg.tail_box_max);
  cfg.lemma_box = get_or(j, "lemma_box", cfg.lemma_box);
  cfg.final_tolerance = get_or(j, "final_tolerance", cfg.final_tolerance);
  cfg.calibration_probes = get_or(j, "calibration_probes", cfg.calibration_probes);
  if (j.contains("kappa")) cfg.kappa = get<double>(j, "kappa");
  return cfg;
}

LimitConfig load_limit_config(const std::string& path) {
  return limit_config_from_json(read_json_file(path));
}

}  // namespace vgf
