#pragma once

#include <string>

#include "vgf/chaos.hpp"
#include "vgf/limits.hpp"
#include "vgf/report.hpp"

namespace vgf {

// File formats are JSON. Matrices are d x d arrays of [re, im] pairs; a half
// extent may be written as the string "pi".

Json read_json_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

Json system_to_json(const RegularSystem& sys);
SystemPtr system_from_json(const Json& j);

Json matrix_to_json(const CMatrix& m);
CMatrix matrix_from_json(const Json& j, int d);

/// {"dim_field", "grid", "cells": [{"index", "mass"}]} with every cell listed.
Json measure_to_json(const RawMeasure& raw);
Json measure_to_json(const MatrixSpectralMeasure& g);
RawMeasure raw_measure_from_json(const Json& j);
RawMeasure load_raw_measure(const std::string& path);
/// Parses and validates; the error names the first failing invariant.
MatrixSpectralMeasure load_measure(const std::string& path);

/// {"order", "colours", "entries": [{"tuple": [k...], "re", "im"}]} with
/// signed cell indices and 0-based colours.
Json kernel_to_json(const SimpleKernel& f);
SimpleKernel kernel_from_json(const Json& j, SystemPtr system, int dim_field);
SimpleKernel load_kernel(const std::string& path, SystemPtr system, int dim_field);

Json wick_spec_to_json(const WickSpec& spec);
WickSpec wick_spec_from_json(const Json& j);
Json limit_config_to_json(const LimitConfig& cfg);
LimitConfig limit_config_from_json(const Json& j);
LimitConfig load_limit_config(const std::string& path);

}  // namespace vgf
