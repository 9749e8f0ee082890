#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace vgf::cli {

/// Parses "a;b;c" lags. Points are separated by ';' and coordinates by ','.
/// With dim 1 a ',' also separates points.
std::vector<std::vector<std::int64_t>> parse_lags(const std::string& text, std::size_t dim);

/// Runs one subcommand. Reports go to --output (or `out`); failures are
/// written to `err` as a one-line JSON record. Returns the exit status:
/// 0 all checks pass, 1 a check failed, 2 bad input.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace vgf::cli
