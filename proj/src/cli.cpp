#include "vgf/cli.hpp"

#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "vgf/error.hpp"
#include "vgf/io.hpp"
#include "vgf/suites.hpp"

namespace vgf::cli {

std::vector<std::vector<std::int64_t>> parse_lags(const std::string& text, std::size_t dim) {
  std::vector<std::vector<std::int64_t>> out;
  std::vector<std::int64_t> point;
  std::string token;
  auto flush_number = [&] {
    if (token.empty()) fail(ErrorCode::Parse, "empty coordinate in lag list '" + text + "'");
    std::size_t used = 0;
    std::int64_t v = 0;
    try {
      v = std::stoll(token, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != token.size()) fail(ErrorCode::Parse, "bad lag coordinate '" + token + "'");
    point.push_back(v);
    token.clear();
  };
  auto flush_point = [&] {
    flush_number();
    if (point.size() != dim)
      fail(ErrorCode::Parse, "lag has " + std::to_string(point.size()) + " coordinates, expected " +
                                 std::to_string(dim));
    out.push_back(point);
    point.clear();
  };
  for (char c : text) {
    if (c == ' ') continue;
    if (c == ';' || (c == ',' && dim == 1))
      flush_point();
    else if (c == ',')
      flush_number();
    else
      token += c;
  }
  if (!token.empty() || !point.empty()) flush_point();
  return out;
}

namespace {

struct Options {
  std::string measure, kernel, config, lags, suite, output, summary;
  std::string format = "csv";
  std::uint64_t seed = 1;
  int replicas = 2000;
  int n = 2, m = 1, refinements = 3, instances = 0;
};

std::string error_record(const std::string& code, const std::string& message) {
  Json rec = Json::object();
  rec["error"] = true;
  rec["code"] = code;
  rec["message"] = message;
  return rec.dump();
}

void emit(const Report& rep, const Options& o, std::ostream& out) {
  const std::string text = o.format == "json" ? rep.to_json().dump(2) + "\n" : rep.to_csv();
  if (o.output.empty())
    out << text;
  else
    write_text_file(o.output, text);
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Vector-valued Gaussian stationary field toolkit"};
  app.require_subcommand(1);
  Options o;
  auto common = [&](CLI::App* sub, bool seeded) {
    sub->add_option("--output,-o", o.output, "report path (default: stdout)");
    sub->add_option("--format", o.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    if (seeded) sub->add_option("--seed", o.seed, "64-bit seed");
  };
  auto* validate_cmd = app.add_subcommand("validate", "check a measure file");
  validate_cmd->add_option("--measure", o.measure)->required();
  common(validate_cmd, false);

  auto* corr = app.add_subcommand("correlation", "correlation function at lags");
  corr->add_option("--measure", o.measure)->required();
  corr->add_option("--lags", o.lags)->required();
  common(corr, false);

  auto* sample_cmd = app.add_subcommand("sample", "empirical moments of the random measure");
  sample_cmd->add_option("--measure", o.measure)->required();
  sample_cmd->add_option("--replicas", o.replicas);
  sample_cmd->add_option("--lags", o.lags);
  common(sample_cmd, true);

  auto* chaos = app.add_subcommand("chaos-moments", "Monte Carlo vs analytic integral moments");
  chaos->add_option("--measure", o.measure)->required();
  chaos->add_option("--kernel", o.kernel)->required();
  chaos->add_option("--replicas", o.replicas);
  common(chaos, true);

  auto* diag = app.add_subcommand("verify-diagram", "product formula under refinement");
  diag->add_option("--measure", o.measure)->required();
  diag->add_option("--n", o.n);
  diag->add_option("--m", o.m);
  diag->add_option("--refinements", o.refinements);
  diag->add_option("--replicas", o.replicas);
  common(diag, true);

  auto* ito = app.add_subcommand("verify-ito", "Wick product of integrals under refinement");
  ito->add_option("--measure", o.measure)->required();
  ito->add_option("--n", o.n);
  ito->add_option("--refinements", o.refinements);
  ito->add_option("--replicas", o.replicas);
  common(ito, true);

  auto* wick = app.add_subcommand("verify-wick", "Wick algebra suites");
  wick->add_option("--suite", o.suite)->required()->check(CLI::IsMember({"recursion", "expansion", "shift"}));
  common(wick, true);

  auto* limit = app.add_subcommand("limit-experiment", "limit theorem harness");
  limit->add_option("--config", o.config)->required();
  limit->add_option("--summary", o.summary, "CSV summary path");
  common(limit, false);

  auto* suite = app.add_subcommand("suite", "randomized spectral, sampler, chaos or diagram suite");
  suite->add_option("--name", o.suite)->required()->check(CLI::IsMember({"spectral", "sampler", "chaos", "diagram"}));
  suite->add_option("--instances", o.instances);
  suite->add_option("--replicas", o.replicas);
  common(suite, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << error_record("Usage", e.what()) << "\n";
    return 2;
  }

  try {
    Report rep;
    if (*validate_cmd) {
      const RawMeasure raw = load_raw_measure(o.measure);
      rep = validate_report(raw);
      emit(rep, o, out);
      if (!rep.pass()) {
        try {
          to_measure(raw);
        } catch (const Error& e) {
          err << error_record(std::string(to_string(e.code())), e.what()) << "\n";
        }
        return 1;
      }
      return 0;
    }
    if (*corr) {
      const auto g = load_measure(o.measure);
      rep = correlation_report(g, parse_lags(o.lags, g.system().dim()));
    } else if (*sample_cmd) {
      const auto g = load_measure(o.measure);
      rep = sample_report(g, o.seed, o.replicas, parse_lags(o.lags, g.system().dim()));
    } else if (*chaos) {
      const auto g = load_measure(o.measure);
      rep = chaos_moments_report(g, load_kernel(o.kernel, g.system_ptr(), g.dim_field()), o.seed, o.replicas);
    } else if (*diag) {
      rep = diagram_refinement(load_measure(o.measure), o.n, o.m, o.refinements, o.replicas, o.seed);
    } else if (*ito) {
      rep = ito_refinement(load_measure(o.measure), o.n, o.refinements, o.replicas, o.seed);
    } else if (*wick) {
      rep = wick_suite(o.suite, o.seed);
    } else if (*limit) {
      if (!limit->count("--format")) o.format = "json";
      const LimitConfig cfg = load_limit_config(o.config);
      rep = limit_experiment_report(cfg, run_limit_experiment(cfg));
      if (!o.summary.empty()) write_text_file(o.summary, rep.to_csv());
    } else if (*suite) {
      if (o.suite == "spectral") {
        rep = spectral_suite(o.seed, o.instances ? o.instances : 100);
      } else if (o.suite == "sampler") {
        rep = sampler_suite(sampler_fixtures(), o.seed, o.replicas);
      } else if (o.suite == "chaos") {
        rep = chaos_suite(o.seed, o.instances ? o.instances : 12, o.replicas);
      } else {
        rep = diagram_structure_suite(o.seed, o.instances ? o.instances : 100);
      }
    }
    emit(rep, o, out);
    err << rep.summary();
    return rep.pass() ? 0 : 1;
  } catch (const Error& e) {
    err << error_record(std::string(to_string(e.code())), e.what()) << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << error_record("Internal", e.what()) << "\n";
    return 2;
  }
}

}  // namespace vgf::cli
