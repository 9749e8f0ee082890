#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "vgf/limits.hpp"
#include "vgf/report.hpp"

namespace vgf {

/// Two-sided normal quantile such that `count` independent |z| scores all
/// stay below it with the same probability as one score stays within 3
/// standard errors.
double family_z(std::size_t count);

/// validate report: per-cell Hermitian defect, min eigenvalue, evenness.
Report validate_report(const RawMeasure& raw);
/// correlation table (p, j, j', value).
Report correlation_report(const MatrixSpectralMeasure& g,
                          const std::vector<std::vector<std::int64_t>>& lags);
/// Randomized measures: validity, realness and transpose symmetry of the
/// correlation, psd block Toeplitz matrices.
Report spectral_suite(std::uint64_t seed, int instances);

/// Empirical cell moments and field covariances against the measure.
Report sample_report(const MatrixSpectralMeasure& g, std::uint64_t seed, int replicas,
                     const std::vector<std::vector<std::int64_t>>& lags);
/// The sampler fixtures used by the acceptance suite.
std::vector<MatrixSpectralMeasure> sampler_fixtures();
Report sampler_suite(const std::vector<MatrixSpectralMeasure>& measures, std::uint64_t seed,
                     int replicas);

Report chaos_moments_report(const MatrixSpectralMeasure& g, const SimpleKernel& f,
                            std::uint64_t seed, int replicas);
Report chaos_suite(std::uint64_t seed, int instances, int replicas);

/// Random kernels of orders n and m on g's grid; levels refine by 2 each.
Report diagram_refinement(const MatrixSpectralMeasure& g, int n, int m, int levels, int replicas,
                          std::uint64_t seed);
/// Diagram counts, the norm inequality and the one-edge expansion.
Report diagram_structure_suite(std::uint64_t seed, int pairs);

/// Random one-variable kernels; levels refine by 2 each. n = 1 checks exact
/// agreement instead of decay.
Report ito_refinement(const MatrixSpectralMeasure& g, int n, int levels, int replicas,
                      std::uint64_t seed);

/// suite: "recursion", "expansion" or "shift".
Report wick_suite(const std::string& suite, std::uint64_t seed);

Report limit_experiment_report(const LimitConfig& cfg, const LimitReport& rep);

}  // namespace vgf
