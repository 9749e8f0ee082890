#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "vgf/chaos.hpp"
#include "vgf/wick.hpp"

namespace vgf {

/// Homogeneous polynomial sum a_{k_1..k_d} X_1^{k_1} ... X_d^{k_d}.
struct WickSpec {
  int order = 0;
  int dim_field = 0;
  std::vector<std::pair<std::vector<int>, double>> terms;

  void check() const;
  Polynomial polynomial() const;
  /// Colour list with k_1 copies of 0, k_2 copies of 1, ...
  static std::vector<int> colours_of(const std::vector<int>& exponents);
};

/// (e^{ix} - 1) / (ix), with its series near 0.
cplx dirichlet_unit(double x);
/// One-axis factor of h^N at s = y_1 + ... + y_n; N = 0 selects h^0.
cplx rescaled_factor(double s, int N);
/// prod over axes of rescaled_factor(sum_t y_t^{(l)}); points are n nu-vectors.
cplx rescaled_kernel(const std::vector<std::vector<double>>& points, int N);

/// Sum over Wick terms of a * h^N on the tuples of `system` (N = 0: h^0).
/// One kernel per term, paired with its coefficient already applied.
std::vector<SimpleKernel> rescaled_kernels(const WickSpec& spec, SystemPtr system, int N);

/// Grid version of Y(0): the tensor of constant one functions per Wick term,
/// coefficient applied.
std::vector<SimpleKernel> unit_kernels(const WickSpec& spec, SystemPtr system);

/// A_N^{-1} sum_{p in B_N} :P(X(p)):, with the field synthesized from s.
double direct_SN(const WickSpec& spec, const MatrixSpectralMeasure& g, const SpectralSample& s,
                 int N, double a_n);
/// A_N^{-1} sum_{p in B_N} sum_terms I_n(shift_kernel(unit kernel, p)): the
/// grid chaos representation of direct_SN.
double direct_chaos_SN(const std::vector<SimpleKernel>& unit, const SpectralSample& s, int N,
                       double a_n);
/// sum over terms of I_n(a h^N) on a sample of the rescaled measure.
double spectral_SN(const std::vector<SimpleKernel>& kernels, const SpectralSample& rescaled);
std::vector<double> spectral_SN(const std::vector<SimpleKernel>& kernels, const SampleBlock& b);

/// Long-memory fixture on the unit torus (nu = 1): density
/// |x|^{-beta} (1 - x^2 / (2 pi^2)) M for x > 0 and its conjugate for x < 0.
struct LongMemoryFixture {
  double beta = 0.85;
  CMatrix m;  // Hermitian psd, d x d

  int dim_field() const { return static_cast<int>(m.rows()); }
  /// Mass of [lo, hi) with 0 <= lo < hi <= pi.
  CMatrix base_mass(double lo, double hi) const;
  /// Mass of [lo, hi), 0 <= lo < hi, under the limit density |y|^{-beta} M.
  CMatrix limit_mass(double lo, double hi) const;
  MatrixSpectralMeasure base_measure(int cells) const;
  MatrixSpectralMeasure limit_measure(double half_extent, int cells) const;
};

struct LimitConfig {
  LongMemoryFixture fixture;
  WickSpec wick;
  std::vector<int> schedule{4, 8, 16, 32};
  int cells_per_period = 8;  // cells per length 2 pi on the rescaled axis
  int replicas = 20000;
  std::uint64_t seed = 1;
  int chunk = 1000;
  std::vector<double> cf_points{-2.0, -1.0, -0.5, 0.5, 1.0, 2.0};
  double condition_a_T = 2.0 * 3.141592653589793;
  int condition_a_points = 41;
  double condition_a_threshold = 0.05;
  std::vector<double> epsilons{0.2, 0.1, 0.05};
  double tail_box_max = 256.0 * 3.141592653589793;
  double lemma_box = 4.0 * 3.141592653589793;
  double final_tolerance = 0.05;
  std::vector<int> calibration_probes{1024, 2048};
  std::optional<double> kappa;  // A_N = N^kappa; calibrated when absent
};

/// Exponent kappa with A_N = N^kappa making rescaled diagonal masses on a
/// fixed cell converge, from the log-log slope of G(A/N) at two probe N.
double calibrate_exponent(const LimitConfig& cfg);

struct ConditionARow {
  int N = 0;
  double sup_difference = 0.0;
};
struct ConditionAReport {
  std::vector<ConditionARow> rows;
  bool monotone = false;
  bool pass = false;
};
/// sup |h^N - h^0| over a lattice with `points` values per coordinate in
/// [-T, T]^{n nu}, scaled by the largest |a|.
ConditionAReport check_condition_a(const std::vector<int>& schedule, double T, int points, int n,
                                   int nu, double threshold, double coefficient_scale = 1.0);

struct TailRow {
  int N = 0;  // 0 for the limit
  double norm_squared = 0.0;
  std::vector<double> T;
  std::vector<double> relative_tail;  // tail / norm^2 at each T
};
struct ConditionBReport {
  std::vector<TailRow> rows;
  std::vector<double> epsilons;
  std::vector<double> uniform_T;  // per epsilon; negative when none exists
  bool pass = false;
};
/// Tail sums of sum_terms |f|^2 prod G_{jj} over nondiagonal tuples with a
/// coordinate outside [-T, T], one per T.
TailRow tail_row(const std::vector<SimpleKernel>& kernels, const MatrixSpectralMeasure& g,
                 const std::vector<double>& t_grid);
/// Same for the rescaled kernels a h^N (N = 0: h^0) without storing them.
TailRow tail_row(const WickSpec& spec, int N, const MatrixSpectralMeasure& g,
                 const std::vector<double>& t_grid);
/// Smallest T per epsilon with relative tail <= epsilon^2 in every row.
ConditionBReport check_condition_b(std::vector<TailRow> rows, const std::vector<double>& epsilons);

struct PsdLimitRow {
  int N = 0;
  double max_cell_difference = 0.0;
  double max_test_difference = 0.0;
};
struct PsdLimitReport {
  std::vector<PsdLimitRow> rows;
  bool converging = false;
  bool limit_valid = false;
  bool pass() const { return converging && limit_valid; }
};
/// Sequence and limit on one common grid; test functions are per-slot values.
/// Differences are relative to the largest entry of the limit. Converging
/// means nonincreasing differences with the last cell difference <= tol.
PsdLimitReport psd_limit_check(const std::vector<int>& ns,
                               const std::vector<MatrixSpectralMeasure>& sequence,
                               const MatrixSpectralMeasure& limit,
                               const std::vector<std::vector<double>>& test_functions,
                               double tol = 0.05);

/// Tent functions max(0, 1 - |x - c| / w) on the representatives.
std::vector<std::vector<double>> tent_functions(const RegularSystem& sys,
                                                const std::vector<double>& centres, double width);

struct MomentRow {
  int N = 0;
  double sigma = 0.0;
  std::vector<double> moments;        // E Z^k / sigma_0^k, k = 1..4
  std::vector<double> moment_gap;     // |E Z_N^k - E Z_0^k| / E |Z_0|^k
  std::vector<double> moment_gap_se;
  std::vector<cplx> cf;               // E exp(i t Z / sigma_0)
  std::vector<double> cf_gap;
  std::vector<double> cf_gap_se;
  double discrepancy = 0.0;  // max over all gaps
  double discrepancy_se = 0.0;
};

struct ConvergenceReport {
  double kappa = 0.0;
  double calibrated_kappa = 0.0;
  std::vector<double> a_n;
  double limit_half_extent = 0.0;
  double sigma0 = 0.0;
  MomentRow limit;
  std::vector<MomentRow> rows;
  bool nonincreasing = false;
  bool final_within = false;
  bool pass() const { return nonincreasing && final_within; }
};

struct LimitReport {
  ConditionAReport condition_a;
  ConditionBReport condition_b;
  PsdLimitReport psd_limit;
  ConvergenceReport convergence;
  bool pass() const {
    return condition_a.pass && condition_b.pass && psd_limit.pass() && convergence.pass();
  }
};

LimitReport run_limit_experiment(const LimitConfig& cfg);

}  // namespace vgf
