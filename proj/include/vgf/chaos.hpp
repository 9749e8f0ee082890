#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "vgf/sampler.hpp"
#include "vgf/spectral.hpp"

namespace vgf {

/// Simple function of n cell indices, stored sparsely. Tuples are slot tuples
/// kept in lexicographic order; tuples with two coordinates in the same cell
/// pair are dropped at construction.
class SimpleKernel {
 public:
  using TupleFn = std::function<cplx(std::span<const int>)>;

  /// Evaluates fn on every nondiagonal tuple and keeps the nonzero values.
  static SimpleKernel from_function(SystemPtr system, int dim_field, std::vector<int> colours,
                                    const TupleFn& fn);
  /// Entries given as (slot tuple, value); duplicate tuples are rejected.
  static SimpleKernel from_entries(SystemPtr system, int dim_field, std::vector<int> colours,
                                   std::vector<std::pair<std::vector<int>, cplx>> entries);
  /// Entries given as packed keys (see key_of). Repeated keys are summed and
  /// diagonal tuples dropped.
  static SimpleKernel from_keyed(SystemPtr system, int dim_field, std::vector<int> colours,
                                 std::vector<std::pair<std::uint64_t, cplx>> keyed);
  /// Order-0 kernel: the real constant c.
  static SimpleKernel constant(SystemPtr system, int dim_field, double c);
  static SimpleKernel zero(SystemPtr system, int dim_field, std::vector<int> colours);

  int order() const { return static_cast<int>(colours_.size()); }
  const std::vector<int>& colours() const { return colours_; }
  const RegularSystem& system() const { return *system_; }
  const SystemPtr& system_ptr() const { return system_; }
  int dim_field() const { return d_; }

  std::size_t size() const { return values_.size(); }
  std::span<const std::uint16_t> tuple(std::size_t e) const {
    return {slots_.data() + e * colours_.size(), colours_.size()};
  }
  cplx value(std::size_t e) const { return values_[e]; }
  std::span<const cplx> values() const { return values_; }

  /// Value at a slot tuple (0 when absent).
  cplx at(std::span<const int> slots) const;
  cplx at(std::span<const std::uint16_t> slots) const;

  /// sum |f|^2 prod_s G_{j_s j_s}(Delta_{k_s}).
  double norm_squared(const MatrixSpectralMeasure& g) const;
  /// max |f(k) - conj f(-k)|.
  double hermitian_defect() const;

  std::uint64_t key_of(std::span<const int> slots) const;
  std::uint64_t key_of(std::span<const std::uint16_t> slots) const;

 private:
  SimpleKernel(SystemPtr system, int dim_field, std::vector<int> colours);
  void check_colours() const;
  // Sorts, merges nothing, validates Hermitian symmetry.
  void finalize(std::vector<std::pair<std::uint64_t, cplx>> keyed, bool reject_duplicates);

  SystemPtr system_;
  int d_;
  std::vector<int> colours_;
  std::vector<std::uint64_t> keys_;
  std::vector<std::uint16_t> slots_;
  std::vector<cplx> values_;
};

bool is_diagonal_tuple(const RegularSystem& sys, std::span<const int> slots);

SimpleKernel tensor_kernel(SystemPtr system, int dim_field,
                           std::span<const std::vector<cplx>> phis, std::vector<int> colours);

/// Random Hermitian kernel: each nondiagonal tuple is kept with probability
/// `density` and given a standard complex Gaussian value (conjugate on the
/// mirror tuple).
SimpleKernel random_kernel(SystemPtr system, int dim_field, std::vector<int> colours,
                           std::uint64_t seed, double density = 1.0);

double evaluate(const SpectralSample& s, const SimpleKernel& f);
/// One value per replica of the block.
std::vector<double> evaluate(const SampleBlock& b, const SimpleKernel& f);

double analytic_covariance(const SimpleKernel& f, const SimpleKernel& h,
                           const MatrixSpectralMeasure& g);

double second_moment_bound(const SimpleKernel& f, const MatrixSpectralMeasure& g);

/// h_pi(k_1..k_n) = h(k_{pi(1)}..k_{pi(n)}) with colours (j_{pi^{-1}(1)}..);
/// pi is 0-based, pi[t] = pi(t).
SimpleKernel permute_kernel(const SimpleKernel& h, std::span<const int> pi);

/// Multiplies values by exp(i<u, u_{k_1} + ... + u_{k_n}>).
SimpleKernel shift_kernel(const SimpleKernel& f, std::span<const std::int64_t> u);

/// The same piecewise constant function on a refinement of f's system.
SimpleKernel lift_kernel(const SimpleKernel& f, SystemPtr fine);
/// Per-slot values of a one-variable function carried to a refinement.
std::vector<cplx> lift_function(const RegularSystem& coarse, const RegularSystem& fine,
                                std::span<const cplx> phi);

void require_same_system(const RegularSystem& a, const RegularSystem& b);

}  // namespace vgf
