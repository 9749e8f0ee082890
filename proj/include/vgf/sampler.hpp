#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include "vgf/spectral.hpp"

namespace vgf {

/// One realization {Z_j(Delta_k)} of the random spectral measure.
///
/// Values are kept as base draws plus an accumulated integer lattice shift u;
/// the visible value is exp(i<u, u_k>) times the base draw, with the phase
/// taken from the system's exact phase table.
class SpectralSample {
 public:
  SpectralSample(SystemPtr system, int dim_field, std::vector<cplx> base,
                 std::vector<std::int64_t> shift = {});

  const RegularSystem& system() const { return *system_; }
  const SystemPtr& system_ptr() const { return system_; }
  int dim_field() const { return d_; }

  cplx value(int slot, int j) const { return values_[static_cast<std::size_t>(slot) * d_ + j]; }
  cplx at_index(int k, int j) const { return value(system_->slot_of(k), j); }
  cplx base_value(int slot, int j) const { return base_[static_cast<std::size_t>(slot) * d_ + j]; }
  std::span<const cplx> values() const { return values_; }
  std::span<const cplx> base() const { return base_; }
  // Empty when the sample has never been shifted.
  const std::vector<std::int64_t>& shift() const { return shift_; }

 private:
  SystemPtr system_;
  int d_;
  std::vector<cplx> base_;
  std::vector<std::int64_t> shift_;
  std::vector<cplx> values_;
};

/// Many replicas of a sample laid out for batched evaluation: component j,
/// slot s, replica r lives at ((j * S + s) * R + r) in re/im.
struct SampleBlock {
  SystemPtr system;
  int dim_field = 0;
  int replicas = 0;
  std::vector<double> re;
  std::vector<double> im;

  std::size_t offset(int j, int slot) const {
    return (static_cast<std::size_t>(j) * system->slot_count() + slot) * replicas;
  }
  SpectralSample replica(int r) const;
  static SampleBlock from(std::span<const SpectralSample> samples);
};

/// F F^* = G per positive cell: complex Cholesky, with an eigendecomposition
/// fallback that clips eigenvalues in [-kPsdTol, 0) to zero.
CMatrix covariance_factor(const CMatrix& g);

class Sampler {
 public:
  explicit Sampler(const MatrixSpectralMeasure& g);

  const MatrixSpectralMeasure& measure() const { return g_; }

  SpectralSample draw(std::uint64_t seed, std::uint64_t replica) const;
  SampleBlock draw_block(std::uint64_t seed, std::uint64_t first_replica, int count) const;

 private:
  // Writes the d values of positive slot s for one replica.
  void draw_cell(std::uint64_t seed, std::uint64_t replica, int slot, cplx* out) const;

  MatrixSpectralMeasure g_;
  std::vector<CMatrix> factors_;  // by positive position
  std::vector<std::uint64_t> keys_;
};

SpectralSample sample(const MatrixSpectralMeasure& g, std::uint64_t seed,
                      std::uint64_t replica = 0);

/// Sums child cells of a refined sample onto the coarse system.
SpectralSample aggregate(const SpectralSample& fine, SystemPtr coarse);
SampleBlock aggregate(const SampleBlock& fine, SystemPtr coarse);

/// X_j(p) for each lag; rows are lags, columns components.
Eigen::MatrixXd synthesize_field(const SpectralSample& s,
                                 std::span<const std::vector<std::int64_t>> lags);

/// sum_k phi(k) Z_j(Delta_k) with phi given per slot.
double integrate_one_fold(const SpectralSample& s, std::span<const cplx> phi, int j);

/// Throws NotRealKernel unless phi(-k) = conj(phi(k)) for every cell.
void require_hermitian_function(const RegularSystem& sys, std::span<const cplx> phi);

/// exp(i<u, u_k>) Z_j(Delta_k).
SpectralSample shift_sample(const SpectralSample& s, std::span<const std::int64_t> u);

}  // namespace vgf
