#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "vgf/grid.hpp"

namespace vgf {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;

inline constexpr double kHermitianTol = 1e-12;
inline constexpr double kEvennessTol = 1e-12;
inline constexpr double kPsdTol = 1e-10;
inline constexpr double kRealTol = 1e-10;

/// Per-cell d x d mass matrices on a regular system. Only positive cells are
/// stored; the mass of cell -k is the entrywise conjugate of cell k.
class MatrixSpectralMeasure {
 public:
  MatrixSpectralMeasure(SystemPtr system, int dim_field);

  const RegularSystem& system() const { return *system_; }
  const SystemPtr& system_ptr() const { return system_; }
  int dim_field() const { return d_; }

  CMatrix mass(int k) const;
  CMatrix mass_at(int slot) const;
  void set_mass(int k, const CMatrix& m);

  cplx entry(int slot, int j, int jp) const {
    const int n = system_->pair_count();
    if (slot >= n) return pos_[index(slot - n, j, jp)];
    return std::conj(pos_[index(system_->mirror(slot) - n, j, jp)]);
  }
  double diag(int slot, int j) const {
    return pos_[index(system_->positive_slot(slot) - system_->pair_count(), j, j)].real();
  }

  double trace_at(int slot) const;
  double max_cell_trace() const;
  double total_trace() const;

 private:
  std::size_t index(int pos, int j, int jp) const {
    return (static_cast<std::size_t>(pos) * d_ + j) * d_ + jp;
  }

  SystemPtr system_;
  int d_;
  std::vector<cplx> pos_;
};

/// Unconstrained per-slot matrices, e.g. as read from a file, so evenness can
/// be checked instead of assumed.
struct RawMeasure {
  SystemPtr system;
  int dim_field = 0;
  std::vector<CMatrix> masses;  // by slot

  static RawMeasure from(const MatrixSpectralMeasure& g);
};

struct CellReport {
  int index = 0;
  double hermitian_defect = 0.0;
  double min_eigenvalue = 0.0;
  double evenness_defect = 0.0;
};

struct ValidationReport {
  std::vector<CellReport> cells;  // slot order
  bool hermitian_ok = true;
  bool psd_ok = true;
  bool evenness_ok = true;
  bool ok() const { return hermitian_ok && psd_ok && evenness_ok; }
  // First failing cell and invariant name; empty when ok().
  std::string first_failure() const;
};

ValidationReport validate(const RawMeasure& raw);
ValidationReport validate(const MatrixSpectralMeasure& g);

/// Requires validate(raw).ok(); keeps the positive-cell masses.
MatrixSpectralMeasure to_measure(const RawMeasure& raw);

/// r_{j,j'}(p) on the unit torus.
Eigen::MatrixXd correlation(const MatrixSpectralMeasure& g, std::span<const std::int64_t> p);
/// Same sum over an arbitrary per-slot matrix family; throws NonEvenMeasure
/// when the imaginary residue exceeds kRealTol.
Eigen::MatrixXd correlation(const RawMeasure& raw, std::span<const std::int64_t> p);

std::vector<double> trace_measure(const MatrixSpectralMeasure& g);

/// Measure on the box scaled by N with masses times N^{2 nu/n} A_N^{-2/n}.
MatrixSpectralMeasure rescale(const MatrixSpectralMeasure& g, int N, double a_n, int n);

cplx test_integral(const MatrixSpectralMeasure& g, std::span<const double> f, int j, int jp);

double moderate_increase_check(const MatrixSpectralMeasure& g, double r);

/// Each cell's mass is split evenly over its factor^nu children.
MatrixSpectralMeasure refine(const MatrixSpectralMeasure& g, int factor);

/// Cell masses of a density x -> d x d matrix by tensor Gauss-Kronrod
/// quadrature over each positive cell.
MatrixSpectralMeasure from_density(SystemPtr system, int dim_field,
                                   const std::function<CMatrix(std::span<const double>)>& density);

/// Masses given per positive cell from its corners.
MatrixSpectralMeasure from_cell_masses(
    SystemPtr system, int dim_field,
    const std::function<CMatrix(std::span<const double>, std::span<const double>)>& mass);

/// The cells of g inside [-h, h)^nu, on a grid with g's spacing. h must be a
/// whole number of cells on every axis.
MatrixSpectralMeasure restrict_measure(const MatrixSpectralMeasure& g, double half_extent);

/// Random valid measure used by tests and the acceptance suite: per positive
/// cell B B^* scaled to a random total, with rank at most `rank`.
MatrixSpectralMeasure random_measure(SystemPtr system, int dim_field, std::uint64_t seed,
                                     int rank = -1);

}  // namespace vgf
