#include "vgf/grid.hpp"

#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

#include "vgf/error.hpp"

namespace vgf {

namespace {

// h * (2c - M) / M: negating c -> M - c negates the result bit-exactly, and
// refining (c, M) -> (f c, f M) reproduces the same double.
double grid_coordinate(double half_extent, long long twice_c_minus_m, long long m) {
  return half_extent * (static_cast<double>(twice_c_minus_m) / static_cast<double>(m));
}

std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

double Box::volume() const {
  double v = 1.0;
  for (double h : half_extent) v *= 2.0 * h;
  return v;
}

RegularSystem RegularSystem::build(int dim, double half_extent, int cells_per_axis) {
  require(dim >= 1, ErrorCode::InvalidArgument, "grid dimension must be >= 1");
  return build(std::vector<double>(static_cast<std::size_t>(dim), half_extent),
               std::vector<int>(static_cast<std::size_t>(dim), cells_per_axis));
}

RegularSystem RegularSystem::build(std::vector<double> half_extent,
                                   std::vector<int> cells_per_axis) {
  require(!half_extent.empty(), ErrorCode::InvalidArgument, "grid dimension must be >= 1");
  require(half_extent.size() == cells_per_axis.size(), ErrorCode::InvalidArgument,
          "half_extent and cells_per_axis differ in length");
  for (std::size_t a = 0; a < half_extent.size(); ++a) {
    require(std::isfinite(half_extent[a]) && half_extent[a] > 0.0, ErrorCode::InvalidArgument,
            "half_extent must be positive on every axis");
    require(cells_per_axis[a] > 0, ErrorCode::InvalidArgument,
            "cells_per_axis must be positive on every axis");
    require(cells_per_axis[a] % 2 == 0, ErrorCode::SymmetryViolation,
            "cells_per_axis must be even on every axis (axis " + std::to_string(a) + " has " +
                std::to_string(cells_per_axis[a]) + ")");
  }

  RegularSystem sys;
  sys.box_.half_extent = std::move(half_extent);
  sys.cells_per_axis_ = std::move(cells_per_axis);
  const std::size_t nu = sys.dim();

  sys.strides_.assign(nu, 1);
  long long total = 1;
  for (std::size_t a = nu; a-- > 0;) {
    sys.strides_[a] = static_cast<int>(total);
    total *= sys.cells_per_axis_[a];
    require(total <= (1LL << 30), ErrorCode::InvalidArgument, "grid has too many cells");
  }
  sys.slot_count_ = static_cast<int>(total);
  sys.cell_volume_ = sys.box_.volume() / static_cast<double>(total);

  sys.reps_.resize(static_cast<std::size_t>(total) * nu);
  for (int s = 0; s < sys.slot_count_; ++s) {
    for (std::size_t a = 0; a < nu; ++a) {
      const long long m = sys.cells_per_axis_[a];
      const long long i = (s / sys.strides_[a]) % m;
      sys.reps_[static_cast<std::size_t>(s) * nu + a] =
          grid_coordinate(sys.box_.half_extent[a], 2 * i + 1 - m, m);
    }
  }

  if (sys.is_unit_torus()) {
    std::int64_t l = 1;
    for (int m : sys.cells_per_axis_) l = std::lcm(l, static_cast<std::int64_t>(m));
    sys.phase_den_ = l;
    const std::int64_t period = 2 * l;
    sys.phase_table_.resize(static_cast<std::size_t>(period));
    for (std::int64_t q = 0; q <= l; ++q) {
      std::complex<double> w;
      if (q == 0) {
        w = {1.0, 0.0};
      } else if (q == l) {
        w = {-1.0, 0.0};
      } else if (2 * q == l) {
        w = {0.0, 1.0};
      } else {
        const double angle = std::numbers::pi * static_cast<double>(q) / static_cast<double>(l);
        w = {std::cos(angle), std::sin(angle)};
      }
      sys.phase_table_[static_cast<std::size_t>(q)] = w;
      if (q > 0 && q < l) sys.phase_table_[static_cast<std::size_t>(period - q)] = std::conj(w);
    }
  }
  return sys;
}

int RegularSystem::slot_of(int k) const {
  const int n = pair_count();
  if (k == 0 || k < -n || k > n)
    fail(ErrorCode::InvalidArgument, "cell index " + std::to_string(k) + " out of range");
  return k > 0 ? n + k - 1 : n + k;
}

int RegularSystem::index_of(int slot) const {
  const int n = pair_count();
  return slot >= n ? slot - n + 1 : slot - n;
}

Cell RegularSystem::cell(int k) const {
  const int s = slot_of(k);
  Cell c;
  c.index = k;
  c.lower.resize(dim());
  c.upper.resize(dim());
  for (std::size_t a = 0; a < dim(); ++a) {
    const long long m = cells_per_axis_[a];
    const long long i = (s / strides_[a]) % m;
    c.lower[a] = grid_coordinate(box_.half_extent[a], 2 * i - m, m);
    c.upper[a] = grid_coordinate(box_.half_extent[a], 2 * (i + 1) - m, m);
  }
  return c;
}

std::vector<double> RegularSystem::representative(int k) const {
  const auto r = representative_at(slot_of(k));
  return {r.begin(), r.end()};
}

double RegularSystem::representative_norm(int slot) const {
  double s = 0.0;
  for (double x : representative_at(slot)) s += x * x;
  return std::sqrt(s);
}

std::vector<double> RegularSystem::cell_width() const {
  std::vector<double> w(dim());
  for (std::size_t a = 0; a < dim(); ++a) w[a] = 2.0 * box_.half_extent[a] / cells_per_axis_[a];
  return w;
}

std::vector<int> RegularSystem::axis_position(int slot) const {
  std::vector<int> pos(dim());
  for (std::size_t a = 0; a < dim(); ++a) pos[a] = (slot / strides_[a]) % cells_per_axis_[a];
  return pos;
}

int RegularSystem::slot_at(std::span<const int> position) const {
  int s = 0;
  for (std::size_t a = 0; a < dim(); ++a) s += position[a] * strides_[a];
  return s;
}

std::uint64_t RegularSystem::cell_key(int slot) const {
  std::uint64_t key = 0x243f6a8885a308d3ULL;
  for (std::size_t a = 0; a < dim(); ++a) {
    const long long offset =
        static_cast<long long>((slot / strides_[a]) % cells_per_axis_[a]) - cells_per_axis_[a] / 2;
    key = mix64(key ^ static_cast<std::uint64_t>(offset + (1LL << 40)));
  }
  return key;
}

RegularSystem RegularSystem::refine(int factor) const {
  require(factor >= 1, ErrorCode::InvalidArgument, "refinement factor must be >= 1");
  std::vector<int> cells(cells_per_axis_);
  for (int& m : cells) m *= factor;
  return build(box_.half_extent, std::move(cells));
}

std::vector<int> RegularSystem::parent_slots(const RegularSystem& coarse) const {
  require(coarse.box_ == box_ && coarse.dim() == dim(), ErrorCode::MismatchedSystems,
          "parent_slots: boxes differ");
  std::vector<int> factor(dim());
  for (std::size_t a = 0; a < dim(); ++a) {
    require(cells_per_axis_[a] % coarse.cells_per_axis_[a] == 0, ErrorCode::MismatchedSystems,
            "parent_slots: system is not a refinement of the coarse system");
    factor[a] = cells_per_axis_[a] / coarse.cells_per_axis_[a];
  }
  std::vector<int> parents(static_cast<std::size_t>(slot_count_));
  std::vector<int> pos(dim());
  for (int s = 0; s < slot_count_; ++s) {
    for (std::size_t a = 0; a < dim(); ++a)
      pos[a] = ((s / strides_[a]) % cells_per_axis_[a]) / factor[a];
    parents[static_cast<std::size_t>(s)] = coarse.slot_at(pos);
  }
  return parents;
}

bool RegularSystem::is_unit_torus() const {
  for (double h : box_.half_extent)
    if (h != std::numbers::pi) return false;
  return true;
}

std::int64_t RegularSystem::phase_numerator(std::span<const std::int64_t> p, int slot) const {
  require(is_unit_torus(), ErrorCode::InvalidArgument,
          "lattice phases are defined on the unit torus only");
  require(p.size() == dim(), ErrorCode::InvalidArgument, "lag dimension mismatch");
  std::int64_t m = 0;
  for (std::size_t a = 0; a < dim(); ++a) {
    const std::int64_t cells = cells_per_axis_[a];
    const std::int64_t i = (slot / strides_[a]) % cells;
    m += p[a] * (2 * i + 1 - cells) * (phase_den_ / cells);
  }
  return m;
}

std::complex<double> RegularSystem::phase(std::int64_t numerator) const {
  const std::int64_t period = 2 * phase_den_;
  std::int64_t q = numerator % period;
  if (q < 0) q += period;
  return phase_table_[static_cast<std::size_t>(q)];
}

}  // namespace vgf
