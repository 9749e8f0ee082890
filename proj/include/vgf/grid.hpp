#pragma once

#include <complex>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

namespace vgf {

// Symmetric box [-h_1, h_1) x ... x [-h_nu, h_nu).
struct Box {
  std::vector<double> half_extent;

  std::size_t dim() const { return half_extent.size(); }
  double volume() const;
  bool operator==(const Box&) const = default;
};

struct Cell {
  int index = 0;  // signed index k, never 0
  std::vector<double> lower;
  std::vector<double> upper;
};

/// Uniform symmetric partition of a box into half-open axis-aligned cells,
/// indexed by k = +-1, ..., +-N with cell(-k) = -cell(k).
///
/// Cells are stored in "slots" 0..2N-1 following row-major order of the
/// per-axis cell indices. Negation reverses every axis, which maps slot s to
/// 2N-1-s, so slots in the upper half (first axis nonnegative) carry the
/// positive indices k = s - N + 1 and the lower half carries their mirrors.
class RegularSystem {
 public:
  static RegularSystem build(std::vector<double> half_extent,
                             std::vector<int> cells_per_axis);
  static RegularSystem build(int dim, double half_extent, int cells_per_axis);

  std::size_t dim() const { return box_.dim(); }
  const Box& box() const { return box_; }
  std::span<const int> cells_per_axis() const { return cells_per_axis_; }

  int pair_count() const { return slot_count_ / 2; }
  int slot_count() const { return slot_count_; }

  int slot_of(int k) const;
  int index_of(int slot) const;
  int mirror(int slot) const { return slot_count_ - 1 - slot; }
  // Slot of the positive member of the pair containing `slot`.
  int positive_slot(int slot) const {
    return slot >= pair_count() ? slot : mirror(slot);
  }
  bool is_positive(int slot) const { return slot >= pair_count(); }

  Cell cell(int k) const;
  std::span<const double> representative_at(int slot) const {
    return {reps_.data() + static_cast<std::size_t>(slot) * dim(), dim()};
  }
  std::vector<double> representative(int k) const;
  double representative_norm(int slot) const;
  double cell_volume() const { return cell_volume_; }
  std::vector<double> cell_width() const;

  // Per-axis integer cell position (0-based) of a slot.
  std::vector<int> axis_position(int slot) const;
  int slot_at(std::span<const int> position) const;

  /// Geometry-derived stream key of a cell: the per-axis offsets of the cell
  /// from the origin, so equally spaced grids of different extent agree on
  /// the key of a shared cell.
  std::uint64_t cell_key(int slot) const;

  RegularSystem refine(int factor) const;
  /// For a system obtained by refine(), the coarse slot that contains each
  /// fine slot.
  std::vector<int> parent_slots(const RegularSystem& coarse) const;

  bool is_unit_torus() const;
  /// <p, u_k> = pi * phase_numerator(p, slot) / phase_denominator() on the
  /// unit torus; the numerator is exact integer arithmetic.
  std::int64_t phase_numerator(std::span<const std::int64_t> p, int slot) const;
  std::int64_t phase_denominator() const { return phase_den_; }
  std::complex<double> phase(std::int64_t numerator) const;
  std::complex<double> phase(std::span<const std::int64_t> p, int slot) const {
    return phase(phase_numerator(p, slot));
  }

  bool operator==(const RegularSystem& other) const {
    return box_ == other.box_ && cells_per_axis_ == other.cells_per_axis_;
  }

 private:
  RegularSystem() = default;

  Box box_;
  std::vector<int> cells_per_axis_;
  std::vector<int> strides_;
  int slot_count_ = 0;
  double cell_volume_ = 0.0;
  std::vector<double> reps_;
  std::int64_t phase_den_ = 1;
  std::vector<std::complex<double>> phase_table_;
};

using SystemPtr = std::shared_ptr<const RegularSystem>;

inline SystemPtr share(RegularSystem system) {
  return std::make_shared<const RegularSystem>(std::move(system));
}

}  // namespace vgf
