#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "vgf/chaos.hpp"

namespace vgf {

/// Partial matching between a row of n vertices and a row of m vertices.
/// Vertices are 0-based; edges are kept sorted by their first-row vertex.
struct Diagram {
  int n = 0;
  int m = 0;
  std::vector<std::pair<int, int>> edges;

  int size() const { return static_cast<int>(edges.size()); }
  std::vector<int> open_row1() const;
  std::vector<int> open_row2() const;
};

std::vector<Diagram> enumerate_diagrams(int n, int m);
/// sum_r C(n,r) C(m,r) r!
std::uint64_t diagram_count(int n, int m);

struct Contraction {
  Diagram diagram;
  SimpleKernel kernel;
  /// ||h_gamma|| before diagonal tuples are discarded.
  double norm_before_zeroing = 0.0;
  /// Colour pair (j_v, j'_w) of the measure integrating each edge.
  std::vector<std::pair<int, int>> edge_measures;
};

/// Output colours are (j_r for open r in row 1, j'_t for open t in row 2).
Contraction contract(const SimpleKernel& h1, const SimpleKernel& h2, const Diagram& gamma,
                     const MatrixSpectralMeasure& g);

std::vector<Contraction> product_expansion(const SimpleKernel& h1, const SimpleKernel& h2,
                                           const MatrixSpectralMeasure& g);

/// Product with a one-variable kernel, term p integrating argument p of h1
/// against conj(phi) G_{j_p, j'_1}. Entry 0 is the tensor term; entry p + 1
/// matches the single-edge diagram {(p, 0)}.
std::vector<Contraction> corollary_expansion(const SimpleKernel& h1, const SimpleKernel& phi,
                                             const MatrixSpectralMeasure& g);

}  // namespace vgf
