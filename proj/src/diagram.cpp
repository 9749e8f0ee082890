#include "vgf/diagram.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "vgf/error.hpp"

namespace vgf {

std::vector<int> Diagram::open_row1() const {
  std::vector<int> out;
  for (int v = 0; v < n; ++v)
    if (std::none_of(edges.begin(), edges.end(), [v](const auto& e) { return e.first == v; }))
      out.push_back(v);
  return out;
}

std::vector<int> Diagram::open_row2() const {
  std::vector<int> out;
  for (int w = 0; w < m; ++w)
    if (std::none_of(edges.begin(), edges.end(), [w](const auto& e) { return e.second == w; }))
      out.push_back(w);
  return out;
}

std::vector<Diagram> enumerate_diagrams(int n, int m) {
  require(n >= 0 && m >= 0, ErrorCode::InvalidArgument, "row sizes must be nonnegative");
  std::vector<Diagram> out;
  Diagram cur{n, m, {}};
  std::vector<bool> used(static_cast<std::size_t>(m), false);
  std::function<void(int)> rec = [&](int v) {
    if (v == n) {
      out.push_back(cur);
      return;
    }
    rec(v + 1);
    for (int w = 0; w < m; ++w) {
      if (used[static_cast<std::size_t>(w)]) continue;
      used[static_cast<std::size_t>(w)] = true;
      cur.edges.emplace_back(v, w);
      rec(v + 1);
      cur.edges.pop_back();
      used[static_cast<std::size_t>(w)] = false;
    }
  };
  rec(0);
  return out;
}

std::uint64_t diagram_count(int n, int m) {
  std::uint64_t total = 0;
  for (int r = 0; r <= std::min(n, m); ++r) {
    // C(n,r) C(m,r) r! = n!/(n-r)! * C(m,r)
    std::uint64_t falling = 1, binom = 1;
    for (int i = 0; i < r; ++i) {
      falling *= static_cast<std::uint64_t>(n - i);
      binom = binom * static_cast<std::uint64_t>(m - i) / static_cast<std::uint64_t>(i + 1);
    }
    total += falling * binom;
  }
  return total;
}

namespace {

double output_norm(const std::vector<std::pair<std::uint64_t, cplx>>& merged,
                   const std::vector<int>& colours, const MatrixSpectralMeasure& g) {
  const auto S = static_cast<std::uint64_t>(g.system().slot_count());
  const std::size_t n = colours.size();
  double acc = 0.0;
  for (const auto& [key, v] : merged) {
    double w = std::norm(v);
    std::uint64_t k = key;
    for (std::size_t t = n; t-- > 0;) {
      w *= g.diag(static_cast<int>(k % S), colours[t]);
      k /= S;
    }
    acc += w;
  }
  return std::sqrt(acc);
}

// Sorts by key and sums repeated keys in place.
void merge_keys(std::vector<std::pair<std::uint64_t, cplx>>& keyed) {
  std::sort(keyed.begin(), keyed.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  std::size_t out = 0;
  for (std::size_t i = 0; i < keyed.size();) {
    const std::uint64_t key = keyed[i].first;
    cplx v{};
    for (; i < keyed.size() && keyed[i].first == key; ++i) v += keyed[i].second;
    keyed[out++] = {key, v};
  }
  keyed.resize(out);
}

std::uint64_t ipow(std::uint64_t b, int e) {
  std::uint64_t r = 1;
  while (e-- > 0) r *= b;
  return r;
}

}  // namespace

Contraction contract(const SimpleKernel& h1, const SimpleKernel& h2, const Diagram& gamma,
                     const MatrixSpectralMeasure& g) {
  require_same_system(h1.system(), h2.system());
  require_same_system(h1.system(), g.system());
  require(gamma.n == h1.order() && gamma.m == h2.order(), ErrorCode::InvalidArgument,
          "diagram shape does not match kernel orders");
  const auto& sys = h1.system();
  const auto S = static_cast<std::uint64_t>(sys.slot_count());
  auto edges = gamma.edges;
  std::sort(edges.begin(), edges.end());
  const auto a1 = gamma.open_row1();
  const auto a2 = gamma.open_row2();
  const auto& j1 = h1.colours();
  const auto& j2 = h2.colours();

  std::vector<int> colours;
  for (int r : a1) colours.push_back(j1[static_cast<std::size_t>(r)]);
  for (int t : a2) colours.push_back(j2[static_cast<std::size_t>(t)]);
  std::vector<std::pair<int, int>> measures;
  for (const auto& [v, w] : edges)
    measures.emplace_back(j1[static_cast<std::size_t>(v)], j2[static_cast<std::size_t>(w)]);

  // h2 entries keyed by the mirrored slots at the matched positions, so that a
  // match against h1's slots c realizes h2(..., -c, ...).
  struct Row2 {
    std::uint64_t contracted;
    std::uint64_t free;
    cplx value;
  };
  std::vector<Row2> row2;
  row2.reserve(h2.size());
  for (std::size_t e = 0; e < h2.size(); ++e) {
    const auto tup = h2.tuple(e);
    std::uint64_t ck = 0, fk = 0;
    for (const auto& [v, w] : edges) ck = ck * S + static_cast<std::uint64_t>(sys.mirror(tup[static_cast<std::size_t>(w)]));
    for (int t : a2) fk = fk * S + tup[static_cast<std::size_t>(t)];
    row2.push_back({ck, fk, h2.value(e)});
  }
  std::sort(row2.begin(), row2.end(), [](const Row2& a, const Row2& b) {
    return a.contracted != b.contracted ? a.contracted < b.contracted : a.free < b.free;
  });

  const std::uint64_t shift = ipow(S, static_cast<int>(a2.size()));
  std::vector<std::pair<std::uint64_t, cplx>> keyed;
  for (std::size_t e = 0; e < h1.size(); ++e) {
    const auto tup = h1.tuple(e);
    std::uint64_t ck = 0, fk = 0;
    cplx weight = h1.value(e);
    for (std::size_t k = 0; k < edges.size(); ++k) {
      const int c = tup[static_cast<std::size_t>(edges[k].first)];
      ck = ck * S + static_cast<std::uint64_t>(c);
      weight *= g.entry(c, measures[k].first, measures[k].second);
    }
    if (weight == cplx{}) continue;
    for (int r : a1) fk = fk * S + tup[static_cast<std::size_t>(r)];
    auto lo = std::lower_bound(row2.begin(), row2.end(), ck,
                               [](const Row2& a, std::uint64_t key) { return a.contracted < key; });
    for (; lo != row2.end() && lo->contracted == ck; ++lo)
      keyed.emplace_back(fk * shift + lo->free, weight * lo->value);
  }
  merge_keys(keyed);
  const double norm = output_norm(keyed, colours, g);
  Contraction out{gamma, SimpleKernel::from_keyed(h1.system_ptr(), h1.dim_field(), colours,
                                                  std::move(keyed)),
                  norm, std::move(measures)};
  out.diagram.edges = std::move(edges);
  return out;
}

std::vector<Contraction> product_expansion(const SimpleKernel& h1, const SimpleKernel& h2,
                                           const MatrixSpectralMeasure& g) {
  std::vector<Contraction> out;
  for (const auto& gamma : enumerate_diagrams(h1.order(), h2.order()))
    out.push_back(contract(h1, h2, gamma, g));
  return out;
}

std::vector<Contraction> corollary_expansion(const SimpleKernel& h1, const SimpleKernel& phi,
                                             const MatrixSpectralMeasure& g) {
  require(phi.order() == 1, ErrorCode::InvalidArgument, "corollary needs a one-variable kernel");
  require_same_system(h1.system(), phi.system());
  require_same_system(h1.system(), g.system());
  const auto& sys = h1.system();
  const auto S = static_cast<std::uint64_t>(sys.slot_count());
  const int n = h1.order();
  const int jphi = phi.colours()[0];
  std::vector<Contraction> out;

  {
    std::vector<std::pair<std::uint64_t, cplx>> keyed;
    std::vector<int> colours = h1.colours();
    colours.push_back(jphi);
    for (std::size_t e = 0; e < h1.size(); ++e) {
      const std::uint64_t k1 = h1.key_of(h1.tuple(e));
      for (std::size_t q = 0; q < phi.size(); ++q)
        keyed.emplace_back(k1 * S + phi.tuple(q)[0], h1.value(e) * phi.value(q));
    }
    merge_keys(keyed);
    const double norm = output_norm(keyed, colours, g);
    out.push_back({Diagram{n, 1, {}},
                   SimpleKernel::from_keyed(h1.system_ptr(), h1.dim_field(), colours,
                                            std::move(keyed)),
                   norm,
                   {}});
  }

  for (int p = 0; p < n; ++p) {
    std::vector<int> colours;
    for (int s = 0; s < n; ++s)
      if (s != p) colours.push_back(h1.colours()[static_cast<std::size_t>(s)]);
    const int jp = h1.colours()[static_cast<std::size_t>(p)];
    std::vector<std::pair<std::uint64_t, cplx>> keyed;
    for (std::size_t e = 0; e < h1.size(); ++e) {
      const auto tup = h1.tuple(e);
      const int c = tup[static_cast<std::size_t>(p)];
      const std::uint16_t cs = static_cast<std::uint16_t>(c);
      const cplx ph = phi.at(std::span<const std::uint16_t>(&cs, 1));
      if (ph == cplx{}) continue;
      std::uint64_t key = 0;
      for (int s = 0; s < n; ++s)
        if (s != p) key = key * S + tup[static_cast<std::size_t>(s)];
      keyed.emplace_back(key, h1.value(e) * std::conj(ph) * g.entry(c, jp, jphi));
    }
    merge_keys(keyed);
    const double norm = output_norm(keyed, colours, g);
    out.push_back({Diagram{n, 1, {{p, 0}}},
                   SimpleKernel::from_keyed(h1.system_ptr(), h1.dim_field(), colours,
                                            std::move(keyed)),
                   norm,
                   {{jp, jphi}}});
  }
  return out;
}

}  // namespace vgf
