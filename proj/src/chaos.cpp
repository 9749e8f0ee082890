#include "vgf/chaos.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "vgf/error.hpp"
#include "vgf/rng.hpp"

namespace vgf {

namespace {

constexpr double kKernelHermitianTol = 1e-12;
constexpr double kEvaluateResidueTol = 1e-9;

// Calls visit(tuple) for every nondiagonal slot tuple in lexicographic order.
template <class Visit>
void for_each_offdiagonal(const RegularSystem& sys, int n, Visit&& visit) {
  if (n == 0) {
    visit(std::span<const int>{});
    return;
  }
  const int S = sys.slot_count();
  std::vector<int> tup(static_cast<std::size_t>(n), 0);
  std::vector<int> used(static_cast<std::size_t>(sys.pair_count()), 0);
  // Depth-first over positions so diagonal prefixes are pruned early.
  std::function<void(int)> rec = [&](int pos) {
    if (pos == n) {
      visit(std::span<const int>(tup));
      return;
    }
    for (int s = 0; s < S; ++s) {
      const int pair = sys.positive_slot(s) - sys.pair_count();
      if (used[static_cast<std::size_t>(pair)]) continue;
      used[static_cast<std::size_t>(pair)] = 1;
      tup[static_cast<std::size_t>(pos)] = s;
      rec(pos + 1);
      used[static_cast<std::size_t>(pair)] = 0;
    }
  };
  rec(0);
}

}  // namespace

void require_same_system(const RegularSystem& a, const RegularSystem& b) {
  require(a == b, ErrorCode::MismatchedSystems, "objects live on different regular systems");
}

bool is_diagonal_tuple(const RegularSystem& sys, std::span<const int> slots) {
  for (std::size_t a = 0; a < slots.size(); ++a)
    for (std::size_t b = a + 1; b < slots.size(); ++b)
      if (sys.positive_slot(slots[a]) == sys.positive_slot(slots[b])) return true;
  return false;
}

SimpleKernel::SimpleKernel(SystemPtr system, int dim_field, std::vector<int> colours)
    : system_(std::move(system)), d_(dim_field), colours_(std::move(colours)) {
  require(system_ != nullptr, ErrorCode::InvalidArgument, "kernel needs a regular system");
  require(d_ >= 1, ErrorCode::InvalidArgument, "dim_field must be >= 1");
  check_colours();
  const double bits = std::log2(static_cast<double>(system_->slot_count())) * order();
  require(bits < 63.0, ErrorCode::InvalidArgument, "kernel order too large for this grid");
  require(system_->slot_count() <= 65535, ErrorCode::InvalidArgument,
          "kernel grids are limited to 65535 cells");
}

void SimpleKernel::check_colours() const {
  for (int c : colours_)
    require(c >= 0 && c < d_, ErrorCode::InvalidArgument,
            "colour " + std::to_string(c) + " out of range [0, " + std::to_string(d_) + ")");
}

std::uint64_t SimpleKernel::key_of(std::span<const int> slots) const {
  std::uint64_t key = 0;
  const auto S = static_cast<std::uint64_t>(system_->slot_count());
  for (int s : slots) key = key * S + static_cast<std::uint64_t>(s);
  return key;
}

std::uint64_t SimpleKernel::key_of(std::span<const std::uint16_t> slots) const {
  std::uint64_t key = 0;
  const auto S = static_cast<std::uint64_t>(system_->slot_count());
  for (auto s : slots) key = key * S + s;
  return key;
}

void SimpleKernel::finalize(std::vector<std::pair<std::uint64_t, cplx>> keyed,
                            bool reject_duplicates) {
  std::sort(keyed.begin(), keyed.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  if (reject_duplicates)
    for (std::size_t i = 1; i < keyed.size(); ++i)
      require(keyed[i].first != keyed[i - 1].first, ErrorCode::InvalidArgument,
              "kernel has a repeated tuple");
  const std::size_t n = colours_.size();
  const auto S = static_cast<std::uint64_t>(system_->slot_count());
  keys_.resize(keyed.size());
  values_.resize(keyed.size());
  slots_.resize(keyed.size() * n);
  for (std::size_t e = 0; e < keyed.size(); ++e) {
    keys_[e] = keyed[e].first;
    values_[e] = keyed[e].second;
    std::uint64_t k = keyed[e].first;
    for (std::size_t t = n; t-- > 0;) {
      slots_[e * n + t] = static_cast<std::uint16_t>(k % S);
      k /= S;
    }
  }
  double scale = 0.0;
  for (auto v : values_) scale = std::max(scale, std::abs(v));
  const double defect = hermitian_defect();
  if (defect > kKernelHermitianTol * std::max(1.0, scale))
    fail(ErrorCode::NotHermitian,
         "kernel violates f(-k) = conj f(k) by " + std::to_string(defect));
}

SimpleKernel SimpleKernel::from_function(SystemPtr system, int dim_field, std::vector<int> colours,
                                         const TupleFn& fn) {
  SimpleKernel f(std::move(system), dim_field, std::move(colours));
  const auto& sys = *f.system_;
  const int n = f.order();
  std::vector<std::pair<std::uint64_t, cplx>> keyed;
  std::vector<int> mirror(static_cast<std::size_t>(n));
  double scale = 0.0;
  double defect = 0.0;
  for_each_offdiagonal(sys, n, [&](std::span<const int> tup) {
    for (int t = 0; t < n; ++t) mirror[static_cast<std::size_t>(t)] = sys.mirror(tup[t]);
    const std::uint64_t key = f.key_of(tup);
    const std::uint64_t mkey = f.key_of(std::span<const int>(mirror));
    if (n > 0 && mkey < key) return;
    const cplx a = fn(tup);
    if (n == 0) {
      scale = std::abs(a);
      defect = std::abs(a.imag()) * 2.0;
      if (a != cplx{}) keyed.emplace_back(key, cplx(a.real(), 0.0));
      return;
    }
    const cplx b = fn(std::span<const int>(mirror));
    scale = std::max({scale, std::abs(a), std::abs(b)});
    defect = std::max(defect, std::abs(b - std::conj(a)));
    const cplx v = 0.5 * (a + std::conj(b));
    if (v == cplx{}) return;
    keyed.emplace_back(key, v);
    keyed.emplace_back(mkey, std::conj(v));
  });
  if (defect > kKernelHermitianTol * std::max(1.0, scale))
    fail(ErrorCode::NotHermitian,
         "kernel function violates f(-k) = conj f(k) by " + std::to_string(defect));
  f.finalize(std::move(keyed), false);
  return f;
}

SimpleKernel SimpleKernel::from_entries(SystemPtr system, int dim_field, std::vector<int> colours,
                                        std::vector<std::pair<std::vector<int>, cplx>> entries) {
  SimpleKernel f(std::move(system), dim_field, std::move(colours));
  const auto& sys = *f.system_;
  std::vector<std::pair<std::uint64_t, cplx>> keyed;
  keyed.reserve(entries.size());
  for (const auto& [tup, v] : entries) {
    require(static_cast<int>(tup.size()) == f.order(), ErrorCode::InvalidArgument,
            "kernel tuple has wrong length");
    for (int s : tup)
      require(s >= 0 && s < sys.slot_count(), ErrorCode::InvalidArgument,
              "kernel tuple slot out of range");
    if (is_diagonal_tuple(sys, tup)) continue;
    if (f.order() == 0)
      require(std::abs(v.imag()) <= kKernelHermitianTol * std::max(1.0, std::abs(v)),
              ErrorCode::NotHermitian, "order-0 kernel must be real");
    keyed.emplace_back(f.key_of(tup), v);
  }
  f.finalize(std::move(keyed), true);
  return f;
}

SimpleKernel SimpleKernel::from_keyed(SystemPtr system, int dim_field, std::vector<int> colours,
                                      std::vector<std::pair<std::uint64_t, cplx>> keyed) {
  SimpleKernel f(std::move(system), dim_field, std::move(colours));
  const auto& sys = *f.system_;
  const int n = f.order();
  const auto S = static_cast<std::uint64_t>(sys.slot_count());
  std::sort(keyed.begin(), keyed.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<int> tup(static_cast<std::size_t>(n));
  std::size_t out = 0;
  for (std::size_t i = 0; i < keyed.size();) {
    const std::uint64_t key = keyed[i].first;
    cplx v{};
    for (; i < keyed.size() && keyed[i].first == key; ++i) v += keyed[i].second;
    std::uint64_t k = key;
    for (int t = n; t-- > 0;) {
      tup[static_cast<std::size_t>(t)] = static_cast<int>(k % S);
      k /= S;
    }
    if (v == cplx{} || is_diagonal_tuple(sys, tup)) continue;
    if (n == 0) v = {v.real(), 0.0};
    keyed[out++] = {key, v};
  }
  keyed.resize(out);
  f.finalize(std::move(keyed), true);
  return f;
}

SimpleKernel SimpleKernel::constant(SystemPtr system, int dim_field, double c) {
  SimpleKernel f(std::move(system), dim_field, {});
  std::vector<std::pair<std::uint64_t, cplx>> keyed;
  if (c != 0.0) keyed.emplace_back(0, cplx(c, 0.0));
  f.finalize(std::move(keyed), true);
  return f;
}

SimpleKernel SimpleKernel::zero(SystemPtr system, int dim_field, std::vector<int> colours) {
  SimpleKernel f(std::move(system), dim_field, std::move(colours));
  f.finalize({}, true);
  return f;
}

cplx SimpleKernel::at(std::span<const int> slots) const {
  const std::uint64_t key = key_of(slots);
  const auto it = std::lower_bound(keys_.begin(), keys_.end(), key);
  if (it == keys_.end() || *it != key) return {};
  return values_[static_cast<std::size_t>(it - keys_.begin())];
}

cplx SimpleKernel::at(std::span<const std::uint16_t> slots) const {
  const std::uint64_t key = key_of(slots);
  const auto it = std::lower_bound(keys_.begin(), keys_.end(), key);
  if (it == keys_.end() || *it != key) return {};
  return values_[static_cast<std::size_t>(it - keys_.begin())];
}

double SimpleKernel::norm_squared(const MatrixSpectralMeasure& g) const {
  require_same_system(*system_, g.system());
  require(g.dim_field() == d_, ErrorCode::InvalidArgument, "kernel and measure differ in d");
  const std::size_t n = colours_.size();
  double acc = 0.0;
  for (std::size_t e = 0; e < values_.size(); ++e) {
    double w = std::norm(values_[e]);
    for (std::size_t t = 0; t < n; ++t) w *= g.diag(slots_[e * n + t], colours_[t]);
    acc += w;
  }
  return acc;
}

double SimpleKernel::hermitian_defect() const {
  const std::size_t n = colours_.size();
  std::vector<std::uint16_t> mirror(n);
  double defect = 0.0;
  for (std::size_t e = 0; e < values_.size(); ++e) {
    for (std::size_t t = 0; t < n; ++t)
      mirror[t] = static_cast<std::uint16_t>(system_->mirror(slots_[e * n + t]));
    const cplx partner = at(std::span<const std::uint16_t>(mirror));
    defect = std::max(defect, std::abs(partner - std::conj(values_[e])));
  }
  return defect;
}

SimpleKernel tensor_kernel(SystemPtr system, int dim_field,
                           std::span<const std::vector<cplx>> phis, std::vector<int> colours) {
  require(phis.size() == colours.size(), ErrorCode::InvalidArgument,
          "one colour per factor is required");
  for (const auto& phi : phis) require_hermitian_function(*system, phi);
  return SimpleKernel::from_function(std::move(system), dim_field, std::move(colours),
                                     [&phis](std::span<const int> tup) {
                                       cplx v{1.0, 0.0};
                                       for (std::size_t t = 0; t < tup.size(); ++t)
                                         v *= phis[t][static_cast<std::size_t>(tup[t])];
                                       return v;
                                     });
}

SimpleKernel random_kernel(SystemPtr system, int dim_field, std::vector<int> colours,
                           std::uint64_t seed, double density) {
  const auto S = static_cast<std::uint64_t>(system->slot_count());
  return SimpleKernel::from_function(
      system, dim_field, std::move(colours), [&, S](std::span<const int> tup) -> cplx {
        // The value depends only on the unordered pair {tuple, mirror}, and the
        // mirror receives the conjugate.
        std::uint64_t key = 0, mkey = 0;
        for (int s : tup) {
          key = key * S + static_cast<std::uint64_t>(s);
          mkey = mkey * S + (S - 1 - static_cast<std::uint64_t>(s));
        }
        CounterRng rng(stream_key(seed, 0x6b65726e656cULL, std::min(key, mkey)));
        std::uniform_real_distribution<double> unif;
        std::normal_distribution<double> normal;
        if (unif(rng) >= density) return {};
        const cplx v(normal(rng), normal(rng));
        if (tup.empty()) return {v.real(), 0.0};
        return key <= mkey ? v : std::conj(v);
      });
}

double evaluate(const SpectralSample& s, const SimpleKernel& f) {
  require_same_system(s.system(), f.system());
  require(s.dim_field() == f.dim_field(), ErrorCode::InvalidArgument,
          "kernel and sample differ in d");
  const int n = f.order();
  const auto& colours = f.colours();
  cplx acc{};
  double scale = 0.0;
  for (std::size_t e = 0; e < f.size(); ++e) {
    const auto tup = f.tuple(e);
    cplx term = f.value(e);
    for (int t = 0; t < n; ++t) term *= s.value(tup[static_cast<std::size_t>(t)], colours[static_cast<std::size_t>(t)]);
    acc += term;
    scale += std::abs(term);
  }
  if (std::abs(acc.imag()) > kEvaluateResidueTol * std::max(scale, 1e-300) && scale > 0.0)
    fail(ErrorCode::InternalConsistency,
         "multiple integral has imaginary residue " + std::to_string(acc.imag()));
  return acc.real();
}

std::vector<double> evaluate(const SampleBlock& b, const SimpleKernel& f) {
  require_same_system(*b.system, f.system());
  require(b.dim_field == f.dim_field(), ErrorCode::InvalidArgument,
          "kernel and sample differ in d");
  const int n = f.order();
  const int R = b.replicas;
  const auto& colours = f.colours();
  std::vector<double> acc_re(static_cast<std::size_t>(R), 0.0);
  std::vector<double> acc_im(static_cast<std::size_t>(R), 0.0);
  std::vector<double> scale(static_cast<std::size_t>(R), 0.0);
  if (n == 0) {
    const double c = f.size() ? f.value(0).real() : 0.0;
    std::fill(acc_re.begin(), acc_re.end(), c);
    return acc_re;
  }
  // prefix level l holds prod_{t <= l} Z_{j_t}(k_t) for l < n - 1.
  const std::size_t levels = static_cast<std::size_t>(std::max(n - 1, 1));
  std::vector<double> pre_re(levels * R), pre_im(levels * R);
  std::vector<std::uint16_t> prev(static_cast<std::size_t>(n), 0xffff);
  double* ar = acc_re.data();
  double* ai = acc_im.data();
  double* sc = scale.data();
  for (std::size_t e = 0; e < f.size(); ++e) {
    const auto tup = f.tuple(e);
    int common = 0;
    while (common < n - 1 && tup[static_cast<std::size_t>(common)] == prev[static_cast<std::size_t>(common)]) ++common;
    for (int l = common; l < n - 1; ++l) {
      const std::size_t z = b.offset(colours[static_cast<std::size_t>(l)], tup[static_cast<std::size_t>(l)]);
      const double* zr = b.re.data() + z;
      const double* zi = b.im.data() + z;
      double* pr = pre_re.data() + static_cast<std::size_t>(l) * R;
      double* pi = pre_im.data() + static_cast<std::size_t>(l) * R;
      if (l == 0) {
        std::copy(zr, zr + R, pr);
        std::copy(zi, zi + R, pi);
      } else {
        const double* qr = pr - R;
        const double* qi = pi - R;
        for (int r = 0; r < R; ++r) {
          const double xr = qr[r] * zr[r] - qi[r] * zi[r];
          const double xi = qr[r] * zi[r] + qi[r] * zr[r];
          pr[r] = xr;
          pi[r] = xi;
        }
      }
    }
    for (int t = 0; t < n; ++t) prev[static_cast<std::size_t>(t)] = tup[static_cast<std::size_t>(t)];
    const cplx v = f.value(e);
    const double vr = v.real(), vi = v.imag();
    const std::size_t z = b.offset(colours[static_cast<std::size_t>(n - 1)], tup[static_cast<std::size_t>(n - 1)]);
    const double* zr = b.re.data() + z;
    const double* zi = b.im.data() + z;
    if (n == 1) {
      for (int r = 0; r < R; ++r) {
        const double tr = vr * zr[r] - vi * zi[r];
        const double ti = vr * zi[r] + vi * zr[r];
        ar[r] += tr;
        ai[r] += ti;
        sc[r] += std::abs(tr) + std::abs(ti);
      }
    } else {
      const double* pr = pre_re.data() + static_cast<std::size_t>(n - 2) * R;
      const double* pi = pre_im.data() + static_cast<std::size_t>(n - 2) * R;
      for (int r = 0; r < R; ++r) {
        const double xr = pr[r] * zr[r] - pi[r] * zi[r];
        const double xi = pr[r] * zi[r] + pi[r] * zr[r];
        const double tr = vr * xr - vi * xi;
        const double ti = vr * xi + vi * xr;
        ar[r] += tr;
        ai[r] += ti;
        sc[r] += std::abs(tr) + std::abs(ti);
      }
    }
  }
  for (int r = 0; r < R; ++r)
    if (std::abs(ai[r]) > kEvaluateResidueTol * sc[r] && sc[r] > 0.0)
      fail(ErrorCode::InternalConsistency,
           "multiple integral has imaginary residue " + std::to_string(ai[r]));
  return acc_re;
}

double analytic_covariance(const SimpleKernel& f, const SimpleKernel& h,
                           const MatrixSpectralMeasure& g) {
  if (f.order() != h.order()) return 0.0;
  require_same_system(f.system(), h.system());
  require_same_system(f.system(), g.system());
  const int n = f.order();
  if (n == 0) {
    const double a = f.size() ? f.value(0).real() : 0.0;
    const double b = h.size() ? h.value(0).real() : 0.0;
    return a * b;
  }
  const auto& jf = f.colours();
  const auto& jh = h.colours();
  std::vector<int> pi(static_cast<std::size_t>(n)), inv(static_cast<std::size_t>(n));
  std::iota(pi.begin(), pi.end(), 0);
  std::vector<std::uint16_t> harg(static_cast<std::size_t>(n));
  cplx total{};
  do {
    for (int t = 0; t < n; ++t) inv[static_cast<std::size_t>(pi[static_cast<std::size_t>(t)])] = t;
    cplx acc{};
    for (std::size_t e = 0; e < f.size(); ++e) {
      const auto k = f.tuple(e);
      for (int t = 0; t < n; ++t) harg[static_cast<std::size_t>(t)] = k[static_cast<std::size_t>(pi[static_cast<std::size_t>(t)])];
      const cplx hv = h.at(std::span<const std::uint16_t>(harg));
      if (hv == cplx{}) continue;
      cplx w = f.value(e) * std::conj(hv);
      for (int s = 0; s < n; ++s)
        w *= g.entry(k[static_cast<std::size_t>(s)], jf[static_cast<std::size_t>(s)],
                     jh[static_cast<std::size_t>(inv[static_cast<std::size_t>(s)])]);
      acc += w;
    }
    total += acc;
  } while (std::next_permutation(pi.begin(), pi.end()));
  return total.real();
}

double second_moment_bound(const SimpleKernel& f, const MatrixSpectralMeasure& g) {
  double fact = 1.0;
  for (int i = 2; i <= f.order(); ++i) fact *= i;
  return fact * f.norm_squared(g);
}

SimpleKernel permute_kernel(const SimpleKernel& h, std::span<const int> pi) {
  const int n = h.order();
  require(static_cast<int>(pi.size()) == n, ErrorCode::InvalidArgument,
          "permutation has wrong length");
  std::vector<int> inv(static_cast<std::size_t>(n), -1);
  for (int t = 0; t < n; ++t) {
    const int p = pi[static_cast<std::size_t>(t)];
    require(p >= 0 && p < n && inv[static_cast<std::size_t>(p)] < 0, ErrorCode::InvalidArgument,
            "not a permutation");
    inv[static_cast<std::size_t>(p)] = t;
  }
  std::vector<int> colours(static_cast<std::size_t>(n));
  for (int s = 0; s < n; ++s)
    colours[static_cast<std::size_t>(s)] = h.colours()[static_cast<std::size_t>(inv[static_cast<std::size_t>(s)])];
  std::vector<std::pair<std::vector<int>, cplx>> entries;
  entries.reserve(h.size());
  for (std::size_t e = 0; e < h.size(); ++e) {
    const auto x = h.tuple(e);
    std::vector<int> k(static_cast<std::size_t>(n));
    for (int s = 0; s < n; ++s) k[static_cast<std::size_t>(s)] = x[static_cast<std::size_t>(inv[static_cast<std::size_t>(s)])];
    entries.emplace_back(std::move(k), h.value(e));
  }
  return SimpleKernel::from_entries(h.system_ptr(), h.dim_field(), std::move(colours),
                                    std::move(entries));
}

SimpleKernel shift_kernel(const SimpleKernel& f, std::span<const std::int64_t> u) {
  const auto& sys = f.system();
  require(u.size() == sys.dim(), ErrorCode::InvalidArgument, "shift dimension mismatch");
  std::vector<std::int64_t> numer(static_cast<std::size_t>(sys.slot_count()));
  for (int s = 0; s < sys.slot_count(); ++s) numer[static_cast<std::size_t>(s)] = sys.phase_numerator(u, s);
  const int n = f.order();
  std::vector<std::pair<std::vector<int>, cplx>> entries;
  entries.reserve(f.size());
  for (std::size_t e = 0; e < f.size(); ++e) {
    const auto x = f.tuple(e);
    std::int64_t m = 0;
    std::vector<int> k(x.begin(), x.end());
    for (int t = 0; t < n; ++t) m += numer[x[static_cast<std::size_t>(t)]];
    entries.emplace_back(std::move(k), sys.phase(m) * f.value(e));
  }
  return SimpleKernel::from_entries(f.system_ptr(), f.dim_field(), f.colours(), std::move(entries));
}

SimpleKernel lift_kernel(const SimpleKernel& f, SystemPtr fine) {
  const auto parents = fine->parent_slots(f.system());
  std::vector<std::vector<int>> children(static_cast<std::size_t>(f.system().slot_count()));
  for (int s = 0; s < fine->slot_count(); ++s)
    children[static_cast<std::size_t>(parents[static_cast<std::size_t>(s)])].push_back(s);
  const int n = f.order();
  const auto S = static_cast<std::uint64_t>(fine->slot_count());
  std::vector<std::pair<std::uint64_t, cplx>> keyed;
  std::vector<std::size_t> pick(static_cast<std::size_t>(n));
  for (std::size_t e = 0; e < f.size(); ++e) {
    const auto tup = f.tuple(e);
    std::fill(pick.begin(), pick.end(), 0);
    while (true) {
      std::uint64_t key = 0;
      for (int t = 0; t < n; ++t)
        key = key * S + static_cast<std::uint64_t>(
                            children[tup[static_cast<std::size_t>(t)]][pick[static_cast<std::size_t>(t)]]);
      keyed.emplace_back(key, f.value(e));
      int t = n - 1;
      for (; t >= 0; --t) {
        auto& c = pick[static_cast<std::size_t>(t)];
        if (++c < children[tup[static_cast<std::size_t>(t)]].size()) break;
        c = 0;
      }
      if (t < 0) break;
    }
  }
  return SimpleKernel::from_keyed(std::move(fine), f.dim_field(), f.colours(), std::move(keyed));
}

std::vector<cplx> lift_function(const RegularSystem& coarse, const RegularSystem& fine,
                                std::span<const cplx> phi) {
  require(static_cast<int>(phi.size()) == coarse.slot_count(), ErrorCode::InvalidArgument,
          "function must have one value per coarse cell");
  const auto parents = fine.parent_slots(coarse);
  std::vector<cplx> out(parents.size());
  for (std::size_t s = 0; s < parents.size(); ++s) out[s] = phi[static_cast<std::size_t>(parents[s])];
  return out;
}

}  // namespace vgf
