#include "vgf/limits.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <set>

#include "vgf/error.hpp"

namespace vgf {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kSeriesCutoff = 1e-4;

// Visits every tuple of n slots that has no two coordinates in one cell pair.
void for_each_tuple(const RegularSystem& sys, int n,
                    const std::function<void(std::span<const int>)>& body) {
  std::vector<int> slots(static_cast<std::size_t>(n));
  std::vector<char> used(static_cast<std::size_t>(sys.pair_count()), 0);
  std::function<void(int)> rec = [&](int t) {
    if (t == n) {
      body(slots);
      return;
    }
    for (int s = 0; s < sys.slot_count(); ++s) {
      const int pair = sys.positive_slot(s) - sys.pair_count();
      if (used[static_cast<std::size_t>(pair)]) continue;
      used[static_cast<std::size_t>(pair)] = 1;
      slots[static_cast<std::size_t>(t)] = s;
      rec(t + 1);
      used[static_cast<std::size_t>(pair)] = 0;
    }
  };
  rec(0);
}

cplx kernel_at_slots(const RegularSystem& sys, std::span<const int> slots, int N) {
  cplx out{1.0, 0.0};
  for (std::size_t l = 0; l < sys.dim(); ++l) {
    double s = 0.0;
    for (int slot : slots) s += sys.representative_at(slot)[l];
    out *= rescaled_factor(s, N);
  }
  return out;
}

struct Moments {
  double mean = 0.0;
  double se = 0.0;
};

Moments mean_and_se(const std::vector<double>& x) {
  const double R = static_cast<double>(x.size());
  double m = 0.0;
  for (double v : x) m += v;
  m /= R;
  double ss = 0.0;
  for (double v : x) ss += (v - m) * (v - m);
  return {m, std::sqrt(ss / (R - 1.0) / R)};
}

}  // namespace

void WickSpec::check() const {
  require(order >= 1, ErrorCode::InvalidArgument, "Wick order must be positive");
  require(dim_field >= 1, ErrorCode::InvalidArgument, "Wick spec needs d >= 1");
  std::set<std::vector<int>> seen;
  for (const auto& [k, a] : terms) {
    require(static_cast<int>(k.size()) == dim_field, ErrorCode::InvalidArgument,
            "Wick term needs one exponent per component");
    int total = 0;
    for (int e : k) {
      require(e >= 0, ErrorCode::InvalidArgument, "negative exponent in Wick term");
      total += e;
    }
    require(total == order, ErrorCode::InvalidArgument, "Wick spec is not homogeneous");
    require(std::isfinite(a), ErrorCode::InvalidArgument, "non-finite Wick coefficient");
    require(seen.insert(k).second, ErrorCode::InvalidArgument, "repeated Wick term");
  }
}

Polynomial WickSpec::polynomial() const {
  check();
  Polynomial p(dim_field);
  for (const auto& [k, a] : terms) p.add_term(k, a);
  return p;
}

std::vector<int> WickSpec::colours_of(const std::vector<int>& exponents) {
  std::vector<int> out;
  for (std::size_t j = 0; j < exponents.size(); ++j)
    for (int c = 0; c < exponents[j]; ++c) out.push_back(static_cast<int>(j));
  return out;
}

cplx dirichlet_unit(double x) {
  if (std::abs(x) < kSeriesCutoff) {
    const double x2 = x * x;
    return {1.0 - x2 / 6.0, x / 2.0 - x * x2 / 24.0};
  }
  const double h = std::sin(0.5 * x);
  return {std::sin(x) / x, 2.0 * h * h / x};
}

cplx rescaled_factor(double s, int N) {
  require(N >= 0, ErrorCode::InvalidArgument, "N must be nonnegative");
  if (N == 0) return dirichlet_unit(s);
  const double period = 2.0 * kPi * N;
  double delta = std::fmod(s + kPi * N, period);
  if (delta < 0.0) delta += period;
  delta -= kPi * N;
  return dirichlet_unit(delta) / dirichlet_unit(delta / N);
}

cplx rescaled_kernel(const std::vector<std::vector<double>>& points, int N) {
  require(!points.empty(), ErrorCode::InvalidArgument, "need at least one point");
  const std::size_t nu = points[0].size();
  cplx out{1.0, 0.0};
  for (std::size_t l = 0; l < nu; ++l) {
    double s = 0.0;
    for (const auto& y : points) {
      require(y.size() == nu, ErrorCode::InvalidArgument, "points differ in dimension");
      s += y[l];
    }
    out *= rescaled_factor(s, N);
  }
  return out;
}

std::vector<SimpleKernel> rescaled_kernels(const WickSpec& spec, SystemPtr system, int N) {
  spec.check();
  std::vector<SimpleKernel> out;
  const RegularSystem& sys = *system;
  for (const auto& [k, a] : spec.terms) {
    const double coeff = a;
    out.push_back(SimpleKernel::from_function(
        system, spec.dim_field, WickSpec::colours_of(k),
        [&sys, coeff, N](std::span<const int> slots) {
          return coeff * kernel_at_slots(sys, slots, N);
        }));
  }
  return out;
}

std::vector<SimpleKernel> unit_kernels(const WickSpec& spec, SystemPtr system) {
  spec.check();
  std::vector<SimpleKernel> out;
  for (const auto& [k, a] : spec.terms) {
    const double coeff = a;
    out.push_back(SimpleKernel::from_function(system, spec.dim_field, WickSpec::colours_of(k),
                                              [coeff](std::span<const int>) { return cplx{coeff}; }));
  }
  return out;
}

namespace {

std::vector<std::vector<std::int64_t>> lattice_box(std::size_t nu, int N) {
  std::vector<std::vector<std::int64_t>> out;
  std::vector<std::int64_t> p(nu, 0);
  while (true) {
    out.push_back(p);
    std::size_t a = 0;
    for (; a < nu; ++a) {
      if (++p[a] < N) break;
      p[a] = 0;
    }
    if (a == nu) break;
  }
  return out;
}

}  // namespace

double direct_SN(const WickSpec& spec, const MatrixSpectralMeasure& g, const SpectralSample& s,
                 int N, double a_n) {
  require(N >= 1 && a_n > 0.0, ErrorCode::InvalidArgument, "direct_SN needs N >= 1, A_N > 0");
  require(spec.dim_field == g.dim_field() && s.dim_field() == g.dim_field(),
          ErrorCode::InvalidArgument, "Wick spec, measure and sample differ in d");
  require_same_system(g.system(), s.system());
  const auto lags = lattice_box(g.system().dim(), N);
  const Eigen::MatrixXd x = synthesize_field(s, lags);
  require(x.rows() == static_cast<Eigen::Index>(lags.size()), ErrorCode::InvalidArgument,
          "field missing on part of B_N");
  const std::vector<std::int64_t> zero(g.system().dim(), 0);
  const WickPolynomial y(spec.polynomial(), correlation(g, zero));
  double acc = 0.0;
  std::vector<double> row(static_cast<std::size_t>(g.dim_field()));
  for (Eigen::Index p = 0; p < x.rows(); ++p) {
    for (int j = 0; j < g.dim_field(); ++j) row[static_cast<std::size_t>(j)] = x(p, j);
    acc += y(row);
  }
  return acc / a_n;
}

double direct_chaos_SN(const std::vector<SimpleKernel>& unit, const SpectralSample& s, int N,
                       double a_n) {
  require(N >= 1 && a_n > 0.0, ErrorCode::InvalidArgument, "direct_SN needs N >= 1, A_N > 0");
  double acc = 0.0;
  for (const auto& p : lattice_box(s.system().dim(), N))
    for (const auto& f : unit) acc += evaluate(s, shift_kernel(f, p));
  return acc / a_n;
}

double spectral_SN(const std::vector<SimpleKernel>& kernels, const SpectralSample& rescaled) {
  double acc = 0.0;
  for (const auto& f : kernels) acc += evaluate(rescaled, f);
  return acc;
}

std::vector<double> spectral_SN(const std::vector<SimpleKernel>& kernels, const SampleBlock& b) {
  std::vector<double> acc(static_cast<std::size_t>(b.replicas), 0.0);
  for (const auto& f : kernels) {
    const auto v = evaluate(b, f);
    for (std::size_t r = 0; r < acc.size(); ++r) acc[r] += v[r];
  }
  return acc;
}

CMatrix LongMemoryFixture::base_mass(double lo, double hi) const {
  require(0.0 <= lo && lo < hi && hi <= kPi * (1.0 + 1e-12), ErrorCode::InvalidArgument,
          "fixture cell outside [0, pi]");
  require(beta > 0.0 && beta < 1.0, ErrorCode::InvalidArgument, "beta must lie in (0, 1)");
  const double b = beta;
  auto F = [b](double x) {
    return std::pow(x, 1.0 - b) / (1.0 - b) -
           std::pow(x, 3.0 - b) / ((3.0 - b) * 2.0 * kPi * kPi);
  };
  return (F(hi) - F(lo)) * m;
}

CMatrix LongMemoryFixture::limit_mass(double lo, double hi) const {
  require(0.0 <= lo && lo < hi, ErrorCode::InvalidArgument, "limit cell must be in [0, inf)");
  const double b = beta;
  return ((std::pow(hi, 1.0 - b) - std::pow(lo, 1.0 - b)) / (1.0 - b)) * m;
}

namespace {

void check_fixture(const LongMemoryFixture& f) {
  require(f.m.rows() >= 1 && f.m.rows() == f.m.cols(), ErrorCode::InvalidArgument,
          "fixture matrix must be square");
  require((f.m - f.m.adjoint()).cwiseAbs().maxCoeff() <= kHermitianTol * (1.0 + f.m.cwiseAbs().maxCoeff()),
          ErrorCode::NotHermitian, "fixture matrix is not Hermitian");
  Eigen::SelfAdjointEigenSolver<CMatrix> es(f.m);
  require(es.eigenvalues().minCoeff() >= -kPsdTol, ErrorCode::NotPsd,
          "fixture matrix is not positive semidefinite");
}

}  // namespace

MatrixSpectralMeasure LongMemoryFixture::base_measure(int cells) const {
  check_fixture(*this);
  auto sys = share(RegularSystem::build(1, kPi, cells));
  return from_cell_masses(sys, dim_field(), [this](std::span<const double> lo,
                                                   std::span<const double> hi) {
    return base_mass(lo[0], std::min(hi[0], kPi));
  });
}

MatrixSpectralMeasure LongMemoryFixture::limit_measure(double half_extent, int cells) const {
  check_fixture(*this);
  auto sys = share(RegularSystem::build(1, half_extent, cells));
  return from_cell_masses(sys, dim_field(), [this](std::span<const double> lo,
                                                   std::span<const double> hi) {
    return limit_mass(lo[0], hi[0]);
  });
}

double calibrate_exponent(const LimitConfig& cfg) {
  require(cfg.calibration_probes.size() == 2 && cfg.calibration_probes[0] >= 1 &&
              cfg.calibration_probes[1] > cfg.calibration_probes[0],
          ErrorCode::InvalidArgument, "calibration needs two increasing probe values");
  const double delta = 2.0 * kPi / cfg.cells_per_period;
  auto mass = [&](int N) {
    return cfg.fixture.base_mass(delta / N, 2.0 * delta / N)(0, 0).real();
  };
  const double n1 = cfg.calibration_probes[0], n2 = cfg.calibration_probes[1];
  const double slope = std::log(mass(cfg.calibration_probes[1]) / mass(cfg.calibration_probes[0])) /
                       std::log(n2 / n1);
  const double nu = 1.0;
  return nu + 0.5 * cfg.wick.order * slope;
}

ConditionAReport check_condition_a(const std::vector<int>& schedule, double T, int points, int n,
                                   int nu, double threshold, double coefficient_scale) {
  require(points >= 2 && n >= 1 && nu >= 1 && T > 0.0, ErrorCode::InvalidArgument,
          "condition (a) needs T > 0, points >= 2, n >= 1, nu >= 1");
  ConditionAReport rep;
  const int coords = n * nu;
  std::vector<double> grid(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i) grid[static_cast<std::size_t>(i)] = -T + 2.0 * T * i / (points - 1);
  for (int N : schedule) {
    require(N >= 1, ErrorCode::InvalidArgument, "schedule entries must be positive");
    require(T <= N * kPi, ErrorCode::InvalidArgument, "evaluation cube exceeds [-N pi, N pi)");
    double sup = 0.0;
    std::vector<int> idx(static_cast<std::size_t>(coords), 0);
    while (true) {
      cplx hn{1.0, 0.0}, h0{1.0, 0.0};
      for (int l = 0; l < nu; ++l) {
        double s = 0.0;
        for (int t = 0; t < n; ++t) s += grid[static_cast<std::size_t>(idx[static_cast<std::size_t>(t * nu + l)])];
        hn *= rescaled_factor(s, N);
        h0 *= rescaled_factor(s, 0);
      }
      sup = std::max(sup, std::abs(hn - h0));
      int c = 0;
      for (; c < coords; ++c) {
        if (++idx[static_cast<std::size_t>(c)] < points) break;
        idx[static_cast<std::size_t>(c)] = 0;
      }
      if (c == coords) break;
    }
    rep.rows.push_back({N, coefficient_scale * sup});
  }
  rep.monotone = true;
  for (std::size_t i = 1; i < rep.rows.size(); ++i)
    if (rep.rows[i].sup_difference > rep.rows[i - 1].sup_difference) rep.monotone = false;
  rep.pass = rep.monotone && !rep.rows.empty() && rep.rows.back().sup_difference <= threshold;
  return rep;
}

namespace {

double tuple_extent(const RegularSystem& sys, std::span<const int> slots) {
  double m = 0.0;
  for (int s : slots)
    for (double c : sys.representative_at(s)) m = std::max(m, std::abs(c));
  return m;
}

TailRow finish_tail(const std::vector<double>& t_grid, std::vector<double> bucket, double total) {
  TailRow row;
  row.T = t_grid;
  row.norm_squared = total;
  // bucket[i]: weight with extent in (T_{i-1}, T_i]; last: beyond the grid.
  double tail = total;
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    tail -= bucket[i];
    row.relative_tail.push_back(total > 0.0 ? std::max(tail, 0.0) / total : 0.0);
  }
  return row;
}

std::size_t bucket_of(const std::vector<double>& t_grid, double extent) {
  return static_cast<std::size_t>(std::lower_bound(t_grid.begin(), t_grid.end(), extent) -
                                  t_grid.begin());
}

void check_t_grid(const std::vector<double>& t_grid) {
  require(!t_grid.empty() && std::is_sorted(t_grid.begin(), t_grid.end()) && t_grid[0] > 0.0,
          ErrorCode::InvalidArgument, "T grid must be positive and increasing");
}

}  // namespace

TailRow tail_row(const std::vector<SimpleKernel>& kernels, const MatrixSpectralMeasure& g,
                 const std::vector<double>& t_grid) {
  check_t_grid(t_grid);
  std::vector<double> bucket(t_grid.size() + 1, 0.0);
  double total = 0.0;
  const auto& sys = g.system();
  std::vector<int> slots;
  for (const auto& f : kernels) {
    require_same_system(f.system(), sys);
    for (std::size_t e = 0; e < f.size(); ++e) {
      const auto tup = f.tuple(e);
      slots.assign(tup.begin(), tup.end());
      double w = std::norm(f.value(e));
      for (std::size_t t = 0; t < slots.size(); ++t) w *= g.diag(slots[t], f.colours()[t]);
      bucket[bucket_of(t_grid, tuple_extent(sys, slots))] += w;
      total += w;
    }
  }
  return finish_tail(t_grid, std::move(bucket), total);
}

TailRow tail_row(const WickSpec& spec, int N, const MatrixSpectralMeasure& g,
                 const std::vector<double>& t_grid) {
  spec.check();
  check_t_grid(t_grid);
  require(spec.dim_field == g.dim_field(), ErrorCode::InvalidArgument,
          "Wick spec and measure differ in d");
  const auto& sys = g.system();
  std::vector<double> bucket(t_grid.size() + 1, 0.0);
  double total = 0.0;
  std::vector<std::vector<int>> colours;
  for (const auto& term : spec.terms) colours.push_back(WickSpec::colours_of(term.first));
  for_each_tuple(sys, spec.order, [&](std::span<const int> slots) {
    const double h2 = std::norm(kernel_at_slots(sys, slots, N));
    double w = 0.0;
    for (std::size_t i = 0; i < spec.terms.size(); ++i) {
      double wi = spec.terms[i].second * spec.terms[i].second * h2;
      for (std::size_t t = 0; t < slots.size(); ++t) wi *= g.diag(slots[t], colours[i][t]);
      w += wi;
    }
    bucket[bucket_of(t_grid, tuple_extent(sys, slots))] += w;
    total += w;
  });
  TailRow row = finish_tail(t_grid, std::move(bucket), total);
  row.N = N;
  return row;
}

ConditionBReport check_condition_b(std::vector<TailRow> rows, const std::vector<double>& epsilons) {
  ConditionBReport rep;
  rep.rows = std::move(rows);
  rep.epsilons = epsilons;
  rep.pass = !rep.rows.empty() && !epsilons.empty();
  for (double eps : epsilons) {
    require(eps > 0.0, ErrorCode::InvalidArgument, "epsilon must be positive");
    double uniform = 0.0;
    for (const auto& row : rep.rows) {
      double found = -1.0;
      for (std::size_t i = 0; i < row.T.size(); ++i)
        if (row.relative_tail[i] <= eps * eps) {
          found = row.T[i];
          break;
        }
      if (found < 0.0) {
        uniform = -1.0;
        break;
      }
      uniform = std::max(uniform, found);
    }
    rep.uniform_T.push_back(uniform);
    if (uniform < 0.0) rep.pass = false;
  }
  return rep;
}

PsdLimitReport psd_limit_check(const std::vector<int>& ns,
                               const std::vector<MatrixSpectralMeasure>& sequence,
                               const MatrixSpectralMeasure& limit,
                               const std::vector<std::vector<double>>& test_functions,
                               double tol) {
  require(ns.size() == sequence.size() && !ns.empty(), ErrorCode::InvalidArgument,
          "one measure per schedule entry required");
  const auto& sys = limit.system();
  const int d = limit.dim_field();
  double scale = 0.0;
  for (int s = 0; s < sys.slot_count(); ++s)
    for (int j = 0; j < d; ++j)
      for (int jp = 0; jp < d; ++jp) scale = std::max(scale, std::abs(limit.entry(s, j, jp)));
  double test_scale = 0.0;
  for (const auto& f : test_functions)
    for (int j = 0; j < d; ++j)
      for (int jp = 0; jp < d; ++jp)
        test_scale = std::max(test_scale, std::abs(test_integral(limit, f, j, jp)));
  if (scale == 0.0) scale = 1.0;
  if (test_scale == 0.0) test_scale = 1.0;

  PsdLimitReport rep;
  for (std::size_t i = 0; i < ns.size(); ++i) {
    const auto& g = sequence[i];
    require_same_system(g.system(), sys);
    require(g.dim_field() == d, ErrorCode::InvalidArgument, "sequence differs in d");
    PsdLimitRow row{ns[i], 0.0, 0.0};
    for (int s = 0; s < sys.slot_count(); ++s)
      for (int j = 0; j < d; ++j)
        for (int jp = 0; jp < d; ++jp)
          row.max_cell_difference =
              std::max(row.max_cell_difference, std::abs(g.entry(s, j, jp) - limit.entry(s, j, jp)));
    for (const auto& f : test_functions)
      for (int j = 0; j < d; ++j)
        for (int jp = 0; jp < d; ++jp)
          row.max_test_difference = std::max(
              row.max_test_difference,
              std::abs(test_integral(g, f, j, jp) - test_integral(limit, f, j, jp)));
    row.max_cell_difference /= scale;
    row.max_test_difference /= test_scale;
    rep.rows.push_back(row);
  }
  rep.converging = true;
  for (std::size_t i = 1; i < rep.rows.size(); ++i) {
    if (rep.rows[i].max_cell_difference > rep.rows[i - 1].max_cell_difference ||
        rep.rows[i].max_test_difference > rep.rows[i - 1].max_test_difference)
      rep.converging = false;
  }
  if (rep.rows.back().max_cell_difference > tol) rep.converging = false;
  rep.limit_valid = validate(limit).ok();
  return rep;
}

std::vector<std::vector<double>> tent_functions(const RegularSystem& sys,
                                                const std::vector<double>& centres, double width) {
  require(width > 0.0, ErrorCode::InvalidArgument, "tent width must be positive");
  std::vector<std::vector<double>> out;
  for (double c : centres) {
    std::vector<double> f(static_cast<std::size_t>(sys.slot_count()));
    for (int s = 0; s < sys.slot_count(); ++s) {
      double v = 1.0;
      for (double x : sys.representative_at(s)) v *= std::max(0.0, 1.0 - std::abs(x - c) / width);
      f[static_cast<std::size_t>(s)] = v;
    }
    out.push_back(std::move(f));
  }
  return out;
}

namespace {

// Monte Carlo comparison of one Z_N sample vector against the coupled Z_0.
MomentRow compare(int N, const std::vector<double>& zn, const std::vector<double>& z0,
                  double sigma0, const std::vector<double>& abs_moments0,
                  const std::vector<double>& cf_points) {
  const std::size_t R = zn.size();
  MomentRow row;
  row.N = N;
  {
    std::vector<double> x(R);
    for (std::size_t r = 0; r < R; ++r) x[r] = zn[r] * zn[r];
    row.sigma = std::sqrt(mean_and_se(x).mean);
  }
  std::vector<double> a(R), diff(R);
  for (int k = 1; k <= 4; ++k) {
    for (std::size_t r = 0; r < R; ++r) {
      const double un = std::pow(zn[r] / sigma0, k);
      const double u0 = std::pow(z0[r] / sigma0, k);
      a[r] = un;
      diff[r] = un - u0;
    }
    row.moments.push_back(mean_and_se(a).mean);
    const Moments dm = mean_and_se(diff);
    const double norm = abs_moments0[static_cast<std::size_t>(k - 1)];
    row.moment_gap.push_back(std::abs(dm.mean) / norm);
    row.moment_gap_se.push_back(dm.se / norm);
  }
  std::vector<double> re(R), im(R), dre(R), dim(R);
  for (double t : cf_points) {
    for (std::size_t r = 0; r < R; ++r) {
      const double an = t * zn[r] / sigma0, a0 = t * z0[r] / sigma0;
      re[r] = std::cos(an);
      im[r] = std::sin(an);
      dre[r] = re[r] - std::cos(a0);
      dim[r] = im[r] - std::sin(a0);
    }
    row.cf.emplace_back(mean_and_se(re).mean, mean_and_se(im).mean);
    const Moments mr = mean_and_se(dre), mi = mean_and_se(dim);
    row.cf_gap.push_back(std::hypot(mr.mean, mi.mean));
    row.cf_gap_se.push_back(std::hypot(mr.se, mi.se));
  }
  auto take = [&row](const std::vector<double>& gaps, const std::vector<double>& ses) {
    for (std::size_t i = 0; i < gaps.size(); ++i)
      if (gaps[i] > row.discrepancy) {
        row.discrepancy = gaps[i];
        row.discrepancy_se = ses[i];
      }
  };
  take(row.moment_gap, row.moment_gap_se);
  take(row.cf_gap, row.cf_gap_se);
  return row;
}

std::vector<double> sample_functional(const Sampler& sampler, const std::vector<SimpleKernel>& kernels,
                                      std::uint64_t seed, int replicas, int chunk) {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(replicas));
  for (int first = 0; first < replicas; first += chunk) {
    const int count = std::min(chunk, replicas - first);
    const SampleBlock b = sampler.draw_block(seed, static_cast<std::uint64_t>(first), count);
    const auto v = spectral_SN(kernels, b);
    out.insert(out.end(), v.begin(), v.end());
  }
  return out;
}

std::vector<double> power_grid(double max_t) {
  std::vector<double> out;
  for (double t = kPi; t <= max_t * (1.0 + 1e-12); t *= 2.0) out.push_back(t);
  return out;
}

}  // namespace

LimitReport run_limit_experiment(const LimitConfig& cfg) {
  cfg.wick.check();
  require(cfg.wick.dim_field == cfg.fixture.dim_field(), ErrorCode::InvalidArgument,
          "Wick spec and fixture differ in d");
  require(!cfg.schedule.empty() && std::is_sorted(cfg.schedule.begin(), cfg.schedule.end()) &&
              cfg.schedule.front() >= 1,
          ErrorCode::InvalidArgument, "schedule must be positive and increasing");
  require(cfg.cells_per_period >= 2 && cfg.cells_per_period % 2 == 0, ErrorCode::InvalidArgument,
          "cells per period must be even");
  require(cfg.replicas >= 2 && cfg.chunk >= 1, ErrorCode::InvalidArgument,
          "need at least two replicas");
  const int n = cfg.wick.order;
  const int K = cfg.cells_per_period;
  const int nmax = cfg.schedule.back();
  double max_coeff = 0.0;
  for (const auto& t : cfg.wick.terms) max_coeff = std::max(max_coeff, std::abs(t.second));

  LimitReport rep;
  auto& conv = rep.convergence;
  conv.calibrated_kappa = calibrate_exponent(cfg);
  conv.kappa = cfg.kappa.value_or(conv.calibrated_kappa);
  require(conv.kappa > 0.0, ErrorCode::InvalidArgument, "A_N exponent must be positive");

  std::vector<MatrixSpectralMeasure> rescaled;
  for (int N : cfg.schedule) {
    const double a_n = std::pow(static_cast<double>(N), conv.kappa);
    conv.a_n.push_back(a_n);
    rescaled.push_back(rescale(cfg.fixture.base_measure(N * K), N, a_n, n));
  }

  rep.condition_a = check_condition_a(cfg.schedule, cfg.condition_a_T, cfg.condition_a_points, n,
                                      1, cfg.condition_a_threshold, max_coeff);

  const auto t_grid = power_grid(0.5 * cfg.tail_box_max);
  std::vector<TailRow> rows;
  for (std::size_t i = 0; i < cfg.schedule.size(); ++i) {
    rows.push_back(tail_row(cfg.wick, cfg.schedule[i], rescaled[i], t_grid));
  }
  {
    const int cells = static_cast<int>(std::lround(cfg.tail_box_max / kPi)) * K;
    rows.push_back(tail_row(cfg.wick, 0, cfg.fixture.limit_measure(cfg.tail_box_max, cells), t_grid));
  }
  rep.condition_b = check_condition_b(std::move(rows), cfg.epsilons);

  {
    require(cfg.lemma_box <= cfg.schedule.front() * kPi * (1.0 + 1e-12), ErrorCode::InvalidArgument,
            "psd-limit box exceeds the smallest rescaled torus");
    std::vector<MatrixSpectralMeasure> seq;
    for (const auto& g : rescaled) seq.push_back(restrict_measure(g, cfg.lemma_box));
    const int cells = static_cast<int>(std::lround(cfg.lemma_box / kPi)) * K;
    const auto limit = cfg.fixture.limit_measure(cfg.lemma_box, cells);
    std::vector<double> centres;
    for (double c = -cfg.lemma_box / 2; c <= cfg.lemma_box / 2 + 1e-12; c += cfg.lemma_box / 4)
      centres.push_back(c);
    const auto tests = tent_functions(seq.front().system(), centres, cfg.lemma_box / 4);
    rep.psd_limit = psd_limit_check(cfg.schedule, seq, limit, tests, cfg.final_tolerance);
  }

  // Z_0 box: the uniform T of the epsilon nearest 0.05, at least N_max pi.
  double box = nmax * kPi;
  {
    std::size_t pick = 0;
    for (std::size_t i = 0; i < cfg.epsilons.size(); ++i)
      if (std::abs(cfg.epsilons[i] - 0.05) < std::abs(cfg.epsilons[pick] - 0.05)) pick = i;
    if (!rep.condition_b.uniform_T.empty() && rep.condition_b.uniform_T[pick] > 0.0)
      box = std::max(box, rep.condition_b.uniform_T[pick]);
  }
  conv.limit_half_extent = box;
  const int limit_cells = static_cast<int>(std::lround(box / kPi)) * K;
  const auto g0 = cfg.fixture.limit_measure(box, limit_cells);
  const auto k0 = rescaled_kernels(cfg.wick, g0.system_ptr(), 0);
  double var0 = 0.0;
  for (const auto& a : k0)
    for (const auto& b : k0) var0 += analytic_covariance(a, b, g0);
  require(var0 > 0.0, ErrorCode::InvalidArgument, "limit variable has zero variance");
  conv.sigma0 = std::sqrt(var0);

  const auto z0 = sample_functional(Sampler(g0), k0, cfg.seed, cfg.replicas, cfg.chunk);
  std::vector<double> abs0(4, 0.0);
  for (int k = 1; k <= 4; ++k) {
    for (double z : z0) abs0[static_cast<std::size_t>(k - 1)] += std::pow(std::abs(z) / conv.sigma0, k);
    abs0[static_cast<std::size_t>(k - 1)] /= static_cast<double>(z0.size());
  }
  conv.limit = compare(0, z0, z0, conv.sigma0, abs0, cfg.cf_points);
  for (std::size_t i = 0; i < cfg.schedule.size(); ++i) {
    const auto kn = rescaled_kernels(cfg.wick, rescaled[i].system_ptr(), cfg.schedule[i]);
    const auto zn = sample_functional(Sampler(rescaled[i]), kn, cfg.seed, cfg.replicas, cfg.chunk);
    conv.rows.push_back(compare(cfg.schedule[i], zn, z0, conv.sigma0, abs0, cfg.cf_points));
  }
  conv.nonincreasing = true;
  for (std::size_t i = 1; i < conv.rows.size(); ++i) {
    const auto& a = conv.rows[i - 1];
    const auto& b = conv.rows[i];
    if (b.discrepancy > a.discrepancy + 2.0 * std::hypot(a.discrepancy_se, b.discrepancy_se))
      conv.nonincreasing = false;
  }
  conv.final_within = conv.rows.back().discrepancy <= cfg.final_tolerance;
  return rep;
}

}  // namespace vgf
