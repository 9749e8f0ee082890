#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>

#include "doctest.h"
#include "generators.hpp"
#include "vgf/error.hpp"
#include "vgf/limits.hpp"
#include "vgf/sampler.hpp"

using namespace vgf;
using gen::pi;

namespace {

CMatrix fixture_matrix() {
  CMatrix m(2, 2);
  m << 1.0, cplx(0.3, 0.2), cplx(0.3, -0.2), 0.6;
  return m;
}

WickSpec quadratic_spec() {
  WickSpec spec;
  spec.order = 2;
  spec.dim_field = 2;
  spec.terms = {{{2, 0}, 1.0}, {{1, 1}, 1.0}, {{0, 2}, 0.5}};
  return spec;
}

WickSpec linear_spec() {
  WickSpec spec;
  spec.order = 1;
  spec.dim_field = 1;
  spec.terms = {{{1}, 1.0}};
  return spec;
}

cplx geometric_mean(double s, int N) {
  cplx acc{};
  for (int p = 0; p < N; ++p) acc += std::exp(cplx(0.0, p * s / N));
  return acc / static_cast<double>(N);
}

}  // namespace

TEST_CASE("limit factor at pi and near zero") {
  const cplx h = rescaled_factor(pi, 0);
  CHECK(std::abs(h.real()) < 1e-15);
  CHECK(h.imag() == doctest::Approx(2.0 / pi).epsilon(1e-14));
  CHECK(std::abs(rescaled_factor(0.0, 0) - cplx(1.0, 0.0)) == 0.0);
  for (int N : {1, 3, 16}) CHECK(std::abs(rescaled_factor(1e-9, N) - cplx(1.0, 0.0)) < 1e-8);
}

TEST_CASE("series branch joins the closed form") {
  for (double x : {0.99e-4, 1.01e-4, -0.99e-4, -1.01e-4, 3e-5, 5e-3}) {
    const long double lx = x;
    const cplx exact(static_cast<double>(std::sin(lx) / lx), static_cast<double>((1.0L - std::cos(lx)) / lx));
    CHECK(std::abs(dirichlet_unit(x) - exact) < 1e-12);
  }
  CHECK(std::abs(dirichlet_unit(1e-4 * (1 - 1e-12)) - dirichlet_unit(1e-4 * (1 + 1e-12))) < 1e-14);
}

TEST_CASE("property: rescaled factor equals the lattice average of exponentials") {
  std::mt19937_64 rng(71);
  std::uniform_real_distribution<double> u(-60.0, 60.0);
  for (int trial = 0; trial < 300; ++trial) {
    const int N = gen::uniform(rng, 1, 40);
    const double s = u(rng);
    CHECK(std::abs(rescaled_factor(s, N) - geometric_mean(s, N)) < 1e-11);
  }
}

TEST_CASE("rescaled kernel multiplies the per-axis factors") {
  const std::vector<std::vector<double>> pts = {{0.3, -1.2}, {2.0, 0.4}};
  const cplx want = rescaled_factor(2.3, 7) * rescaled_factor(-0.8, 7);
  CHECK(std::abs(rescaled_kernel(pts, 7) - want) < 1e-15);
  CHECK_THROWS_AS((void)rescaled_kernel({{0.1}, {0.2, 0.3}}, 2), Error);
  CHECK_THROWS_AS((void)rescaled_factor(0.1, -1), Error);
}

TEST_CASE("uniform convergence on a cube decreases along the schedule") {
  const auto rep = check_condition_a({4, 8, 16, 32}, 2.0 * pi, 21, 2, 1, 0.05);
  REQUIRE(rep.rows.size() == 4);
  for (std::size_t i = 1; i < rep.rows.size(); ++i)
    CHECK(rep.rows[i].sup_difference < rep.rows[i - 1].sup_difference);
  CHECK(rep.monotone);
  CHECK(rep.pass);
  const auto scaled = check_condition_a({4, 8}, 2.0 * pi, 11, 1, 1, 1.0, 3.0);
  const auto plain = check_condition_a({4, 8}, 2.0 * pi, 11, 1, 1, 1.0);
  CHECK(scaled.rows[1].sup_difference == doctest::Approx(3.0 * plain.rows[1].sup_difference));
  CHECK_THROWS_AS((void)check_condition_a({1}, 2.0 * pi, 5, 1, 1, 0.1), Error);
}

TEST_CASE("tails vanish past the kernel support") {
  const auto sys = share(RegularSystem::build(1, 4.0, 8));
  MatrixSpectralMeasure g(sys, 1);
  for (int k = 1; k <= 4; ++k) g.set_mass(k, CMatrix::Constant(1, 1, 1.0 / k));
  const auto f = SimpleKernel::from_function(sys, 1, {0, 0}, [&](std::span<const int> s) {
    for (int slot : s)
      if (std::abs(sys->representative_at(slot)[0]) > 2.0) return cplx{};
    return cplx{1.0, 0.0};
  });
  const auto row = tail_row(std::vector<SimpleKernel>{f}, g, {0.25, 1.5, 2.0, 4.0});
  CHECK(row.norm_squared > 0.0);
  CHECK(row.relative_tail[0] == doctest::Approx(1.0));
  CHECK(row.relative_tail[1] == 0.0);
  CHECK(row.relative_tail[3] == 0.0);
  CHECK_THROWS_AS((void)tail_row(std::vector<SimpleKernel>{f}, g, {1.0, 0.5}), Error);
}

TEST_CASE("stored and streamed tail rows agree") {
  LongMemoryFixture fx{0.85, fixture_matrix()};
  const int N = 4;
  const auto g = rescale(fx.base_measure(8), N, std::pow(N, 0.85), 2);
  const auto spec = quadratic_spec();
  const std::vector<double> t{1.0, 2.0, 4.0, 8.0, 13.0};
  const auto a = tail_row(rescaled_kernels(spec, g.system_ptr(), N), g, t);
  const auto b = tail_row(spec, N, g, t);
  CHECK(a.norm_squared == doctest::Approx(b.norm_squared).epsilon(1e-12));
  for (std::size_t i = 0; i < t.size(); ++i)
    CHECK(std::abs(a.relative_tail[i] - b.relative_tail[i]) < 1e-12);
}

TEST_CASE("uniform tail bound takes the worst row per epsilon") {
  TailRow r1, r2;
  r1.T = r2.T = {1.0, 2.0, 4.0};
  r1.relative_tail = {0.5, 0.03, 0.001};
  r2.relative_tail = {0.2, 0.005, 0.0};
  auto rep = check_condition_b({r1, r2}, {0.2, 0.1});
  REQUIRE(rep.uniform_T.size() == 2);
  CHECK(rep.uniform_T[0] == 2.0);
  CHECK(rep.uniform_T[1] == 4.0);
  CHECK(rep.pass);
  rep = check_condition_b({r1, r2}, {0.2, 0.01});
  CHECK(rep.uniform_T[1] < 0.0);
  CHECK_FALSE(rep.pass);
}

TEST_CASE("measure limit check: constant and shrinking sequences") {
  const auto sys = share(RegularSystem::build(1, 4.0, 8));
  const auto limit = random_measure(sys, 2, 5);
  const auto tests = tent_functions(*sys, {-1.0, 0.5}, 1.5);
  std::vector<MatrixSpectralMeasure> same(3, limit);
  auto rep = psd_limit_check({1, 2, 4}, same, limit, tests);
  CHECK(rep.pass());
  CHECK(rep.rows.back().max_cell_difference == 0.0);

  std::vector<int> ns{2, 4, 8, 16, 32};
  std::vector<MatrixSpectralMeasure> seq;
  for (int N : ns) {
    MatrixSpectralMeasure g(sys, 2);
    for (int k = 1; k <= sys->pair_count(); ++k) g.set_mass(k, (1.0 + 1.0 / N) * limit.mass(k));
    seq.push_back(g);
  }
  rep = psd_limit_check(ns, seq, limit, tests);
  CHECK(rep.converging);
  CHECK(rep.limit_valid);
  CHECK(rep.rows[0].max_cell_difference == doctest::Approx(0.5));
  CHECK(rep.rows[0].max_test_difference == doctest::Approx(0.5));
  rep = psd_limit_check({2, 4}, {seq[4], seq[0]}, limit, tests);
  CHECK_FALSE(rep.converging);
  CHECK_THROWS_AS((void)psd_limit_check({1, 2}, same, limit, tests), Error);
}

TEST_CASE("direct sum at N = 1 is the Wick polynomial of X(0)") {
  LongMemoryFixture fx{0.85, fixture_matrix()};
  const auto g = fx.base_measure(8);
  const std::vector<std::int64_t> zero{0};
  const auto r = correlation(g, zero);
  const std::vector<std::vector<std::int64_t>> lags{zero};
  const double a = 1.7;
  for (std::uint64_t rep = 0; rep < 10; ++rep) {
    const auto s = sample(g, 9, rep);
    const auto x = synthesize_field(s, lags);
    const double x0 = x(0, 0), x1 = x(0, 1);
    const double want = ((x0 * x0 - r(0, 0)) + (x0 * x1 - r(0, 1)) + 0.5 * (x1 * x1 - r(1, 1))) / a;
    CHECK(direct_SN(quadratic_spec(), g, s, 1, a) == doctest::Approx(want).epsilon(1e-12));
  }
}

TEST_CASE("direct sums: chaos route differs from the field route only by the diagonal") {
  // On a grid the multiple integral drops same-pair tuples, so the two routes
  // agree in mean and their gap shrinks as cells refine.
  const auto spec = quadratic_spec();
  LongMemoryFixture fx{0.5, fixture_matrix()};
  const int N = 3;
  const double a = std::pow(N, 0.8);
  double prev = 1e300;
  for (int cells : {8, 32, 128}) {
    const auto g = fx.base_measure(cells);
    const auto unit = unit_kernels(spec, g.system_ptr());
    std::vector<double> gap, gap2;
    for (std::uint64_t rep = 0; rep < 400; ++rep) {
      const auto s = sample(g, 4, rep);
      const double d = direct_SN(spec, g, s, N, a) - direct_chaos_SN(unit, s, N, a);
      gap.push_back(d);
      gap2.push_back(d * d);
    }
    const auto m = gen::stats(gap);
    CHECK(std::abs(m.mean) < 4.0 * m.se);
    const double ms = gen::stats(gap2).mean;
    CHECK(ms < prev);
    prev = ms;
  }
}

TEST_CASE("spectral form on the rescaled measure equals the direct sum") {
  LongMemoryFixture fx{0.85, fixture_matrix()};
  const auto g = fx.base_measure(8);
  const auto spec = quadratic_spec();
  const auto unit = unit_kernels(spec, g.system_ptr());
  for (int N : {2, 4, 8}) {
    const double a = std::pow(N, 0.85);
    const auto gn = rescale(g, N, a, spec.order);
    const auto kernels = rescaled_kernels(spec, gn.system_ptr(), N);
    for (std::uint64_t rep = 0; rep < 5; ++rep) {
      const double spectral = spectral_SN(kernels, sample(gn, 13, rep));
      const double direct = direct_chaos_SN(unit, sample(g, 13, rep), N, a);
      CHECK(std::abs(spectral - direct) < 1e-9 * (1.0 + std::abs(direct)));
    }
  }
}

TEST_CASE("linear case: variance of the normalized sum") {
  LongMemoryFixture fx{0.6, CMatrix::Constant(1, 1, 1.0)};
  const auto g = fx.base_measure(16);
  const auto spec = linear_spec();
  const int N = 6;
  const double a = std::pow(N, 0.8);
  double oracle = 0.0;
  for (int p = 0; p < N; ++p)
    for (int q = 0; q < N; ++q) {
      const std::vector<std::int64_t> lag{p - q};
      oracle += correlation(g, lag)(0, 0);
    }
  oracle /= a * a;

  const auto gn = rescale(g, N, a, 1);
  const auto k = rescaled_kernels(spec, gn.system_ptr(), N);
  CHECK(analytic_covariance(k[0], k[0], gn) == doctest::Approx(oracle).epsilon(1e-10));

  const Sampler sampler(g);
  const auto block = sampler.draw_block(21, 0, 20000);
  std::vector<double> sq;
  for (int r = 0; r < block.replicas; ++r) {
    const double v = direct_SN(spec, g, block.replica(r), N, a);
    sq.push_back(v * v);
  }
  const auto st = gen::stats(sq);
  CHECK(std::abs(st.mean - oracle) < 4.0 * st.se);
}

TEST_CASE("zero coefficients give a zero sum") {
  LongMemoryFixture fx{0.85, fixture_matrix()};
  const auto g = fx.base_measure(8);
  auto spec = quadratic_spec();
  for (auto& t : spec.terms) t.second = 0.0;
  const auto s = sample(g, 2, 0);
  CHECK(direct_SN(spec, g, s, 4, 2.0) == 0.0);
  const auto gn = rescale(g, 4, 2.0, 2);
  CHECK(spectral_SN(rescaled_kernels(spec, gn.system_ptr(), 4), sample(gn, 2, 0)) == 0.0);
}

TEST_CASE("Wick spec validation") {
  auto spec = quadratic_spec();
  CHECK_NOTHROW(spec.check());
  spec.terms.push_back({{3, 0}, 1.0});
  CHECK_THROWS_AS(spec.check(), Error);
  spec = quadratic_spec();
  spec.terms.push_back({{2, 0}, 2.0});
  CHECK_THROWS_AS(spec.check(), Error);
  spec = quadratic_spec();
  spec.terms[0].first = {2};
  CHECK_THROWS_AS(spec.check(), Error);
  spec = quadratic_spec();
  spec.terms[0].second = std::nan("");
  CHECK_THROWS_AS(spec.check(), Error);
  CHECK(WickSpec::colours_of({2, 0, 1}) == std::vector<int>{0, 0, 2});
}

TEST_CASE("calibrated exponent matches the density's singularity") {
  for (double beta : {0.85, 0.5}) {
    LimitConfig cfg;
    cfg.fixture = {beta, fixture_matrix()};
    cfg.wick = quadratic_spec();
    const double want = 1.0 - (1.0 - beta);
    CHECK(calibrate_exponent(cfg) == doctest::Approx(want).epsilon(1e-6));
    cfg.wick = linear_spec();
    cfg.fixture.m = CMatrix::Constant(1, 1, 1.0);
    CHECK(calibrate_exponent(cfg) == doctest::Approx(1.0 - 0.5 * (1.0 - beta)).epsilon(1e-6));
  }
  LimitConfig bad;
  bad.wick = linear_spec();
  bad.fixture.m = CMatrix::Constant(1, 1, 1.0);
  bad.calibration_probes = {8, 4};
  CHECK_THROWS_AS((void)calibrate_exponent(bad), Error);
}

TEST_CASE("fixture cell masses against quadrature of the density") {
  const double beta = 0.85;
  LongMemoryFixture fx{beta, fixture_matrix()};
  boost::math::quadrature::tanh_sinh<double> q;
  auto density = [beta](double x) { return std::pow(x, -beta) * (1.0 - x * x / (2.0 * pi * pi)); };
  for (auto [lo, hi] : {std::pair{0.0, 0.1}, std::pair{0.5, 1.5}, std::pair{2.0, pi}}) {
    const double want = q.integrate(density, lo, hi);
    const CMatrix m = fx.base_mass(lo, hi);
    CHECK(m(0, 0).real() == doctest::Approx(want).epsilon(1e-9));
    CHECK(std::abs(m(0, 1) - want * cplx(0.3, 0.2)) < 1e-9 * want);
    const double lim = q.integrate([beta](double x) { return std::pow(x, -beta); }, lo, hi);
    CHECK(fx.limit_mass(lo, hi)(0, 0).real() == doctest::Approx(lim).epsilon(1e-9));
  }
  CHECK_THROWS_AS((void)fx.base_mass(1.0, 4.0), Error);
  CHECK_THROWS_AS((void)LongMemoryFixture({1.2, fixture_matrix()}).base_mass(0.1, 0.2), Error);
  CMatrix indefinite(2, 2);
  indefinite << 1.0, 2.0, 2.0, 1.0;
  CHECK_THROWS_AS((void)LongMemoryFixture({0.5, indefinite}).base_measure(4), Error);
}

TEST_CASE("rescaled fixture cells approach the limit density") {
  LongMemoryFixture fx{0.85, fixture_matrix()};
  const int K = 8;
  const double kappa = 0.85;
  double prev = 1e300;
  for (int N : {4, 16, 64}) {
    const auto gn = rescale(fx.base_measure(N * K), N, std::pow(N, kappa), 2);
    const auto lim = fx.limit_measure(N * pi, N * K);
    double diff = 0.0;
    for (int k = 1; k <= 4; ++k) diff = std::max(diff, std::abs(gn.mass(k)(0, 0) - lim.mass(k)(0, 0)) / lim.mass(k)(0, 0).real());
    CHECK(diff < prev);
    prev = diff;
  }
  CHECK(prev < 1e-3);
}
