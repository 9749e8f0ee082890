#include <algorithm>
#include <numeric>

#include "doctest.h"
#include "generators.hpp"
#include "vgf/chaos.hpp"
#include "vgf/error.hpp"

using namespace vgf;
using gen::pi;

namespace {

// E I(f) I(h) by brute force: sum over tuples and over pairings pi of the
// variables of f with those of h, using E Z_a(k) conj Z_b(k) = G_ab(k).
double covariance_oracle(const SimpleKernel& f, const SimpleKernel& h, const MatrixSpectralMeasure& g) {
  if (f.order() != h.order()) return 0.0;
  const int n = f.order();
  std::vector<int> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), 0);
  cplx acc = 0.0;
  do {
    for (std::size_t e = 0; e < f.size(); ++e) {
      const auto k = f.tuple(e);
      std::vector<int> kp(static_cast<std::size_t>(n));
      for (int s = 0; s < n; ++s) kp[static_cast<std::size_t>(perm[static_cast<std::size_t>(s)])] = k[static_cast<std::size_t>(s)];
      cplx term = f.value(e) * std::conj(h.at(std::span<const int>(kp)));
      for (int s = 0; s < n; ++s)
        term *= g.entry(k[static_cast<std::size_t>(s)], f.colours()[static_cast<std::size_t>(s)],
                        h.colours()[static_cast<std::size_t>(perm[static_cast<std::size_t>(s)])]);
      acc += term;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return acc.real();
}

double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

}  // namespace

TEST_CASE("tensor kernel on four cells keeps the 8 nondiagonal pairs of 16") {
  const auto sys = share(RegularSystem::build(1, pi, 4));
  const std::vector<std::vector<cplx>> phis = {{1, 1, 1, 1}, {1, 1, 1, 1}};
  const auto f = tensor_kernel(sys, 1, phis, {0, 0});
  CHECK(f.size() == 8);
  for (std::size_t e = 0; e < f.size(); ++e) {
    const auto t = f.tuple(e);
    CHECK(sys->positive_slot(t[0]) != sys->positive_slot(t[1]));
  }
}

TEST_CASE("zero kernel and the order-one indicator") {
  const auto sys = share(RegularSystem::build(1, pi, 4));
  const auto g = random_measure(sys, 1, 2);
  const auto s = sample(g, 3);
  CHECK(evaluate(s, SimpleKernel::zero(sys, 1, {0, 0})) == 0.0);
  const auto ind = SimpleKernel::from_entries(sys, 1, {0}, {{{sys->slot_of(1)}, 1.0}, {{sys->slot_of(-1)}, 1.0}});
  const cplx direct = s.at_index(1, 0) + s.at_index(-1, 0);
  CHECK(evaluate(s, ind) == doctest::Approx(direct.real()).epsilon(1e-15));
  CHECK(direct.imag() == 0.0);
}

TEST_CASE("colour checks and Hermitian symmetry are enforced") {
  const auto sys = share(RegularSystem::build(1, pi, 4));
  CHECK_THROWS_AS((void)SimpleKernel::zero(sys, 2, {0, 2}), Error);
  CHECK_THROWS_AS((void)SimpleKernel::from_entries(sys, 1, {0}, {{{sys->slot_of(1)}, cplx(1, 1)}}), Error);
  const std::vector<int> swap = {0, 0};
  const auto f = random_kernel(sys, 1, {0, 0}, 4);
  CHECK_THROWS_AS((void)permute_kernel(f, swap), Error);
}

TEST_CASE("property: analytic covariance matches the pairing oracle and the bound") {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 40; ++trial) {
    const auto c = gen::system_case(rng, 3, 6, 4);
    const auto g = random_measure(c.system, c.d, rng());
    const int n = gen::uniform(rng, 1, 3);
    const double density = n == 3 ? 0.4 : 1.0;
    const auto f = random_kernel(c.system, c.d, gen::colours(rng, n, c.d), rng(), density);
    const auto h = random_kernel(c.system, c.d, gen::colours(rng, n, c.d), rng(), density);
    const double lib = analytic_covariance(f, h, g);
    const double oracle = covariance_oracle(f, h, g);
    CHECK(lib == doctest::Approx(oracle).epsilon(1e-10).scale(1.0));
    CHECK(analytic_covariance(h, f, g) == doctest::Approx(lib).epsilon(1e-12));
    const double ff = analytic_covariance(f, f, g);
    CHECK(ff <= factorial(n) * f.norm_squared(g) + 1e-10);
    CHECK(ff >= -1e-12);
    const auto other = random_kernel(c.system, c.d, gen::colours(rng, n % 3 + 1, c.d), rng());
    CHECK(analytic_covariance(f, other, g) == 0.0);
  }
}

TEST_CASE("property: permuted kernels give the same integral pathwise") {
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 30; ++trial) {
    const auto c = gen::system_case(rng, 3, 6, 4);
    const auto g = random_measure(c.system, c.d, rng());
    const int n = gen::uniform(rng, 1, 3);
    const auto f = random_kernel(c.system, c.d, gen::colours(rng, n, c.d), rng(), 0.5);
    std::vector<int> pi_(static_cast<std::size_t>(n));
    std::iota(pi_.begin(), pi_.end(), 0);
    std::shuffle(pi_.begin(), pi_.end(), rng);
    const auto fp = permute_kernel(f, pi_);
    std::vector<int> id(static_cast<std::size_t>(n));
    std::iota(id.begin(), id.end(), 0);
    const auto fi = permute_kernel(f, id);
    for (int r = 0; r < 5; ++r) {
      const auto s = sample(g, rng());
      const double a = evaluate(s, f);
      double scale = 0.0;
      for (std::size_t e = 0; e < f.size(); ++e) {
        double w = std::abs(f.value(e));
        for (int t = 0; t < n; ++t) w *= std::abs(s.value(f.tuple(e)[static_cast<std::size_t>(t)], f.colours()[static_cast<std::size_t>(t)]));
        scale += w;
      }
      CHECK(std::abs(evaluate(s, fp) - a) <= 1e-12 * scale);
      CHECK(evaluate(s, fi) == a);
    }
  }
}

TEST_CASE("swapping a tensor kernel swaps factors and colours") {
  std::mt19937_64 rng(43);
  const auto sys = share(RegularSystem::build(1, pi, 6));
  const auto g = random_measure(sys, 2, 6);
  const auto phi1 = gen::hermitian_function(rng, *sys), phi2 = gen::hermitian_function(rng, *sys);
  const std::vector<std::vector<cplx>> ab = {phi1, phi2}, ba = {phi2, phi1};
  const auto f = tensor_kernel(sys, 2, ab, {0, 1});
  const auto swapped = permute_kernel(f, std::vector<int>{1, 0});
  const auto direct = tensor_kernel(sys, 2, ba, {1, 0});
  CHECK(swapped.colours() == direct.colours());
  REQUIRE(swapped.size() == direct.size());
  for (std::size_t e = 0; e < direct.size(); ++e) CHECK(std::abs(swapped.value(e) - direct.value(e)) < 1e-15);
  for (int r = 0; r < 5; ++r) {
    const auto s = sample(g, static_cast<std::uint64_t>(r));
    CHECK(evaluate(s, f) == doctest::Approx(evaluate(s, direct)).epsilon(1e-12));
  }
}

TEST_CASE("Monte Carlo: zero mean, second moment, orthogonality across orders") {
  const auto sys = share(RegularSystem::build(1, pi, 6));
  const auto g = random_measure(sys, 2, 44);
  const auto f1 = random_kernel(sys, 2, {1}, 1);
  const auto f2 = random_kernel(sys, 2, {0, 1}, 2);
  const Sampler sampler(g);
  const auto block = sampler.draw_block(7, 0, 30000);
  const auto v1 = evaluate(block, f1), v2 = evaluate(block, f2);
  std::vector<double> sq, cross;
  for (std::size_t r = 0; r < v2.size(); ++r) {
    sq.push_back(v2[r] * v2[r]);
    cross.push_back(v1[r] * v2[r]);
  }
  const auto m = gen::stats(v2), q = gen::stats(sq), x = gen::stats(cross);
  CHECK(std::abs(m.mean) < 4.0 * m.se);
  CHECK(std::abs(q.mean - analytic_covariance(f2, f2, g)) < 4.0 * q.se);
  CHECK(std::abs(x.mean) < 4.0 * x.se);
}

TEST_CASE("shift kernel multiplies by the summed phase") {
  std::mt19937_64 rng(45);
  for (int trial = 0; trial < 20; ++trial) {
    const auto c = gen::system_case(rng, 2, 6, 4);
    const int n = gen::uniform(rng, 1, 3);
    const auto f = random_kernel(c.system, c.d, gen::colours(rng, n, c.d), rng(), 0.5);
    const auto u = gen::lag(rng, c.system->dim(), 7);
    const auto fs = shift_kernel(f, u);
    REQUIRE(fs.size() == f.size());
    for (std::size_t e = 0; e < f.size(); ++e) {
      cplx ph = 1.0;
      for (auto s : f.tuple(e)) ph *= c.system->phase(u, s);
      CHECK(std::abs(fs.value(e) - ph * f.value(e)) < 1e-12);
    }
    const auto same = shift_kernel(f, std::vector<std::int64_t>(c.system->dim(), 0));
    for (std::size_t e = 0; e < f.size(); ++e) CHECK(same.value(e) == f.value(e));
  }
}

TEST_CASE("lifted kernels integrate identically on aggregated samples") {
  std::mt19937_64 rng(46);
  const auto coarse = share(RegularSystem::build(1, pi, 4));
  const auto g = random_measure(coarse, 2, 9);
  const auto f = random_kernel(coarse, 2, {0, 1}, 10);
  const auto fine_g = refine(g, 2);
  const auto lifted = lift_kernel(f, fine_g.system_ptr());
  for (int r = 0; r < 5; ++r) {
    const auto fine = sample(fine_g, rng());
    const auto agg = aggregate(fine, coarse);
    CHECK(evaluate(fine, lifted) == doctest::Approx(evaluate(agg, f)).epsilon(1e-12));
  }
}
