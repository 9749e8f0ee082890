#include "doctest.h"
#include "generators.hpp"
#include "vgf/error.hpp"
#include "vgf/sampler.hpp"

using namespace vgf;
using gen::pi;

namespace {

MatrixSpectralMeasure half_mass_circle() {
  MatrixSpectralMeasure g(share(RegularSystem::build(1, pi, 2)), 1);
  CMatrix m(1, 1);
  m(0, 0) = 0.5;
  g.set_mass(1, m);
  return g;
}

}  // namespace

TEST_CASE("covariance factor reproduces the matrix, with clipping near the boundary") {
  CMatrix g(2, 2);
  g << 1.0, cplx(0.3, 0.4), cplx(0.3, -0.4), 0.7;
  const CMatrix f = covariance_factor(g);
  CHECK((f * f.adjoint() - g).cwiseAbs().maxCoeff() < 1e-14);
  CMatrix edge(2, 2);
  edge << 1.0, 1.0, 1.0, 1.0;
  edge(1, 1) -= 5e-11;
  const CMatrix fe = covariance_factor(edge);
  CHECK((fe * fe.adjoint() - edge).cwiseAbs().maxCoeff() < 1e-9);
  CMatrix bad(2, 2);
  bad << 1.0, 2.0, 2.0, 1.0;
  CHECK_THROWS_AS((void)covariance_factor(bad), Error);
}

TEST_CASE("samples are conjugate-symmetric exactly") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 40; ++trial) {
    const auto c = gen::system_case(rng);
    const auto g = random_measure(c.system, c.d, rng());
    const auto s = sample(g, rng(), static_cast<std::uint64_t>(trial));
    for (int slot = 0; slot < c.system->slot_count(); ++slot)
      for (int j = 0; j < c.d; ++j) CHECK(s.value(c.system->mirror(slot), j) == std::conj(s.value(slot, j)));
  }
}

TEST_CASE("draws depend only on seed, replica and cell") {
  const auto sys = share(RegularSystem::build(1, pi, 8));
  const auto g = random_measure(sys, 2, 3);
  const Sampler sampler(g);
  const auto block = sampler.draw_block(77, 10, 5);
  for (int r = 0; r < 5; ++r) {
    const auto single = sampler.draw(77, static_cast<std::uint64_t>(10 + r));
    const auto from_block = block.replica(r);
    for (std::size_t i = 0; i < single.values().size(); ++i) CHECK(single.values()[i] == from_block.values()[i]);
  }
  const auto other = sampler.draw(78, 10);
  CHECK(other.values()[0] != block.replica(0).values()[0]);
}

TEST_CASE("field synthesis of the half-mass circle: Var X(0) = 1, E X(0) X(2) = -1") {
  const auto g = half_mass_circle();
  const Sampler sampler(g);
  const std::vector<std::vector<std::int64_t>> lags = {{0}, {2}};
  const int R = 20000;
  std::vector<double> v0, v02;
  for (int r = 0; r < R; ++r) {
    const auto x = synthesize_field(sampler.draw(5, static_cast<std::uint64_t>(r)), lags);
    v0.push_back(x(0, 0) * x(0, 0));
    v02.push_back(x(0, 0) * x(1, 0));
    // With u = +-pi/2 the lag-2 value is exactly -X(0).
    CHECK(x(1, 0) == doctest::Approx(-x(0, 0)).epsilon(1e-12));
  }
  const auto a = gen::stats(v0), b = gen::stats(v02);
  CHECK(std::abs(a.mean - 1.0) < 4.0 * a.se);
  CHECK(std::abs(b.mean + 1.0) < 4.0 * b.se);
}

TEST_CASE("one-fold integrals: phi = 1 and exponentials recover the field") {
  std::mt19937_64 rng(32);
  for (int trial = 0; trial < 20; ++trial) {
    const auto c = gen::system_case(rng);
    const auto g = random_measure(c.system, c.d, rng());
    const auto s = sample(g, rng());
    const auto p = gen::lag(rng, c.system->dim(), 6);
    std::vector<cplx> one(static_cast<std::size_t>(c.system->slot_count()), 1.0), expo(one.size());
    for (int slot = 0; slot < c.system->slot_count(); ++slot) expo[static_cast<std::size_t>(slot)] = c.system->phase(p, slot);
    const std::vector<std::vector<std::int64_t>> lags = {std::vector<std::int64_t>(c.system->dim(), 0), p};
    const auto x = synthesize_field(s, lags);
    for (int j = 0; j < c.d; ++j) {
      CHECK(integrate_one_fold(s, one, j) == doctest::Approx(x(0, j)).epsilon(1e-12));
      CHECK(integrate_one_fold(s, expo, j) == doctest::Approx(x(1, j)).epsilon(1e-12));
    }
  }
}

TEST_CASE("one-fold integral rejects non-Hermitian functions") {
  const auto g = half_mass_circle();
  const auto s = sample(g, 1);
  std::vector<cplx> phi = {cplx(1, 1), cplx(1, 1)};
  CHECK_THROWS_AS((void)integrate_one_fold(s, phi, 0), Error);
}

TEST_CASE("Monte Carlo: E Z_1 conj Z_2 of the one-pair measure is 0.25") {
  MatrixSpectralMeasure g(share(RegularSystem::build(1, pi, 2)), 2);
  CMatrix m(2, 2);
  m << 0.5, 0.25, 0.25, 0.5;
  g.set_mass(1, m);
  const Sampler sampler(g);
  std::vector<double> re, im, pre;
  for (int r = 0; r < 40000; ++r) {
    const auto s = sampler.draw(9, static_cast<std::uint64_t>(r));
    const cplx v = s.at_index(1, 0) * std::conj(s.at_index(1, 1));
    const cplx w = s.at_index(1, 0) * s.at_index(1, 1);
    re.push_back(v.real());
    im.push_back(v.imag());
    pre.push_back(w.real());
  }
  const auto a = gen::stats(re), b = gen::stats(im), c = gen::stats(pre);
  CHECK(std::abs(a.mean - 0.25) < 4.0 * a.se);
  CHECK(std::abs(b.mean) < 4.0 * b.se);
  CHECK(std::abs(c.mean) < 4.0 * c.se);
}

TEST_CASE("Monte Carlo: one-fold cross moments against the deterministic sum") {
  std::mt19937_64 rng(33);
  const auto sys = share(RegularSystem::build(1, pi, 6));
  const auto g = random_measure(sys, 2, 8);
  const auto phi = gen::hermitian_function(rng, *sys);
  const auto psi = gen::hermitian_function(rng, *sys);
  cplx expected = 0.0;
  for (int s = 0; s < sys->slot_count(); ++s)
    expected += phi[static_cast<std::size_t>(s)] * std::conj(psi[static_cast<std::size_t>(s)]) * g.entry(s, 0, 1);
  CHECK(std::abs(expected.imag()) < 1e-12);
  const Sampler sampler(g);
  std::vector<double> prod;
  for (int r = 0; r < 40000; ++r) {
    const auto s = sampler.draw(4, static_cast<std::uint64_t>(r));
    prod.push_back(integrate_one_fold(s, phi, 0) * integrate_one_fold(s, psi, 1));
  }
  const auto st = gen::stats(prod);
  CHECK(std::abs(st.mean - expected.real()) < 4.0 * st.se);
}

TEST_CASE("aggregation sums children and commutes with the sampler's law") {
  const auto coarse = share(RegularSystem::build(1, pi, 4));
  const auto g = random_measure(coarse, 2, 12);
  const auto fine_g = refine(g, 4);
  const auto fine = sample(fine_g, 3);
  const auto agg = aggregate(fine, coarse);
  const auto parents = fine_g.system().parent_slots(*coarse);
  for (int s = 0; s < coarse->slot_count(); ++s)
    for (int j = 0; j < 2; ++j) {
      cplx sum = 0.0;
      for (int f = 0; f < fine_g.system().slot_count(); ++f)
        if (parents[static_cast<std::size_t>(f)] == s) sum += fine.value(f, j);
      CHECK(std::abs(agg.value(s, j) - sum) < 1e-14);
    }
}

TEST_CASE("shift: u = 0 is the identity, phases on the circle are -1 for u = 2") {
  const auto g = half_mass_circle();
  const auto s = sample(g, 2);
  const auto same = shift_sample(s, std::vector<std::int64_t>{0});
  for (std::size_t i = 0; i < s.values().size(); ++i) CHECK(same.values()[i] == s.values()[i]);
  const auto two = shift_sample(s, std::vector<std::int64_t>{2});
  for (std::size_t i = 0; i < s.values().size(); ++i) CHECK(two.values()[i] == -s.values()[i]);
}

TEST_CASE("property: shifts compose and move the field exactly") {
  std::mt19937_64 rng(34);
  for (int trial = 0; trial < 40; ++trial) {
    const auto c = gen::system_case(rng);
    const auto g = random_measure(c.system, c.d, rng());
    const auto s = sample(g, rng());
    const auto u = gen::lag(rng, c.system->dim(), 20), v = gen::lag(rng, c.system->dim(), 20);
    std::vector<std::int64_t> uv(u.size());
    for (std::size_t l = 0; l < u.size(); ++l) uv[l] = u[l] + v[l];
    const auto a = shift_sample(shift_sample(s, u), v), b = shift_sample(s, uv);
    for (std::size_t i = 0; i < a.values().size(); ++i) CHECK(a.values()[i] == b.values()[i]);
    for (int slot = 0; slot < c.system->slot_count(); ++slot)
      for (int j = 0; j < c.d; ++j) CHECK(a.value(c.system->mirror(slot), j) == std::conj(a.value(slot, j)));
    const auto p = gen::lag(rng, c.system->dim(), 10);
    std::vector<std::int64_t> pu(p.size());
    for (std::size_t l = 0; l < p.size(); ++l) pu[l] = p[l] + u[l];
    const std::vector<std::vector<std::int64_t>> lp = {p}, lpu = {pu};
    const auto x1 = synthesize_field(shift_sample(s, u), lp), x2 = synthesize_field(s, lpu);
    for (int j = 0; j < c.d; ++j) CHECK(x1(0, j) == x2(0, j));
  }
}
