#include <Eigen/Eigenvalues>

#include "doctest.h"
#include "generators.hpp"
#include "vgf/error.hpp"
#include "vgf/spectral.hpp"

using namespace vgf;
using gen::pi;

namespace {

MatrixSpectralMeasure one_pair(const CMatrix& m) {
  MatrixSpectralMeasure g(share(RegularSystem::build(1, pi, 2)), static_cast<int>(m.rows()));
  g.set_mass(1, m);
  return g;
}

RawMeasure raw_of(const CMatrix& pos, const CMatrix& neg) {
  RawMeasure raw;
  raw.system = share(RegularSystem::build(1, pi, 2));
  raw.dim_field = static_cast<int>(pos.rows());
  raw.masses = {neg, pos};
  return raw;
}

// Direct sum over slots with phases from the representatives.
Eigen::MatrixXcd direct_correlation(const MatrixSpectralMeasure& g, const std::vector<std::int64_t>& p) {
  const auto& sys = g.system();
  const int d = g.dim_field();
  Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(d, d);
  for (int s = 0; s < sys.slot_count(); ++s) {
    double arg = 0.0;
    for (std::size_t l = 0; l < p.size(); ++l) arg += static_cast<double>(p[l]) * sys.representative_at(s)[l];
    acc += std::polar(1.0, arg) * g.mass_at(s);
  }
  return acc;
}

}  // namespace

TEST_CASE("validate: psd matrix passes, eigenvalues 0.5 and 1.5") {
  CMatrix m(2, 2);
  m << 1.0, 0.5, 0.5, 1.0;
  const auto rep = validate(raw_of(m, m.conjugate()));
  CHECK(rep.ok());
  CHECK(rep.cells[1].min_eigenvalue == doctest::Approx(0.5));
}

TEST_CASE("validate: indefinite matrix fails psd with eigenvalue -1") {
  CMatrix m(2, 2);
  m << 1.0, 2.0, 2.0, 1.0;
  const auto rep = validate(raw_of(m, m.conjugate()));
  CHECK_FALSE(rep.psd_ok);
  CHECK(rep.cells[1].min_eigenvalue == doctest::Approx(-1.0));
  CHECK(rep.first_failure().find("psd") == 0);
  try {
    (void)to_measure(raw_of(m, m.conjugate()));
    FAIL("indefinite measure accepted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NotPsd);
  }
}

TEST_CASE("validate: uneven partner fails evenness") {
  CMatrix m(2, 2), other(2, 2);
  m << 1.0, cplx(0.2, 0.1), cplx(0.2, -0.1), 1.0;
  other = m;  // should be the conjugate
  const auto rep = validate(raw_of(m, other));
  CHECK_FALSE(rep.evenness_ok);
  CHECK(rep.first_failure().find("evenness") == 0);
}

TEST_CASE("validate: non-Hermitian cell fails") {
  CMatrix m(2, 2);
  m << 1.0, 0.3, 0.1, 1.0;
  const auto rep = validate(raw_of(m, m.conjugate()));
  CHECK_FALSE(rep.hermitian_ok);
  CHECK_THROWS_AS((void)to_measure(raw_of(m, m.conjugate())), Error);
}

TEST_CASE("correlation of the two-cell scalar measure is cos(p pi / 2)") {
  CMatrix half(1, 1);
  half(0, 0) = 0.5;
  const auto g = one_pair(half);
  for (std::int64_t p = -6; p <= 6; ++p) {
    const std::vector<std::int64_t> lag = {p};
    CHECK(correlation(g, lag)(0, 0) == doctest::Approx(std::cos(static_cast<double>(p) * pi / 2)));
  }
  CHECK(correlation(g, std::vector<std::int64_t>{0})(0, 0) == 1.0);
  CHECK(correlation(g, std::vector<std::int64_t>{2})(0, 0) == -1.0);
}

TEST_CASE("imaginary parts of a conjugate pair cancel at p = 0") {
  CMatrix m(2, 2);
  m << 1.0, cplx(0, 0.5), cplx(0, -0.5), 1.0;
  const auto g = one_pair(0.5 * m);
  const Eigen::MatrixXd r = correlation(g, std::vector<std::int64_t>{0});
  CHECK(r(0, 0) == doctest::Approx(1.0));
  CHECK(r(1, 1) == doctest::Approx(1.0));
  CHECK(r(0, 1) == 0.0);
  CHECK(r(1, 0) == 0.0);
}

TEST_CASE("a non-even raw family has a complex correlation") {
  CMatrix m(1, 1), other(1, 1);
  m(0, 0) = cplx(1.0, 0.0);
  other(0, 0) = cplx(0.2, 0.0);
  CHECK_THROWS_AS((void)correlation(raw_of(m, other), std::vector<std::int64_t>{1}), Error);
}

TEST_CASE("trace measure") {
  CMatrix m(2, 2);
  m << 1.0, 0.5, 0.5, 1.0;
  const auto t = trace_measure(one_pair(m));
  CHECK(t[1] == doctest::Approx(2.0));
  const auto z = trace_measure(one_pair(CMatrix::Zero(2, 2)));
  CHECK(z[0] == 0.0);
  CHECK(z[1] == 0.0);
}

TEST_CASE("rescale: masses times N^{2nu/n} A_N^{-2/n}") {
  CMatrix unit(1, 1);
  unit(0, 0) = 1.0;
  const auto g = one_pair(unit);
  const auto r = rescale(g, 2, 1.0, 2);
  CHECK(r.mass(1)(0, 0).real() == doctest::Approx(2.0));
  CHECK(rescale(g, 2, 2.0, 2).mass(1)(0, 0).real() == doctest::Approx(1.0));
  CHECK(rescale(g, 4, 2.0, 1).mass(1)(0, 0).real() == doctest::Approx(4.0));
  CHECK(r.system().box().half_extent[0] == doctest::Approx(2 * pi));
  const auto id = rescale(g, 1, 1.0, 2);
  CHECK(id.mass(1)(0, 0) == g.mass(1)(0, 0));
  CHECK_THROWS_AS((void)rescale(g, 0, 1.0, 2), Error);
  CHECK_THROWS_AS((void)rescale(g, 2, 0.0, 2), Error);
}

TEST_CASE("test integrals") {
  std::mt19937_64 rng(21);
  const auto sys = share(RegularSystem::build(1, pi, 8));
  const auto g = random_measure(sys, 2, 5);
  std::vector<double> one(static_cast<std::size_t>(sys->slot_count()), 1.0);
  double total = 0.0;
  for (int s = 0; s < sys->slot_count(); ++s) total += g.entry(s, 0, 0).real();
  const cplx ti = test_integral(g, one, 0, 0);
  CHECK(ti.real() == doctest::Approx(total));
  CHECK(std::abs(ti.imag()) < 1e-15);
  std::vector<double> ind(static_cast<std::size_t>(sys->slot_count()), 0.0);
  ind[static_cast<std::size_t>(sys->slot_of(3))] = 1.0;
  CHECK(std::abs(test_integral(g, ind, 0, 1) - g.mass(3)(0, 1)) < 1e-15);
}

TEST_CASE("tent test integral converges under refinement of a smooth density") {
  const auto density = [](std::span<const double> x) {
    CMatrix m(1, 1);
    m(0, 0) = 1.0 + 0.5 * std::cos(x[0]);
    return m;
  };
  // Exact integral of the tent max(0, 1 - |x - 1|) against 1 + cos(x)/2.
  const double exact = 1.0 + 0.5 * 2.0 * std::cos(1.0) * (1.0 - std::cos(1.0));
  double previous = 1e300;
  for (int cells : {16, 64, 256}) {
    const auto sys = share(RegularSystem::build(1, pi, cells));
    const auto g = from_density(sys, 1, density);
    std::vector<double> tent(static_cast<std::size_t>(sys->slot_count()));
    for (int s = 0; s < sys->slot_count(); ++s)
      tent[static_cast<std::size_t>(s)] = std::max(0.0, 1.0 - std::abs(sys->representative_at(s)[0] - 1.0));
    const double err = std::abs(test_integral(g, tent, 0, 0).real() - exact);
    CHECK(err < previous);
    previous = err;
  }
  CHECK(previous < 1e-3);
}

TEST_CASE("moderate increase sums") {
  MatrixSpectralMeasure g(share(RegularSystem::build(1, 2.0, 2)), 1);
  CMatrix unit(1, 1);
  unit(0, 0) = 1.0;
  g.set_mass(1, unit);
  CHECK(moderate_increase_check(g, 1.0) == doctest::Approx(1.0));
  CHECK(moderate_increase_check(g, 3.0) < moderate_increase_check(g, 2.0));
  CHECK_THROWS_AS((void)moderate_increase_check(g, 0.0), Error);
  // Masses growing like |u|^{1/2}: the r = 2 sum stays bounded as the box grows.
  double last = 0.0;
  for (int boxes : {4, 16, 64, 256}) {
    MatrixSpectralMeasure h(share(RegularSystem::build(1, boxes * pi, 2 * boxes)), 1);
    double partial = 0.0;
    for (int k = 1; k <= boxes; ++k) {
      CMatrix m(1, 1);
      m(0, 0) = std::sqrt(h.system().representative(k)[0]);
      h.set_mass(k, m);
      partial += 2.0 * m(0, 0).real() / std::pow(1.0 + h.system().representative(k)[0], 2.0);
    }
    const double v = moderate_increase_check(h, 2.0);
    CHECK(v == doctest::Approx(partial));
    CHECK(v >= last);
    CHECK(v < 2.0 * (1.0 + 2.0 * std::sqrt(pi)));
    last = v;
  }
}

TEST_CASE("property: random measures validate and give real correlations") {
  std::mt19937_64 rng(22);
  for (int trial = 0; trial < 60; ++trial) {
    const auto c = gen::system_case(rng);
    const auto g = random_measure(c.system, c.d, rng(), gen::uniform(rng, 1, c.d));
    REQUIRE(validate(g).ok());
    for (int t = 0; t < 4; ++t) {
      const auto p = gen::lag(rng, c.system->dim(), 9);
      const Eigen::MatrixXcd direct = direct_correlation(g, p);
      const Eigen::MatrixXd lib = correlation(g, p);
      CHECK(direct.imag().cwiseAbs().maxCoeff() < 1e-10);
      CHECK((direct.real() - lib).cwiseAbs().maxCoeff() < 1e-12 * (1.0 + g.total_trace()));
      std::vector<std::int64_t> q(p.size());
      for (std::size_t l = 0; l < p.size(); ++l) q[l] = -p[l];
      CHECK((correlation(g, q) - lib.transpose()).cwiseAbs().maxCoeff() < 1e-12);
    }
  }
}

TEST_CASE("property: block Toeplitz matrices of correlations are psd") {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 30; ++trial) {
    const auto sys = share(RegularSystem::build(1, pi, 2 * gen::uniform(rng, 1, 4)));
    const int d = gen::uniform(rng, 1, 3);
    const auto g = random_measure(sys, d, rng(), gen::uniform(rng, 1, d));
    const int w = 7;
    Eigen::MatrixXd t(w * d, w * d);
    for (int a = 0; a < w; ++a)
      for (int b = 0; b < w; ++b) t.block(a * d, b * d, d, d) = correlation(g, std::vector<std::int64_t>{a - b});
    const Eigen::MatrixXd sym = 0.5 * (t + t.transpose());
    CHECK(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(sym).eigenvalues().minCoeff() > -1e-8);
  }
}

TEST_CASE("refine splits mass evenly and keeps correlation at the cell scale") {
  std::mt19937_64 rng(24);
  for (int trial = 0; trial < 10; ++trial) {
    const auto c = gen::system_case(rng);
    const auto g = random_measure(c.system, c.d, rng());
    const auto f = refine(g, 2);
    CHECK(validate(f).ok());
    CHECK(f.total_trace() == doctest::Approx(g.total_trace()));
  }
}

TEST_CASE("cell masses from a density are Hermitian and even") {
  const auto sys = share(RegularSystem::build(1, pi, 6));
  const auto g = from_cell_masses(sys, 2, [](std::span<const double> lo, std::span<const double> hi) {
    CMatrix m(2, 2);
    const double w = hi[0] - lo[0];
    m << w, cplx(0.1 * w, 0.2 * w), cplx(0.1 * w, -0.2 * w), w;
    return m;
  });
  CHECK(validate(g).ok());
  const auto r = restrict_measure(refine(g, 2), pi / 2);
  CHECK(r.system().slot_count() == 6);
  CHECK_THROWS_AS((void)restrict_measure(g, 1.0), Error);
}
