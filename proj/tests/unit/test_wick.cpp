#include "doctest.h"
#include "generators.hpp"
#include "vgf/error.hpp"
#include "vgf/wick.hpp"

using namespace vgf;
using gen::pi;

namespace {

double hermite_explicit(int n, double x) {
  double fact_n = 1.0;
  for (int i = 2; i <= n; ++i) fact_n *= i;
  double sum = 0.0, fm = 1.0;
  for (int m = 0; 2 * m <= n; ++m) {
    if (m > 0) fm *= m;
    double fr = 1.0;
    for (int i = 2; i <= n - 2 * m; ++i) fr *= i;
    sum += (m % 2 ? -1.0 : 1.0) * fact_n / (fm * fr * std::pow(2.0, m)) * std::pow(x, n - 2 * m);
  }
  return sum;
}

std::vector<GaussianExpression> linear_vars(const Eigen::MatrixXd& rows, const Eigen::MatrixXd& cov) {
  std::vector<GaussianExpression> us;
  for (Eigen::Index s = 0; s < rows.rows(); ++s) {
    std::vector<double> r(static_cast<std::size_t>(rows.cols()));
    for (Eigen::Index k = 0; k < rows.cols(); ++k) r[static_cast<std::size_t>(k)] = rows(s, k);
    us.push_back({Polynomial::linear(r), cov});
  }
  return us;
}

Polynomial monomial(int nvars, std::vector<int> e, double c = 1.0) {
  Polynomial p(nvars);
  p.add_term(e, c);
  return p;
}

}  // namespace

TEST_CASE("Hermite values") {
  CHECK(hermite(2, 3.0) == 8.0);
  CHECK(hermite(3, 2.0) == 2.0);
  CHECK(hermite(0, 1.7) == 1.0);
  for (int n = 0; n <= 10; ++n)
    for (double x : {-2.5, -1.0, 0.0, 0.3, 1.9}) {
      CHECK(hermite(n, x) == doctest::Approx(hermite_explicit(n, x)).epsilon(1e-12));
      const auto c = hermite_coefficients(n);
      double v = 0.0;
      for (std::size_t k = c.size(); k-- > 0;) v = v * x + c[k];
      CHECK(v == doctest::Approx(hermite_explicit(n, x)).epsilon(1e-12));
    }
}

TEST_CASE("Isserlis moments") {
  Eigen::MatrixXd cov(3, 3);
  cov << 2.0, 0.5, 0.3, 0.5, 1.0, -0.2, 0.3, -0.2, 1.5;
  CHECK(gaussian_moment({monomial(3, {1, 1, 1}), cov}) == 0.0);
  CHECK(gaussian_moment({monomial(3, {4, 0, 0}), cov}) == doctest::Approx(3.0 * 4.0));
  CHECK(gaussian_moment({monomial(3, {2, 2, 0}), cov}) == doctest::Approx(2.0 * 1.0 + 2.0 * 0.25));
  CHECK(gaussian_moment({monomial(3, {2, 1, 1}), cov}) ==
        doctest::Approx(2.0 * -0.2 + 2.0 * 0.5 * 0.3));
  CHECK_THROWS_AS((void)gaussian_moment({monomial(3, {5, 4, 0}), cov}), Error);
}

TEST_CASE("second order Wick product subtracts the covariance") {
  Eigen::MatrixXd cov(2, 2);
  cov << 1.3, 0.4, 0.4, 0.8;
  Eigen::MatrixXd rows(2, 2);
  rows << 1.0, 0.5, -0.2, 1.0;
  const auto us = linear_vars(rows, cov);
  const auto proj = wick_project(us);
  const Eigen::MatrixXd cu = linear_covariance(us);
  Polynomial expect = monomial(2, {1, 1});
  expect.add_term({0, 0}, -cu(0, 1));
  CHECK((proj.poly - expect).max_abs_coefficient() < 1e-12);
  const WickPolynomial w(monomial(2, {1, 1}), cu);
  const std::vector<double> u = {0.7, -1.1};
  CHECK(w(u) == doctest::Approx(0.7 * -1.1 - cu(0, 1)).epsilon(1e-12));
}

TEST_CASE("unit variance powers are Hermite polynomials") {
  Eigen::MatrixXd one = Eigen::MatrixXd::Identity(1, 1);
  for (int n = 1; n <= 4; ++n) {
    std::vector<GaussianExpression> us(static_cast<std::size_t>(n), {Polynomial::variable(1, 0), one});
    const auto proj = wick_project(us);
    for (double x : {-1.3, 0.0, 0.4, 2.2}) {
      const std::vector<double> xs(static_cast<std::size_t>(n), x);
      CHECK(proj.poly.evaluate(xs) == doctest::Approx(hermite_explicit(n, x)).epsilon(1e-10));
    }
  }
  for (int n = 1; n <= 6; ++n) {
    const WickPolynomial w(monomial(1, {n}), one);
    for (double x : {-1.3, 0.4, 2.2}) CHECK(w(std::vector<double>{x}) == doctest::Approx(hermite_explicit(n, x)).epsilon(1e-12));
  }
}

TEST_CASE("independent standard variables: :x1^2 x2: = (x1^2 - 1) x2") {
  const WickPolynomial w(monomial(2, {2, 1}), Eigen::MatrixXd::Identity(2, 2));
  CHECK(w.xi_polynomial().degree() == 3);
  for (double a : {-1.0, 0.5, 2.0})
    for (double b : {-0.7, 1.3}) CHECK(w(std::vector<double>{a, b}) == doctest::Approx((a * a - 1.0) * b).epsilon(1e-12));
}

TEST_CASE("property: projection is orthogonal to lower degrees and matches the expansion") {
  std::mt19937_64 rng(61);
  std::normal_distribution<double> normal;
  for (int trial = 0; trial < 40; ++trial) {
    const int n = gen::uniform(rng, 1, 4), b = gen::uniform(rng, n, 5);
    Eigen::MatrixXd B(b, b), rows(n, b);
    for (int i = 0; i < b; ++i)
      for (int j = 0; j < b; ++j) B(i, j) = normal(rng) + (i == j ? 2.0 : 0.0);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < b; ++j) rows(i, j) = normal(rng) + (i == j ? 2.0 : 0.0);
    const Eigen::MatrixXd cov = B * B.transpose();
    const auto us = linear_vars(rows, cov);
    const auto proj = wick_project(us);
    const Eigen::MatrixXd cu = linear_covariance(us);
    for (int v = 0; v < n; ++v) {
      std::vector<int> e(static_cast<std::size_t>(n), 0);
      if (n > 1) {
        e[static_cast<std::size_t>(v)] = 1;
        const double m = gaussian_moment({proj.poly * monomial(n, e), cu});
        CHECK(std::abs(m) < 1e-9 * (1.0 + cu.cwiseAbs().maxCoeff()) * std::pow(cu.cwiseAbs().maxCoeff() + 1.0, n));
      }
    }
    CHECK(std::abs(gaussian_moment(proj)) < 1e-9 * std::pow(cu.cwiseAbs().maxCoeff() + 1.0, n));
    const auto basis = orthonormal_basis(cu);
    const auto a = to_basis(proj.poly, basis), c = wick_expand(us);
    const double scale = std::max(1.0, c.max_abs_coefficient());
    CHECK((a - c).max_abs_coefficient() <= 1e-10 * scale);
  }
}

TEST_CASE("recursion: defect vanishes") {
  Eigen::MatrixXd one = Eigen::MatrixXd::Identity(1, 1);
  std::vector<GaussianExpression> two(2, {Polynomial::variable(1, 0), one});
  CHECK(wick_recursion_check(two) < 1e-12);
  for (int n = 2; n <= 4; ++n) {
    std::vector<GaussianExpression> same(static_cast<std::size_t>(n + 1), {Polynomial::variable(1, 0), one});
    CHECK(wick_recursion_check(same) < 1e-9);
  }
  std::mt19937_64 rng(62);
  std::normal_distribution<double> normal;
  for (int trial = 0; trial < 20; ++trial) {
    const int n = gen::uniform(rng, 1, 3), b = 4;
    Eigen::MatrixXd B(b, b), rows(n + 1, b);
    for (int i = 0; i < b; ++i)
      for (int j = 0; j < b; ++j) B(i, j) = normal(rng) + (i == j ? 2.0 : 0.0);
    for (int i = 0; i <= n; ++i)
      for (int j = 0; j < b; ++j) rows(i, j) = normal(rng);
    CHECK(wick_recursion_check(linear_vars(rows, B * B.transpose())) < 1e-9);
  }
}

TEST_CASE("one-fold covariance against the spectral sum") {
  std::mt19937_64 rng(63);
  const auto sys = share(RegularSystem::build(1, pi, 6));
  const auto g = random_measure(sys, 2, 3);
  const std::vector<std::vector<cplx>> phis = {gen::hermitian_function(rng, *sys), gen::hermitian_function(rng, *sys)};
  const std::vector<int> colours = {0, 1};
  const Eigen::MatrixXd c = one_fold_covariance(phis, colours, g);
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) {
      cplx sum = 0.0;
      for (int s = 0; s < sys->slot_count(); ++s)
        sum += phis[static_cast<std::size_t>(a)][static_cast<std::size_t>(s)] *
               std::conj(phis[static_cast<std::size_t>(b)][static_cast<std::size_t>(s)]) *
               g.entry(s, colours[static_cast<std::size_t>(a)], colours[static_cast<std::size_t>(b)]);
      CHECK(c(a, b) == doctest::Approx(sum.real()).epsilon(1e-12));
    }
  // Same covariance through the base coordinates.
  const Eigen::MatrixXd base = base_covariance(g);
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) {
      const auto la = one_fold_coefficients(*sys, 2, phis[static_cast<std::size_t>(a)], colours[static_cast<std::size_t>(a)]);
      const auto lb = one_fold_coefficients(*sys, 2, phis[static_cast<std::size_t>(b)], colours[static_cast<std::size_t>(b)]);
      const Eigen::Map<const Eigen::VectorXd> va(la.data(), static_cast<Eigen::Index>(la.size())), vb(lb.data(), static_cast<Eigen::Index>(lb.size()));
      CHECK(va.dot(base * vb) == doctest::Approx(c(a, b)).epsilon(1e-12));
    }
}

TEST_CASE("Ito sides: exact for n = 1, all-diagonal coarse grid for n = 2") {
  std::mt19937_64 rng(64);
  const auto sys = share(RegularSystem::build(1, pi, 8));
  const auto g = random_measure(sys, 2, 5);
  const std::vector<std::vector<cplx>> one_phi = {gen::hermitian_function(rng, *sys)};
  for (int r = 0; r < 5; ++r) {
    const auto sides = ito_both_sides(one_phi, std::vector<int>{1}, g, sample(g, rng()));
    CHECK(sides.lhs == doctest::Approx(sides.rhs).epsilon(1e-12));
  }
  MatrixSpectralMeasure h(share(RegularSystem::build(1, pi, 2)), 1);
  CMatrix half(1, 1);
  half(0, 0) = 0.5;
  h.set_mass(1, half);
  const std::vector<std::vector<cplx>> ones = {{1.0, 1.0}, {1.0, 1.0}};
  for (int r = 0; r < 5; ++r) {
    const auto s = sample(h, static_cast<std::uint64_t>(r));
    const auto sides = ito_both_sides(ones, std::vector<int>{0, 0}, h, s);
    const double x0 = synthesize_field(s, std::vector<std::vector<std::int64_t>>{{0}})(0, 0);
    CHECK(sides.rhs == 0.0);
    CHECK(sides.lhs == doctest::Approx(x0 * x0 - 1.0).epsilon(1e-12));
  }
}
