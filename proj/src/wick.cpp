#include "vgf/wick.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "vgf/error.hpp"

namespace vgf {

double hermite(int n, double x) {
  require(n >= 0, ErrorCode::InvalidArgument, "Hermite order must be nonnegative");
  double prev = 0.0, cur = 1.0;  // H_{-1}, H_0
  for (int k = 1; k <= n; ++k) {
    const double next = x * cur - (k - 1) * prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

std::vector<double> hermite_coefficients(int n) {
  require(n >= 0, ErrorCode::InvalidArgument, "Hermite order must be nonnegative");
  std::vector<double> prev, cur{1.0};
  for (int k = 1; k <= n; ++k) {
    std::vector<double> next(static_cast<std::size_t>(k) + 1, 0.0);
    for (std::size_t i = 0; i < cur.size(); ++i) next[i + 1] += cur[i];
    for (std::size_t i = 0; i < prev.size(); ++i) next[i] -= (k - 1) * prev[i];
    prev = std::move(cur);
    cur = std::move(next);
  }
  return cur;
}

namespace {

using LMatrix = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
using LVector = Eigen::Matrix<long double, Eigen::Dynamic, 1>;

// Isserlis: sum over perfect matchings of the listed variables.
template <class Cov>
long double pairing_sum(std::vector<int>& vars, std::size_t begin, const Cov& cov) {
  if (begin == vars.size()) return 1.0L;
  const int first = vars[begin];
  long double acc = 0.0L;
  for (std::size_t i = begin + 1; i < vars.size(); ++i) {
    const long double c = static_cast<long double>(cov(first, vars[i]));
    if (c == 0.0L) continue;
    std::swap(vars[begin + 1], vars[i]);
    acc += c * pairing_sum(vars, begin + 2, cov);
    std::swap(vars[begin + 1], vars[i]);
  }
  return acc;
}

long double monomial_moment(const Monomial& m, const Eigen::MatrixXd& cov) {
  std::vector<int> vars;
  for (std::size_t i = 0; i < m.size(); ++i)
    for (int e = 0; e < m[i]; ++e) vars.push_back(static_cast<int>(i));
  if (vars.size() % 2 == 1) return 0.0L;
  return pairing_sum(vars, 0, cov);
}

void monomials_up_to(int nvars, int max_degree, std::vector<Monomial>& out) {
  Monomial m(static_cast<std::size_t>(nvars), 0);
  std::function<void(int, int)> rec = [&](int i, int left) {
    if (i == nvars) {
      out.push_back(m);
      return;
    }
    for (int e = 0; e <= left; ++e) {
      m[static_cast<std::size_t>(i)] = e;
      rec(i + 1, left - e);
    }
    m[static_cast<std::size_t>(i)] = 0;
  };
  rec(0, max_degree);
}

Monomial product_monomial(int nvars, std::span<const int> which) {
  Monomial m(static_cast<std::size_t>(nvars), 0);
  for (int i : which) ++m[static_cast<std::size_t>(i)];
  return m;
}

Eigen::MatrixXd linear_rows(std::span<const GaussianExpression> us) {
  require(!us.empty(), ErrorCode::InvalidArgument, "need at least one variable");
  const auto& cov = us[0].covariance;
  const int nv = us[0].poly.nvars();
  require(cov.rows() == nv && cov.cols() == nv, ErrorCode::InvalidArgument,
          "covariance shape does not match the variables");
  Eigen::MatrixXd l = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(us.size()), nv);
  for (std::size_t s = 0; s < us.size(); ++s) {
    require(us[s].poly.nvars() == nv && us[s].covariance.rows() == nv &&
                (us[s].covariance - cov).cwiseAbs().maxCoeff() == 0.0,
            ErrorCode::InvalidArgument, "variables must share one base covariance");
    for (const auto& [m, c] : us[s].poly.terms()) {
      int deg = 0, at = -1;
      for (int i = 0; i < nv; ++i)
        if (m[static_cast<std::size_t>(i)] > 0) {
          deg += m[static_cast<std::size_t>(i)];
          at = i;
        }
      require(deg == 1, ErrorCode::InvalidArgument, "Wick products need linear variables");
      l(static_cast<Eigen::Index>(s), at) = c;
    }
  }
  return l;
}

}  // namespace

double gaussian_moment(const GaussianExpression& expr, int max_degree) {
  require(expr.poly.degree() <= max_degree, ErrorCode::InvalidArgument,
          "polynomial degree exceeds the configured maximum");
  require(expr.covariance.rows() == expr.poly.nvars() &&
              expr.covariance.cols() == expr.poly.nvars(),
          ErrorCode::InvalidArgument, "covariance shape does not match the variables");
  long double acc = 0.0L;
  for (const auto& [m, c] : expr.poly.terms())
    acc += static_cast<long double>(c) * monomial_moment(m, expr.covariance);
  return static_cast<double>(acc);
}

Eigen::VectorXd WickBasis::coordinates(std::span<const double> u) const {
  require(static_cast<Eigen::Index>(u.size()) == a.rows(), ErrorCode::InvalidArgument,
          "wrong number of variable values");
  const Eigen::Map<const Eigen::VectorXd> v(u.data(), static_cast<Eigen::Index>(u.size()));
  return a_pinv * v;
}

WickBasis orthonormal_basis(const Eigen::MatrixXd& covariance, double tol) {
  require(covariance.rows() == covariance.cols(), ErrorCode::InvalidArgument,
          "covariance must be square");
  const Eigen::MatrixXd sym = 0.5 * (covariance + covariance.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym);
  const auto& lambda = eig.eigenvalues();
  const double top = lambda.size() ? std::max(lambda.maxCoeff(), 0.0) : 0.0;
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = lambda.size(); i-- > 0;)
    if (lambda(i) > tol * top && lambda(i) > 0.0) keep.push_back(i);
  WickBasis b;
  b.a.resize(sym.rows(), static_cast<Eigen::Index>(keep.size()));
  b.a_pinv.resize(static_cast<Eigen::Index>(keep.size()), sym.rows());
  for (std::size_t c = 0; c < keep.size(); ++c) {
    const double root = std::sqrt(lambda(keep[c]));
    b.a.col(static_cast<Eigen::Index>(c)) = eig.eigenvectors().col(keep[c]) * root;
    b.a_pinv.row(static_cast<Eigen::Index>(c)) = eig.eigenvectors().col(keep[c]).transpose() / root;
  }
  return b;
}

Polynomial to_basis(const Polynomial& p, const WickBasis& basis) {
  require(p.nvars() == basis.a.rows(), ErrorCode::InvalidArgument,
          "polynomial and basis differ in variables");
  std::vector<std::vector<double>> rows(static_cast<std::size_t>(basis.a.rows()));
  for (Eigen::Index i = 0; i < basis.a.rows(); ++i)
    for (Eigen::Index c = 0; c < basis.a.cols(); ++c)
      rows[static_cast<std::size_t>(i)].push_back(basis.a(i, c));
  if (basis.a.cols() == 0) {
    // Degenerate span: every variable is almost surely zero.
    Polynomial out(0);
    const Monomial zero(static_cast<std::size_t>(p.nvars()), 0);
    out.add_term({}, p.coefficient(zero));
    return out;
  }
  return p.substitute_linear(rows);
}

Polynomial hermite_substitute(const Polynomial& p_xi) {
  const int r = p_xi.nvars();
  Polynomial out(r);
  for (const auto& [m, c] : p_xi.terms()) {
    Polynomial t = Polynomial::constant(r, c);
    for (int q = 0; q < r; ++q) {
      const int l = m[static_cast<std::size_t>(q)];
      if (l == 0) continue;
      Polynomial h(r);
      const auto coeffs = hermite_coefficients(l);
      for (std::size_t e = 0; e < coeffs.size(); ++e) {
        Monomial mono(static_cast<std::size_t>(r), 0);
        mono[static_cast<std::size_t>(q)] = static_cast<int>(e);
        h.add_term(mono, coeffs[e]);
      }
      t = t * h;
    }
    out += t;
  }
  return out;
}

Eigen::MatrixXd linear_covariance(std::span<const GaussianExpression> us) {
  const Eigen::MatrixXd l = linear_rows(us);
  return l * us[0].covariance * l.transpose();
}

GaussianExpression wick_project(std::span<const GaussianExpression> us) {
  const Eigen::MatrixXd cov_u = linear_covariance(us);
  const int n = static_cast<int>(us.size());
  require(2 * n <= kDefaultMaxDegree, ErrorCode::InvalidArgument,
          "Wick product order exceeds the configured maximum degree");
  std::vector<Monomial> basis;
  monomials_up_to(n, n - 1, basis);
  std::vector<int> all(static_cast<std::size_t>(n));
  std::iota(all.begin(), all.end(), 0);
  const Monomial target = product_monomial(n, all);

  const auto nb = static_cast<Eigen::Index>(basis.size());
  LMatrix gram(nb, nb);
  LVector rhs(nb);
  Monomial prod(static_cast<std::size_t>(n));
  auto sum = [&](const Monomial& a, const Monomial& b) {
    for (int i = 0; i < n; ++i)
      prod[static_cast<std::size_t>(i)] = a[static_cast<std::size_t>(i)] + b[static_cast<std::size_t>(i)];
    return prod;
  };
  for (Eigen::Index a = 0; a < nb; ++a) {
    for (Eigen::Index b = a; b < nb; ++b) {
      gram(a, b) = monomial_moment(sum(basis[static_cast<std::size_t>(a)], basis[static_cast<std::size_t>(b)]), cov_u);
      gram(b, a) = gram(a, b);
    }
    rhs(a) = monomial_moment(sum(basis[static_cast<std::size_t>(a)], target), cov_u);
  }
  // Pseudo-inverse projection on the unit-diagonal Gram matrix; dependent
  // monomials carry no extra direction.
  LVector scale(nb);
  for (Eigen::Index a = 0; a < nb; ++a) scale(a) = gram(a, a) > 0.0L ? 1.0L / std::sqrt(gram(a, a)) : 0.0L;
  gram = scale.asDiagonal() * gram * scale.asDiagonal();
  rhs = scale.cwiseProduct(rhs);
  Eigen::SelfAdjointEigenSolver<LMatrix> eig(gram);
  const LVector& lambda = eig.eigenvalues();
  const long double top = lambda.size() ? lambda.maxCoeff() : 0.0L;
  const LVector proj = eig.eigenvectors().transpose() * rhs;
  LVector coeff = LVector::Zero(nb);
  for (Eigen::Index i = 0; i < nb; ++i)
    if (lambda(i) > 1e-10L * top) coeff += eig.eigenvectors().col(i) * (proj(i) / lambda(i));
  coeff = scale.cwiseProduct(coeff);

  GaussianExpression out{Polynomial(n), cov_u};
  out.poly.add_term(target, 1.0);
  for (Eigen::Index a = 0; a < nb; ++a)
    out.poly.add_term(basis[static_cast<std::size_t>(a)], -static_cast<double>(coeff(a)));
  return out;
}

Polynomial wick_expand(const Polynomial& p_u, const WickBasis& basis) {
  require(p_u.is_homogeneous(p_u.degree()), ErrorCode::InvalidArgument,
          "Wick expansion needs a homogeneous polynomial");
  return hermite_substitute(to_basis(p_u, basis));
}

Polynomial wick_expand(std::span<const GaussianExpression> us) {
  const Eigen::MatrixXd cov_u = linear_covariance(us);
  const int n = static_cast<int>(us.size());
  std::vector<int> all(static_cast<std::size_t>(n));
  std::iota(all.begin(), all.end(), 0);
  Polynomial p(n);
  p.add_term(product_monomial(n, all), 1.0);
  return wick_expand(p, orthonormal_basis(cov_u));
}

WickPolynomial::WickPolynomial(const Polynomial& p_u, const Eigen::MatrixXd& covariance_u)
    : basis_(orthonormal_basis(covariance_u)), xi_(wick_expand(p_u, basis_)) {}

double WickPolynomial::operator()(std::span<const double> u) const {
  const Eigen::VectorXd xi = basis_.coordinates(u);
  return xi_.evaluate(std::span<const double>(xi.data(), static_cast<std::size_t>(xi.size())));
}

double wick_recursion_check(std::span<const GaussianExpression> us) {
  require(us.size() >= 2, ErrorCode::InvalidArgument, "recursion needs at least two variables");
  const Eigen::MatrixXd cov_u = linear_covariance(us);
  const int total = static_cast<int>(us.size());
  const int n = total - 1;
  const WickBasis basis = orthonormal_basis(cov_u);
  auto wick_of = [&](const std::vector<int>& which) {
    Polynomial p(total);
    p.add_term(product_monomial(total, which), 1.0);
    return wick_expand(p, basis);
  };
  std::vector<int> first(static_cast<std::size_t>(n));
  std::iota(first.begin(), first.end(), 0);
  std::vector<int> everything = first;
  everything.push_back(n);

  const Polynomial last = to_basis(Polynomial::variable(total, n), basis);
  const Polynomial lhs = wick_of(first) * last;
  Polynomial rhs = wick_of(everything);
  for (int s = 0; s < n; ++s) {
    std::vector<int> rest;
    for (int t = 0; t < n; ++t)
      if (t != s) rest.push_back(t);
    rhs += wick_of(rest) * cov_u(s, n);
  }
  return (lhs - rhs).max_abs_coefficient();
}

Eigen::MatrixXd one_fold_covariance(std::span<const std::vector<cplx>> phis,
                                    std::span<const int> colours, const MatrixSpectralMeasure& g) {
  require(phis.size() == colours.size(), ErrorCode::InvalidArgument,
          "one colour per function is required");
  const auto n = static_cast<Eigen::Index>(phis.size());
  const int S = g.system().slot_count();
  Eigen::MatrixXd c(n, n);
  for (Eigen::Index s = 0; s < n; ++s)
    for (Eigen::Index t = 0; t < n; ++t) {
      cplx acc{};
      for (int k = 0; k < S; ++k)
        acc += phis[static_cast<std::size_t>(s)][static_cast<std::size_t>(k)] *
               std::conj(phis[static_cast<std::size_t>(t)][static_cast<std::size_t>(k)]) *
               g.entry(k, colours[static_cast<std::size_t>(s)], colours[static_cast<std::size_t>(t)]);
      c(s, t) = acc.real();
    }
  return 0.5 * (c + c.transpose());
}

Eigen::MatrixXd base_covariance(const MatrixSpectralMeasure& g) {
  const int d = g.dim_field();
  const int pairs = g.system().pair_count();
  const Eigen::Index n = static_cast<Eigen::Index>(pairs) * d * 2;
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(n, n);
  for (int pos = 0; pos < pairs; ++pos) {
    const int slot = pos + pairs;
    for (int j = 0; j < d; ++j)
      for (int jp = 0; jp < d; ++jp) {
        const cplx gj = g.entry(slot, j, jp);
        const Eigen::Index re_j = (static_cast<Eigen::Index>(pos) * d + j) * 2;
        const Eigen::Index re_jp = (static_cast<Eigen::Index>(pos) * d + jp) * 2;
        c(re_j, re_jp) = 0.5 * gj.real();
        c(re_j + 1, re_jp + 1) = 0.5 * gj.real();
        c(re_j, re_jp + 1) = -0.5 * gj.imag();
        c(re_j + 1, re_jp) = 0.5 * gj.imag();
      }
  }
  return c;
}

std::vector<double> one_fold_coefficients(const RegularSystem& sys, int dim_field,
                                          std::span<const cplx> phi, int j) {
  require_hermitian_function(sys, phi);
  const int pairs = sys.pair_count();
  std::vector<double> coeffs(static_cast<std::size_t>(pairs) * dim_field * 2, 0.0);
  for (int pos = 0; pos < pairs; ++pos) {
    const cplx f = phi[static_cast<std::size_t>(pos + pairs)];
    const std::size_t re = (static_cast<std::size_t>(pos) * dim_field + j) * 2;
    coeffs[re] = 2.0 * f.real();
    coeffs[re + 1] = -2.0 * f.imag();
  }
  return coeffs;
}

std::vector<double> base_coordinates(const SpectralSample& s) {
  const int d = s.dim_field();
  const int pairs = s.system().pair_count();
  std::vector<double> x(static_cast<std::size_t>(pairs) * d * 2);
  for (int pos = 0; pos < pairs; ++pos)
    for (int j = 0; j < d; ++j) {
      const cplx z = s.value(pos + pairs, j);
      const std::size_t i = (static_cast<std::size_t>(pos) * d + j) * 2;
      x[i] = z.real();
      x[i + 1] = z.imag();
    }
  return x;
}

namespace {

Polynomial product_of_all(int n) {
  Polynomial p(n);
  p.add_term(Monomial(static_cast<std::size_t>(n), 1), 1.0);
  return p;
}

}  // namespace

ItoEvaluator::ItoEvaluator(std::vector<std::vector<cplx>> phis, std::vector<int> colours,
                           const MatrixSpectralMeasure& g)
    : phis_(std::move(phis)),
      colours_(std::move(colours)),
      wick_(product_of_all(static_cast<int>(phis_.size())),
            one_fold_covariance(phis_, colours_, g)),
      kernel_(tensor_kernel(g.system_ptr(), g.dim_field(), phis_, colours_)) {}

ItoSides ItoEvaluator::operator()(const SpectralSample& s) const {
  std::vector<double> u(phis_.size());
  for (std::size_t t = 0; t < phis_.size(); ++t)
    u[t] = integrate_one_fold(s, phis_[t], colours_[t]);
  return {wick_(u), evaluate(s, kernel_)};
}

std::vector<ItoSides> ItoEvaluator::operator()(const SampleBlock& b) const {
  require_same_system(*b.system, kernel_.system());
  const int R = b.replicas;
  const int S = b.system->slot_count();
  std::vector<std::vector<double>> u(phis_.size(), std::vector<double>(static_cast<std::size_t>(R), 0.0));
  for (std::size_t t = 0; t < phis_.size(); ++t)
    for (int s = 0; s < S; ++s) {
      const cplx f = phis_[t][static_cast<std::size_t>(s)];
      const std::size_t o = b.offset(colours_[t], s);
      for (int r = 0; r < R; ++r)
        u[t][static_cast<std::size_t>(r)] += f.real() * b.re[o + r] - f.imag() * b.im[o + r];
    }
  const auto rhs = evaluate(b, kernel_);
  std::vector<ItoSides> out(static_cast<std::size_t>(R));
  std::vector<double> point(phis_.size());
  for (int r = 0; r < R; ++r) {
    for (std::size_t t = 0; t < phis_.size(); ++t) point[t] = u[t][static_cast<std::size_t>(r)];
    out[static_cast<std::size_t>(r)] = {wick_(point), rhs[static_cast<std::size_t>(r)]};
  }
  return out;
}

ItoSides ito_both_sides(std::span<const std::vector<cplx>> phis, std::span<const int> colours,
                        const MatrixSpectralMeasure& g, const SpectralSample& s) {
  return ItoEvaluator({phis.begin(), phis.end()}, {colours.begin(), colours.end()}, g)(s);
}

}  // namespace vgf
