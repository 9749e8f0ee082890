#include "vgf/polynomial.hpp"

#include <algorithm>
#include <cmath>

#include "vgf/error.hpp"

namespace vgf {

Polynomial Polynomial::constant(int nvars, double c) {
  Polynomial p(nvars);
  p.add_term(Monomial(static_cast<std::size_t>(nvars), 0), c);
  return p;
}

Polynomial Polynomial::variable(int nvars, int i) {
  require(i >= 0 && i < nvars, ErrorCode::InvalidArgument, "variable index out of range");
  Monomial m(static_cast<std::size_t>(nvars), 0);
  m[static_cast<std::size_t>(i)] = 1;
  Polynomial p(nvars);
  p.add_term(m, 1.0);
  return p;
}

Polynomial Polynomial::linear(std::span<const double> coeffs) {
  const int n = static_cast<int>(coeffs.size());
  Polynomial p(n);
  for (int i = 0; i < n; ++i) {
    Monomial m(static_cast<std::size_t>(n), 0);
    m[static_cast<std::size_t>(i)] = 1;
    p.add_term(m, coeffs[static_cast<std::size_t>(i)]);
  }
  return p;
}

double Polynomial::coefficient(const Monomial& m) const {
  const auto it = terms_.find(m);
  return it == terms_.end() ? 0.0 : it->second;
}

void Polynomial::add_term(const Monomial& m, double c) {
  require(static_cast<int>(m.size()) == nvars_, ErrorCode::InvalidArgument,
          "monomial has wrong number of variables");
  if (c == 0.0) return;
  auto [it, inserted] = terms_.emplace(m, c);
  if (!inserted) {
    it->second += c;
    if (it->second == 0.0) terms_.erase(it);
  }
}

int Polynomial::degree() const {
  int d = 0;
  for (const auto& [m, c] : terms_) {
    int s = 0;
    for (int e : m) s += e;
    d = std::max(d, s);
  }
  return d;
}

bool Polynomial::is_homogeneous(int n) const {
  for (const auto& [m, c] : terms_) {
    int s = 0;
    for (int e : m) s += e;
    if (s != n) return false;
  }
  return true;
}

double Polynomial::max_abs_coefficient() const {
  double best = 0.0;
  for (const auto& [m, c] : terms_) best = std::max(best, std::abs(c));
  return best;
}

double Polynomial::evaluate(std::span<const double> x) const {
  require(static_cast<int>(x.size()) == nvars_, ErrorCode::InvalidArgument,
          "point has wrong number of coordinates");
  double acc = 0.0;
  for (const auto& [m, c] : terms_) {
    double t = c;
    for (std::size_t i = 0; i < m.size(); ++i)
      for (int e = 0; e < m[i]; ++e) t *= x[i];
    acc += t;
  }
  return acc;
}

Polynomial Polynomial::pruned(double tol) const {
  Polynomial p(nvars_);
  for (const auto& [m, c] : terms_)
    if (std::abs(c) > tol) p.terms_.emplace(m, c);
  return p;
}

Polynomial& Polynomial::operator+=(const Polynomial& o) {
  require(o.nvars_ == nvars_, ErrorCode::InvalidArgument, "polynomials differ in variables");
  for (const auto& [m, c] : o.terms_) add_term(m, c);
  return *this;
}

Polynomial& Polynomial::operator-=(const Polynomial& o) {
  require(o.nvars_ == nvars_, ErrorCode::InvalidArgument, "polynomials differ in variables");
  for (const auto& [m, c] : o.terms_) add_term(m, -c);
  return *this;
}

Polynomial& Polynomial::operator*=(double s) {
  if (s == 0.0) {
    terms_.clear();
    return *this;
  }
  for (auto& [m, c] : terms_) c *= s;
  return *this;
}

Polynomial operator*(const Polynomial& a, const Polynomial& b) {
  require(a.nvars_ == b.nvars_, ErrorCode::InvalidArgument, "polynomials differ in variables");
  Polynomial p(a.nvars_);
  Monomial m(static_cast<std::size_t>(a.nvars_));
  for (const auto& [ma, ca] : a.terms_)
    for (const auto& [mb, cb] : b.terms_) {
      for (std::size_t i = 0; i < m.size(); ++i) m[i] = ma[i] + mb[i];
      p.add_term(m, ca * cb);
    }
  return p;
}

Polynomial Polynomial::substitute_linear(const std::vector<std::vector<double>>& a) const {
  require(static_cast<int>(a.size()) == nvars_, ErrorCode::InvalidArgument,
          "substitution matrix has wrong number of rows");
  const int m = a.empty() ? 0 : static_cast<int>(a[0].size());
  std::vector<Polynomial> forms;
  forms.reserve(a.size());
  for (const auto& row : a) forms.push_back(Polynomial::linear(row));
  Polynomial out(m);
  for (const auto& [mono, c] : terms_) {
    Polynomial t = Polynomial::constant(m, c);
    for (std::size_t i = 0; i < mono.size(); ++i)
      for (int e = 0; e < mono[i]; ++e) t = t * forms[i];
    out += t;
  }
  return out;
}

}  // namespace vgf
