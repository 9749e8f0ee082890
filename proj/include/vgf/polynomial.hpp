#pragma once

#include <map>
#include <span>
#include <vector>

namespace vgf {

using Monomial = std::vector<int>;  // exponent per variable

/// Sparse real polynomial in a fixed number of variables.
class Polynomial {
 public:
  explicit Polynomial(int nvars = 0) : nvars_(nvars) {}

  static Polynomial constant(int nvars, double c);
  static Polynomial variable(int nvars, int i);
  static Polynomial linear(std::span<const double> coeffs);

  int nvars() const { return nvars_; }
  const std::map<Monomial, double>& terms() const { return terms_; }
  double coefficient(const Monomial& m) const;
  void add_term(const Monomial& m, double c);

  int degree() const;
  bool is_homogeneous(int n) const;
  double max_abs_coefficient() const;
  double evaluate(std::span<const double> x) const;
  // Drops terms with |c| <= tol.
  Polynomial pruned(double tol) const;

  Polynomial& operator+=(const Polynomial& o);
  Polynomial& operator-=(const Polynomial& o);
  Polynomial& operator*=(double s);
  friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
  friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }
  friend Polynomial operator*(Polynomial a, double s) { return a *= s; }
  friend Polynomial operator*(double s, Polynomial a) { return a *= s; }
  friend Polynomial operator*(const Polynomial& a, const Polynomial& b);

  /// p(x) with x = A y, where A is nvars x A.cols(); A is row-major nested.
  Polynomial substitute_linear(const std::vector<std::vector<double>>& a) const;

 private:
  int nvars_;
  std::map<Monomial, double> terms_;
};

}  // namespace vgf
