#ifndef DNLS_NONLINEARITY_HPP
#define DNLS_NONLINEARITY_HPP

#include <array>
#include <complex>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace dnls {

using Complex = std::complex<double>;

class NuPolynomial;

/// One term c * u^a * conj(u)^b * ux^c * conj(ux)^d of a cubic nonlinearity.
/// powers = (a, b, c, d), a+b+c+d == 3.
struct Monomial {
  std::array<int, 4> powers{0, 0, 0, 0};
  Complex coeff{0.0, 0.0};

  int totalDegree() const { return powers[0] + powers[1] + powers[2] + powers[3]; }
  /// Human-readable form, e.g. "u^2*conj(ux)".
  std::string name() const;
};

/// A cubic homogeneous polynomial N(u, conj(u), ux, conj(ux)).  Terms are
/// kept merged, coefficient-nonzero and sorted by power tuple, so equal
/// nonlinearities compare equal.
class CubicNonlinearity {
public:
  CubicNonlinearity() = default;

  /// Merges duplicate power tuples, drops zero coefficients, rejects any
  /// term whose total degree differs from 3.
  static CubicNonlinearity fromMonomials(std::vector<Monomial> terms);

  const std::vector<Monomial>& monomials() const { return terms_; }
  bool isZero() const { return terms_.empty(); }

  /// Pointwise evaluation; conjugates are taken internally.
  Complex evaluate(Complex u, Complex ux) const;

  /// True when N(e^{i theta} z, 0) = e^{i theta} N(z, 0) for all theta:
  /// every term without derivative factors must be the u^2*conj(u) one.
  bool isWeaklyGaugeInvariant() const;

  /// Resonance coefficient nu(xi) as a degree <= 3 polynomial.  A term
  /// contributes coeff * (i xi)^c * (-i xi)^d exactly when a+c-b-d == 1.
  NuPolynomial computeNu() const;

  CubicNonlinearity operator+(const CubicNonlinearity& other) const;
  CubicNonlinearity operator*(Complex scale) const;
  bool operator==(const CubicNonlinearity& other) const;

  /// Array of {"powers":[a,b,c,d], "re":x, "im":y}, sorted by powers.
  nlohmann::json toJson() const;
  static CubicNonlinearity fromJson(const nlohmann::json& j);

private:
  std::vector<Monomial> terms_;
};

/// nu(xi) = c0 + c1 xi + c2 xi^2 + c3 xi^3 with complex coefficients.
class NuPolynomial {
public:
  NuPolynomial() : coeffs_{} {}
  explicit NuPolynomial(std::array<Complex, 4> coeffs) : coeffs_(coeffs) {}

  const std::array<Complex, 4>& coeffs() const { return coeffs_; }
  Complex operator()(double xi) const;
  double imagAt(double xi) const { return (*this)(xi).imag(); }
  bool isZero() const;

  /// Coefficients of p(xi) = -Im nu(xi), the dissipation polynomial.
  std::array<double, 4> dissipationCoeffs() const;

  nlohmann::json toJson() const;

private:
  std::array<Complex, 4> coeffs_;
};

/// Parses a nonlinearity expression into expanded monomial form.
///
/// Grammar:
///   expr    := term (('+'|'-') term)*
///   term    := factor ('*' factor)*
///   factor  := ('+'|'-') factor | power
///   power   := atom ('^' uint)*
///   atom    := number | 'i' | 'u' | 'ux' | 'conj' '(' expr ')'
///            | '(' expr ')' | '|' expr '|' '^' uint
///
/// 'u' and 'ux' are the unknown and its spatial derivative; |e|^2 is sugar
/// for e*conj(e) (any even power is accepted).  Exponents are non-negative
/// integers.  After full expansion every surviving monomial must have total
/// degree 3; violations raise ValidationError naming the offending monomial,
/// syntax errors raise ParseError with the source position.
CubicNonlinearity parseNonlinearity(std::string_view source);

/// Trapezoid evaluation of (1/2 pi i) * contour integral of N(z, i xi z)/z^2
/// over |z| = 1.  Exact up to roundoff once nodes exceeds the harmonic range
/// of the integrand (any nodes >= 8 suffices for cubics; default 64).
Complex nuQuadratureOracle(const CubicNonlinearity& n, double xi, int nodes = 64);

}  // namespace dnls

#endif
