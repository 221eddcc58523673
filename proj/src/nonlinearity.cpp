#include "dnls/nonlinearity.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <numbers>

#include "dnls/errors.hpp"

namespace dnls {

namespace {

Complex ipow(Complex z, int e) {
  Complex r{1.0, 0.0};
  for (int k = 0; k < e; ++k) r *= z;
  return r;
}

// i^k for any integer k, exact.
Complex unitImagPower(int k) {
  switch (((k % 4) + 4) % 4) {
    case 0: return {1.0, 0.0};
    case 1: return {0.0, 1.0};
    case 2: return {-1.0, 0.0};
    default: return {0.0, -1.0};
  }
}

std::string powerFactor(const char* base, int e) {
  if (e == 0) return {};
  std::string s = base;
  if (e > 1) s += "^" + std::to_string(e);
  return s;
}

}  // namespace

std::string Monomial::name() const {
  std::string s;
  const char* bases[4] = {"u", "conj(u)", "ux", "conj(ux)"};
  for (int k = 0; k < 4; ++k) {
    std::string f = powerFactor(bases[k], powers[k]);
    if (f.empty()) continue;
    if (!s.empty()) s += "*";
    s += f;
  }
  return s.empty() ? "1" : s;
}

CubicNonlinearity CubicNonlinearity::fromMonomials(std::vector<Monomial> terms) {
  std::map<std::array<int, 4>, Complex> merged;
  for (const Monomial& m : terms) {
    for (int p : m.powers)
      if (p < 0) throw ValidationError("negative power in monomial " + m.name());
    merged[m.powers] += m.coeff;
  }
  CubicNonlinearity n;
  for (const auto& [powers, coeff] : merged) {
    if (coeff == Complex{0.0, 0.0}) continue;
    Monomial m{powers, coeff};
    if (m.totalDegree() != 3)
      throw ValidationError("monomial " + m.name() + " has total degree " +
                            std::to_string(m.totalDegree()) + ", expected 3");
    n.terms_.push_back(m);
  }
  return n;
}

Complex CubicNonlinearity::evaluate(Complex u, Complex ux) const {
  const Complex ub = std::conj(u);
  const Complex uxb = std::conj(ux);
  Complex sum{0.0, 0.0};
  for (const Monomial& m : terms_)
    sum += m.coeff * ipow(u, m.powers[0]) * ipow(ub, m.powers[1]) *
           ipow(ux, m.powers[2]) * ipow(uxb, m.powers[3]);
  return sum;
}

bool CubicNonlinearity::isWeaklyGaugeInvariant() const {
  for (const Monomial& m : terms_) {
    if (m.powers[2] != 0 || m.powers[3] != 0) continue;
    if (m.powers[0] != 2 || m.powers[1] != 1) return false;
  }
  return true;
}

NuPolynomial CubicNonlinearity::computeNu() const {
  std::array<Complex, 4> coeffs{};
  for (const Monomial& m : terms_) {
    const auto [a, b, c, d] = m.powers;
    if (a + c - b - d != 1) continue;
    coeffs[c + d] += m.coeff * unitImagPower(c - d);
  }
  return NuPolynomial{coeffs};
}

CubicNonlinearity CubicNonlinearity::operator+(const CubicNonlinearity& other) const {
  std::vector<Monomial> all = terms_;
  all.insert(all.end(), other.terms_.begin(), other.terms_.end());
  return fromMonomials(std::move(all));
}

CubicNonlinearity CubicNonlinearity::operator*(Complex scale) const {
  std::vector<Monomial> scaled = terms_;
  for (Monomial& m : scaled) m.coeff *= scale;
  return fromMonomials(std::move(scaled));
}

bool CubicNonlinearity::operator==(const CubicNonlinearity& other) const {
  if (terms_.size() != other.terms_.size()) return false;
  for (std::size_t k = 0; k < terms_.size(); ++k)
    if (terms_[k].powers != other.terms_[k].powers ||
        terms_[k].coeff != other.terms_[k].coeff)
      return false;
  return true;
}

nlohmann::json CubicNonlinearity::toJson() const {
  nlohmann::json arr = nlohmann::json::array();
  for (const Monomial& m : terms_) {
    arr.push_back({{"powers", m.powers},
                   {"re", m.coeff.real()},
                   {"im", m.coeff.imag()}});
  }
  return arr;
}

CubicNonlinearity CubicNonlinearity::fromJson(const nlohmann::json& j) {
  if (!j.is_array()) throw ValidationError("nonlinearity json must be an array");
  std::vector<Monomial> terms;
  for (const auto& e : j) {
    Monomial m;
    const auto& p = e.at("powers");
    if (!p.is_array() || p.size() != 4)
      throw ValidationError("nonlinearity term needs powers:[a,b,c,d]");
    for (int k = 0; k < 4; ++k) m.powers[k] = p[k].get<int>();
    m.coeff = Complex{e.at("re").get<double>(), e.at("im").get<double>()};
    terms.push_back(m);
  }
  return fromMonomials(std::move(terms));
}

Complex NuPolynomial::operator()(double xi) const {
  return ((coeffs_[3] * xi + coeffs_[2]) * xi + coeffs_[1]) * xi + coeffs_[0];
}

bool NuPolynomial::isZero() const {
  for (const Complex& c : coeffs_)
    if (c != Complex{0.0, 0.0}) return false;
  return true;
}

std::array<double, 4> NuPolynomial::dissipationCoeffs() const {
  std::array<double, 4> p{};
  for (int k = 0; k < 4; ++k) p[k] = 0.0 - coeffs_[k].imag();
  return p;
}

nlohmann::json NuPolynomial::toJson() const {
  nlohmann::json arr = nlohmann::json::array();
  for (const Complex& c : coeffs_) arr.push_back({{"re", c.real()}, {"im", c.imag()}});
  return arr;
}

// ---------------------------------------------------------------------------
// Parser.  Values are polynomials in (u, conj u, ux, conj ux) with complex
// coefficients; expansion happens during evaluation of the grammar, the
// degree-3 check at the end.

namespace {

constexpr int kMaxDegree = 64;

using PolyMap = std::map<std::array<int, 4>, Complex>;

struct Poly {
  PolyMap terms;

  static Poly constant(Complex c) {
    Poly p;
    if (c != Complex{0.0, 0.0}) p.terms[{0, 0, 0, 0}] = c;
    return p;
  }
  static Poly variable(int slot) {
    Poly p;
    std::array<int, 4> pw{0, 0, 0, 0};
    pw[slot] = 1;
    p.terms[pw] = Complex{1.0, 0.0};
    return p;
  }
};

Poly add(const Poly& a, const Poly& b, double sign) {
  Poly r = a;
  for (const auto& [pw, c] : b.terms) {
    Complex& dst = r.terms[pw];
    dst += sign * c;
    if (dst == Complex{0.0, 0.0}) r.terms.erase(pw);
  }
  return r;
}

Poly mul(const Poly& a, const Poly& b, std::size_t pos) {
  Poly r;
  for (const auto& [pa, ca] : a.terms) {
    for (const auto& [pb, cb] : b.terms) {
      std::array<int, 4> pw;
      int total = 0;
      for (int k = 0; k < 4; ++k) {
        pw[k] = pa[k] + pb[k];
        total += pw[k];
      }
      if (total > kMaxDegree)
        throw ParseError("exponent overflow while expanding product", pos);
      Complex& dst = r.terms[pw];
      dst += ca * cb;
      if (dst == Complex{0.0, 0.0}) r.terms.erase(pw);
    }
  }
  return r;
}

Poly conjugate(const Poly& a) {
  Poly r;
  for (const auto& [pw, c] : a.terms)
    r.terms[{pw[1], pw[0], pw[3], pw[2]}] = std::conj(c);
  return r;
}

Poly intPower(Poly base, long e, std::size_t pos) {
  Poly r = Poly::constant({1.0, 0.0});
  for (long k = 0; k < e; ++k) r = mul(r, base, pos);
  return r;
}

class Parser {
public:
  explicit Parser(std::string_view src) : src_(src) {}

  Poly run() {
    Poly p = expr();
    skipSpace();
    if (pos_ != src_.size()) throw ParseError("unexpected trailing input", pos_);
    return p;
  }

private:
  std::string_view src_;
  std::size_t pos_ = 0;

  void skipSpace() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }
  char peek() {
    skipSpace();
    return pos_ < src_.size() ? src_[pos_] : '\0';
  }
  bool consume(char c) {
    if (peek() == c) {
      ++pos_;
      return true;
    }
    return false;
  }
  void expect(char c) {
    if (!consume(c))
      throw ParseError(std::string("expected '") + c + "'", pos_);
  }

  long parseUint() {
    skipSpace();
    std::size_t start = pos_;
    long v = 0;
    while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
      v = v * 10 + (src_[pos_] - '0');
      if (v > kMaxDegree) throw ParseError("exponent overflow", start);
      ++pos_;
    }
    if (pos_ == start) throw ParseError("expected integer exponent", pos_);
    return v;
  }

  std::string parseIdent() {
    skipSpace();
    std::size_t start = pos_;
    while (pos_ < src_.size() &&
           (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
      ++pos_;
    return std::string(src_.substr(start, pos_ - start));
  }

  Poly expr() {
    Poly p = term();
    while (true) {
      if (consume('+'))
        p = add(p, term(), 1.0);
      else if (consume('-'))
        p = add(p, term(), -1.0);
      else
        return p;
    }
  }

  Poly term() {
    Poly p = factor();
    while (consume('*')) p = mul(p, factor(), pos_);
    return p;
  }

  Poly factor() {
    if (consume('-')) return add(Poly{}, factor(), -1.0);
    if (consume('+')) return factor();
    return power();
  }

  Poly power() {
    Poly base = atom();
    while (consume('^')) base = intPower(base, parseUint(), pos_);
    return base;
  }

  Poly atom() {
    skipSpace();
    if (pos_ >= src_.size()) throw ParseError("unexpected end of input", pos_);
    char c = src_[pos_];

    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();

    if (c == '(') {
      ++pos_;
      Poly p = expr();
      expect(')');
      return p;
    }

    if (c == '|') {
      std::size_t barPos = pos_;
      ++pos_;
      Poly inner = expr();
      expect('|');
      expect('^');
      long e = parseUint();
      if (e % 2 != 0)
        throw ParseError("absolute value requires an even power", barPos);
      return intPower(mul(inner, conjugate(inner), barPos), e / 2, barPos);
    }

    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t identPos = pos_;
      std::string id = parseIdent();
      if (id == "u") return Poly::variable(0);
      if (id == "ux") return Poly::variable(2);
      if (id == "i") return Poly::constant({0.0, 1.0});
      if (id == "conj") {
        expect('(');
        Poly p = expr();
        expect(')');
        return conjugate(p);
      }
      throw ParseError("unknown identifier '" + id + "'", identPos);
    }

    throw ParseError(std::string("unexpected character '") + c + "'", pos_);
  }

  Poly number() {
    std::size_t start = pos_;
    while (pos_ < src_.size() &&
           (std::isdigit(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '.'))
      ++pos_;
    // Optional exponent part, e.g. 2.5e-3.
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      std::size_t mark = pos_;
      ++pos_;
      if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) ++pos_;
      if (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
        while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
      } else {
        pos_ = mark;
      }
    }
    std::string text(src_.substr(start, pos_ - start));
    try {
      std::size_t used = 0;
      double v = std::stod(text, &used);
      if (used != text.size()) throw std::invalid_argument(text);
      return Poly::constant({v, 0.0});
    } catch (const std::exception&) {
      throw ParseError("malformed number '" + text + "'", start);
    }
  }
};

}  // namespace

CubicNonlinearity parseNonlinearity(std::string_view source) {
  Poly p = Parser(source).run();
  std::vector<Monomial> terms;
  for (const auto& [pw, c] : p.terms) terms.push_back({pw, c});
  return CubicNonlinearity::fromMonomials(std::move(terms));
}

Complex nuQuadratureOracle(const CubicNonlinearity& n, double xi, int nodes) {
  if (nodes < 8) throw ValidationError("nu quadrature needs at least 8 nodes");
  Complex sum{0.0, 0.0};
  for (int j = 0; j < nodes; ++j) {
    const double phi = 2.0 * std::numbers::pi * j / nodes;
    const Complex z{std::cos(phi), std::sin(phi)};
    sum += n.evaluate(z, Complex{0.0, xi} * z) * std::conj(z);
  }
  return sum / static_cast<double>(nodes);
}

}  // namespace dnls
