#include "dnls/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include "dnls/errors.hpp"

namespace dnls {

namespace {

struct PolyAnalysis {
  bool condA = false;
  double witness = 0.0;  // xi with p(xi) < 0 when !condA
  Trichotomy trichotomy = Trichotomy::IdenticallyZero;
  double c0 = 0.0, xi0 = 0.0, infP = 0.0;
  std::optional<double> aPlusPlus;
};

PolyAnalysis analyze(const RealCubicPoly& p, double relTol) {
  if (!(relTol >= 0.0))
    throw ValidationError("classifier tolerance must be non-negative");
  const double scale =
      std::max({std::abs(p.c[0]), std::abs(p.c[1]), std::abs(p.c[2]), std::abs(p.c[3])});

  std::array<double, 4> c = p.c;
  for (double& ck : c)
    if (std::abs(ck) <= relTol * scale) ck = 0.0;

  PolyAnalysis out;

  if (c[3] != 0.0) {
    // Odd leading term forces a sign change; Cauchy bound gives a witness.
    const double bound =
        1.0 + (std::abs(c[0]) + std::abs(c[1]) + std::abs(c[2])) / std::abs(c[3]);
    out.witness = c[3] > 0.0 ? -bound : bound;
    return out;
  }

  if (c[2] == 0.0 && c[1] == 0.0) {
    if (c[0] < 0.0) {
      out.witness = 0.0;
      return out;
    }
    out.condA = true;
    if (c[0] == 0.0) {
      out.trichotomy = Trichotomy::IdenticallyZero;
    } else {
      out.trichotomy = Trichotomy::StrictlyPositiveInf;
      out.infP = c[0];
    }
    return out;
  }

  if (c[2] <= 0.0) {
    // Nonzero slope or negative curvature: negative somewhere far out.
    const double lead = c[2] != 0.0 ? c[2] : c[1];
    double x = 1.0 + (std::abs(c[0]) + std::abs(c[1]) + std::abs(c[2])) /
                         std::abs(lead);
    if (c[2] != 0.0) {
      out.witness = x;
    } else {
      out.witness = c[1] > 0.0 ? -x : x;
    }
    return out;
  }

  const double disc = c[1] * c[1] - 4.0 * c[0] * c[2];
  const double discTol = relTol * scale * scale;
  const double vertex = 0.0 - c[1] / (2.0 * c[2]);
  if (disc > discTol) {
    out.witness = vertex;  // minimum value c0 - c1^2/(4 c2) < 0
    return out;
  }

  out.condA = true;
  if (std::abs(disc) <= discTol) {
    out.trichotomy = Trichotomy::DoubleRoot;
    out.c0 = c[2];
    out.xi0 = vertex;
  } else {
    out.trichotomy = Trichotomy::StrictlyPositiveInf;
    out.infP = c[0] - c[1] * c[1] / (4.0 * c[2]);
  }

  if (out.trichotomy == Trichotomy::StrictlyPositiveInf) {
    // Largest C with (c2 - C) xi^2 + c1 xi + (c0 - C) >= 0: the smaller root
    // of 4 C^2 - 4 (c0 + c2) C + 4 c0 c2 - c1^2 = 0.
    const double lam =
        0.5 * ((c[0] + c[2]) - std::hypot(c[0] - c[2], c[1]));
    if (lam > relTol * std::max(scale, 1.0)) out.aPlusPlus = lam;
  }
  return out;
}

}  // namespace

const char* trichotomyName(Trichotomy t) {
  switch (t) {
    case Trichotomy::IdenticallyZero: return "identically-zero";
    case Trichotomy::StrictlyPositiveInf: return "strictly-positive-inf";
    default: return "double-root";
  }
}

std::optional<double> DissipationClass::admissibleThetaSup() const {
  switch (trichotomy) {
    case Trichotomy::DoubleRoot: return 0.5;
    case Trichotomy::StrictlyPositiveInf: return 0.75;
    default: return std::nullopt;
  }
}

nlohmann::json DissipationClass::toJson() const {
  nlohmann::json j;
  j["cond_a"] = condA;
  j["trichotomy"] = trichotomyName(trichotomy);
  switch (trichotomy) {
    case Trichotomy::DoubleRoot:
      j["c0"] = c0;
      j["xi0"] = xi0;
      break;
    case Trichotomy::StrictlyPositiveInf:
      j["inf_p"] = infP;
      break;
    default:
      break;
  }
  if (aPlusPlusConstant)
    j["a_plus_plus_constant"] = *aPlusPlusConstant;
  else
    j["a_plus_plus_constant"] = nullptr;
  if (auto sup = admissibleThetaSup())
    j["admissible_theta_sup"] = *sup;
  else
    j["admissible_theta_sup"] = nullptr;
  return j;
}

bool checkConditionA(const RealCubicPoly& p, double relTol) {
  return analyze(p, relTol).condA;
}

DissipationClass classify(const RealCubicPoly& p, double relTol) {
  PolyAnalysis a = analyze(p, relTol);
  if (!a.condA)
    throw ValidationError("condition (A) fails: p(" + std::to_string(a.witness) +
                          ") = " + std::to_string(p(a.witness)));
  DissipationClass cls;
  cls.condA = true;
  cls.trichotomy = a.trichotomy;
  cls.c0 = a.c0;
  cls.xi0 = a.xi0;
  cls.infP = a.infP;
  cls.aPlusPlusConstant = a.aPlusPlus;
  return cls;
}

namespace {

// Tail integral over [center + 1, +inf) (side = +1) or (-inf, center - 1]
// (side = -1) of p(xi)^-theta <xi>^(4 theta - 4), after xi = center + side/v:
//   integrand(v) = q(v)^-theta (v^2 + (center v + side)^2)^(2 theta - 2)
//                  v^(2 - 2 theta),
// with q(v) = p(center) v^2 + side p'(center) v + c2 = v^2 p(center + side/v).
double tailIntegral(const std::array<double, 4>& c, double center, int side,
                    double theta, double tol) {
  const double pc = ((c[2] * center) + c[1]) * center + c[0];
  const double dpc = 2.0 * c[2] * center + c[1];
  const double q1 = side * dpc;
  boost::math::quadrature::tanh_sinh<double> integrator;
  if (c[2] == 0.0 && q1 == 0.0) {
    // Constant p: q = p0 v^2 exactly; split the power so v^2theta cannot
    // underflow inside pow(q, -theta) near the endpoint.
    const double amp = std::pow(pc, -theta);
    auto f = [&](double v) {
      const double w = v * v + (center * v + side) * (center * v + side);
      return amp * std::pow(v, 2.0 - 4.0 * theta) * std::pow(w, 2.0 * theta - 2.0);
    };
    return integrator.integrate(f, 0.0, 1.0, tol);
  }
  auto f = [&](double v) {
    const double q = (pc * v + q1) * v + c[2];
    const double w = v * v + (center * v + side) * (center * v + side);
    return std::pow(q, -theta) * std::pow(w, 2.0 * theta - 2.0) *
           std::pow(v, 2.0 - 2.0 * theta);
  };
  return integrator.integrate(f, 0.0, 1.0, tol);
}

}  // namespace

IThetaResult integralITheta(const RealCubicPoly& p, double theta, double absTol,
                            double relTol) {
  if (!(theta >= 0.0 && theta < 1.0))
    throw ValidationError("theta must lie in [0, 1)");
  if (!(absTol > 0.0)) throw ValidationError("absTol must be positive");

  DissipationClass cls = classify(p, relTol);
  if (cls.trichotomy == Trichotomy::IdenticallyZero)
    throw ValidationError("integral_I_theta undefined for identically zero p");

  const double sup = *cls.admissibleThetaSup();
  if (theta >= sup) return {true, 0.0};

  // Work with the snapped representation backing the certificates.
  std::array<double, 4> c{};
  double center = 0.0;
  if (cls.trichotomy == Trichotomy::DoubleRoot) {
    center = cls.xi0;
    c = {cls.c0 * center * center, -2.0 * cls.c0 * center, cls.c0, 0.0};
  } else {
    c = p.c;
    const double scale =
        std::max({std::abs(c[0]), std::abs(c[1]), std::abs(c[2]), std::abs(c[3])});
    for (double& ck : c)
      if (std::abs(ck) <= relTol * scale) ck = 0.0;
    center = c[2] > 0.0 ? -c[1] / (2.0 * c[2]) : 0.0;
  }

  const double tol = std::min(1e-10, absTol * 1e-3);
  boost::math::quadrature::tanh_sinh<double> integrator;

  double core = 0.0;
  if (cls.trichotomy == Trichotomy::DoubleRoot) {
    // xi = xi0 +- s^2 turns |xi - xi0|^(-2 theta) dxi into 2 s^(1-4 theta) ds.
    const double c0t = std::pow(cls.c0, -theta);
    for (int side : {-1, 1}) {
      auto f = [&](double s) {
        const double xi = center + side * s * s;
        return 2.0 * c0t * std::pow(s, 1.0 - 4.0 * theta) *
               std::pow(1.0 + xi * xi, 2.0 * theta - 2.0);
      };
      core += integrator.integrate(f, 0.0, 1.0, tol);
    }
  } else {
    auto f = [&](double xi) {
      const double pv = (c[2] * xi + c[1]) * xi + c[0];
      return std::pow(pv, -theta) * std::pow(1.0 + xi * xi, 2.0 * theta - 2.0);
    };
    core = integrator.integrate(f, center - 1.0, center + 1.0, tol);
  }

  const double value = core + tailIntegral(c, center, +1, theta, tol) +
                       tailIntegral(c, center, -1, theta, tol);
  if (!std::isfinite(value))
    throw NumericalError("integral_I_theta quadrature produced a non-finite value");
  return {false, value};
}

double lifespanBound(std::span<const double> xi, std::span<const double> psiHatSq,
                     const NuPolynomial& nu) {
  if (xi.empty() || xi.size() != psiHatSq.size())
    throw ValidationError("lifespan_bound needs matching non-empty xi and |psiHat|^2 grids");
  double sup = 0.0;
  for (std::size_t k = 0; k < xi.size(); ++k) {
    if (!(psiHatSq[k] >= 0.0))
      throw ValidationError("|psiHat|^2 samples must be non-negative");
    sup = std::max(sup, psiHatSq[k] * nu.imagAt(xi[k]));
  }
  if (sup <= 0.0) return std::numeric_limits<double>::infinity();
  return 1.0 / (2.0 * sup);
}

}  // namespace dnls
