#ifndef DNLS_PDE_HPP
#define DNLS_PDE_HPP

#include <functional>
#include <memory>
#include <vector>

#include <json.hpp>

#include "dnls/nonlinearity.hpp"

namespace dnls {

/// Periodic box [-L, L) sampled at n points; wavenumbers xi_k = pi k / L for
/// k in [-n/2, n/2).
struct SpatialGrid {
  double boxHalfWidth = 200.0;
  int n = 8192;

  double dx() const { return 2.0 * boxHalfWidth / n; }
  double x(int j) const { return -boxHalfWidth + j * dx(); }
  double xiSpacing() const;
  /// Signed wavenumber index for FFT bin m.
  int waveIndex(int m) const { return m < n / 2 ? m : m - n; }
  double xi(int m) const { return waveIndex(m) * xiSpacing(); }
  double xiMax() const { return (n / 2) * xiSpacing(); }
  void validate() const;
};

struct PdeOptions {
  bool dealias = true;
  double cflSafety = 16.0;
  double blowupFactor = 10.0;
};

/// alpha(t, xi_k) = exp(+i t xi_k^2 / 2) u_hat(t, xi_k), reordered so xi is
/// ascending.
struct ExtractedProfile {
  std::vector<double> xi;
  std::vector<Complex> alpha;
  double t = 0.0;
};

/// Pseudospectral integrating-factor RK4 solver for
/// i u_t + (1/2) u_xx = N(u, u_x) with the 2/3-rule applied to the cubic
/// products (inputs masked before the pointwise evaluation, output masked
/// after).  The linear flow is applied exactly per step, so with N = 0 every
/// Fourier modulus is conserved to rounding.
class PdeSolver {
public:
  PdeSolver(const SpatialGrid& grid, const CubicNonlinearity& nonlinearity,
            const PdeOptions& options = {});
  ~PdeSolver();
  PdeSolver(const PdeSolver&) = delete;
  PdeSolver& operator=(const PdeSolver&) = delete;

  /// Physical samples of the initial datum.  Requires |phi| < 1e-12 at the
  /// box edge (truncation of the line problem must be inert) and records
  /// epsilonNorm = H3 norm + H2 norm of <x> phi.
  void initialize(const std::vector<Complex>& phi);
  /// phi(x) = eps exp(-(x/width)^2).
  void initializeGaussian(double eps, double width = 2.0);

  /// One integrating-factor RK4 step.  dt must respect
  /// dt <= cflSafety / xiMax^2; the H3 blow-up guard aborts the run once the
  /// norm exceeds blowupFactor times its initial value or goes non-finite.
  void step(double dt);

  /// Advances to tEnd with step dt, shortening steps to land exactly on each
  /// snapshot time (sorted, within [t(), tEnd]); onSnapshot fires at each.
  void run(double tEnd, double dt, const std::vector<double>& snapshotTimes = {},
           const std::function<void(const PdeSolver&)>& onSnapshot = {});

  const SpatialGrid& grid() const;
  double t() const;
  long stepCount() const;
  double epsilonNorm() const;

  /// Discrete L2 norm from physical samples.
  double mass() const;
  /// Same norm from the spectral side; equals mass() up to rounding.
  double massSpectral() const;
  double h3Norm() const;
  /// ||J u||_{H^2} with J = x + i t d/dx, evaluated as i d_xi alpha.
  double jH2Norm() const;
  /// Instantaneous d(mass^2)/dt predicted by the discrete mass law
  /// 2 Im <u, N(u, u_x)> on the dealiased band.
  double massLawRate() const;
  /// Fraction of mass outside |x| < L/2 (box-truncation health).
  double boundaryMassFraction() const;

  std::vector<Complex> physical() const;
  const std::vector<Complex>& spectral() const;
  ExtractedProfile extractProfile() const;

private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

struct ResidualReport {
  double rawNorm = 0.0;
  double windowAveragedNorm = 0.0;
  int stencilCount = 0;

  nlohmann::json toJson() const;
};

/// Residual r = i d/dt alpha - (nu/t) |alpha|^2 alpha of the profile
/// equation along a trajectory of snapshots log-uniform in t, using the
/// 4th-order centered stencil for d/d(log t).  Norms are L2 in xi over the
/// band bandXiMin <= |xi| <= bandXiMax: rawNorm averages per-time norms,
/// windowAveragedNorm is the norm of the time-averaged residual (the
/// oscillatory part cancels in the average).
ResidualReport resonanceResidual(const std::vector<ExtractedProfile>& trajectory,
                                 const NuPolynomial& nu, double bandXiMin,
                                 double bandXiMax);

}  // namespace dnls

#endif
