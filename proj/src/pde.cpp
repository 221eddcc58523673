#include "dnls/pde.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>
#include <string>

#include <fftw3.h>

#include "dnls/errors.hpp"

namespace dnls {

namespace {

/// FFTW planning and destruction are not thread-safe; executions are.
std::mutex& planMutex() {
  static std::mutex m;
  return m;
}

/// Unit phasor e^{i theta} split into a double-double pair so that repeated
/// application does not bias Fourier moduli: a plain double phasor has
/// |E| - 1 = O(1e-16), which compounds to ~1e-12 over 1e4 steps of the pure
/// linear flow.  The extended split keeps the systematic part near 1e-19.
struct Phasor {
  Complex hi;
  Complex lo;

  Complex rotate(Complex v) const { return v * hi + v * lo; }
};

Phasor unitPhasor(double theta) {
  const long double tl = theta;
  const long double c = cosl(tl);
  const long double s = sinl(tl);
  const double ch = static_cast<double>(c);
  const double sh = static_cast<double>(s);
  return {Complex{ch, sh},
          Complex{static_cast<double>(c - static_cast<long double>(ch)),
                  static_cast<double>(s - static_cast<long double>(sh))}};
}

constexpr double kSqrt2Pi = 2.5066282746310002;

}  // namespace

double SpatialGrid::xiSpacing() const { return std::numbers::pi / boxHalfWidth; }

void SpatialGrid::validate() const {
  if (!(boxHalfWidth > 0.0)) throw ValidationError("box half-width must be positive");
  if (n < 16 || (n & (n - 1)) != 0)
    throw ValidationError("grid size must be a power of two, at least 16");
}

struct PdeSolver::Impl {
  SpatialGrid grid;
  CubicNonlinearity nonlin;
  PdeOptions opts;

  double t = 0.0;
  long steps = 0;
  double eps = 0.0;
  double h3Initial = 0.0;
  bool ready = false;

  std::vector<Complex> v;
  std::vector<double> xi;
  std::vector<char> keep;

  fftw_plan fwd = nullptr;
  fftw_plan bwd = nullptr;
  Complex* bufIn = nullptr;
  Complex* bufOut = nullptr;

  double cachedDt = -1.0;
  std::vector<Phasor> e1, e2;

  std::vector<Complex> w1, w2, uPhys, uxPhys, fPhys;
  std::vector<Complex> k1, k2, k3, k4, stage;

  explicit Impl(const SpatialGrid& g, const CubicNonlinearity& n, const PdeOptions& o)
      : grid(g), nonlin(n), opts(o) {
    grid.validate();
    if (!(opts.cflSafety > 0.0) || !(opts.blowupFactor > 1.0))
      throw ValidationError("cflSafety must be positive and blowupFactor above 1");
    const int size = grid.n;
    v.assign(size, Complex{});
    xi.resize(size);
    keep.resize(size);
    for (int m = 0; m < size; ++m) {
      xi[m] = grid.xi(m);
      keep[m] = !opts.dealias || 3 * std::abs(grid.waveIndex(m)) < size;
    }
    w1.resize(size);
    w2.resize(size);
    uPhys.resize(size);
    uxPhys.resize(size);
    fPhys.resize(size);
    k1.resize(size);
    k2.resize(size);
    k3.resize(size);
    k4.resize(size);
    stage.resize(size);
    e1.resize(size);
    e2.resize(size);

    bufIn = static_cast<Complex*>(fftw_malloc(sizeof(Complex) * size));
    bufOut = static_cast<Complex*>(fftw_malloc(sizeof(Complex) * size));
    if (!bufIn || !bufOut) {
      fftw_free(bufIn);
      fftw_free(bufOut);
      throw std::bad_alloc();
    }
    std::scoped_lock lock(planMutex());
    fwd = fftw_plan_dft_1d(size, reinterpret_cast<fftw_complex*>(bufIn),
                           reinterpret_cast<fftw_complex*>(bufOut), FFTW_FORWARD,
                           FFTW_ESTIMATE);
    bwd = fftw_plan_dft_1d(size, reinterpret_cast<fftw_complex*>(bufIn),
                           reinterpret_cast<fftw_complex*>(bufOut), FFTW_BACKWARD,
                           FFTW_ESTIMATE);
  }

  ~Impl() {
    {
      std::scoped_lock lock(planMutex());
      if (fwd) fftw_destroy_plan(fwd);
      if (bwd) fftw_destroy_plan(bwd);
    }
    fftw_free(bufIn);
    fftw_free(bufOut);
  }

  void toSpectral(const Complex* phys, Complex* spec) {
    const int size = grid.n;
    std::copy(phys, phys + size, bufIn);
    fftw_execute(fwd);
    const double scale = grid.dx() / kSqrt2Pi;
    for (int m = 0; m < size; ++m)
      spec[m] = bufOut[m] * ((m & 1) ? -scale : scale);
  }

  void toPhysical(const Complex* spec, Complex* phys) {
    const int size = grid.n;
    for (int m = 0; m < size; ++m)
      bufIn[m] = (m & 1) ? -spec[m] : spec[m];
    fftw_execute(bwd);
    const double scale = grid.xiSpacing() / kSqrt2Pi;
    for (int m = 0; m < size; ++m) phys[m] = bufOut[m] * scale;
  }

  /// -i F[N(u, u_x)] with the dealiasing mask on both sides.
  void nonlinearTerm(const std::vector<Complex>& spec, std::vector<Complex>& out) {
    const int size = grid.n;
    if (nonlin.isZero()) {
      std::fill(out.begin(), out.end(), Complex{});
      return;
    }
    for (int m = 0; m < size; ++m) {
      w1[m] = keep[m] ? spec[m] : Complex{};
      w2[m] = Complex{0.0, xi[m]} * w1[m];
    }
    toPhysical(w1.data(), uPhys.data());
    toPhysical(w2.data(), uxPhys.data());
    for (int j = 0; j < size; ++j)
      fPhys[j] = nonlin.evaluate(uPhys[j], uxPhys[j]);
    toSpectral(fPhys.data(), out.data());
    for (int m = 0; m < size; ++m)
      out[m] = keep[m] ? out[m] * Complex{0.0, -1.0} : Complex{};
  }

  void ensurePhases(double dt) {
    if (dt == cachedDt) return;
    for (int m = 0; m < grid.n; ++m) {
      const double theta = -xi[m] * xi[m] * dt * 0.25;
      e1[m] = unitPhasor(theta);
      e2[m] = unitPhasor(2.0 * theta);
    }
    cachedDt = dt;
  }

  double h3() const {
    double sum = 0.0;
    for (int m = 0; m < grid.n; ++m) {
      const double w = 1.0 + xi[m] * xi[m];
      sum += w * w * w * std::norm(v[m]);
    }
    return std::sqrt(sum * grid.xiSpacing());
  }

  double weightedH2(const std::vector<Complex>& spec) const {
    double sum = 0.0;
    for (int m = 0; m < grid.n; ++m) {
      const double w = 1.0 + xi[m] * xi[m];
      sum += w * w * std::norm(spec[m]);
    }
    return std::sqrt(sum * grid.xiSpacing());
  }
};

PdeSolver::PdeSolver(const SpatialGrid& grid, const CubicNonlinearity& nonlinearity,
                     const PdeOptions& options)
    : impl_(std::make_unique<Impl>(grid, nonlinearity, options)) {}

PdeSolver::~PdeSolver() = default;

void PdeSolver::initialize(const std::vector<Complex>& phi) {
  Impl& im = *impl_;
  const int size = im.grid.n;
  if (static_cast<int>(phi.size()) != size)
    throw ValidationError("initial data sample count does not match the grid");
  const double edge = std::max(std::abs(phi.front()), std::abs(phi.back()));
  if (!(edge < 1e-12))
    throw ValidationError("initial data does not vanish at the box boundary");
  for (const Complex& c : phi)
    if (!std::isfinite(c.real()) || !std::isfinite(c.imag()))
      throw ValidationError("initial data contains non-finite samples");

  im.toSpectral(phi.data(), im.v.data());
  im.t = 0.0;
  im.steps = 0;
  im.h3Initial = im.h3();

  for (int j = 0; j < size; ++j) {
    const double xj = im.grid.x(j);
    im.fPhys[j] = std::sqrt(1.0 + xj * xj) * phi[j];
  }
  im.toSpectral(im.fPhys.data(), im.w1.data());
  im.eps = im.h3Initial + im.weightedH2(im.w1);
  im.ready = true;
}

void PdeSolver::initializeGaussian(double eps, double width) {
  if (!(eps >= 0.0)) throw ValidationError("amplitude must be non-negative");
  if (!(width > 0.0)) throw ValidationError("width must be positive");
  const Impl& im = *impl_;
  std::vector<Complex> phi(im.grid.n);
  for (int j = 0; j < im.grid.n; ++j) {
    const double r = im.grid.x(j) / width;
    phi[j] = Complex{eps * std::exp(-r * r), 0.0};
  }
  initialize(phi);
}

void PdeSolver::step(double dt) {
  Impl& im = *impl_;
  if (!im.ready) throw ValidationError("solver is not initialized");
  if (!(dt > 0.0)) throw ValidationError("dt must be positive");
  const double xiMax = im.grid.xiMax();
  if (dt > im.opts.cflSafety / (xiMax * xiMax))
    throw ValidationError("dt exceeds the stability guard cflSafety / xiMax^2");

  im.ensurePhases(dt);
  const int size = im.grid.n;
  std::vector<Complex>& v = im.v;

  im.nonlinearTerm(v, im.k1);
  for (int m = 0; m < size; ++m)
    im.stage[m] = im.e1[m].rotate(v[m] + (0.5 * dt) * im.k1[m]);
  im.nonlinearTerm(im.stage, im.k2);
  for (int m = 0; m < size; ++m)
    im.stage[m] = im.e1[m].rotate(v[m]) + (0.5 * dt) * im.k2[m];
  im.nonlinearTerm(im.stage, im.k3);
  for (int m = 0; m < size; ++m)
    im.stage[m] = im.e2[m].rotate(v[m]) + dt * im.e1[m].rotate(im.k3[m]);
  im.nonlinearTerm(im.stage, im.k4);
  for (int m = 0; m < size; ++m) {
    v[m] = im.e2[m].rotate(v[m]) +
           (dt / 6.0) * (im.e2[m].rotate(im.k1[m]) +
                         2.0 * im.e1[m].rotate(im.k2[m] + im.k3[m]) + im.k4[m]);
  }
  im.t += dt;
  ++im.steps;

  const double h3 = im.h3();
  if (!std::isfinite(h3) || h3 > im.opts.blowupFactor * im.h3Initial)
    throw NumericalError("H3 blow-up guard tripped at t = " + std::to_string(im.t) +
                         " (H3 = " + std::to_string(h3) + ")");
}

void PdeSolver::run(double tEnd, double dt, const std::vector<double>& snapshotTimes,
                    const std::function<void(const PdeSolver&)>& onSnapshot) {
  Impl& im = *impl_;
  if (!im.ready) throw ValidationError("solver is not initialized");
  if (!(tEnd >= im.t)) throw ValidationError("tEnd precedes the current time");
  if (!(dt > 0.0)) throw ValidationError("dt must be positive");
  if (!std::is_sorted(snapshotTimes.begin(), snapshotTimes.end()))
    throw ValidationError("snapshot times must be sorted");
  if (!snapshotTimes.empty() &&
      (snapshotTimes.front() < im.t - 1e-12 || snapshotTimes.back() > tEnd + 1e-12))
    throw ValidationError("snapshot times must lie within [t, tEnd]");

  auto advanceTo = [&](double target) {
    while (target - im.t > 1e-12) step(std::min(dt, target - im.t));
    im.t = target;
  };
  for (const double ts : snapshotTimes) {
    advanceTo(ts);
    if (onSnapshot) onSnapshot(*this);
  }
  advanceTo(tEnd);
}

const SpatialGrid& PdeSolver::grid() const { return impl_->grid; }
double PdeSolver::t() const { return impl_->t; }
long PdeSolver::stepCount() const { return impl_->steps; }
double PdeSolver::epsilonNorm() const { return impl_->eps; }

double PdeSolver::mass() const {
  Impl& im = *impl_;
  im.toPhysical(im.v.data(), im.uPhys.data());
  double sum = 0.0;
  for (const Complex& u : im.uPhys) sum += std::norm(u);
  return std::sqrt(sum * im.grid.dx());
}

double PdeSolver::massSpectral() const {
  const Impl& im = *impl_;
  double sum = 0.0;
  for (const Complex& c : im.v) sum += std::norm(c);
  return std::sqrt(sum * im.grid.xiSpacing());
}

double PdeSolver::h3Norm() const { return impl_->h3(); }

double PdeSolver::jH2Norm() const {
  Impl& im = *impl_;
  const int size = im.grid.n;
  for (int m = 0; m < size; ++m) {
    const double theta = 0.5 * im.t * im.xi[m] * im.xi[m];
    im.w1[m] = im.v[m] * Complex{std::cos(theta), std::sin(theta)};
  }
  im.toPhysical(im.w1.data(), im.uPhys.data());
  for (int j = 0; j < size; ++j) im.fPhys[j] = im.grid.x(j) * im.uPhys[j];
  im.toSpectral(im.fPhys.data(), im.w2.data());
  return im.weightedH2(im.w2);
}

double PdeSolver::massLawRate() const {
  Impl& im = *impl_;
  if (im.nonlin.isZero()) return 0.0;
  const int size = im.grid.n;
  for (int m = 0; m < size; ++m) {
    im.w1[m] = im.keep[m] ? im.v[m] : Complex{};
    im.w2[m] = Complex{0.0, im.xi[m]} * im.w1[m];
  }
  im.toPhysical(im.w1.data(), im.uPhys.data());
  im.toPhysical(im.w2.data(), im.uxPhys.data());
  Complex pairing{};
  for (int j = 0; j < size; ++j)
    pairing += std::conj(im.uPhys[j]) * im.nonlin.evaluate(im.uPhys[j], im.uxPhys[j]);
  return 2.0 * pairing.imag() * im.grid.dx();
}

double PdeSolver::boundaryMassFraction() const {
  Impl& im = *impl_;
  im.toPhysical(im.v.data(), im.uPhys.data());
  double total = 0.0;
  double outer = 0.0;
  const double half = im.grid.boxHalfWidth / 2.0;
  for (int j = 0; j < im.grid.n; ++j) {
    const double m = std::norm(im.uPhys[j]);
    total += m;
    if (std::abs(im.grid.x(j)) >= half) outer += m;
  }
  return total > 0.0 ? outer / total : 0.0;
}

std::vector<Complex> PdeSolver::physical() const {
  Impl& im = *impl_;
  std::vector<Complex> out(im.grid.n);
  im.toPhysical(im.v.data(), out.data());
  return out;
}

const std::vector<Complex>& PdeSolver::spectral() const { return impl_->v; }

ExtractedProfile PdeSolver::extractProfile() const {
  const Impl& im = *impl_;
  const int size = im.grid.n;
  ExtractedProfile profile;
  profile.t = im.t;
  profile.xi.resize(size);
  profile.alpha.resize(size);
  for (int idx = 0; idx < size; ++idx) {
    const int m = (idx + size / 2) % size;
    const double theta = 0.5 * im.t * im.xi[m] * im.xi[m];
    profile.xi[idx] = im.xi[m];
    profile.alpha[idx] = im.v[m] * Complex{std::cos(theta), std::sin(theta)};
  }
  return profile;
}

nlohmann::json ResidualReport::toJson() const {
  return {
      {"raw_norm", rawNorm},
      {"window_averaged_norm", windowAveragedNorm},
      {"stencil_count", stencilCount},
  };
}

ResidualReport resonanceResidual(const std::vector<ExtractedProfile>& trajectory,
                                 const NuPolynomial& nu, double bandXiMin,
                                 double bandXiMax) {
  const int count = static_cast<int>(trajectory.size());
  if (count < 5)
    throw ValidationError("resonance residual needs at least 5 snapshots");
  if (!(bandXiMin >= 0.0) || !(bandXiMax > bandXiMin))
    throw ValidationError("residual band must satisfy 0 <= min < max");

  const std::size_t modes = trajectory.front().xi.size();
  std::vector<double> tau(count);
  for (int i = 0; i < count; ++i) {
    const ExtractedProfile& p = trajectory[i];
    if (p.xi.size() != modes || p.alpha.size() != modes)
      throw ValidationError("residual snapshots use inconsistent grids");
    if (!(p.t > 0.0)) throw ValidationError("residual snapshots need t > 0");
    tau[i] = std::log(p.t);
  }
  const double h = tau[1] - tau[0];
  if (!(h > 0.0))
    throw ValidationError("residual snapshots must increase in time");
  for (int i = 0; i + 1 < count; ++i)
    if (std::abs(tau[i + 1] - tau[i] - h) > 1e-6 * h)
      throw ValidationError("residual snapshots must be log-uniform in t");

  std::vector<std::size_t> band;
  for (std::size_t k = 0; k < modes; ++k) {
    const double a = std::abs(trajectory.front().xi[k]);
    if (a >= bandXiMin && a <= bandXiMax) band.push_back(k);
  }
  if (band.empty())
    throw ValidationError("residual band selects no grid modes");
  const double dXi = trajectory.front().xi[1] - trajectory.front().xi[0];

  ResidualReport report;
  std::vector<Complex> mean(band.size(), Complex{});
  std::vector<Complex> r(band.size());
  double rawSum = 0.0;
  for (int i = 2; i + 2 < count; ++i) {
    const double invT = 1.0 / trajectory[i].t;
    double normSq = 0.0;
    for (std::size_t b = 0; b < band.size(); ++b) {
      const std::size_t k = band[b];
      const Complex dTau =
          (trajectory[i - 2].alpha[k] - 8.0 * trajectory[i - 1].alpha[k] +
           8.0 * trajectory[i + 1].alpha[k] - trajectory[i + 2].alpha[k]) /
          (12.0 * h);
      const Complex a = trajectory[i].alpha[k];
      r[b] = invT * (Complex{0.0, 1.0} * dTau -
                     nu(trajectory[i].xi[k]) * std::norm(a) * a);
      mean[b] += r[b];
      normSq += std::norm(r[b]);
    }
    rawSum += std::sqrt(normSq * dXi);
    ++report.stencilCount;
  }
  report.rawNorm = rawSum / report.stencilCount;
  double meanSq = 0.0;
  for (Complex& m : mean) {
    m /= static_cast<double>(report.stencilCount);
    meanSq += std::norm(m);
  }
  report.windowAveragedNorm = std::sqrt(meanSq * dXi);
  return report;
}

}  // namespace dnls
