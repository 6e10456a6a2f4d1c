#pragma once

#include "molldeconv/grid.hpp"

#include <functional>
#include <optional>
#include <string>

namespace molldeconv {

/// Constants certifying a^{-1} <xi>^{-b} <= |gamma^(xi)| <= a <xi>^{b}, with <xi> = 1 + |xi|.
struct KernelBounds {
  double a = 1.0;
  double b = 1.0;
};

/// Sweep used to certify bound constants numerically: half the points on [0, 10] linearly,
/// half geometrically on [10, max_radius]. In 2D the direction alternates axis/diagonal.
struct Sweep {
  double max_radius = 1e3;
  Index samples = 10000;
  int dims = 1;
};

/// Convolution kernel gamma, described by its closed-form Fourier transform.
class KernelSpec {
 public:
  using FourierEval = std::function<Complex(const Coord&)>;
  using SpatialEval = std::function<double(const Coord&)>;
  /// Fraction of |gamma| mass outside the centered box with the given half extents.
  using TailEval = std::function<double(const Coord&)>;

  /// Throws InvalidArgument if gamma^(0) == 0 or if the given bounds fail on the sweep.
  /// dims == 0 means the evaluator is radial and works in any dimension.
  KernelSpec(std::string name, int dims, FourierEval fourier, std::optional<KernelBounds> bounds = {},
             SpatialEval spatial = {}, TailEval tail = {});

  const std::string& name() const { return name_; }
  int dims() const { return dims_; }
  Complex fourier(const Coord& xi) const { return fourier_(xi); }
  const std::optional<KernelBounds>& bounds() const { return bounds_; }
  bool has_spatial() const { return static_cast<bool>(spatial_); }
  double spatial(const Coord& x) const { return spatial_(x); }

  /// gamma^ on every node of a spectral grid (centered layout).
  ComplexArray sample(const SpectralGrid& grid) const;
  /// Relative kernel mass outside the periodic domain, when a closed form is known.
  std::optional<double> tail_mass(const Grid& grid) const;
  bool supports(int dims) const { return dims_ == 0 || dims_ == dims; }

 private:
  std::string name_;
  int dims_;
  FourierEval fourier_;
  std::optional<KernelBounds> bounds_;
  SpatialEval spatial_;
  TailEval tail_;
};

/// Radial mollifier: phi^(xi) = Phi(|xi|), with certified constants
///   |1 - Phi(t)| <= c t^d   and   Phi(t) <= decay_c (1 + t)^{-d}.
class MollifierSpec {
 public:
  using Profile = std::function<double(double)>;

  /// Throws InvalidArgument unless Phi(0) == 1, Phi(t) != 1 for t > 0 and the c, d bound holds on
  /// the sweep.
  MollifierSpec(std::string name, Profile profile, double c, double d, double decay_c);

  const std::string& name() const { return name_; }
  double profile(double t) const { return profile_(t); }
  double fourier(const Coord& xi) const { return profile_(norm(xi)); }
  double c() const { return c_; }
  double d() const { return d_; }
  double decay_c() const { return decay_c_; }

 private:
  std::string name_;
  Profile profile_;
  double c_;
  double d_;
  double decay_c_;
};

/// gamma(x) = amplitude * exp(-x^2 / width^2).
KernelSpec gaussian_kernel_1d(double amplitude, double width);
/// Unit-mass isotropic Gaussian with standard deviation sigma (grid units).
KernelSpec gaussian_kernel_2d(double sigma);
/// gamma^(xi) = <xi>^{-b}; realizes the two-sided bound with a = 1.
KernelSpec sobolev_kernel(double b);
/// Measured PSF given as samples; gamma^ is the trigonometric sum over its nonzero taps,
/// gamma^(xi) = dx^n sum_j gamma(x_j) e^{-2 pi i x_j xi}. No bound constants.
KernelSpec tabulated_kernel(const SampledField& psf);

/// phi^(xi) = exp(-pi scale^2 |xi|^2); c = pi scale^2, d = 2. scale = 1 is the self-dual Gaussian.
MollifierSpec gaussian_mollifier(int dims, double scale = 1.0);

/// conj(gamma^) phi^(s xi) / (|gamma^|^2 + |1 - phi^(s xi)|^2) with s = alpha * beta.
Complex eval_symbol(const KernelSpec& kernel, const MollifierSpec& mollifier, double alpha, double beta_value,
                    const Coord& xi);

struct SweepReport {
  bool holds = true;
  /// Largest ratio of observed value to the certified bound (<= 1 when the bound holds).
  double worst_ratio = 0.0;
  Coord worst_at{0.0, 0.0};
};

SweepReport check_kernel_bounds(const KernelSpec& kernel, const KernelBounds& bounds, const Sweep& sweep = {});
SweepReport check_mollifier_bound(const MollifierSpec& mollifier, const Sweep& sweep = {});

/// Sweep points in the order described by Sweep.
std::vector<Coord> sweep_points(const Sweep& sweep);

/// A warning string when more than `threshold` of the kernel's mass falls outside the grid.
std::optional<std::string> tail_warning(const KernelSpec& kernel, const Grid& grid, double threshold = 1e-6);

}  // namespace molldeconv
