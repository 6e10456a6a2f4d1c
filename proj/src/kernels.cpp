#include "molldeconv/kernels.hpp"

#include "molldeconv/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <vector>

namespace molldeconv {

namespace {

constexpr double kPi = std::numbers::pi;
// Rounding slack when comparing against certified bounds.
constexpr double kBoundSlack = 1e-12;

double bracket(const Coord& xi) { return 1.0 + norm(xi); }

}  // namespace

std::vector<Coord> sweep_points(const Sweep& sweep) {
  std::vector<Coord> points;
  points.reserve(static_cast<std::size_t>(sweep.samples));
  const Index linear = sweep.samples / 2;
  const Index geometric = sweep.samples - linear;
  const double split = std::min(10.0, sweep.max_radius);
  auto push = [&](double r, Index i) {
    if (sweep.dims == 2 && i % 2 == 1) {
      points.push_back({r / std::numbers::sqrt2, r / std::numbers::sqrt2});
    } else {
      points.push_back({r, 0.0});
    }
  };
  for (Index i = 0; i < linear; ++i) push(split * static_cast<double>(i) / static_cast<double>(linear), i);
  for (Index i = 0; i < geometric; ++i) {
    const double t = geometric == 1 ? 1.0 : static_cast<double>(i) / static_cast<double>(geometric - 1);
    push(split * std::pow(sweep.max_radius / split, t), linear + i);
  }
  return points;
}

SweepReport check_kernel_bounds(const KernelSpec& kernel, const KernelBounds& bounds, const Sweep& sweep) {
  SweepReport report;
  for (const Coord& xi : sweep_points(sweep)) {
    const double magnitude = std::abs(kernel.fourier(xi));
    const double lower = std::pow(bracket(xi), -bounds.b) / bounds.a;
    const double upper = bounds.a * std::pow(bracket(xi), bounds.b);
    const double ratio = std::max(magnitude > 0.0 ? lower / magnitude : INFINITY, magnitude / upper);
    if (ratio > report.worst_ratio) {
      report.worst_ratio = ratio;
      report.worst_at = xi;
    }
  }
  report.holds = report.worst_ratio <= 1.0 + kBoundSlack;
  return report;
}

SweepReport check_mollifier_bound(const MollifierSpec& mollifier, const Sweep& sweep) {
  SweepReport report;
  for (const Coord& xi : sweep_points(sweep)) {
    const double t = norm(xi);
    if (t == 0.0) continue;
    const double value = mollifier.profile(t);
    const double near = std::abs(1.0 - value) / (mollifier.c() * std::pow(t, mollifier.d()));
    const double far = value / (mollifier.decay_c() * std::pow(1.0 + t, -mollifier.d()));
    const double ratio = std::max(near, far);
    if (ratio > report.worst_ratio) {
      report.worst_ratio = ratio;
      report.worst_at = xi;
    }
  }
  report.holds = report.worst_ratio <= 1.0 + kBoundSlack;
  return report;
}

KernelSpec::KernelSpec(std::string name, int dims, FourierEval fourier, std::optional<KernelBounds> bounds,
                       SpatialEval spatial, TailEval tail)
    : name_(std::move(name)),
      dims_(dims),
      fourier_(std::move(fourier)),
      bounds_(bounds),
      spatial_(std::move(spatial)),
      tail_(std::move(tail)) {
  if (dims_ < 0 || dims_ > 2) throw InvalidArgument("kernel dimension must be 0 (any), 1 or 2");
  if (!fourier_) throw InvalidArgument("kernel needs a Fourier evaluator");
  if (fourier_({0.0, 0.0}) == Complex(0.0, 0.0)) throw InvalidArgument("kernel " + name_ + " has gamma^(0) = 0");
  if (bounds_) {
    if (bounds_->a < 1.0 || !(bounds_->b > 0.0)) throw InvalidArgument("kernel bounds need a >= 1 and b > 0");
    const auto report = check_kernel_bounds(*this, *bounds_, {.dims = dims_ == 2 ? 2 : 1});
    if (!report.holds) {
      std::ostringstream msg;
      msg << "kernel " << name_ << " violates its bound constants at |xi| = " << norm(report.worst_at)
          << " (ratio " << report.worst_ratio << ")";
      throw InvalidArgument(msg.str());
    }
  }
}

ComplexArray KernelSpec::sample(const SpectralGrid& grid) const {
  if (!supports(grid.dims())) throw InvalidArgument("kernel " + name_ + " does not match the grid dimension");
  ComplexArray out(grid.size());
  for (Index k = 0; k < grid.size(); ++k) out[k] = fourier_(grid.node(k));
  return out;
}

std::optional<double> KernelSpec::tail_mass(const Grid& grid) const {
  if (!tail_) return std::nullopt;
  return tail_({0.5 * grid.extent(0), grid.dims() == 2 ? 0.5 * grid.extent(1) : 0.0});
}

MollifierSpec::MollifierSpec(std::string name, Profile profile, double c, double d, double decay_c)
    : name_(std::move(name)), profile_(std::move(profile)), c_(c), d_(d), decay_c_(decay_c) {
  if (!profile_) throw InvalidArgument("mollifier needs a radial profile");
  if (!(c_ > 0.0) || !(d_ > 0.0) || !(decay_c_ > 0.0))
    throw InvalidArgument("mollifier constants c, d and the decay constant must be positive");
  if (profile_(0.0) != 1.0) throw InvalidArgument("mollifier " + name_ + " must satisfy phi^(0) = 1");
  for (const Coord& xi : sweep_points({})) {
    if (norm(xi) > 0.0 && profile_(norm(xi)) == 1.0)
      throw InvalidArgument("mollifier " + name_ + " has phi^(xi) = 1 away from the origin");
  }
  if (!check_mollifier_bound(*this).holds)
    throw InvalidArgument("mollifier " + name_ + " violates its certified constants");
}

KernelSpec gaussian_kernel_1d(double amplitude, double width) {
  if (!(width > 0.0)) throw InvalidArgument("Gaussian kernel width must be positive");
  if (amplitude == 0.0 || !std::isfinite(amplitude)) throw InvalidArgument("Gaussian kernel amplitude must be nonzero");
  const double scale = amplitude * width * std::sqrt(kPi);
  const double decay = kPi * kPi * width * width;
  std::ostringstream name;
  name << "gaussian1d:amplitude=" << amplitude << ",width=" << width;
  return KernelSpec(
      name.str(), 1, [=](const Coord& xi) { return Complex(scale * std::exp(-decay * xi[0] * xi[0]), 0.0); },
      std::nullopt, [=](const Coord& x) { return amplitude * std::exp(-x[0] * x[0] / (width * width)); },
      [=](const Coord& half) { return std::erfc(half[0] / width); });
}

KernelSpec gaussian_kernel_2d(double sigma) {
  if (!(sigma > 0.0)) throw InvalidArgument("Gaussian blur sigma must be positive");
  const double decay = 2.0 * kPi * kPi * sigma * sigma;
  std::ostringstream name;
  name << "gaussian2d:sigma=" << sigma;
  return KernelSpec(
      name.str(), 2,
      [=](const Coord& xi) { return Complex(std::exp(-decay * (xi[0] * xi[0] + xi[1] * xi[1])), 0.0); },
      std::nullopt,
      [=](const Coord& x) {
        return std::exp(-(x[0] * x[0] + x[1] * x[1]) / (2.0 * sigma * sigma)) / (2.0 * kPi * sigma * sigma);
      },
      [=](const Coord& half) {
        const double s = sigma * std::numbers::sqrt2;
        return 1.0 - std::erf(half[0] / s) * std::erf(half[1] / s);
      });
}

KernelSpec sobolev_kernel(double b) {
  if (!(b > 0.0)) throw InvalidArgument("Sobolev kernel exponent b must be positive");
  std::ostringstream name;
  name << "sobolev:b=" << b;
  return KernelSpec(
      name.str(), 0, [=](const Coord& xi) { return Complex(std::pow(bracket(xi), -b), 0.0); },
      KernelBounds{1.0, b});
}

KernelSpec tabulated_kernel(const SampledField& psf) {
  const Grid& grid = psf.grid();
  struct Tap {
    Coord x;
    Complex value;
  };
  std::vector<Tap> taps;
  for (Index j = 0; j < grid.size(); ++j) {
    if (psf.values()[j] != Complex(0.0, 0.0)) taps.push_back({grid.node(j), psf.values()[j] * grid.cell_volume()});
  }
  if (taps.empty()) throw InvalidArgument("tabulated kernel has no nonzero taps");
  return KernelSpec("tabulated", grid.dims(), [taps = std::move(taps)](const Coord& xi) {
    Complex sum(0.0, 0.0);
    for (const Tap& tap : taps) sum += tap.value * std::polar(1.0, -2.0 * kPi * (tap.x[0] * xi[0] + tap.x[1] * xi[1]));
    return sum;
  });
}

MollifierSpec gaussian_mollifier(int dims, double scale) {
  if (dims != 1 && dims != 2) throw InvalidArgument("Gaussian mollifier supports n = 1 or 2");
  if (!(scale > 0.0)) throw InvalidArgument("Gaussian mollifier scale must be positive");
  const double k = kPi * scale * scale;
  // max_t exp(-k t^2) (1 + t)^2 is attained where k t (1 + t) = 1.
  const double t_star = 0.5 * (-1.0 + std::sqrt(1.0 + 4.0 / k));
  const double decay_c = std::exp(-k * t_star * t_star) * (1.0 + t_star) * (1.0 + t_star);
  std::ostringstream name;
  name << "gaussian";
  if (scale != 1.0) name << ":scale=" << scale;
  return MollifierSpec(name.str(), [k](double t) { return std::exp(-k * t * t); }, k, 2.0, decay_c);
}

Complex eval_symbol(const KernelSpec& kernel, const MollifierSpec& mollifier, double alpha, double beta_value,
                    const Coord& xi) {
  if (!(alpha > 0.0) || !(beta_value > 0.0)) throw InvalidArgument("alpha and beta must be positive");
  const Complex g = kernel.fourier(xi);
  const double phi = mollifier.profile(alpha * beta_value * norm(xi));
  const double miss = 1.0 - phi;
  return std::conj(g) * phi / (std::norm(g) + miss * miss);
}

std::optional<std::string> tail_warning(const KernelSpec& kernel, const Grid& grid, double threshold) {
  const auto mass = kernel.tail_mass(grid);
  if (!mass || *mass < threshold) return std::nullopt;
  std::ostringstream msg;
  msg << "kernel " << kernel.name() << " has relative mass " << *mass
      << " outside the periodic domain; wrap-around will be visible";
  return msg.str();
}

}  // namespace molldeconv
