#include "molldeconv/phantoms.hpp"

#include "molldeconv/error.hpp"
#include "molldeconv/random.hpp"
#include "molldeconv/transform.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace molldeconv {

namespace {

void require_1d(const Grid& grid) {
  if (grid.dims() != 1) throw InvalidArgument("pulse train phantoms are one-dimensional");
}

}  // namespace

Index pulse_count(const Grid& grid, const PulseTrain& train) {
  require_1d(grid);
  if (!(train.width > 0.0) || !(train.gap >= 0.0)) throw InvalidArgument("pulse width must be positive, gap non-negative");
  if (train.count < 0) throw InvalidArgument("pulse count must be non-negative");
  if (train.count > 0) return train.count;
  const auto fitted = static_cast<Index>(std::floor((0.5 * grid.extent(0) + train.gap) / (train.width + train.gap)));
  return std::max<Index>(fitted, 1);
}

std::pair<double, double> pulse_train_span(const Grid& grid, const PulseTrain& train) {
  const Index count = pulse_count(grid, train);
  const double length = static_cast<double>(count) * train.width + static_cast<double>(count - 1) * train.gap;
  if (length > grid.extent(0)) throw InvalidArgument("pulse train is longer than the domain");
  return {grid.origin(0) + 0.5 * (grid.extent(0) - length), length};
}

RegionMask pulse_train_region(const Grid& grid, const PulseTrain& train, double margin) {
  const auto [start, length] = pulse_train_span(grid, train);
  return RegionMask::rectangle(grid, {start - margin, 0.0}, {length + 2.0 * margin, 0.0});
}

SampledField pulses_phantom_1d(const Grid& grid, const PulseTrain& train) {
  const auto [start, length] = pulse_train_span(grid, train);
  const double per_pulse = train.width / grid.spacing(0);
  if (per_pulse < 4.0) {
    std::ostringstream msg;
    msg << "grid too coarse for the pulse width: " << per_pulse << " samples per pulse, need 4";
    throw InvalidArgument(msg.str());
  }
  const Index count = pulse_count(grid, train);
  // Edges are compared in units of the spacing so that nodes on a leading edge are kept exactly.
  constexpr double kEdge = 1e-9;
  RealArray values = RealArray::Zero(grid.size());
  for (Index i = 0; i < count; ++i) {
    const double a = start + static_cast<double>(i) * (train.width + train.gap);
    for (Index k = 0; k < grid.size(); ++k) {
      const double x = grid.node(k)[0];
      if ((x - a) / grid.spacing(0) >= -kEdge && (x - a - train.width) / grid.spacing(0) < -kEdge) values[k] = 1.0;
    }
  }
  return SampledField::from_real(grid, values);
}

std::vector<Ellipse> shepp_logan_ellipses(SheppLoganVariant variant) {
  std::vector<Ellipse> table = {
      {1.0, 0.69, 0.92, 0.0, 0.0, 0.0},          {-0.8, 0.6624, 0.8740, 0.0, -0.0184, 0.0},
      {-0.2, 0.11, 0.31, 0.22, 0.0, -18.0},      {-0.2, 0.16, 0.41, -0.22, 0.0, 18.0},
      {0.1, 0.21, 0.25, 0.0, 0.35, 0.0},         {0.1, 0.046, 0.046, 0.0, 0.1, 0.0},
      {0.1, 0.046, 0.046, 0.0, -0.1, 0.0},       {0.1, 0.046, 0.023, -0.08, -0.605, 0.0},
      {0.1, 0.023, 0.023, 0.0, -0.606, 0.0},     {0.1, 0.023, 0.046, 0.06, -0.605, 0.0},
  };
  if (variant == SheppLoganVariant::Original) {
    const double original[] = {2.0, -0.98, -0.02, -0.02, 0.01, 0.01, 0.01, 0.01, 0.01, 0.01};
    for (std::size_t i = 0; i < table.size(); ++i) table[i].intensity = original[i];
  }
  return table;
}

Coord phantom_coordinates(Index n, Index row, Index col) {
  const double size = static_cast<double>(n);
  return {-1.0 + (2.0 * static_cast<double>(col) + 1.0) / size, 1.0 - (2.0 * static_cast<double>(row) + 1.0) / size};
}

Coord phantom_to_grid(Index n, double x, double y) {
  const double size = static_cast<double>(n);
  return {((1.0 - y) * size - 1.0) / 2.0, ((x + 1.0) * size - 1.0) / 2.0};
}

SampledField shepp_logan(Index n, const SheppLoganOptions& options) {
  if (n < 64) throw InvalidArgument("Shepp-Logan phantom needs at least 64 pixels per side");
  const Grid grid({n, n}, {1.0, 1.0});
  const auto table = shepp_logan_ellipses(options.variant);
  const double scale = options.variant == SheppLoganVariant::Original ? 0.5 : 1.0;
  RealArray values(grid.size());
  for (Index row = 0; row < n; ++row) {
    for (Index col = 0; col < n; ++col) {
      const auto [x, y] = phantom_coordinates(n, row, col);
      double sum = 0.0;
      for (const Ellipse& e : table) {
        const double t = e.angle_deg * std::numbers::pi / 180.0;
        const double xr = (x - e.center_x) * std::cos(t) + (y - e.center_y) * std::sin(t);
        const double yr = -(x - e.center_x) * std::sin(t) + (y - e.center_y) * std::cos(t);
        if ((xr / e.semi_x) * (xr / e.semi_x) + (yr / e.semi_y) * (yr / e.semi_y) <= 1.0) sum += e.intensity;
      }
      sum *= scale;
      for (const Blob& b : options.blobs) {
        if ((x - b.center_x) * (x - b.center_x) + (y - b.center_y) * (y - b.center_y) <= b.radius * b.radius)
          sum = b.intensity;
      }
      values[grid.ravel(row, col)] = std::clamp(sum, 0.0, 1.0);
    }
  }
  return SampledField::from_real(grid, values);
}

SampledField gaussian_noise(const Grid& grid, double sigma, std::uint64_t seed) {
  if (!(sigma >= 0.0)) throw InvalidArgument("noise sigma must be non-negative");
  Rng rng(seed);
  RealArray values(grid.size());
  for (Index k = 0; k < grid.size(); ++k) values[k] = sigma * rng.normal();
  return SampledField::from_real(grid, values);
}

SampledField add_noise(const SampledField& g, double sigma, std::uint64_t seed) {
  if (sigma == 0.0) return g;
  return {g.grid(), g.values() + gaussian_noise(g.grid(), sigma, seed).values()};
}

SampledField spectral_noise(const Grid& grid, double E, double sigma_exp, std::uint64_t seed) {
  if (!(sigma_exp < 0.0)) throw InvalidArgument("spectral noise exponent must be negative");
  if (!(E >= 0.0)) throw InvalidArgument("spectral noise amplitude must be non-negative");
  const SpectralGrid spectral(grid);
  Rng rng(seed);
  ComplexArray W(spectral.size());
  for (Index k = 0; k < spectral.size(); ++k) {
    const Index partner = spectral.mirror(k);
    if (partner < k) continue;
    const double magnitude = E * std::pow(1.0 + norm(spectral.node(k)), sigma_exp);
    if (partner == k) {
      W[k] = rng.uniform() < 0.5 ? magnitude : -magnitude;
    } else {
      const double theta = 2.0 * std::numbers::pi * rng.uniform();
      W[k] = std::polar(magnitude, theta);
      W[partner] = std::polar(magnitude, -theta);
    }
  }
  // A real field's transform carries the origin phase; pairs stay conjugate under it.
  for (Index k = 0; k < spectral.size(); ++k) {
    const Coord xi = spectral.node(k);
    W[k] *= std::polar(1.0, -2.0 * std::numbers::pi * (grid.origin(0) * xi[0] + (grid.dims() == 2 ? grid.origin(1) * xi[1] : 0.0)));
  }
  ComplexArray delta = inverse_transform({spectral, std::move(W)}).values();
  const double peak = delta.abs().maxCoeff();
  if (delta.imag().abs().maxCoeff() > 1e-12 * peak)
    throw NumericalContractError("spectral noise lost its Hermitian symmetry");
  delta.imag().setZero();
  return {grid, std::move(delta)};
}

}  // namespace molldeconv
