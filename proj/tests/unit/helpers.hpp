#pragma once

#include "molldeconv/grid.hpp"
#include "molldeconv/random.hpp"

#include <numbers>

namespace testing {

using namespace molldeconv;

inline constexpr double kPi = std::numbers::pi;

inline ComplexArray random_complex(Index n, std::uint64_t seed) {
  Rng rng(seed);
  ComplexArray out(n);
  for (Index k = 0; k < n; ++k) {
    const double re = rng.normal();
    out[k] = Complex(re, rng.normal());
  }
  return out;
}

inline RealArray random_real(Index n, std::uint64_t seed) {
  Rng rng(seed);
  RealArray out(n);
  for (Index k = 0; k < n; ++k) out[k] = rng.normal();
  return out;
}

inline double max_abs(const ComplexArray& a) { return a.abs().maxCoeff(); }

/// u^(xi_m) by the defining Riemann sum, one node at a time.
inline ComplexArray brute_force_forward(const Grid& grid, const ComplexArray& u) {
  const SpectralGrid spectral(grid);
  ComplexArray out(grid.size());
  for (Index m = 0; m < grid.size(); ++m) {
    const Coord xi = spectral.node(m);
    Complex sum(0.0, 0.0);
    for (Index j = 0; j < grid.size(); ++j) {
      const Coord x = grid.node(j);
      sum += u[j] * std::polar(1.0, -2.0 * kPi * (x[0] * xi[0] + x[1] * xi[1]));
    }
    out[m] = sum * grid.cell_volume();
  }
  return out;
}

/// u(x_j) by the inverse Riemann sum.
inline ComplexArray brute_force_inverse(const Grid& grid, const ComplexArray& U) {
  const SpectralGrid spectral(grid);
  ComplexArray out(grid.size());
  for (Index j = 0; j < grid.size(); ++j) {
    const Coord x = grid.node(j);
    Complex sum(0.0, 0.0);
    for (Index m = 0; m < grid.size(); ++m) {
      const Coord xi = spectral.node(m);
      sum += U[m] * std::polar(1.0, 2.0 * kPi * (x[0] * xi[0] + x[1] * xi[1]));
    }
    out[j] = sum * spectral.cell_volume();
  }
  return out;
}

}  // namespace testing
