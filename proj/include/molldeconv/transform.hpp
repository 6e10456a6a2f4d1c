#pragma once

#include "molldeconv/grid.hpp"

namespace molldeconv {

/// Riemann-sum approximation of the continuum transform
///   u^(xi) = \int e^{-2 pi i x xi} u(x) dx
/// on the conjugate SpectralGrid: dx^n times the DFT, with the phase of the grid origin applied.
SpectralField forward_transform(const SampledField& u);

/// Riemann-sum approximation of u(x) = \int e^{2 pi i x xi} U(xi) dxi with weight dxi^n.
/// Exact inverse of forward_transform.
SampledField inverse_transform(const SpectralField& U);

namespace detail {
// Array-level versions used by hot loops; the layouts are the ones of SampledField/SpectralField.
ComplexArray forward_values(const Grid& grid, const ComplexArray& u);
ComplexArray inverse_values(const Grid& grid, const ComplexArray& U);
}  // namespace detail

}  // namespace molldeconv
