#include "molldeconv/grid.hpp"

#include "molldeconv/error.hpp"

#include <cmath>
#include <string>

namespace molldeconv {

namespace {

void check_axis(Index n, double dx, double origin) {
  if (n < 2) throw InvalidArgument("grid needs at least 2 samples per axis, got " + std::to_string(n));
  if (!(dx > 0.0) || !std::isfinite(dx)) throw InvalidArgument("grid spacing must be positive and finite");
  if (!std::isfinite(origin)) throw InvalidArgument("grid origin must be finite");
}

}  // namespace

Grid::Grid(Index samples, double spacing, double origin)
    : dims_(1), n_{samples, 1}, dx_{spacing, 1.0}, origin_{origin, 0.0} {
  check_axis(samples, spacing, origin);
}

Grid::Grid(std::array<Index, 2> samples, std::array<double, 2> spacing, std::array<double, 2> origin)
    : dims_(2), n_(samples), dx_(spacing), origin_(origin) {
  check_axis(samples[0], spacing[0], origin[0]);
  check_axis(samples[1], spacing[1], origin[1]);
}

Coord Grid::node(Index flat) const {
  const auto [i0, i1] = unravel(flat);
  if (dims_ == 1) return {origin_[0] + static_cast<double>(i0) * dx_[0], 0.0};
  return {origin_[0] + static_cast<double>(i0) * dx_[0], origin_[1] + static_cast<double>(i1) * dx_[1]};
}

Coord SpectralGrid::node(Index flat) const {
  const auto [m0, m1] = grid_.unravel(flat);
  if (dims() == 1) return {frequency(0, m0), 0.0};
  return {frequency(0, m0), frequency(1, m1)};
}

Index SpectralGrid::mirror(Index flat) const {
  const auto [m0, m1] = grid_.unravel(flat);
  auto reflect = [](Index m, Index offset, Index n) { return ((2 * offset - m) % n + n) % n; };
  return grid_.ravel(reflect(m0, zero_offset(0), samples(0)), reflect(m1, zero_offset(1), samples(1)));
}

SampledField::SampledField(Grid grid, ComplexArray values) : grid_(std::move(grid)), values_(std::move(values)) {
  if (values_.size() != grid_.size())
    throw InvalidArgument("field has " + std::to_string(values_.size()) + " values for a grid of " +
                          std::to_string(grid_.size()) + " nodes");
}

SampledField SampledField::zeros(const Grid& grid) { return {grid, ComplexArray::Zero(grid.size())}; }

SampledField SampledField::from_real(const Grid& grid, const RealArray& values) {
  return {grid, values.cast<Complex>()};
}

SpectralField::SpectralField(SpectralGrid grid, ComplexArray values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  if (values_.size() != grid_.size())
    throw InvalidArgument("spectral field size does not match its spectral grid");
}

RealArray frequency_radius(const SpectralGrid& grid) {
  RealArray r(grid.size());
  for (Index k = 0; k < grid.size(); ++k) r[k] = norm(grid.node(k));
  return r;
}

}  // namespace molldeconv
