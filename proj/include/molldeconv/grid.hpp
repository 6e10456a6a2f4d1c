#pragma once

#include <Eigen/Core>

#include <array>
#include <complex>

namespace molldeconv {

using Index = Eigen::Index;
using Complex = std::complex<double>;
using ComplexArray = Eigen::ArrayXcd;
using RealArray = Eigen::ArrayXd;
using BoolArray = Eigen::Array<bool, Eigen::Dynamic, 1>;

/// A point or frequency in one or two dimensions. In 1D the second entry is zero.
using Coord = std::array<double, 2>;

inline double norm(const Coord& c) { return std::hypot(c[0], c[1]); }

/// Uniform periodic sampling of a 1D segment or 2D box.
///
/// Nodes sit at origin + i * spacing, i = 0..N-1 per axis. 2D values are stored row-major:
/// the flat index of node (i0, i1) is i0 * N1 + i1, so axis 0 is the image row.
class Grid {
 public:
  Grid(Index samples, double spacing, double origin = 0.0);
  Grid(std::array<Index, 2> samples, std::array<double, 2> spacing,
       std::array<double, 2> origin = {0.0, 0.0});

  int dims() const { return dims_; }
  Index samples(int axis) const { return n_[axis]; }
  double spacing(int axis) const { return dx_[axis]; }
  double origin(int axis) const { return origin_[axis]; }
  double extent(int axis) const { return static_cast<double>(n_[axis]) * dx_[axis]; }
  Index size() const { return n_[0] * n_[1]; }
  double cell_volume() const { return dims_ == 1 ? dx_[0] : dx_[0] * dx_[1]; }

  std::array<Index, 2> unravel(Index flat) const { return {flat / n_[1], flat % n_[1]}; }
  Index ravel(Index i0, Index i1 = 0) const { return i0 * n_[1] + i1; }
  Coord node(Index flat) const;

  bool operator==(const Grid& other) const = default;

 private:
  int dims_;
  std::array<Index, 2> n_;
  std::array<double, 2> dx_;
  std::array<double, 2> origin_;
};

/// Frequency lattice conjugate to a Grid, in centered order: along each axis the entry at
/// position m holds xi = (m - floor(N/2)) / (N * dx).
class SpectralGrid {
 public:
  explicit SpectralGrid(const Grid& grid) : grid_(grid) {}

  const Grid& spatial() const { return grid_; }
  int dims() const { return grid_.dims(); }
  Index samples(int axis) const { return grid_.samples(axis); }
  Index size() const { return grid_.size(); }
  double spacing(int axis) const { return 1.0 / grid_.extent(axis); }
  double cell_volume() const { return dims() == 1 ? spacing(0) : spacing(0) * spacing(1); }

  Index zero_offset(int axis) const { return dims() == 1 && axis == 1 ? 0 : samples(axis) / 2; }
  double frequency(int axis, Index m) const {
    return static_cast<double>(m - zero_offset(axis)) * spacing(axis);
  }
  Coord node(Index flat) const;
  /// Flat index of xi = 0.
  Index zero_index() const { return grid_.ravel(zero_offset(0), zero_offset(1)); }
  /// Flat index of -xi, with the DFT aliasing of the Nyquist row/column onto itself.
  Index mirror(Index flat) const;

  bool operator==(const SpectralGrid& other) const = default;

 private:
  Grid grid_;
};

/// Samples of a function on a Grid. Real data carries a zero imaginary part.
class SampledField {
 public:
  SampledField(Grid grid, ComplexArray values);
  static SampledField zeros(const Grid& grid);
  static SampledField from_real(const Grid& grid, const RealArray& values);

  const Grid& grid() const { return grid_; }
  const ComplexArray& values() const { return values_; }
  RealArray real() const { return values_.real(); }
  bool is_real() const { return (values_.imag() == 0.0).all(); }

 private:
  Grid grid_;
  ComplexArray values_;
};

/// Samples of a Fourier transform on a SpectralGrid, centered layout.
class SpectralField {
 public:
  SpectralField(SpectralGrid grid, ComplexArray values);

  const SpectralGrid& grid() const { return grid_; }
  const ComplexArray& values() const { return values_; }

 private:
  SpectralGrid grid_;
  ComplexArray values_;
};

/// Every spectral node's |xi|, centered layout.
RealArray frequency_radius(const SpectralGrid& grid);

}  // namespace molldeconv
