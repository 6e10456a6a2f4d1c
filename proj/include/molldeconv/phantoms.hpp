#pragma once

#include "molldeconv/beta_field.hpp"
#include "molldeconv/grid.hpp"

#include <cstdint>
#include <vector>

namespace molldeconv {

/// Train of unit pulses centered in a 1D domain.
struct PulseTrain {
  double width = 1.0 / 64.0;
  /// Edge-to-edge distance between consecutive pulses.
  double gap = 1.0 / 32.0;
  /// 0 fills the central half of the domain with as many pulses as fit.
  Index count = 0;
};

/// Pulse count actually used on this grid.
Index pulse_count(const Grid& grid, const PulseTrain& train);
/// [start, start + length] covered by the train, from the first leading to the last trailing edge.
std::pair<double, double> pulse_train_span(const Grid& grid, const PulseTrain& train);
/// Nodes inside pulse_train_span widened by margin on both sides.
RegionMask pulse_train_region(const Grid& grid, const PulseTrain& train, double margin = 0.0);

/// Unit-height pulses on [a, a + width) for each pulse start a. Needs >= 4 samples per pulse.
SampledField pulses_phantom_1d(const Grid& grid, const PulseTrain& train = {});

struct Ellipse {
  double intensity;
  double semi_x;
  double semi_y;
  double center_x;
  double center_y;
  double angle_deg;
};

/// Disk that replaces the phantom value, in the same normalized coordinates as the ellipses.
struct Blob {
  double center_x = 0.0;
  double center_y = 0.0;
  double radius = 0.0;
  double intensity = 1.0;
};

enum class SheppLoganVariant { Modified, Original };

struct SheppLoganOptions {
  SheppLoganVariant variant = SheppLoganVariant::Modified;
  std::vector<Blob> blobs;
};

/// The 10 ellipses of the chosen table, normalized coordinates in [-1, 1]^2 with y pointing up.
std::vector<Ellipse> shepp_logan_ellipses(SheppLoganVariant variant);

/// Pixel (row, col) of an n x n image has center x = -1 + (2 col + 1)/n, y = 1 - (2 row + 1)/n.
Coord phantom_coordinates(Index n, Index row, Index col);
/// Normalized (x, y) to grid coordinates (row, col) of the unit-pixel grid returned by shepp_logan.
Coord phantom_to_grid(Index n, double x, double y);

/// Sum of ellipse intensities at every pixel center (the Original table is halved so its
/// peak is 1), then blobs override, then values are clamped to [0, 1]. Grid: n x n, unit spacing.
SampledField shepp_logan(Index n, const SheppLoganOptions& options = {});

/// i.i.d. N(0, sigma^2) per node from Rng(seed).
SampledField gaussian_noise(const Grid& grid, double sigma, std::uint64_t seed);
SampledField add_noise(const SampledField& g, double sigma, std::uint64_t seed);

/// Real noise with |delta^(xi)| = E <xi>^sigma_exp at every spectral node and random phases.
SampledField spectral_noise(const Grid& grid, double E, double sigma_exp, std::uint64_t seed);

}  // namespace molldeconv
