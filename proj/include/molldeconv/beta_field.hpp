#pragma once

#include "molldeconv/grid.hpp"

#include <utility>
#include <variant>
#include <vector>

namespace molldeconv {

/// Disk (an interval in 1D) in grid coordinates, axis order.
struct Disk {
  Coord center{0.0, 0.0};
  double radius = 0.0;
};

/// Axis-aligned box [corner, corner + extents] in grid coordinates, axis order.
struct Rect {
  Coord corner{0.0, 0.0};
  Coord extents{0.0, 0.0};
};

struct Bitmap {};

using RegionShape = std::variant<Disk, Rect, Bitmap>;

/// Set of grid nodes. A node belongs to a disk or rectangle iff its center does.
class RegionMask {
 public:
  static RegionMask disk(const Grid& grid, Coord center, double radius);
  static RegionMask rectangle(const Grid& grid, Coord corner, Coord extents);
  static RegionMask bitmap(const Grid& grid, BoolArray membership);
  static RegionMask full(const Grid& grid);

  const Grid& grid() const { return grid_; }
  const BoolArray& membership() const { return members_; }
  const RegionShape& shape() const { return shape_; }
  bool contains(Index node) const { return members_[node]; }
  Index count() const { return members_.count(); }
  bool empty() const { return count() == 0; }
  bool is_full() const { return count() == grid_.size(); }

  RegionMask complement() const;

 private:
  RegionMask(Grid grid, BoolArray members, RegionShape shape);

  Grid grid_;
  BoolArray members_;
  RegionShape shape_;
};

struct BetaLevel {
  RegionMask region;
  double value;
};

/// Piecewise-constant resolution map beta(x): the level regions partition the grid and every
/// level value lies in [lower(), upper()] with lower() > 0.
class BetaField {
 public:
  /// Validates the partition and positivity; throws InvalidArgument otherwise.
  BetaField(Grid grid, std::vector<BetaLevel> levels);

  const Grid& grid() const { return grid_; }
  const std::vector<BetaLevel>& levels() const { return levels_; }
  Index level_count() const { return static_cast<Index>(levels_.size()); }
  const Eigen::ArrayXi& level_map() const { return level_map_; }
  double lower() const { return lower_; }
  double upper() const { return upper_; }
  double value_at(Index node) const { return levels_[static_cast<std::size_t>(level_map_[node])].value; }
  RealArray values() const;

  /// Every level value multiplied by factor.
  BetaField scaled(double factor) const;

 private:
  Grid grid_;
  std::vector<BetaLevel> levels_;
  Eigen::ArrayXi level_map_;
  double lower_;
  double upper_;
};

BetaField constant_beta(const Grid& grid, double value);

/// Level 0 = roi with beta_in, level 1 = complement with beta_out. Rejects empty or full roi.
BetaField two_region_beta(const Grid& grid, const RegionMask& roi, double beta_in, double beta_out);

/// default_value everywhere, overridden by each region in order (later regions win on overlap).
/// Rejects empty regions and non-positive values.
BetaField piecewise_beta(const Grid& grid, double default_value,
                         const std::vector<std::pair<RegionMask, double>>& regions);

struct QuantizedBeta {
  BetaField field;
  /// max over nodes of |quantized - continuous| / continuous.
  double max_relative_error;
};

/// Rounds a per-node beta to at most `levels` values: level l sits at the (l + 1/2)/levels
/// quantile of the data and each node takes the nearest level. Coincident levels merge.
QuantizedBeta quantize_beta(const Grid& grid, const RealArray& continuous, Index levels);

}  // namespace molldeconv
