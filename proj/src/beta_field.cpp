#include "molldeconv/beta_field.hpp"

#include "molldeconv/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace molldeconv {

namespace {

void check_beta(double value) {
  if (!(value > 0.0) || !std::isfinite(value))
    throw InvalidArgument("beta must be positive and finite, got " + std::to_string(value));
}

}  // namespace

RegionMask::RegionMask(Grid grid, BoolArray members, RegionShape shape)
    : grid_(std::move(grid)), members_(std::move(members)), shape_(shape) {
  if (members_.size() != grid_.size()) throw InvalidArgument("region bitmap size does not match the grid");
}

RegionMask RegionMask::disk(const Grid& grid, Coord center, double radius) {
  if (!(radius >= 0.0)) throw InvalidArgument("disk radius must be non-negative");
  BoolArray members(grid.size());
  for (Index k = 0; k < grid.size(); ++k) {
    const Coord x = grid.node(k);
    const double d0 = x[0] - center[0];
    const double d1 = grid.dims() == 2 ? x[1] - center[1] : 0.0;
    members[k] = d0 * d0 + d1 * d1 <= radius * radius;
  }
  return {grid, std::move(members), Disk{center, radius}};
}

RegionMask RegionMask::rectangle(const Grid& grid, Coord corner, Coord extents) {
  if (!(extents[0] >= 0.0) || (grid.dims() == 2 && !(extents[1] >= 0.0)))
    throw InvalidArgument("rectangle extents must be non-negative");
  BoolArray members(grid.size());
  for (Index k = 0; k < grid.size(); ++k) {
    const Coord x = grid.node(k);
    bool inside = x[0] >= corner[0] && x[0] <= corner[0] + extents[0];
    if (grid.dims() == 2) inside = inside && x[1] >= corner[1] && x[1] <= corner[1] + extents[1];
    members[k] = inside;
  }
  return {grid, std::move(members), Rect{corner, extents}};
}

RegionMask RegionMask::bitmap(const Grid& grid, BoolArray membership) {
  return {grid, std::move(membership), Bitmap{}};
}

RegionMask RegionMask::full(const Grid& grid) { return bitmap(grid, BoolArray::Constant(grid.size(), true)); }

RegionMask RegionMask::complement() const { return bitmap(grid_, !members_); }

BetaField::BetaField(Grid grid, std::vector<BetaLevel> levels)
    : grid_(std::move(grid)), levels_(std::move(levels)), level_map_(Eigen::ArrayXi::Constant(grid_.size(), -1)) {
  if (levels_.empty()) throw InvalidArgument("beta field needs at least one level");
  lower_ = INFINITY;
  upper_ = 0.0;
  for (std::size_t l = 0; l < levels_.size(); ++l) {
    const BetaLevel& level = levels_[l];
    check_beta(level.value);
    if (!(level.region.grid() == grid_)) throw InvalidArgument("beta level region lives on another grid");
    if (level.region.empty()) throw InvalidArgument("beta level " + std::to_string(l) + " has an empty region");
    for (Index k = 0; k < grid_.size(); ++k) {
      if (!level.region.contains(k)) continue;
      if (level_map_[k] != -1) throw InvalidArgument("beta level regions overlap; they must partition the grid");
      level_map_[k] = static_cast<int>(l);
    }
    lower_ = std::min(lower_, level.value);
    upper_ = std::max(upper_, level.value);
  }
  if ((level_map_ < 0).any()) throw InvalidArgument("beta level regions do not cover the grid");
}

RealArray BetaField::values() const {
  RealArray out(grid_.size());
  for (Index k = 0; k < grid_.size(); ++k) out[k] = value_at(k);
  return out;
}

BetaField BetaField::scaled(double factor) const {
  auto levels = levels_;
  for (auto& level : levels) level.value *= factor;
  return {grid_, std::move(levels)};
}

BetaField constant_beta(const Grid& grid, double value) {
  check_beta(value);
  return {grid, {BetaLevel{RegionMask::full(grid), value}}};
}

BetaField two_region_beta(const Grid& grid, const RegionMask& roi, double beta_in, double beta_out) {
  check_beta(beta_in);
  check_beta(beta_out);
  if (roi.empty()) throw InvalidArgument("region of interest is empty");
  if (roi.is_full()) throw InvalidArgument("region of interest covers the whole grid; use a constant beta");
  return {grid, {BetaLevel{roi, beta_in}, BetaLevel{roi.complement(), beta_out}}};
}

BetaField piecewise_beta(const Grid& grid, double default_value,
                         const std::vector<std::pair<RegionMask, double>>& regions) {
  check_beta(default_value);
  Eigen::ArrayXi owner = Eigen::ArrayXi::Constant(grid.size(), -1);
  for (std::size_t r = 0; r < regions.size(); ++r) {
    const auto& [mask, value] = regions[r];
    check_beta(value);
    if (!(mask.grid() == grid)) throw InvalidArgument("region lives on another grid");
    if (mask.empty()) throw InvalidArgument("region " + std::to_string(r) + " is empty");
    for (Index k = 0; k < grid.size(); ++k)
      if (mask.contains(k)) owner[k] = static_cast<int>(r);
  }
  std::vector<BetaLevel> levels;
  for (int r = -1; r < static_cast<int>(regions.size()); ++r) {
    BoolArray members = owner == r;
    if (!members.any()) continue;
    const double value = r < 0 ? default_value : regions[static_cast<std::size_t>(r)].second;
    levels.push_back({RegionMask::bitmap(grid, std::move(members)), value});
  }
  return {grid, std::move(levels)};
}

QuantizedBeta quantize_beta(const Grid& grid, const RealArray& continuous, Index levels) {
  if (levels < 1) throw InvalidArgument("quantize_beta needs at least one level");
  if (continuous.size() != grid.size()) throw InvalidArgument("beta samples do not match the grid");
  if (!continuous.allFinite()) throw InvalidArgument("beta samples must be finite");
  if ((continuous <= 0.0).any()) throw InvalidArgument("beta samples must be positive");

  std::vector<double> sorted(continuous.data(), continuous.data() + continuous.size());
  std::sort(sorted.begin(), sorted.end());
  auto quantile = [&](double q) {
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
  };
  std::vector<double> values;
  for (Index l = 0; l < levels; ++l) {
    values.push_back(quantile((static_cast<double>(l) + 0.5) / static_cast<double>(levels)));
  }
  values.erase(std::unique(values.begin(), values.end()), values.end());

  Eigen::ArrayXi assignment(grid.size());
  double max_error = 0.0;
  for (Index k = 0; k < grid.size(); ++k) {
    const auto it = std::min_element(values.begin(), values.end(), [&](double a, double b) {
      return std::abs(a - continuous[k]) < std::abs(b - continuous[k]);
    });
    assignment[k] = static_cast<int>(it - values.begin());
    max_error = std::max(max_error, std::abs(*it - continuous[k]) / continuous[k]);
  }
  std::vector<BetaLevel> out;
  for (std::size_t l = 0; l < values.size(); ++l) {
    BoolArray members = assignment == static_cast<int>(l);
    if (members.any()) out.push_back({RegionMask::bitmap(grid, std::move(members)), values[l]});
  }
  return {BetaField(grid, std::move(out)), max_error};
}

}  // namespace molldeconv
