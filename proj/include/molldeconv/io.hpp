#pragma once

#include "molldeconv/beta_field.hpp"
#include "molldeconv/kernels.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace molldeconv {

/// "sobolev:b=1", "gaussian1d:amplitude=0.1,width=0.05", "gaussian2d:sigma=7".
/// "gaussian:..." picks the 1D or 2D form from dims.
KernelSpec parse_kernel(std::string_view spec, int dims);
/// "gaussian" or "gaussian:scale=6.283".
MollifierSpec parse_mollifier(std::string_view spec, int dims);
/// "disk:cx,cy,r" or "rect:x,y,w,h" in grid coordinates; x/cx runs along columns (axis 1) and
/// y/cy along rows (axis 0). On 1D grids x/cx is the position and y/cy is ignored.
RegionMask parse_roi(std::string_view spec, const Grid& grid);
/// Same geometry as parse_roi from a shape name ("disk", "rect") and its numbers.
RegionMask make_roi(std::string_view shape, const std::vector<double>& params, const Grid& grid);

/// 1D fields as "coordinate value" lines. Reading infers the grid from the coordinates.
void write_text_1d(const std::filesystem::path& path, const SampledField& field);
SampledField read_text_1d(const std::filesystem::path& path);

/// Lossless binary: a text header starting with "MOLLDECONV-F64 1" (dims, samples, spacing,
/// origin, real/complex, terminated by "end"), then little-endian doubles in row-major order.
void write_raw(const std::filesystem::path& path, const SampledField& field);
SampledField read_raw(const std::filesystem::path& path);

/// Dispatch on extension: .f64 raw, anything else 1D text.
SampledField read_field(const std::filesystem::path& path);

/// 16-bit grayscale PNG of the real part, min..max mapped to 0..65535. 1D fields become one row.
std::vector<std::uint8_t> encode_png16(const SampledField& field);
void write_png16(const std::filesystem::path& path, const SampledField& field);
/// Decoded 16-bit samples, for round-trip checks.
std::vector<std::uint16_t> decode_png16(const std::vector<std::uint8_t>& png, Index& rows, Index& cols);

std::string base64_encode(const std::vector<std::uint8_t>& bytes);

/// FNV-1a 64 over the compact dump of j (keys are sorted), as 16 hex digits.
std::string config_hash(const nlohmann::json& j);

/// Writes j with two-space indentation and a trailing newline.
void write_json(const std::filesystem::path& path, const nlohmann::json& j);
nlohmann::json read_json(const std::filesystem::path& path);

struct RunManifest {
  std::string command;
  std::string config_hash;
  std::map<std::string, std::uint64_t> seeds;
  std::vector<std::string> outputs;
  nlohmann::json summary = nlohmann::json::object();
  std::map<std::string, double> timings_ms;
};

nlohmann::json to_json(const RunManifest& manifest);
/// Library and dependency versions recorded in every manifest.
nlohmann::json component_versions();

}  // namespace molldeconv
