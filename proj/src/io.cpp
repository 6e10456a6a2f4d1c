#include "molldeconv/io.hpp"

#include "molldeconv/error.hpp"

#include <Eigen/Core>
#include <fftw3.h>
#include <png.h>

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace molldeconv {

namespace {

struct SpecParts {
  std::string kind;
  std::map<std::string, double> params;
};

// "kind:key=value,key=value"
SpecParts split_spec(std::string_view spec) {
  SpecParts parts;
  const auto colon = spec.find(':');
  parts.kind = std::string(spec.substr(0, colon));
  if (colon == std::string_view::npos) return parts;
  std::stringstream rest{std::string(spec.substr(colon + 1))};
  std::string item;
  while (std::getline(rest, item, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw InvalidArgument("expected key=value in '" + std::string(spec) + "'");
    std::size_t used = 0;
    double value = 0.0;
    try {
      value = std::stod(item.substr(eq + 1), &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size() - eq - 1)
      throw InvalidArgument("bad number in '" + std::string(spec) + "'");
    parts.params[item.substr(0, eq)] = value;
  }
  return parts;
}

double take(SpecParts& parts, const std::string& key, std::optional<double> fallback = {}) {
  const auto it = parts.params.find(key);
  if (it == parts.params.end()) {
    if (fallback) return *fallback;
    throw InvalidArgument(parts.kind + " needs parameter '" + key + "'");
  }
  const double value = it->second;
  parts.params.erase(it);
  return value;
}

void no_leftovers(const SpecParts& parts) {
  if (!parts.params.empty())
    throw InvalidArgument(parts.kind + ": unknown parameter '" + parts.params.begin()->first + "'");
}

std::vector<double> numbers(std::string_view text, std::size_t expected, std::string_view spec) {
  std::vector<double> out;
  std::stringstream in{std::string(text)};
  std::string item;
  while (std::getline(in, item, ',')) {
    std::size_t used = 0;
    try {
      out.push_back(std::stod(item, &used));
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size()) throw InvalidArgument("bad number in roi '" + std::string(spec) + "'");
  }
  if (out.size() != expected) throw InvalidArgument("roi '" + std::string(spec) + "' has the wrong number of values");
  return out;
}

std::ofstream open_out(const std::filesystem::path& path, std::ios::openmode mode = std::ios::out) {
  std::ofstream out(path, mode);
  if (!out) throw InvalidArgument("cannot write " + path.string());
  return out;
}

std::ifstream open_in(const std::filesystem::path& path, std::ios::openmode mode = std::ios::in) {
  std::ifstream in(path, mode);
  if (!in) throw InvalidArgument("cannot read " + path.string());
  return in;
}

}  // namespace

KernelSpec parse_kernel(std::string_view spec, int dims) {
  SpecParts parts = split_spec(spec);
  std::string kind = parts.kind;
  if (kind == "gaussian") kind = dims == 1 ? "gaussian1d" : "gaussian2d";
  if (kind == "sobolev") {
    const double b = take(parts, "b", 1.0);
    no_leftovers(parts);
    return sobolev_kernel(b);
  }
  if (kind == "gaussian1d") {
    if (dims != 1) throw InvalidArgument("gaussian1d kernel on a 2D grid");
    const double amplitude = take(parts, "amplitude", 0.1);
    const double width = take(parts, "width", 0.05);
    no_leftovers(parts);
    return gaussian_kernel_1d(amplitude, width);
  }
  if (kind == "gaussian2d") {
    if (dims != 2) throw InvalidArgument("gaussian2d kernel on a 1D grid");
    const double sigma = take(parts, "sigma", 7.0);
    no_leftovers(parts);
    return gaussian_kernel_2d(sigma);
  }
  throw InvalidArgument("unknown kernel '" + std::string(spec) + "'");
}

MollifierSpec parse_mollifier(std::string_view spec, int dims) {
  SpecParts parts = split_spec(spec);
  if (parts.kind != "gaussian") throw InvalidArgument("unknown mollifier '" + std::string(spec) + "'");
  const double scale = take(parts, "scale", 1.0);
  no_leftovers(parts);
  return gaussian_mollifier(dims, scale);
}

RegionMask make_roi(std::string_view shape, const std::vector<double>& v, const Grid& grid) {
  if (shape == "disk") {
    if (v.size() != 3) throw InvalidArgument("disk roi needs cx, cy, r");
    const Coord center = grid.dims() == 1 ? Coord{v[0], 0.0} : Coord{v[1], v[0]};
    return RegionMask::disk(grid, center, v[2]);
  }
  if (shape == "rect") {
    if (v.size() != 4) throw InvalidArgument("rect roi needs x, y, w, h");
    if (grid.dims() == 1) return RegionMask::rectangle(grid, {v[0], 0.0}, {v[2], 0.0});
    return RegionMask::rectangle(grid, {v[1], v[0]}, {v[3], v[2]});
  }
  throw InvalidArgument("unknown roi shape '" + std::string(shape) + "'");
}

RegionMask parse_roi(std::string_view spec, const Grid& grid) {
  const auto colon = spec.find(':');
  if (colon == std::string_view::npos) throw InvalidArgument("roi must be disk:cx,cy,r or rect:x,y,w,h");
  const std::string_view kind = spec.substr(0, colon);
  if (kind != "disk" && kind != "rect") throw InvalidArgument("unknown roi shape '" + std::string(kind) + "'");
  return make_roi(kind, numbers(spec.substr(colon + 1), kind == "disk" ? 3 : 4, spec), grid);
}

// ---------------------------------------------------------------------------------------------
// Field files

void write_text_1d(const std::filesystem::path& path, const SampledField& field) {
  if (field.grid().dims() != 1) throw InvalidArgument("text output is for 1D fields");
  if (!field.is_real()) throw InvalidArgument("text output needs a real field");
  auto out = open_out(path);
  out << std::setprecision(17);
  for (Index k = 0; k < field.grid().size(); ++k) out << field.grid().node(k)[0] << ' ' << field.values()[k].real() << '\n';
}

SampledField read_text_1d(const std::filesystem::path& path) {
  auto in = open_in(path);
  std::vector<double> x;
  std::vector<double> v;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream row(line);
    double a = 0.0;
    double b = 0.0;
    if (!(row >> a >> b)) throw InvalidArgument("malformed line in " + path.string() + ": " + line);
    x.push_back(a);
    v.push_back(b);
  }
  if (x.size() < 2) throw InvalidArgument(path.string() + " holds fewer than 2 samples");
  const double h = (x.back() - x.front()) / static_cast<double>(x.size() - 1);
  for (std::size_t i = 1; i < x.size(); ++i)
    if (std::abs(x[i] - x[i - 1] - h) > 1e-9 * std::max(1.0, std::abs(h)))
      throw InvalidArgument(path.string() + ": coordinates are not equally spaced");
  const Grid grid(static_cast<Index>(x.size()), h, x.front());
  return SampledField::from_real(grid, Eigen::Map<const RealArray>(v.data(), static_cast<Index>(v.size())));
}

void write_raw(const std::filesystem::path& path, const SampledField& field) {
  static_assert(std::endian::native == std::endian::little, "raw field files are little-endian");
  const Grid& g = field.grid();
  const bool real = field.is_real();
  auto out = open_out(path, std::ios::out | std::ios::binary);
  out << std::setprecision(17) << "MOLLDECONV-F64 1\n"
      << "dims " << g.dims() << '\n'
      << "samples " << g.samples(0) << ' ' << g.samples(1) << '\n'
      << "spacing " << g.spacing(0) << ' ' << g.spacing(1) << '\n'
      << "origin " << g.origin(0) << ' ' << g.origin(1) << '\n'
      << "values " << (real ? "real" : "complex") << '\n'
      << "end\n";
  if (real) {
    const RealArray v = field.real();
    out.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(double)));
  } else {
    out.write(reinterpret_cast<const char*>(field.values().data()),
              static_cast<std::streamsize>(field.values().size() * sizeof(Complex)));
  }
}

SampledField read_raw(const std::filesystem::path& path) {
  auto in = open_in(path, std::ios::in | std::ios::binary);
  std::string line;
  std::getline(in, line);
  if (line != "MOLLDECONV-F64 1") throw InvalidArgument(path.string() + " is not a raw field file");
  int dims = 0;
  std::array<Index, 2> n{1, 1};
  std::array<double, 2> h{1.0, 1.0};
  std::array<double, 2> o{0.0, 0.0};
  std::string kind;
  while (std::getline(in, line) && line != "end") {
    std::istringstream row(line);
    std::string key;
    row >> key;
    if (key == "dims") row >> dims;
    else if (key == "samples") row >> n[0] >> n[1];
    else if (key == "spacing") row >> h[0] >> h[1];
    else if (key == "origin") row >> o[0] >> o[1];
    else if (key == "values") row >> kind;
    else throw InvalidArgument(path.string() + ": unknown header line '" + line + "'");
    if (!row) throw InvalidArgument(path.string() + ": malformed header line '" + line + "'");
  }
  if (line != "end" || (dims != 1 && dims != 2) || (kind != "real" && kind != "complex"))
    throw InvalidArgument(path.string() + ": incomplete header");
  const Grid grid = dims == 1 ? Grid(n[0], h[0], o[0]) : Grid(n, h, o);
  ComplexArray values(grid.size());
  if (kind == "real") {
    RealArray v(grid.size());
    in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(double)));
    values = v.cast<Complex>();
  } else {
    in.read(reinterpret_cast<char*>(values.data()), static_cast<std::streamsize>(values.size() * sizeof(Complex)));
  }
  if (!in) throw InvalidArgument(path.string() + ": truncated data");
  return {grid, std::move(values)};
}

SampledField read_field(const std::filesystem::path& path) {
  return path.extension() == ".f64" ? read_raw(path) : read_text_1d(path);
}

// ---------------------------------------------------------------------------------------------
// PNG

std::vector<std::uint8_t> encode_png16(const SampledField& field) {
  const Grid& g = field.grid();
  const Index rows = g.dims() == 1 ? 1 : g.samples(0);
  const Index cols = g.dims() == 1 ? g.samples(0) : g.samples(1);
  const RealArray v = field.real();
  if (!v.allFinite()) throw InvalidArgument("cannot encode a field with non-finite values");
  const double lo = v.minCoeff();
  const double span = v.maxCoeff() - lo;

  // The simplified libpng API takes native-endian 16-bit samples.
  std::vector<std::uint16_t> native(static_cast<std::size_t>(rows * cols));
  for (Index k = 0; k < v.size(); ++k) {
    const double t = span > 0.0 ? (v[k] - lo) / span : 0.0;
    native[static_cast<std::size_t>(k)] = static_cast<std::uint16_t>(std::lround(t * 65535.0));
  }

  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(cols);
  image.height = static_cast<png_uint_32>(rows);
  image.format = PNG_FORMAT_LINEAR_Y;
  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&image, nullptr, &size, 0, native.data(), 0, nullptr))
    throw NumericalContractError(std::string("PNG encoding failed: ") + image.message);
  std::vector<std::uint8_t> out(size);
  if (!png_image_write_to_memory(&image, out.data(), &size, 0, native.data(), 0, nullptr))
    throw NumericalContractError(std::string("PNG encoding failed: ") + image.message);
  out.resize(size);
  return out;
}

void write_png16(const std::filesystem::path& path, const SampledField& field) {
  const auto bytes = encode_png16(field);
  auto out = open_out(path, std::ios::out | std::ios::binary);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

std::vector<std::uint16_t> decode_png16(const std::vector<std::uint8_t>& png, Index& rows, Index& cols) {
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&image, png.data(), png.size()))
    throw InvalidArgument(std::string("PNG decoding failed: ") + image.message);
  image.format = PNG_FORMAT_LINEAR_Y;
  std::vector<std::uint16_t> out(PNG_IMAGE_SIZE(image) / 2);
  if (!png_image_finish_read(&image, nullptr, out.data(), 0, nullptr))
    throw InvalidArgument(std::string("PNG decoding failed: ") + image.message);
  rows = image.height;
  cols = image.width;
  return out;
}

std::string base64_encode(const std::vector<std::uint8_t>& bytes) {
  static constexpr char table[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
  std::string out;
  out.reserve((bytes.size() + 2) / 3 * 4);
  std::size_t i = 0;
  for (; i + 2 < bytes.size(); i += 3) {
    const std::uint32_t n = (bytes[i] << 16) | (bytes[i + 1] << 8) | bytes[i + 2];
    out += table[(n >> 18) & 63];
    out += table[(n >> 12) & 63];
    out += table[(n >> 6) & 63];
    out += table[n & 63];
  }
  if (i < bytes.size()) {
    const std::uint32_t n = (bytes[i] << 16) | (i + 1 < bytes.size() ? bytes[i + 1] << 8 : 0);
    out += table[(n >> 18) & 63];
    out += table[(n >> 12) & 63];
    out += i + 1 < bytes.size() ? table[(n >> 6) & 63] : '=';
    out += '=';
  }
  return out;
}

// ---------------------------------------------------------------------------------------------
// JSON, hashing, manifests

std::string config_hash(const nlohmann::json& j) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : j.dump()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream out;
  out << std::hex << std::setw(16) << std::setfill('0') << h;
  return out.str();
}

void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
  auto out = open_out(path);
  out << j.dump(2) << '\n';
}

nlohmann::json read_json(const std::filesystem::path& path) {
  auto in = open_in(path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw InvalidArgument(path.string() + ": " + e.what());
  }
}

nlohmann::json component_versions() {
  return {{"molldeconv", "1.0.0"},
          {"fftw", std::string(fftw_version)},
          {"libpng", PNG_LIBPNG_VER_STRING},
          {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                        std::to_string(EIGEN_MINOR_VERSION)},
          {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                std::to_string(NLOHMANN_JSON_VERSION_PATCH)}};
}

nlohmann::json to_json(const RunManifest& m) {
  return {{"command", m.command},   {"config_hash", m.config_hash}, {"seeds", m.seeds},
          {"versions", component_versions()}, {"outputs", m.outputs}, {"summary", m.summary},
          {"timings_ms", m.timings_ms}};
}

}  // namespace molldeconv
