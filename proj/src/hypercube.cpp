#include "hsi/hypercube.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <map>
#include <string>

#include "hsi/error.hpp"
#include "hsi/io.hpp"

namespace hsi {

namespace fs = std::filesystem;

bool strictly_increasing(std::span<const double> v) {
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (!(v[i] > v[i - 1])) return false;
  }
  return true;
}

Spectrum::Spectrum(std::vector<double> values, std::vector<double> wavelengths)
    : values_(std::move(values)), wavelengths_(std::move(wavelengths)) {
  if (values_.size() != wavelengths_.size()) {
    throw InvalidArgument("spectrum: " + std::to_string(values_.size()) + " values but " +
                          std::to_string(wavelengths_.size()) + " wavelengths");
  }
  if (!strictly_increasing(wavelengths_)) {
    throw InvalidArgument("spectrum: wavelengths not strictly increasing");
  }
}

Spectrum Spectrum::indexed(std::vector<double> values) {
  std::vector<double> axis(values.size());
  for (std::size_t i = 0; i < axis.size(); ++i) axis[i] = static_cast<double>(i);
  return Spectrum(std::move(values), std::move(axis));
}

Spectrum Spectrum::with_values(std::vector<double> values) const {
  return Spectrum(std::move(values), wavelengths_);
}

HyperCube::HyperCube(std::size_t width, std::size_t height, std::vector<double> wavelengths,
                     std::vector<double> values, Domain domain)
    : width_(width),
      height_(height),
      wavelengths_(std::move(wavelengths)),
      values_(std::move(values)),
      domain_(domain) {
  if (width_ == 0 || height_ == 0 || wavelengths_.empty()) {
    throw InvalidArgument("cube: width, height and bands must all be at least 1");
  }
  if (values_.size() != width_ * height_ * wavelengths_.size()) {
    throw InvalidArgument("cube: value count " + std::to_string(values_.size()) +
                          " != width*height*bands");
  }
  if (!strictly_increasing(wavelengths_)) {
    throw InvalidArgument("cube: wavelengths not strictly increasing");
  }
}

void HyperCube::gather(std::size_t p, std::span<double> out) const {
  const std::size_t n = pixels();
  for (std::size_t b = 0; b < out.size(); ++b) out[b] = values_[b * n + p];
}

// ---------------------------------------------------------------------------
// ENVI header/payload

namespace {

struct Paths {
  fs::path header;
  fs::path payload;
};

Paths pair_paths(const fs::path& path) {
  fs::path stem = path;
  const auto ext = path.extension().string();
  if (ext == ".hdr" || ext == ".raw") stem.replace_extension();
  auto header = stem;
  header += ".hdr";
  auto payload = stem;
  payload += ".raw";
  return {header, payload};
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

// key -> raw value text; braces may span lines.
std::map<std::string, std::string> parse_header(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::size_t pos = 0;
  bool first_line = true;
  while (pos < text.size()) {
    auto eol = text.find('\n', pos);
    if (eol == std::string::npos) eol = text.size();
    std::string line = text.substr(pos, eol - pos);
    pos = eol + 1;
    const auto trimmed = std::string(io::trim(line));
    if (first_line) {
      first_line = false;
      if (trimmed == "ENVI") continue;
    }
    if (trimmed.empty() || trimmed.front() == ';') continue;
    const auto eq = trimmed.find('=');
    if (eq == std::string::npos) throw FormatError("header line without '=': " + trimmed);
    std::string key = lower(std::string(io::trim(std::string_view(trimmed).substr(0, eq))));
    std::string value(io::trim(std::string_view(trimmed).substr(eq + 1)));
    if (!value.empty() && value.front() == '{') {
      while (value.find('}') == std::string::npos) {
        if (pos >= text.size()) throw FormatError("unterminated '{' for header key " + key);
        auto next = text.find('\n', pos);
        if (next == std::string::npos) next = text.size();
        value += ' ';
        value += text.substr(pos, next - pos);
        pos = next + 1;
      }
      const auto close = value.find('}');
      value = std::string(io::trim(std::string_view(value).substr(1, close - 1)));
    }
    kv[key] = value;
  }
  return kv;
}

std::size_t header_count(const std::map<std::string, std::string>& kv, const std::string& key) {
  const auto it = kv.find(key);
  if (it == kv.end()) throw FormatError("header missing '" + key + "'");
  long long v = 0;
  try {
    v = io::parse_int(it->second);
  } catch (const FormatError&) {
    throw FormatError("header '" + key + "' is not an integer");
  }
  if (v < 1) throw FormatError("header '" + key + "' must be positive");
  return static_cast<std::size_t>(v);
}

template <typename T>
T from_le(const unsigned char* p) {
  T v;
  std::memcpy(&v, p, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) {
    auto* b = reinterpret_cast<unsigned char*>(&v);
    std::reverse(b, b + sizeof(T));
  }
  return v;
}

template <typename T>
void to_le(T v, unsigned char* p) {
  std::memcpy(p, &v, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(p, p + sizeof(T));
}

int envi_type(Encoding e) {
  switch (e) {
    case Encoding::UInt16: return 12;
    case Encoding::Float32: return 4;
    case Encoding::Float64: return 5;
    case Encoding::Auto: break;
  }
  return 0;
}

std::size_t type_size(int t) { return t == 12 ? 2 : t == 4 ? 4 : 8; }

Encoding choose_encoding(const HyperCube& cube) {
  const auto& v = cube.values();
  if (cube.domain() == Domain::RadianceDN &&
      std::all_of(v.begin(), v.end(), [](double x) {
        return x >= 0.0 && x <= 65535.0 && std::floor(x) == x;
      })) {
    return Encoding::UInt16;
  }
  if (std::all_of(v.begin(), v.end(),
                  [](double x) { return static_cast<double>(static_cast<float>(x)) == x ||
                                        std::isnan(x); })) {
    return Encoding::Float32;
  }
  return Encoding::Float64;
}

}  // namespace

HyperCube load_cube(const fs::path& path) {
  const auto [header_path, payload_path] = pair_paths(path);
  const auto kv = parse_header(io::read_file(header_path));

  const std::size_t width = header_count(kv, "samples");
  const std::size_t height = header_count(kv, "lines");
  const std::size_t bands = header_count(kv, "bands");
  const int dtype = static_cast<int>(header_count(kv, "data type"));
  if (dtype != 4 && dtype != 5 && dtype != 12) {
    throw FormatError("unsupported data type " + std::to_string(dtype));
  }
  if (auto it = kv.find("interleave"); it != kv.end() && lower(it->second) != "bsq") {
    throw FormatError("unsupported interleave '" + it->second + "' (only bsq)");
  }
  if (auto it = kv.find("byte order"); it != kv.end() && io::trim(it->second) != "0") {
    throw FormatError("unsupported byte order (only little-endian 0)");
  }
  const auto wl_it = kv.find("wavelength");
  if (wl_it == kv.end()) throw FormatError("header missing 'wavelength'");
  std::vector<double> wavelengths;
  for (const auto& cell : io::split(wl_it->second, ',')) {
    if (cell.empty()) continue;
    wavelengths.push_back(io::parse_double(cell));
  }
  if (wavelengths.size() != bands) {
    throw FormatError("header lists " + std::to_string(wavelengths.size()) +
                      " wavelengths for " + std::to_string(bands) + " bands");
  }
  if (!strictly_increasing(wavelengths)) throw FormatError("wavelengths not strictly increasing");

  Domain domain = dtype == 12 ? Domain::RadianceDN : Domain::Reflectance;
  if (auto it = kv.find("domain"); it != kv.end()) {
    const auto d = lower(it->second);
    if (d == "radiance_dn") domain = Domain::RadianceDN;
    else if (d == "reflectance") domain = Domain::Reflectance;
    else throw FormatError("unknown domain '" + it->second + "'");
  }

  const std::string payload = io::read_file(payload_path);
  const std::size_t count = width * height * bands;
  const std::size_t expected = count * type_size(dtype);
  if (payload.size() != expected) {
    throw FormatError("payload is " + std::to_string(payload.size()) + " bytes, header implies " +
                      std::to_string(expected));
  }
  std::vector<double> values(count);
  const auto* bytes = reinterpret_cast<const unsigned char*>(payload.data());
  for (std::size_t i = 0; i < count; ++i) {
    switch (dtype) {
      case 12: values[i] = from_le<std::uint16_t>(bytes + 2 * i); break;
      case 4: values[i] = from_le<float>(bytes + 4 * i); break;
      default: values[i] = from_le<double>(bytes + 8 * i); break;
    }
  }
  return HyperCube(width, height, std::move(wavelengths), std::move(values), domain);
}

void save_cube(const HyperCube& cube, const fs::path& path, Encoding encoding) {
  if (encoding == Encoding::Auto) encoding = choose_encoding(cube);
  const int dtype = envi_type(encoding);
  const auto [header_path, payload_path] = pair_paths(path);

  std::string header = "ENVI\n";
  header += "samples = " + std::to_string(cube.width()) + "\n";
  header += "lines = " + std::to_string(cube.height()) + "\n";
  header += "bands = " + std::to_string(cube.bands()) + "\n";
  header += "header offset = 0\n";
  header += "file type = ENVI Standard\n";
  header += "data type = " + std::to_string(dtype) + "\n";
  header += "interleave = bsq\n";
  header += "byte order = 0\n";
  header += std::string("domain = ") +
            (cube.domain() == Domain::RadianceDN ? "radiance_dn" : "reflectance") + "\n";
  header += "wavelength units = Nanometers\n";
  header += "wavelength = {";
  for (std::size_t b = 0; b < cube.bands(); ++b) {
    header += (b ? ", " : " ") + io::format_double(cube.wavelengths()[b]);
  }
  header += " }\n";

  const auto& values = cube.values();
  std::string payload(values.size() * type_size(dtype), '\0');
  auto* bytes = reinterpret_cast<unsigned char*>(payload.data());
  for (std::size_t i = 0; i < values.size(); ++i) {
    switch (dtype) {
      case 12: {
        const double clamped = std::clamp(std::round(values[i]), 0.0, 65535.0);
        to_le(static_cast<std::uint16_t>(clamped), bytes + 2 * i);
        break;
      }
      case 4: to_le(static_cast<float>(values[i]), bytes + 4 * i); break;
      default: to_le(values[i], bytes + 8 * i); break;
    }
  }
  io::write_file_atomic(payload_path, payload);
  io::write_file_atomic(header_path, header);
}

// ---------------------------------------------------------------------------
// Accessors

std::size_t nearest_band_index(std::span<const double> wavelengths, double target_nm) {
  if (wavelengths.empty() || !(target_nm >= wavelengths.front()) ||
      !(target_nm <= wavelengths.back())) {
    throw InvalidArgument("target wavelength " + io::format_double(target_nm) +
                          " nm outside the cube's span");
  }
  // First element >= target; the answer is it or its predecessor.
  const auto it = std::lower_bound(wavelengths.begin(), wavelengths.end(), target_nm);
  std::size_t hi = static_cast<std::size_t>(it - wavelengths.begin());
  if (hi == 0) return 0;
  const std::size_t lo = hi - 1;
  const double d_lo = target_nm - wavelengths[lo];
  const double d_hi = wavelengths[hi] - target_nm;
  return d_hi < d_lo ? hi : lo;
}

BandImage band_at(const HyperCube& cube, double target_nm) {
  const std::size_t b = nearest_band_index(cube.wavelengths(), target_nm);
  const auto plane = cube.band(b);
  return BandImage{cube.width(), cube.height(), cube.wavelengths()[b], b,
                   std::vector<double>(plane.begin(), plane.end())};
}

HyperCube slice_bands(const HyperCube& cube, std::size_t drop_leading) {
  if (drop_leading >= cube.bands()) {
    throw InvalidArgument("cannot drop " + std::to_string(drop_leading) + " of " +
                          std::to_string(cube.bands()) + " bands");
  }
  std::vector<double> wl(cube.wavelengths().begin() + static_cast<std::ptrdiff_t>(drop_leading),
                         cube.wavelengths().end());
  // BSQ: the retained bands form one contiguous tail of the payload.
  const auto offset = static_cast<std::ptrdiff_t>(drop_leading * cube.pixels());
  std::vector<double> values(cube.values().begin() + offset, cube.values().end());
  return HyperCube(cube.width(), cube.height(), std::move(wl), std::move(values), cube.domain());
}

Spectrum pixel_spectrum(const HyperCube& cube, std::size_t x, std::size_t y) {
  if (x >= cube.width() || y >= cube.height()) {
    throw InvalidArgument("pixel (" + std::to_string(x) + ", " + std::to_string(y) +
                          ") outside " + std::to_string(cube.width()) + "x" +
                          std::to_string(cube.height()));
  }
  std::vector<double> v(cube.bands());
  cube.gather(y * cube.width() + x, v);
  return Spectrum(std::move(v), cube.wavelengths());
}

}  // namespace hsi
