#include "hsi/segment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <string>

#include "hsi/error.hpp"
#include "hsi/io.hpp"

namespace hsi {

std::size_t Mask::count() const {
  return static_cast<std::size_t>(std::count(bits.begin(), bits.end(), std::uint8_t{1}));
}

// ---------------------------------------------------------------------------
// False colour

namespace {

BandImage normalized(BandImage img) {
  const auto [lo, hi] = std::minmax_element(img.values.begin(), img.values.end());
  const double min = *lo;
  const double range = *hi - *lo;
  for (double& v : img.values) v = range > 0.0 ? (v - min) / range : 0.0;
  return img;
}

}  // namespace

std::array<BandImage, 3> false_color(const HyperCube& cube) {
  const auto& wl = cube.wavelengths();
  if (wl.front() > 450.0 || wl.back() < 698.0) {
    throw InvalidArgument("false colour needs 450-698 nm; cube spans " +
                          io::format_double(wl.front()) + "-" + io::format_double(wl.back()) +
                          " nm");
  }
  return {normalized(band_at(cube, 698.0)), normalized(band_at(cube, 590.0)),
          normalized(band_at(cube, 450.0))};
}

// ---------------------------------------------------------------------------
// Otsu

namespace {

struct OtsuResult {
  double threshold;
  double separability;
};

OtsuResult otsu(const BandImage& image) {
  if (image.values.empty()) throw InvalidArgument("otsu: empty image");
  const auto [lo_it, hi_it] = std::minmax_element(image.values.begin(), image.values.end());
  const double lo = *lo_it;
  const double range = *hi_it - lo;
  if (!(range > 0.0)) throw InvalidArgument("otsu: image is constant");

  auto edge = [&](int t) { return lo + range * static_cast<double>(t + 1) / kOtsuBins; };

  std::array<double, kOtsuBins> count{};
  std::array<double, kOtsuBins> sum{};
  double total_sq = 0.0;
  for (double v : image.values) {
    int bin = std::clamp(static_cast<int>((v - lo) / range * kOtsuBins), 0, kOtsuBins - 1);
    // Snap so that bin <= t exactly when v <= edge(t).
    while (bin > 0 && v <= edge(bin - 1)) --bin;
    while (bin < kOtsuBins - 1 && v > edge(bin)) ++bin;
    count[bin] += 1.0;
    sum[bin] += v;
    total_sq += v * v;
  }
  const double n = static_cast<double>(image.values.size());
  const double total_sum = std::accumulate(sum.begin(), sum.end(), 0.0);
  const double mean = total_sum / n;
  const double total_var = total_sq / n - mean * mean;

  double best = -1.0;
  int best_t = 0;
  int plateau_end = 0;
  double c0 = 0.0;
  double s0 = 0.0;
  for (int t = 0; t < kOtsuBins - 1; ++t) {
    c0 += count[t];
    s0 += sum[t];
    const double c1 = n - c0;
    if (c0 == 0.0 || c1 == 0.0) continue;
    const double diff = s0 / c0 - (total_sum - s0) / c1;
    const double between = (c0 / n) * (c1 / n) * diff * diff;
    if (between > best) {
      best = between;
      best_t = plateau_end = t;
    } else if (between == best && plateau_end == t - 1) {
      plateau_end = t;
    }
  }
  // Empty bins after the best cut give the same score; take the middle of
  // that run so a clean gap is split halfway.
  best_t += (plateau_end - best_t) / 2;
  const double sep = total_var > 0.0 ? std::clamp(best / total_var, 0.0, 1.0) : 0.0;
  return {edge(best_t), sep};
}

}  // namespace

double otsu_threshold(const BandImage& image) { return otsu(image).threshold; }
double otsu_separability(const BandImage& image) { return otsu(image).separability; }

// ---------------------------------------------------------------------------
// Connectivity

Regions connected_components(const Mask& mask) {
  Regions r{mask.width, mask.height, std::vector<std::uint32_t>(mask.bits.size(), 0), 0};
  std::vector<std::size_t> stack;
  for (std::size_t start = 0; start < mask.bits.size(); ++start) {
    if (!mask.bits[start] || r.ids[start]) continue;
    const std::uint32_t id = ++r.count;
    r.ids[start] = id;
    stack.push_back(start);
    while (!stack.empty()) {
      const std::size_t p = stack.back();
      stack.pop_back();
      const std::size_t x = p % mask.width;
      const std::size_t y = p / mask.width;
      auto visit = [&](std::size_t q) {
        if (mask.bits[q] && !r.ids[q]) {
          r.ids[q] = id;
          stack.push_back(q);
        }
      };
      if (x > 0) visit(p - 1);
      if (x + 1 < mask.width) visit(p + 1);
      if (y > 0) visit(p - mask.width);
      if (y + 1 < mask.height) visit(p + mask.width);
    }
  }
  return r;
}

namespace {

Mask invert(const Mask& m) {
  Mask out = m;
  for (auto& b : out.bits) b = b ? 0 : 1;
  return out;
}

std::vector<bool> touches_border(const Regions& r) {
  std::vector<bool> touch(r.count + 1, false);
  for (std::size_t x = 0; x < r.width; ++x) {
    touch[r.ids[x]] = true;
    touch[r.ids[(r.height - 1) * r.width + x]] = true;
  }
  for (std::size_t y = 0; y < r.height; ++y) {
    touch[r.ids[y * r.width]] = true;
    touch[r.ids[y * r.width + r.width - 1]] = true;
  }
  return touch;
}

// Largest region id (lowest id on ties), 0 when there are none.
std::uint32_t largest_region(const Regions& r) {
  std::vector<std::size_t> sizes(r.count + 1, 0);
  for (auto id : r.ids) ++sizes[id];
  std::uint32_t best = 0;
  for (std::uint32_t id = 1; id <= r.count; ++id) {
    if (best == 0 || sizes[id] > sizes[best]) best = id;
  }
  return best;
}

Mask keep_region(const Regions& r, std::uint32_t id) {
  Mask m(r.width, r.height);
  for (std::size_t p = 0; p < r.ids.size(); ++p) m.bits[p] = (id != 0 && r.ids[p] == id) ? 1 : 0;
  return m;
}

// Largest component of `side` lies away from the frame border.
bool compact(const Mask& side) {
  const auto r = connected_components(side);
  const auto id = largest_region(r);
  return id != 0 && !touches_border(r)[id];
}

// Ashman's D between the two Otsu classes with medians and scaled MADs in
// place of means and standard deviations, so a small saturated target does
// not dominate a class. Below kMinBimodality the luminance is treated as one
// population, i.e. the sample fills the frame.
constexpr double kMinBimodality = 3.0;

double median_of(std::vector<double>& v) {
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  double m = *mid;
  if (v.size() % 2 == 0) m = 0.5 * (m + *std::max_element(v.begin(), mid));
  return m;
}

double robust_bimodality(std::span<const double> v, double threshold) {
  std::vector<double> cls[2];
  for (double x : v) cls[x > threshold ? 1 : 0].push_back(x);
  if (cls[0].empty() || cls[1].empty()) return 0.0;
  double med[2];
  double mad[2];
  for (int k = 0; k < 2; ++k) {
    med[k] = median_of(cls[k]);
    for (double& x : cls[k]) x = std::abs(x - med[k]);
    mad[k] = 1.4826 * median_of(cls[k]);
  }
  const double var = mad[0] * mad[0] + mad[1] * mad[1];
  if (var == 0.0) return std::numeric_limits<double>::infinity();
  return std::sqrt(2.0) * std::abs(med[1] - med[0]) / std::sqrt(var);
}

}  // namespace

Mask fill_holes(const Mask& mask) {
  const auto bg = connected_components(invert(mask));
  const auto touch = touches_border(bg);
  Mask out = mask;
  for (std::size_t p = 0; p < out.bits.size(); ++p) {
    if (!out.bits[p] && !touch[bg.ids[p]]) out.bits[p] = 1;
  }
  return out;
}

Mask extract_roi(const HyperCube& cube) {
  const auto channels = false_color(cube);
  BandImage lum{cube.width(), cube.height(), 0.0, 0, std::vector<double>(cube.pixels())};
  for (std::size_t p = 0; p < lum.values.size(); ++p) {
    lum.values[p] =
        (channels[0].values[p] + channels[1].values[p] + channels[2].values[p]) / 3.0;
  }
  const double threshold = otsu(lum).threshold;
  if (robust_bimodality(lum.values, threshold) < kMinBimodality) {
    return Mask(cube.width(), cube.height(), true);
  }

  Mask bright(cube.width(), cube.height());
  for (std::size_t p = 0; p < lum.values.size(); ++p) {
    bright.bits[p] = lum.values[p] > threshold ? 1 : 0;
  }
  const Mask dark = invert(bright);
  const bool bright_compact = compact(bright);
  const bool dark_compact = compact(dark);
  const Mask& fg = (dark_compact && !bright_compact) ? dark : bright;

  const auto regions = connected_components(fg);
  return fill_holes(keep_region(regions, largest_region(regions)));
}

// ---------------------------------------------------------------------------
// Export

void save_pbm(const Mask& mask, const std::filesystem::path& path) {
  std::string out = "P4\n" + std::to_string(mask.width) + " " + std::to_string(mask.height) + "\n";
  const std::size_t row_bytes = (mask.width + 7) / 8;
  for (std::size_t y = 0; y < mask.height; ++y) {
    std::string row(row_bytes, '\0');
    for (std::size_t x = 0; x < mask.width; ++x) {
      if (mask.at(x, y)) row[x / 8] = static_cast<char>(row[x / 8] | (0x80 >> (x % 8)));
    }
    out += row;
  }
  io::write_file_atomic(path, out);
}

Mask load_pbm(const std::filesystem::path& path) {
  const std::string data = io::read_file(path);
  std::size_t pos = 0;
  auto token = [&]() {
    while (pos < data.size()) {
      if (std::isspace(static_cast<unsigned char>(data[pos]))) {
        ++pos;
      } else if (data[pos] == '#') {
        while (pos < data.size() && data[pos] != '\n') ++pos;
      } else {
        break;
      }
    }
    const std::size_t start = pos;
    while (pos < data.size() && !std::isspace(static_cast<unsigned char>(data[pos]))) ++pos;
    return data.substr(start, pos - start);
  };
  const std::string magic = token();
  if (magic != "P1" && magic != "P4") throw FormatError(path.string() + ": not a PBM");
  const auto w = static_cast<std::size_t>(io::parse_int(token()));
  const auto h = static_cast<std::size_t>(io::parse_int(token()));
  Mask m(w, h);
  if (magic == "P4") {
    ++pos;  // single whitespace after height
    const std::size_t row_bytes = (w + 7) / 8;
    if (data.size() < pos + row_bytes * h) throw FormatError(path.string() + ": truncated PBM");
    for (std::size_t y = 0; y < h; ++y) {
      for (std::size_t x = 0; x < w; ++x) {
        const auto byte = static_cast<unsigned char>(data[pos + y * row_bytes + x / 8]);
        m.set(x, y, (byte & (0x80 >> (x % 8))) != 0);
      }
    }
  } else {
    for (std::size_t p = 0; p < w * h; ++p) {
      while (pos < data.size() && data[pos] != '0' && data[pos] != '1') ++pos;
      if (pos >= data.size()) throw FormatError(path.string() + ": truncated PBM");
      m.bits[p] = data[pos++] == '1' ? 1 : 0;
    }
  }
  return m;
}

void save_mask_csv(const Mask& mask, const std::filesystem::path& path) {
  io::CsvWriter csv({"x", "y"});
  for (std::size_t y = 0; y < mask.height; ++y) {
    for (std::size_t x = 0; x < mask.width; ++x) {
      if (mask.at(x, y)) csv.row({std::to_string(x), std::to_string(y)});
    }
  }
  csv.save(path);
}

}  // namespace hsi
