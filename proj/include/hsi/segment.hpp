#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "hsi/hypercube.hpp"

namespace hsi {

struct Mask {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint8_t> bits;  // row-major, 0 or 1

  Mask() = default;
  Mask(std::size_t w, std::size_t h, bool fill = false)
      : width(w), height(h), bits(w * h, fill ? 1 : 0) {}

  bool at(std::size_t x, std::size_t y) const { return bits[y * width + x] != 0; }
  void set(std::size_t x, std::size_t y, bool v = true) { bits[y * width + x] = v ? 1 : 0; }
  std::size_t count() const;

  friend bool operator==(const Mask&, const Mask&) = default;
};

/// Region id per pixel: 0 is background, foreground regions are numbered
/// 1..count in first-encounter raster order.
struct Regions {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint32_t> ids;
  std::uint32_t count = 0;
};

/// R, G, B planes taken at 698, 590 and 450 nm, each min-max scaled to [0, 1].
std::array<BandImage, 3> false_color(const HyperCube& cube);

inline constexpr int kOtsuBins = 256;

/// Otsu threshold over a 256-bin histogram spanning the image's value range.
/// Pixels strictly above the returned value form the bright class.
double otsu_threshold(const BandImage& image);

/// Between-class over total variance at the Otsu split (0..1).
double otsu_separability(const BandImage& image);

/// 4-connected labeling.
Regions connected_components(const Mask& mask);

/// Largest 4-connected sample region with interior holes filled. When the two
/// Otsu classes of the false-colour luminance are not clearly bimodal
/// (Ashman's D on medians and MADs < 3) the sample is taken to fill the frame.
Mask extract_roi(const HyperCube& cube);

/// Background regions that do not touch the border become foreground.
Mask fill_holes(const Mask& mask);

void save_pbm(const Mask& mask, const std::filesystem::path& path);
Mask load_pbm(const std::filesystem::path& path);
/// x,y rows for every set pixel.
void save_mask_csv(const Mask& mask, const std::filesystem::path& path);

}  // namespace hsi
