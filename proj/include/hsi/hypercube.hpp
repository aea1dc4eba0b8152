#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

namespace hsi {

enum class Domain { RadianceDN, Reflectance };

/// One pixel's per-band values bound to a wavelength axis (nm).
///
/// The constructor enforces equal lengths and a strictly increasing axis.
class Spectrum {
 public:
  Spectrum() = default;
  Spectrum(std::vector<double> values, std::vector<double> wavelengths);

  /// Spectrum on the index axis 0, 1, ..., n-1. Handy when only the shape matters.
  static Spectrum indexed(std::vector<double> values);

  std::size_t size() const { return values_.size(); }
  const std::vector<double>& values() const { return values_; }
  const std::vector<double>& wavelengths() const { return wavelengths_; }
  double operator[](std::size_t i) const { return values_[i]; }

  /// Same axis, new values (length must match).
  Spectrum with_values(std::vector<double> values) const;

  friend bool operator==(const Spectrum&, const Spectrum&) = default;

 private:
  std::vector<double> values_;
  std::vector<double> wavelengths_;
};

struct BandImage {
  std::size_t width = 0;
  std::size_t height = 0;
  double wavelength = 0.0;
  std::size_t band_index = 0;
  std::vector<double> values;  // row-major, width * height

  double at(std::size_t x, std::size_t y) const { return values[y * width + x]; }
};

/// Band-sequential spectral cube. Immutable once built.
class HyperCube {
 public:
  HyperCube(std::size_t width, std::size_t height, std::vector<double> wavelengths,
            std::vector<double> values, Domain domain);

  std::size_t width() const { return width_; }
  std::size_t height() const { return height_; }
  std::size_t bands() const { return wavelengths_.size(); }
  std::size_t pixels() const { return width_ * height_; }
  Domain domain() const { return domain_; }
  const std::vector<double>& wavelengths() const { return wavelengths_; }
  const std::vector<double>& values() const { return values_; }

  double at(std::size_t x, std::size_t y, std::size_t band) const {
    return values_[band * pixels() + y * width_ + x];
  }
  /// Plane of one band, row-major.
  std::span<const double> band(std::size_t b) const {
    return {values_.data() + b * pixels(), pixels()};
  }

  /// Gathers the spectrum of pixel number `p` (row-major) into `out`.
  void gather(std::size_t p, std::span<double> out) const;

  friend bool operator==(const HyperCube&, const HyperCube&) = default;

 private:
  std::size_t width_;
  std::size_t height_;
  std::vector<double> wavelengths_;
  std::vector<double> values_;
  Domain domain_;
};

/// On-disk scalar encoding. Auto picks the narrowest lossless one:
/// uint16 for integral radiance, float32 when every value survives a float
/// round trip, float64 otherwise.
enum class Encoding { Auto, UInt16, Float32, Float64 };

/// Reads an ENVI pair. `path` may name the .hdr, the .raw or the common stem.
HyperCube load_cube(const std::filesystem::path& path);

/// Writes `<stem>.hdr` and `<stem>.raw`. Explicit Float32/UInt16 may round.
void save_cube(const HyperCube& cube, const std::filesystem::path& path,
               Encoding encoding = Encoding::Auto);

/// Band nearest to `target_nm`; ties go to the lower wavelength.
BandImage band_at(const HyperCube& cube, double target_nm);
std::size_t nearest_band_index(std::span<const double> wavelengths, double target_nm);

HyperCube slice_bands(const HyperCube& cube, std::size_t drop_leading);

Spectrum pixel_spectrum(const HyperCube& cube, std::size_t x, std::size_t y);

/// Strictly increasing check shared by every type bound to an axis.
bool strictly_increasing(std::span<const double> v);

}  // namespace hsi
