#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "hsi/hypercube.hpp"
#include "hsi/segment.hpp"

namespace hsi {

/// White (W) and dark (B) references for the empirical line method.
struct ReferencePair {
  Spectrum white;
  Spectrum dark;
};

/// Per-band mean over the masked pixels.
Spectrum reference_from_region(const HyperCube& cube, const Mask& mask);

/// Axis-aligned rectangle [x0, x1) x [y0, y1) as a mask over `cube`.
Mask rect_mask(std::size_t width, std::size_t height, std::size_t x0, std::size_t y0,
               std::size_t x1, std::size_t y1);

/// R = (Rr - B) / (W - B) per pixel and band. No clamping.
///
/// Throws InvalidArgument naming the first band where W <= B, or when the
/// references do not share the cube's wavelength axis.
HyperCube elm_reflectance(const HyperCube& raw, const ReferencePair& refs);

/// Drops the same leading bands from a reference as slice_bands does from a cube.
Spectrum slice_spectrum(const Spectrum& s, std::size_t drop_leading);

/// Two-column CSV: wavelength_nm,value
Spectrum load_spectrum_csv(const std::filesystem::path& path);
void save_spectrum_csv(const Spectrum& s, const std::filesystem::path& path,
                       const std::string& value_column = "value");

}  // namespace hsi
