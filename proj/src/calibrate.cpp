#include "hsi/calibrate.hpp"

#include "hsi/error.hpp"
#include "hsi/io.hpp"

namespace hsi {

Mask rect_mask(std::size_t width, std::size_t height, std::size_t x0, std::size_t y0,
               std::size_t x1, std::size_t y1) {
  if (x0 >= x1 || y0 >= y1 || x1 > width || y1 > height) {
    throw InvalidArgument("rectangle outside the frame or empty");
  }
  Mask m(width, height);
  for (std::size_t y = y0; y < y1; ++y) {
    for (std::size_t x = x0; x < x1; ++x) m.set(x, y);
  }
  return m;
}

Spectrum reference_from_region(const HyperCube& cube, const Mask& mask) {
  if (mask.width != cube.width() || mask.height != cube.height()) {
    throw InvalidArgument("reference mask dimensions differ from the cube");
  }
  const std::size_t n = mask.count();
  if (n == 0) throw InvalidArgument("reference mask is empty");
  std::vector<double> mean(cube.bands(), 0.0);
  for (std::size_t b = 0; b < cube.bands(); ++b) {
    const auto plane = cube.band(b);
    double sum = 0.0;
    for (std::size_t p = 0; p < plane.size(); ++p) {
      if (mask.bits[p]) sum += plane[p];
    }
    mean[b] = sum / static_cast<double>(n);
  }
  return Spectrum(std::move(mean), cube.wavelengths());
}

HyperCube elm_reflectance(const HyperCube& raw, const ReferencePair& refs) {
  if (raw.domain() != Domain::RadianceDN) {
    throw InvalidArgument("elm_reflectance expects a radiance cube");
  }
  if (refs.white.wavelengths() != raw.wavelengths() ||
      refs.dark.wavelengths() != raw.wavelengths()) {
    throw InvalidArgument("reference spectra do not share the cube's wavelength axis");
  }
  for (std::size_t b = 0; b < raw.bands(); ++b) {
    if (!(refs.white[b] > refs.dark[b])) {
      throw InvalidArgument("degenerate reference at band " + std::to_string(b) + " (" +
                            io::format_double(raw.wavelengths()[b]) +
                            " nm): white <= dark");
    }
  }
  const std::size_t n = raw.pixels();
  std::vector<double> out(raw.values().size());
  for (std::size_t b = 0; b < raw.bands(); ++b) {
    const double dark = refs.dark[b];
    const double span = refs.white[b] - dark;
    const auto plane = raw.band(b);
    double* dst = out.data() + b * n;
    for (std::size_t p = 0; p < n; ++p) dst[p] = (plane[p] - dark) / span;
  }
  return HyperCube(raw.width(), raw.height(), raw.wavelengths(), std::move(out),
                   Domain::Reflectance);
}

Spectrum slice_spectrum(const Spectrum& s, std::size_t drop_leading) {
  if (drop_leading >= s.size()) throw InvalidArgument("cannot drop every band of a spectrum");
  const auto off = static_cast<std::ptrdiff_t>(drop_leading);
  return Spectrum(std::vector<double>(s.values().begin() + off, s.values().end()),
                  std::vector<double>(s.wavelengths().begin() + off, s.wavelengths().end()));
}

Spectrum load_spectrum_csv(const std::filesystem::path& path) {
  const auto table = io::read_csv(path);
  if (table.header.size() != 2) {
    throw FormatError(path.string() + ": expected two columns (wavelength_nm, value)");
  }
  std::vector<double> wl;
  std::vector<double> v;
  for (const auto& row : table.rows) {
    wl.push_back(io::parse_double(row[0]));
    v.push_back(io::parse_double(row[1]));
  }
  if (!strictly_increasing(wl)) throw FormatError(path.string() + ": wavelengths not increasing");
  return Spectrum(std::move(v), std::move(wl));
}

void save_spectrum_csv(const Spectrum& s, const std::filesystem::path& path,
                       const std::string& value_column) {
  io::CsvWriter csv({"wavelength_nm", value_column});
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double row[2] = {s.wavelengths()[i], s[i]};
    csv.row(row);
  }
  csv.save(path);
}

}  // namespace hsi
