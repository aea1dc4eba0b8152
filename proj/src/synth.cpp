#include "hsi/synth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>

#include "hsi/error.hpp"
#include "hsi/io.hpp"

namespace hsi {

std::uint64_t CounterRng::mix(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t CounterRng::bits(std::uint64_t stream, std::uint64_t counter) const {
  return mix(mix(seed_ ^ mix(stream)) + counter);
}

double CounterRng::uniform(std::uint64_t stream, std::uint64_t counter) const {
  return static_cast<double>(bits(stream, counter) >> 11) * 0x1.0p-53;
}

std::pair<double, double> CounterRng::normal_pair(std::uint64_t stream, std::uint64_t pair) const {
  const std::uint64_t key = mix(seed_ ^ mix(stream));
  const double u1 = 1.0 - static_cast<double>(mix(key + 2 * pair) >> 11) * 0x1.0p-53;  // (0, 1]
  const double u2 = static_cast<double>(mix(key + 2 * pair + 1) >> 11) * 0x1.0p-53;
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double t = 2.0 * std::numbers::pi * u2;
  return {r * std::cos(t), r * std::sin(t)};
}

std::pair<float, float> CounterRng::normal_pair_f32(std::uint64_t stream, std::uint64_t pair) const {
  const std::uint64_t key = mix(seed_ ^ mix(stream));
  const float u1 = 1.0f - static_cast<float>(mix(key + 2 * pair) >> 40) * 0x1.0p-24f;
  const float u2 = static_cast<float>(mix(key + 2 * pair + 1) >> 40) * 0x1.0p-24f;
  const float r = std::sqrt(-2.0f * std::log(u1));
  const float t = 2.0f * std::numbers::pi_v<float> * u2;
  return {r * std::cos(t), r * std::sin(t)};
}

double CounterRng::normal(std::uint64_t stream, std::uint64_t counter) const {
  const auto [a, b] = normal_pair(stream, counter / 2);
  return counter % 2 == 0 ? a : b;
}

// ---------------------------------------------------------------------------

std::string material_name(Material m) {
  switch (m) {
    case Material::RedChili: return "red_chili";
    case Material::RiceBran: return "rice_bran";
    case Material::WheatBran: return "wheat_bran";
    case Material::SawDust: return "saw_dust";
  }
  return "?";
}

Material parse_material(const std::string& name) {
  if (name == "red_chili" || name == "chili") return Material::RedChili;
  if (name == "rice_bran") return Material::RiceBran;
  if (name == "wheat_bran") return Material::WheatBran;
  if (name == "saw_dust") return Material::SawDust;
  throw InvalidArgument("unknown material '" + name + "'");
}

double density_factor(Material m) {
  switch (m) {
    case Material::RedChili: return 1.0;
    case Material::RiceBran: return 0.8;
    case Material::WheatBran: return 0.75;
    case Material::SawDust: return 0.5;
  }
  return 1.0;
}

std::vector<double> default_axis(std::size_t bands, double first_nm, double last_nm) {
  std::vector<double> axis(bands);
  const double step = bands > 1 ? (last_nm - first_nm) / static_cast<double>(bands - 1) : 0.0;
  for (std::size_t i = 0; i < bands; ++i) axis[i] = first_nm + step * static_cast<double>(i);
  return axis;
}

double illumination(double nm) {
  if (nm <= 400.0) return 0.1;
  if (nm >= 700.0) return 1.0;
  return 0.1 + 0.9 * (nm - 400.0) / 300.0;
}

namespace {

struct Bump {
  double center;
  double width;
  double amplitude;
};

struct Shape {
  double baseline;
  std::vector<Bump> bumps;  // at most five
};

// Per-material curve plus the within-material variation model.
struct MaterialModel {
  Shape curve;
  Bump pigment;          // first intrinsic variation mode
  Bump moisture;         // second intrinsic variation mode
  double pigment_sd;     // std of the pigment coefficient
  double moisture_sd;
  double gain_sd;        // multiplicative scatter
  double offset_sd;      // additive scatter
};

MaterialModel model_of(Material m) {
  switch (m) {
    case Material::RedChili:
      return {{0.035, {{820.0, 160.0, 0.52}, {640.0, 30.0, 0.04}, {975.0, 25.0, -0.05}}},
              {600.0, 30.0, 1.0},
              {930.0, 70.0, 1.0},
              0.030,
              0.020,
              0.03,
              0.004};
    case Material::RiceBran:
      return {{0.30, {{960.0, 200.0, 0.35}, {600.0, 40.0, -0.06}, {480.0, 40.0, 0.03}}},
              {600.0, 30.0, 1.0},
              {930.0, 70.0, 1.0},
              0.015,
              0.015,
              0.03,
              0.004};
    case Material::WheatBran:
      return {{0.20, {{760.0, 220.0, 0.36}, {950.0, 40.0, -0.04}}},
              {600.0, 30.0, 1.0},
              {930.0, 70.0, 1.0},
              0.015,
              0.015,
              0.03,
              0.004};
    case Material::SawDust:
      return {{0.27, {{720.0, 230.0, 0.38}, {560.0, 50.0, 0.05}}},
              {600.0, 30.0, 1.0},
              {930.0, 70.0, 1.0},
              0.015,
              0.015,
              0.03,
              0.004};
  }
  throw InvalidArgument("unknown material");
}

double gauss(const Bump& b, double nm) {
  const double z = (nm - b.center) / b.width;
  return b.amplitude * std::exp(-0.5 * z * z);
}

std::vector<double> evaluate(const Shape& s, const std::vector<double>& axis) {
  std::vector<double> v(axis.size(), s.baseline);
  for (std::size_t i = 0; i < axis.size(); ++i) {
    for (const auto& b : s.bumps) v[i] += gauss(b, axis[i]);
  }
  return v;
}

std::vector<double> evaluate(const Bump& b, const std::vector<double>& axis) {
  std::vector<double> v(axis.size());
  for (std::size_t i = 0; i < axis.size(); ++i) v[i] = gauss(b, axis[i]);
  return v;
}

// Streams for CounterRng.
enum Stream : std::uint64_t {
  kEndmember = 1,
  kGrainSite = 2,
  kGrainMaterial = 3,
  kScatter = 4,
  kNoise = 5,
};

constexpr double kDarkLevel = 100.0;      // DN
constexpr double kWhiteSpan = 3500.0;     // DN above dark at full illumination
constexpr double kBackground = 0.02;
constexpr std::size_t kPatch = 10;

}  // namespace

Endmembers gen_endmembers(std::uint64_t seed, const std::vector<double>& axis) {
  if (!strictly_increasing(axis)) throw InvalidArgument("endmember axis not increasing");
  const CounterRng rng(seed);
  Endmembers out{};
  for (std::size_t m = 0; m < 4; ++m) {
    auto shape = model_of(static_cast<Material>(m)).curve;
    // Small seed-dependent jitter; the darkness ordering has ample margin.
    std::uint64_t c = m * 64;
    for (auto& b : shape.bumps) {
      b.center += 5.0 * (2.0 * rng.uniform(kEndmember, c++) - 1.0);
      b.amplitude *= 1.0 + 0.03 * (2.0 * rng.uniform(kEndmember, c++) - 1.0);
    }
    auto values = evaluate(shape, axis);
    for (double& v : values) v = std::clamp(v, 0.0, 1.2);
    out.spectra[m] = {static_cast<Material>(m), Spectrum(std::move(values), axis)};
  }
  return out;
}

// ---------------------------------------------------------------------------

void SceneSpec::validate() const {
  if (width == 0 || height == 0) throw InvalidArgument("scene width and height must be positive");
  const double steps = fraction / 0.02;
  const bool on_grid = fraction >= 0.0 && fraction <= 0.30 + 1e-12 &&
                       std::abs(steps - std::round(steps)) < 1e-9;
  if (!on_grid && fraction != 1.0) {
    throw InvalidArgument("fraction must be one of 0.00, 0.02, ..., 0.30 or 1.0");
  }
  if (!(grain_px >= 1.0)) throw InvalidArgument("grain_px must be >= 1");
  if (!(noise_sigma >= 0.0)) throw InvalidArgument("noise_sigma must be >= 0");
  if (adulterant == Material::RedChili) throw InvalidArgument("adulterant cannot be red chili");
  const double r = radius();
  if (!(r > 0.0) || 2.0 * r > static_cast<double>(std::min(width, height))) {
    throw InvalidArgument("ROI larger than frame");
  }
  // The white patch in the top-left corner must stay clear of the disk.
  const double cx = 0.5 * static_cast<double>(width);
  const double cy = 0.5 * static_cast<double>(height);
  const double px = std::max(0.0, cx - static_cast<double>(kPatch));
  const double py = std::max(0.0, cy - static_cast<double>(kPatch));
  if (width < kPatch || height < kPatch || std::hypot(px, py) <= r + 1.0) {
    throw InvalidArgument("frame too small for the sample disk plus the white patch");
  }
}

double SceneSpec::area_fraction() const {
  if (fraction >= 1.0) return 1.0;
  const double w = fraction * density_factor(adulterant);
  const double c = (1.0 - fraction) * density_factor(Material::RedChili);
  return w + c > 0.0 ? w / (w + c) : 0.0;
}

double SceneSpec::radius() const {
  return roi_radius > 0.0 ? roi_radius : 0.4 * static_cast<double>(std::min(width, height));
}

Scene gen_scene(const SceneSpec& spec, const Endmembers& endmembers) {
  spec.validate();
  const CounterRng rng(spec.seed);
  const auto& axis = endmembers.of(Material::RedChili).wavelengths();
  const std::size_t w = spec.width;
  const std::size_t h = spec.height;
  const std::size_t n = w * h;
  const std::size_t bands = axis.size();

  // Grain tiling: one jittered site per g x g cell, pixels take the nearest site.
  const double g = spec.grain_px;
  const auto cells_x = static_cast<std::size_t>(std::ceil(static_cast<double>(w) / g)) + 1;
  const auto cells_y = static_cast<std::size_t>(std::ceil(static_cast<double>(h) / g)) + 1;
  const double area = spec.area_fraction();
  auto site_material = [&](std::size_t cell) {
    return rng.uniform(kGrainMaterial, cell) < area ? spec.adulterant : Material::RedChili;
  };
  std::vector<Material> grain(n);
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      const double px = static_cast<double>(x) + 0.5;
      const double py = static_cast<double>(y) + 0.5;
      const auto gx = static_cast<long>(px / g);
      const auto gy = static_cast<long>(py / g);
      double best = std::numeric_limits<double>::infinity();
      std::size_t best_cell = 0;
      for (long dy = -1; dy <= 1; ++dy) {
        for (long dx = -1; dx <= 1; ++dx) {
          const long cx = gx + dx;
          const long cy = gy + dy;
          if (cx < 0 || cy < 0 || cx >= static_cast<long>(cells_x) ||
              cy >= static_cast<long>(cells_y)) {
            continue;
          }
          const std::size_t cell = static_cast<std::size_t>(cy) * cells_x + static_cast<std::size_t>(cx);
          const double sx = (static_cast<double>(cx) + rng.uniform(kGrainSite, 2 * cell)) * g;
          const double sy = (static_cast<double>(cy) + rng.uniform(kGrainSite, 2 * cell + 1)) * g;
          const double d = (sx - px) * (sx - px) + (sy - py) * (sy - py);
          if (d < best) {
            best = d;
            best_cell = cell;
          }
        }
      }
      grain[y * w + x] = site_material(best_cell);
    }
  }

  Scene scene{HyperCube(1, 1, {0.0}, {0.0}, Domain::Reflectance),
              HyperCube(1, 1, {0.0}, {0.0}, Domain::Reflectance),
              LabelMap{w, h, std::vector<Label>(n, Label::Background), LabelSource::GroundTruth},
              Mask(w, h),
              Mask(w, h),
              Mask(w, h),
              Spectrum(),
              Spectrum()};

  const double cx = 0.5 * static_cast<double>(w);
  const double cy = 0.5 * static_cast<double>(h);
  const double r = spec.radius();
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      const double dx = static_cast<double>(x) + 0.5 - cx;
      const double dy = static_cast<double>(y) + 0.5 - cy;
      if (dx * dx + dy * dy <= r * r) scene.sample.set(x, y);
      if (x < kPatch && y < kPatch) scene.white_patch.set(x, y);
    }
  }

  // Material curves and variation modes on the axis.
  std::array<std::vector<double>, 4> curve;
  std::array<std::vector<double>, 4> pigment;
  std::array<std::vector<double>, 4> moisture;
  std::array<MaterialModel, 4> models{model_of(Material::RedChili), model_of(Material::RiceBran),
                                      model_of(Material::WheatBran), model_of(Material::SawDust)};
  for (std::size_t m = 0; m < 4; ++m) {
    curve[m] = endmembers.spectra[m].reflectance.values();
    pigment[m] = evaluate(models[m].pigment, axis);
    moisture[m] = evaluate(models[m].moisture, axis);
  }
  struct Draw {
    double gain, offset, pigment, moisture;
  };
  // Scatter draws for pixel p; the second material of a mixed pixel uses its own four.
  auto draw = [&](Material mat, std::size_t p, std::uint64_t slot) {
    const auto& mm = models[static_cast<std::size_t>(mat)];
    const std::uint64_t c = p * 8 + slot * 4;
    return Draw{1.0 + mm.gain_sd * rng.normal(kScatter, c), mm.offset_sd * rng.normal(kScatter, c + 1),
                mm.pigment_sd * rng.normal(kScatter, c + 2),
                mm.moisture_sd * rng.normal(kScatter, c + 3)};
  };
  auto value = [&](Material mat, const Draw& d, std::size_t b) {
    const auto m = static_cast<std::size_t>(mat);
    return d.offset + d.gain * (curve[m][b] + d.pigment * pigment[m][b] + d.moisture * moisture[m][b]);
  };

  // Noise-free reflectance field.
  std::vector<double> refl(n * bands, kBackground);
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      const std::size_t p = y * w + x;
      if (scene.white_patch.bits[p]) {
        for (std::size_t b = 0; b < bands; ++b) refl[b * n + p] = 1.0;
        continue;
      }
      if (!scene.sample.bits[p]) continue;
      const Material own = grain[p];
      scene.ground_truth.labels[p] = own == Material::RedChili ? Label::Chili : Label::Adulterant;
      // One mixed pixel per material edge: the pixel left of / above it.
      std::optional<Material> other;
      if (x + 1 < w && scene.sample.bits[p + 1] && grain[p + 1] != own) {
        other = grain[p + 1];
      } else if (y + 1 < h && scene.sample.bits[p + w] && grain[p + w] != own) {
        other = grain[p + w];
      }
      if (other) scene.mixed.bits[p] = 1;
      const Draw d_own = draw(own, p, 0);
      const Draw d_other = other ? draw(*other, p, 1) : Draw{};
      for (std::size_t b = 0; b < bands; ++b) {
        double v = value(own, d_own, b);
        if (other) v = 0.5 * v + 0.5 * value(*other, d_other, b);
        refl[b * n + p] = v;
      }
    }
  }

  // Inverse empirical line with DN-domain sensor noise.
  std::vector<double> dark(bands);
  std::vector<double> white(bands);
  for (std::size_t b = 0; b < bands; ++b) {
    dark[b] = kDarkLevel + 0.02 * (axis[b] - axis.front());
    white[b] = dark[b] + kWhiteSpan * illumination(axis[b]);
  }
  const double noise_dn = spec.noise_sigma * kWhiteSpan;
  std::vector<double> dn(n * bands);
  for (std::size_t b = 0; b < bands; ++b) {
    const double span = white[b] - dark[b];
    for (std::size_t p = 0; p < n; ++p) dn[b * n + p] = dark[b] + refl[b * n + p] * span;
  }
  if (noise_dn > 0.0) {
    // Values 2k and 2k+1 take the two halves of normal_pair_f32(kNoise, k).
    for (std::size_t i = 0; i < dn.size(); i += 2) {
      const auto [z0, z1] = rng.normal_pair_f32(kNoise, i / 2);
      dn[i] += noise_dn * z0;
      if (i + 1 < dn.size()) dn[i + 1] += noise_dn * z1;
    }
  }
  for (double& v : dn) v = static_cast<double>(static_cast<float>(v));

  scene.radiance = HyperCube(w, h, axis, std::move(dn), Domain::RadianceDN);
  scene.reflectance = HyperCube(w, h, axis, std::move(refl), Domain::Reflectance);
  scene.dark = Spectrum(std::move(dark), axis);
  scene.white = Spectrum(std::move(white), axis);
  return scene;
}

}  // namespace hsi
