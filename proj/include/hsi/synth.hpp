#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "hsi/annotate.hpp"
#include "hsi/calibrate.hpp"
#include "hsi/hypercube.hpp"
#include "hsi/segment.hpp"

namespace hsi {

/// Counter-based generator: every draw is a pure function of
/// (seed, stream, counter), so scenes can be produced in any order.
///
///   mix(z):  z += 0x9E3779B97F4A7C15
///            z  = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
///            z  = (z ^ (z >> 27)) * 0x94D049BB133111EB
///            return z ^ (z >> 31)
///   bits(stream, counter) = mix(mix(seed ^ mix(stream)) + counter)
///   uniform = (bits >> 11) * 2^-53            in [0, 1)
///   normal_pair(k): u1 = 1 - uniform(2k), u2 = uniform(2k+1),
///                   r = sqrt(-2 ln u1), returns (r cos 2 pi u2, r sin 2 pi u2)
///   normal(c) = first of normal_pair(c / 2) for even c, second for odd c
///   normal_pair_f32(k): the same in single precision on 24-bit uniforms
///                   (bits >> 40) * 2^-24; used for per-value sensor noise
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

  static std::uint64_t mix(std::uint64_t z);
  std::uint64_t bits(std::uint64_t stream, std::uint64_t counter) const;
  double uniform(std::uint64_t stream, std::uint64_t counter) const;
  double normal(std::uint64_t stream, std::uint64_t counter) const;
  std::pair<double, double> normal_pair(std::uint64_t stream, std::uint64_t pair) const;
  std::pair<float, float> normal_pair_f32(std::uint64_t stream, std::uint64_t pair) const;

 private:
  std::uint64_t seed_;
};

enum class Material { RedChili, RiceBran, WheatBran, SawDust };

std::string material_name(Material m);
Material parse_material(const std::string& name);
/// Weight-to-area factor relative to chili.
double density_factor(Material m);
inline constexpr std::array<Material, 3> kAdulterants = {Material::RiceBran, Material::WheatBran,
                                                         Material::SawDust};

struct EndmemberSpectrum {
  Material material;
  Spectrum reflectance;
};

struct Endmembers {
  std::array<EndmemberSpectrum, 4> spectra;  // indexed by Material
  const Spectrum& of(Material m) const { return spectra[static_cast<std::size_t>(m)].reflectance; }
};

/// 224 bands evenly spaced over 400-1000 nm.
std::vector<double> default_axis(std::size_t bands = 224, double first_nm = 400.0,
                                 double last_nm = 1000.0);

Endmembers gen_endmembers(std::uint64_t seed, const std::vector<double>& axis = default_axis());

struct SceneSpec {
  std::size_t width = 128;
  std::size_t height = 128;
  Material adulterant = Material::RiceBran;
  /// Adulterant weight fraction: 0.00, 0.02, ..., 0.30, or 1.0 for a pure adulterant.
  double fraction = 0.0;
  double grain_px = 12.0;
  double noise_sigma = 0.004;
  std::uint64_t seed = 1;
  /// Sample disk radius; 0 means 0.4 * min(width, height).
  double roi_radius = 0.0;

  void validate() const;
  double area_fraction() const;
  double radius() const;
};

struct Scene {
  HyperCube radiance;          // RadianceDN
  HyperCube reflectance;       // noise-free reflectance field behind `radiance`
  LabelMap ground_truth;       // source = GroundTruth
  Mask sample;                 // the sample disk
  Mask white_patch;            // calibration target
  Mask mixed;                  // pixels blended with a neighbouring grain
  Spectrum dark;               // closed-shutter reference
  Spectrum white;              // noise-free white level
};

Scene gen_scene(const SceneSpec& spec, const Endmembers& endmembers);

/// Relative illumination: 0.1 at 400 nm, linear to 1.0 at 700 nm, flat beyond.
double illumination(double nm);

}  // namespace hsi
