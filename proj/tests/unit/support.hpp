#pragma once

#include <gtest/gtest.h>

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "hsi/calibrate.hpp"
#include "hsi/hypercube.hpp"
#include "hsi/pipeline.hpp"
#include "hsi/segment.hpp"
#include "hsi/synth.hpp"

namespace hsi::test {

// Fresh directory named after the running test, removed at the start of the
// next run rather than at exit so failures leave their files behind.
inline std::filesystem::path temp_dir() {
  const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
  auto dir = std::filesystem::temp_directory_path() / "hsi_unit" /
             (std::string(info->test_suite_name()) + "." + info->name());
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline const Endmembers& endmembers() {
  static const Endmembers em = gen_endmembers(1);
  return em;
}

struct Calibrated {
  Scene scene;
  HyperCube reflectance;
  Mask roi;
};

// Generated scene, trimmed and calibrated with its own references, plus the ROI.
inline Calibrated calibrated(const SceneSpec& spec) {
  Scene scene = gen_scene(spec, endmembers());
  HyperCube refl = to_reflectance(scene.radiance, ReferencePair{scene.white, scene.dark}, 15);
  Mask roi = extract_roi(refl);
  return {std::move(scene), std::move(refl), std::move(roi)};
}

inline SceneSpec scene_spec(Material adulterant, double fraction, std::uint64_t seed = 1) {
  SceneSpec s;
  s.adulterant = adulterant;
  s.fraction = fraction;
  s.seed = seed;
  return s;
}

inline std::vector<double> linear_axis(std::size_t n, double first, double step) {
  std::vector<double> axis(n);
  for (std::size_t i = 0; i < n; ++i) axis[i] = first + step * static_cast<double>(i);
  return axis;
}

inline Matrix random_matrix(std::size_t rows, std::size_t cols, std::mt19937_64& rng, double sd = 1.0) {
  std::normal_distribution<double> normal(0.0, sd);
  Matrix m(rows, cols);
  for (double& v : m.data()) v = normal(rng);
  return m;
}

}  // namespace hsi::test
