#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hsi/annotate.hpp"
#include "hsi/pipeline.hpp"
#include "hsi/synth.hpp"

namespace hsi {

/// Everything a CLI run needs. Text form:
///
///   # comment
///   [section]
///   key = value
///
/// Lists are comma separated. Unknown sections or keys are errors. Relative
/// paths are taken relative to the working directory.
struct PipelineConfig {
  // [paths]
  std::filesystem::path cube;
  std::filesystem::path references;
  std::filesystem::path model;
  std::filesystem::path ground_truth;
  std::vector<std::filesystem::path> outlier_cubes;
  std::filesystem::path out = "out";

  // [scene]
  SceneSpec scene;
  std::uint64_t endmember_seed = 1;

  // [preprocess]; scatter unset means auto
  PreprocessSettings prep;
  std::optional<ScatterMethod> scatter;

  // [annotate]
  AnnotateOptions annotate;

  // [pca]
  ComponentPolicy policy = ComponentPolicy::MaxOf2AndBrokenStick;
  std::size_t fixed_components = 2;

  // [svm]; degree and coef0 only matter for the polynomial kernel
  KernelSpec kernel{KernelKind::Rbf, 0.1, 3, 0.0};
  double nu = 0.1;
  TrainOptions solver;
  double pixels_per_point = 16.0;

  // [predict]
  double verdict_threshold = kDefaultVerdictThreshold;

  // [grid]
  std::vector<double> grid_gammas = {0.01, 0.1, 1.0, 10.0};
  std::vector<double> grid_nus = {0.01, 0.05, 0.1, 0.2, 0.5};

  // [report]
  std::vector<double> sweep_nus = {0.01, 0.02, 0.05, 0.1, 0.2, 0.3, 0.5, 0.7, 0.9};

  std::size_t threads = 1;

  /// Range checks on every field; throws ConfigError naming the field.
  void validate() const;
  DetectorSettings detector_settings() const;
};

/// Applies `text` on top of `base`. Throws ConfigError with the line number.
PipelineConfig parse_config(std::string_view text, PipelineConfig base = {});
PipelineConfig load_config(const std::filesystem::path& path, PipelineConfig base = {});

/// Full config in the same text form; printing the parse of the output gives
/// the same text back.
std::string print_config(const PipelineConfig& config);

}  // namespace hsi
