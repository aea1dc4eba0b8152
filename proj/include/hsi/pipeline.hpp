#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "hsi/calibrate.hpp"
#include "hsi/hypercube.hpp"
#include "hsi/linalg.hpp"
#include "hsi/ocsvm.hpp"
#include "hsi/preprocess.hpp"
#include "hsi/reduce.hpp"
#include "hsi/segment.hpp"

namespace hsi {

std::string scatter_name(ScatterMethod m);
ScatterMethod parse_scatter(const std::string& name);

std::string policy_name(ComponentPolicy p);

struct PreprocessSettings {
  std::size_t drop_leading = 15;
  SavGolSpec savgol;
  ScatterMethod scatter = ScatterMethod::Msc;
};

/// Radiance cubes lose `drop_leading` bands and go through the empirical line
/// method; reflectance cubes are taken as already calibrated and trimmed.
HyperCube to_reflectance(const HyperCube& cube, const std::optional<ReferencePair>& refs,
                         std::size_t drop_leading);

/// Both spectra on the same axis, read from wavelength_nm,white,dark.
ReferencePair load_references_csv(const std::filesystem::path& path);
void save_references_csv(const ReferencePair& refs, const std::filesystem::path& path);

/// Row-major pixel indices of the set bits.
std::vector<std::size_t> mask_indices(const Mask& mask);

/// One row per masked pixel (raster order), one column per band.
Matrix pixel_rows(const HyperCube& cube, const Mask& mask);

/// Pixels with (x + y) even go to the first mask, odd ones to the second.
std::pair<Mask, Mask> checkerboard_split(const Mask& mask);

/// Savitzky-Golay along every row, then the scatter correction.
/// `msc_reference` is required for Msc.
Matrix preprocess_rows(const Matrix& rows, const PreprocessSettings& settings,
                       std::span<const double> msc_reference = {});

/// Column means.
std::vector<double> mean_row(const Matrix& rows);

/// Keeps the first point (by row order) that falls into each cubic cell of
/// side `cell`; survivors stay in their original order.
Matrix voxel_thin(const Matrix& points, double cell);

/// Cell side for which voxel_thin keeps about one point per
/// `pixels_per_point` input rows. 0 (no thinning) when the ratio is <= 1.
double thinning_cell(const Matrix& points, double pixels_per_point);

/// Preprocessing, PCA projection and per-component scaling, fitted on one
/// training set and reapplied to everything scored later.
struct FeatureModel {
  PreprocessSettings prep;
  Spectrum msc_reference;  // empty unless prep.scatter == Msc
  PcaModel pca;
  std::size_t components = 2;
  std::vector<double> scale;  // sqrt(eigenvalue) of each kept component

  /// Reflectance rows (already trimmed) to scaled scores.
  Matrix transform(const Matrix& reflectance_rows) const;
  /// Preprocessed rows to scaled scores.
  Matrix transform_preprocessed(const Matrix& rows) const;
};

FeatureModel fit_features(const Matrix& reflectance_rows, const std::vector<double>& wavelengths,
                          const PreprocessSettings& prep, ComponentPolicy policy,
                          std::size_t fixed_components = 2);

struct DetectorSettings {
  PreprocessSettings prep;
  ComponentPolicy policy = ComponentPolicy::MaxOf2AndBrokenStick;
  std::size_t fixed_components = 2;
  KernelSpec kernel = KernelSpec::rbf(0.1);
  double nu = 0.1;
  TrainOptions solver;
  /// Training rows per voxel representative (see thinning_cell); the SVM then
  /// sees the support of the score cloud rather than its density. <= 1
  /// trains on every row.
  double pixels_per_point = 16.0;
};

struct TrainSummary {
  std::size_t pixels = 0;
  std::size_t train_points = 0;
  double voxel_cell = 0.0;
  std::size_t support_vectors = 0;
  double sv_fraction = 0.0;
  double margin_error_fraction = 0.0;
  std::size_t components = 0;
  double explained = 0.0;  // share of variance in the kept components
  std::size_t broken_stick = 0;
  std::size_t updates = 0;
};

struct Detector {
  FeatureModel features;
  OcsvmModel svm;
  TrainSummary summary;
};

Detector train_detector(const Matrix& reflectance_rows, const std::vector<double>& wavelengths,
                        const DetectorSettings& settings);

/// Trains on already-transformed points with the given features.
Detector train_on_features(FeatureModel features, const Matrix& points,
                           const DetectorSettings& settings, std::size_t pixels);

struct Prediction {
  std::vector<double> scores;
  std::vector<std::uint8_t> inlier;
  double inlier_fraction = 0.0;
};

Prediction predict_rows(const Detector& detector, const Matrix& reflectance_rows);

inline constexpr double kDefaultVerdictThreshold = 0.95;

enum class Verdict { Pure, Adulterated };
std::string verdict_name(Verdict v);
Verdict verdict_for(double inlier_fraction, double threshold = kDefaultVerdictThreshold);

/// Layout: preprocess.csv, scale.csv, msc_reference.csv, pca/, svm/, summary.csv.
void save_detector(const Detector& detector, const std::filesystem::path& dir);
Detector load_detector(const std::filesystem::path& dir);

/// Spearman rank correlation with average ranks for ties.
double spearman(std::span<const double> a, std::span<const double> b);

}  // namespace hsi
