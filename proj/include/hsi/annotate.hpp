#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "hsi/hypercube.hpp"
#include "hsi/segment.hpp"

namespace hsi {

enum class Label : std::uint8_t { Chili, Adulterant, Background };
enum class LabelSource { Clustered, GroundTruth };

std::string_view label_name(Label l);

struct LabelMap {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<Label> labels;  // row-major
  LabelSource source = LabelSource::Clustered;

  Label at(std::size_t x, std::size_t y) const { return labels[y * width + x]; }
  std::size_t count(Label l) const;
  /// Pixels that are not Background.
  Mask sample_mask() const;

  friend bool operator==(const LabelMap&, const LabelMap&) = default;
};

struct KmeansResult {
  std::vector<double> centroids;
  std::vector<std::size_t> assignments;
  double inertia = 0.0;
  std::size_t iterations = 0;
  /// Within-cluster SSE after every Lloyd iteration.
  std::vector<double> inertia_history;
};

/// Deterministic farthest-point seeding: the point farthest from the mean,
/// then repeatedly the point farthest from its nearest chosen centroid.
/// Ties go to the lowest index.
std::vector<double> farthest_point_init(std::span<const double> points, std::size_t k);

/// Lloyd iterations on scalars from farthest_point_init. Stops when no
/// centroid moves by `tol` or more, or after `max_iter` iterations.
/// Throws ConvergenceError if the SSE ever increases.
KmeansResult kmeans(std::span<const double> points, std::size_t k, std::size_t max_iter = 300,
                    double tol = 1e-6);

struct AnnotateOptions {
  double band_nm = 500.0;
  std::size_t max_iter = 300;
  /// Relative to the ROI intensity range.
  double relative_tol = 1e-6;
  /// Centroid gap below this share of the range counts as one population.
  double min_gap_fraction = 0.05;
  /// Ashman's D below this counts as one population.
  double min_bimodality = 3.0;
  /// Chili intensity at `band_nm` for the one-population case. Without it
  /// the whole ROI is labelled Chili.
  std::optional<double> chili_reference;
  /// With a chili reference, a single population whose centroid sits at least
  /// half this gap above it is labelled Adulterant.
  double adulterant_gap = 0.15;
};

struct Annotation {
  LabelMap labels;
  KmeansResult clustering;
  bool unimodal = false;
};

/// Clusters the `band_nm` plane inside the ROI into two groups; the darker
/// group is chili, the brighter one adulterant, everything outside is Background.
Annotation annotate_mixture(const HyperCube& cube, const Mask& roi,
                            const AnnotateOptions& options = {});

/// Fraction of pixels where the two maps agree, restricted to `where`.
double label_agreement(const LabelMap& a, const LabelMap& b, const Mask& where);

/// 0 = Adulterant, 255 = Chili, 128 = Background.
void save_label_pgm(const LabelMap& map, const std::filesystem::path& path);
void save_label_csv(const LabelMap& map, const std::filesystem::path& path);
LabelMap load_label_csv(const std::filesystem::path& path, std::size_t width, std::size_t height);

}  // namespace hsi
