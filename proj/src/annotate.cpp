#include "hsi/annotate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <string>

#include "hsi/error.hpp"
#include "hsi/io.hpp"

namespace hsi {

std::string_view label_name(Label l) {
  switch (l) {
    case Label::Chili: return "chili";
    case Label::Adulterant: return "adulterant";
    case Label::Background: return "background";
  }
  return "?";
}

std::size_t LabelMap::count(Label l) const {
  return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), l));
}

Mask LabelMap::sample_mask() const {
  Mask m(width, height);
  for (std::size_t p = 0; p < labels.size(); ++p) m.bits[p] = labels[p] != Label::Background;
  return m;
}

// ---------------------------------------------------------------------------

namespace {

std::size_t distinct_count(std::span<const double> points, std::size_t stop_at) {
  std::set<double> seen;
  for (double p : points) {
    seen.insert(p);
    if (seen.size() >= stop_at) break;
  }
  return seen.size();
}

std::size_t nearest(std::span<const double> centroids, double x) {
  std::size_t best = 0;
  double best_d = std::abs(x - centroids[0]);
  for (std::size_t c = 1; c < centroids.size(); ++c) {
    const double d = std::abs(x - centroids[c]);
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  return best;
}

double sse(std::span<const double> points, std::span<const double> centroids,
           std::span<const std::size_t> assignments) {
  double s = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const double d = points[i] - centroids[assignments[i]];
    s += d * d;
  }
  return s;
}

}  // namespace

std::vector<double> farthest_point_init(std::span<const double> points, std::size_t k) {
  if (k == 0) throw InvalidArgument("k must be at least 1");
  if (distinct_count(points, k) < k) {
    throw InvalidArgument("need at least " + std::to_string(k) + " distinct points");
  }
  const double mean =
      std::accumulate(points.begin(), points.end(), 0.0) / static_cast<double>(points.size());
  std::vector<double> chosen;
  std::vector<double> dist(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) dist[i] = std::abs(points[i] - mean);
  while (chosen.size() < k) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < points.size(); ++i) {
      if (dist[i] > dist[best]) best = i;
    }
    const double c = points[best];
    if (chosen.empty()) {
      std::fill(dist.begin(), dist.end(), std::numeric_limits<double>::infinity());
    }
    chosen.push_back(c);
    for (std::size_t i = 0; i < points.size(); ++i) {
      dist[i] = std::min(dist[i], std::abs(points[i] - c));
    }
  }
  return chosen;
}

KmeansResult kmeans(std::span<const double> points, std::size_t k, std::size_t max_iter,
                    double tol) {
  if (max_iter == 0) throw InvalidArgument("kmeans: max_iter must be positive");
  KmeansResult r;
  r.centroids = farthest_point_init(points, k);
  r.assignments.assign(points.size(), 0);

  std::vector<double> sum(k);
  std::vector<std::size_t> count(k);
  while (r.iterations < max_iter) {
    ++r.iterations;
    for (std::size_t i = 0; i < points.size(); ++i) r.assignments[i] = nearest(r.centroids, points[i]);
    std::fill(sum.begin(), sum.end(), 0.0);
    std::fill(count.begin(), count.end(), 0);
    for (std::size_t i = 0; i < points.size(); ++i) {
      sum[r.assignments[i]] += points[i];
      ++count[r.assignments[i]];
    }
    double moved = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
      if (count[c] == 0) continue;  // empty cluster keeps its centroid
      const double next = sum[c] / static_cast<double>(count[c]);
      moved = std::max(moved, std::abs(next - r.centroids[c]));
      r.centroids[c] = next;
    }
    const double inertia = sse(points, r.centroids, r.assignments);
    if (!r.inertia_history.empty()) {
      const double prev = r.inertia_history.back();
      if (inertia > prev + 1e-12 * std::max(prev, 1.0)) {
        throw ConvergenceError("kmeans: inertia increased between iterations");
      }
    }
    r.inertia_history.push_back(inertia);
    if (moved < tol) break;
  }
  for (std::size_t i = 0; i < points.size(); ++i) r.assignments[i] = nearest(r.centroids, points[i]);
  r.inertia = sse(points, r.centroids, r.assignments);
  return r;
}

// ---------------------------------------------------------------------------

Annotation annotate_mixture(const HyperCube& cube, const Mask& roi, const AnnotateOptions& opt) {
  if (cube.domain() != Domain::Reflectance) {
    throw InvalidArgument("annotate_mixture expects a reflectance cube");
  }
  if (roi.width != cube.width() || roi.height != cube.height()) {
    throw InvalidArgument("ROI dimensions differ from the cube");
  }
  const auto plane = band_at(cube, opt.band_nm);
  std::vector<std::size_t> index;
  std::vector<double> values;
  for (std::size_t p = 0; p < roi.bits.size(); ++p) {
    if (roi.bits[p]) {
      index.push_back(p);
      values.push_back(plane.values[p]);
    }
  }
  if (values.empty()) throw InvalidArgument("ROI is empty");
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  const double range = *hi - *lo;
  if (!(range > 0.0)) throw InvalidArgument("ROI intensities are all equal");

  Annotation out;
  out.clustering = kmeans(values, 2, opt.max_iter, opt.relative_tol * range);
  const auto& km = out.clustering;
  const std::size_t dark = km.centroids[0] <= km.centroids[1] ? 0 : 1;

  // Spread of each cluster for the bimodality check.
  double var[2] = {0.0, 0.0};
  std::size_t n[2] = {0, 0};
  for (std::size_t i = 0; i < values.size(); ++i) {
    const auto c = km.assignments[i];
    const double d = values[i] - km.centroids[c];
    var[c] += d * d;
    ++n[c];
  }
  for (int c = 0; c < 2; ++c) var[c] = n[c] > 1 ? var[c] / static_cast<double>(n[c] - 1) : 0.0;
  const double gap = std::abs(km.centroids[1] - km.centroids[0]);
  const double pooled = std::sqrt(var[0] + var[1]);
  const double ashman_d = pooled > 0.0 ? std::sqrt(2.0) * gap / pooled
                                       : std::numeric_limits<double>::infinity();
  out.unimodal = gap < opt.min_gap_fraction * range || ashman_d < opt.min_bimodality;

  LabelMap& map = out.labels;
  map.width = cube.width();
  map.height = cube.height();
  map.source = LabelSource::Clustered;
  map.labels.assign(cube.pixels(), Label::Background);
  if (out.unimodal) {
    Label whole = Label::Chili;
    if (opt.chili_reference) {
      const double mean =
          std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
      if (mean >= *opt.chili_reference + 0.5 * opt.adulterant_gap) whole = Label::Adulterant;
    }
    for (auto p : index) map.labels[p] = whole;
  } else {
    for (std::size_t i = 0; i < index.size(); ++i) {
      map.labels[index[i]] = km.assignments[i] == dark ? Label::Chili : Label::Adulterant;
    }
  }
  return out;
}

double label_agreement(const LabelMap& a, const LabelMap& b, const Mask& where) {
  if (a.labels.size() != b.labels.size() || where.bits.size() != a.labels.size()) {
    throw InvalidArgument("label maps differ in size");
  }
  std::size_t total = 0;
  std::size_t same = 0;
  for (std::size_t p = 0; p < a.labels.size(); ++p) {
    if (!where.bits[p]) continue;
    ++total;
    if (a.labels[p] == b.labels[p]) ++same;
  }
  if (total == 0) throw InvalidArgument("label_agreement: empty region");
  return static_cast<double>(same) / static_cast<double>(total);
}

void save_label_pgm(const LabelMap& map, const std::filesystem::path& path) {
  std::string out = "P5\n" + std::to_string(map.width) + " " + std::to_string(map.height) + "\n255\n";
  out.reserve(out.size() + map.labels.size());
  for (Label l : map.labels) {
    const unsigned char v = l == Label::Adulterant ? 0 : l == Label::Chili ? 255 : 128;
    out.push_back(static_cast<char>(v));
  }
  io::write_file_atomic(path, out);
}

void save_label_csv(const LabelMap& map, const std::filesystem::path& path) {
  io::CsvWriter csv({"x", "y", "label"});
  for (std::size_t y = 0; y < map.height; ++y) {
    for (std::size_t x = 0; x < map.width; ++x) {
      csv.row({std::to_string(x), std::to_string(y), std::string(label_name(map.at(x, y)))});
    }
  }
  csv.save(path);
}

LabelMap load_label_csv(const std::filesystem::path& path, std::size_t width, std::size_t height) {
  const auto table = io::read_csv(path);
  const auto cx = table.column("x");
  const auto cy = table.column("y");
  const auto cl = table.column("label");
  LabelMap map{width, height, std::vector<Label>(width * height, Label::Background),
               LabelSource::GroundTruth};
  for (const auto& row : table.rows) {
    const auto x = static_cast<std::size_t>(io::parse_int(row[cx]));
    const auto y = static_cast<std::size_t>(io::parse_int(row[cy]));
    if (x >= width || y >= height) throw FormatError(path.string() + ": pixel outside frame");
    const auto& name = row[cl];
    Label l;
    if (name == "chili") l = Label::Chili;
    else if (name == "adulterant") l = Label::Adulterant;
    else if (name == "background") l = Label::Background;
    else throw FormatError(path.string() + ": unknown label '" + name + "'");
    map.labels[y * width + x] = l;
  }
  return map;
}

}  // namespace hsi
