#include "hsi/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "hsi/error.hpp"
#include "hsi/io.hpp"
#include "hsi/parallel.hpp"

namespace hsi {

std::string scatter_name(ScatterMethod m) {
  switch (m) {
    case ScatterMethod::None: return "none";
    case ScatterMethod::Snv: return "snv";
    case ScatterMethod::Msc: return "msc";
  }
  return "?";
}

ScatterMethod parse_scatter(const std::string& name) {
  if (name == "none") return ScatterMethod::None;
  if (name == "snv") return ScatterMethod::Snv;
  if (name == "msc") return ScatterMethod::Msc;
  throw InvalidArgument("unknown scatter method '" + name + "'");
}

std::string policy_name(ComponentPolicy p) {
  switch (p) {
    case ComponentPolicy::Fixed: return "fixed";
    case ComponentPolicy::BrokenStick: return "broken_stick";
    case ComponentPolicy::MaxOf2AndBrokenStick: return "max2_broken_stick";
  }
  return "?";
}

HyperCube to_reflectance(const HyperCube& cube, const std::optional<ReferencePair>& refs,
                         std::size_t drop_leading) {
  if (cube.domain() == Domain::Reflectance) return cube;
  if (!refs) throw InvalidArgument("radiance cube needs white and dark references");
  const ReferencePair trimmed{slice_spectrum(refs->white, drop_leading),
                              slice_spectrum(refs->dark, drop_leading)};
  return elm_reflectance(slice_bands(cube, drop_leading), trimmed);
}

ReferencePair load_references_csv(const std::filesystem::path& path) {
  const auto table = io::read_csv(path);
  const auto cw = table.column("wavelength_nm");
  const auto cwhite = table.column("white");
  const auto cdark = table.column("dark");
  std::vector<double> axis;
  std::vector<double> white;
  std::vector<double> dark;
  for (const auto& row : table.rows) {
    axis.push_back(io::parse_double(row[cw]));
    white.push_back(io::parse_double(row[cwhite]));
    dark.push_back(io::parse_double(row[cdark]));
  }
  if (axis.empty()) throw FormatError(path.string() + ": no reference rows");
  return {Spectrum(std::move(white), axis), Spectrum(std::move(dark), axis)};
}

void save_references_csv(const ReferencePair& refs, const std::filesystem::path& path) {
  if (refs.white.wavelengths() != refs.dark.wavelengths()) {
    throw InvalidArgument("white and dark references use different axes");
  }
  io::CsvWriter csv({"wavelength_nm", "white", "dark"});
  for (std::size_t i = 0; i < refs.white.size(); ++i) {
    const double cells[] = {refs.white.wavelengths()[i], refs.white[i], refs.dark[i]};
    csv.row(cells);
  }
  csv.save(path);
}

std::vector<std::size_t> mask_indices(const Mask& mask) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < mask.bits.size(); ++i) {
    if (mask.bits[i]) out.push_back(i);
  }
  return out;
}

Matrix pixel_rows(const HyperCube& cube, const Mask& mask) {
  if (mask.width != cube.width() || mask.height != cube.height()) {
    throw InvalidArgument("mask and cube dimensions differ");
  }
  const auto idx = mask_indices(mask);
  const std::size_t bands = cube.bands();
  Matrix rows(idx.size(), bands);
  for (std::size_t b = 0; b < bands; ++b) {
    const auto plane = cube.band(b);
    for (std::size_t r = 0; r < idx.size(); ++r) rows(r, b) = plane[idx[r]];
  }
  return rows;
}

std::pair<Mask, Mask> checkerboard_split(const Mask& mask) {
  Mask even(mask.width, mask.height);
  Mask odd(mask.width, mask.height);
  for (std::size_t y = 0; y < mask.height; ++y) {
    for (std::size_t x = 0; x < mask.width; ++x) {
      if (!mask.at(x, y)) continue;
      ((x + y) % 2 == 0 ? even : odd).set(x, y);
    }
  }
  return {even, odd};
}

Matrix preprocess_rows(const Matrix& rows, const PreprocessSettings& settings,
                       std::span<const double> msc_reference) {
  const auto& filter = savgol_filter(settings.savgol);
  if (settings.scatter == ScatterMethod::Msc && msc_reference.size() != rows.cols()) {
    throw InvalidArgument("MSC reference length does not match the spectra");
  }
  Matrix out(rows.rows(), rows.cols());
  parallel_for(rows.rows(), [&](std::size_t r) {
    filter.apply(rows.row(r), out.row(r));
    switch (settings.scatter) {
      case ScatterMethod::None: break;
      case ScatterMethod::Snv: snv_inplace(out.row(r)); break;
      case ScatterMethod::Msc: msc_apply_inplace(out.row(r), msc_reference); break;
    }
  });
  return out;
}

std::vector<double> mean_row(const Matrix& rows) {
  if (rows.rows() == 0) throw InvalidArgument("mean of an empty row set");
  std::vector<double> mean(rows.cols(), 0.0);
  for (std::size_t r = 0; r < rows.rows(); ++r) {
    const auto row = rows.row(r);
    for (std::size_t c = 0; c < row.size(); ++c) mean[c] += row[c];
  }
  for (double& m : mean) m /= static_cast<double>(rows.rows());
  return mean;
}

namespace {

std::vector<std::size_t> voxel_keep(const Matrix& points, double cell) {
  std::map<std::vector<long long>, std::size_t> seen;
  std::vector<std::size_t> keep;
  std::vector<long long> key(points.cols());
  for (std::size_t r = 0; r < points.rows(); ++r) {
    const auto row = points.row(r);
    for (std::size_t c = 0; c < row.size(); ++c) {
      key[c] = static_cast<long long>(std::floor(row[c] / cell));
    }
    if (seen.emplace(key, r).second) keep.push_back(r);
  }
  return keep;
}

}  // namespace

double thinning_cell(const Matrix& points, double pixels_per_point) {
  if (!(pixels_per_point > 1.0) || points.rows() < 2) return 0.0;
  const double target = std::max(1.0, static_cast<double>(points.rows()) / pixels_per_point);
  double spread = 0.0;
  for (std::size_t c = 0; c < points.cols(); ++c) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (std::size_t r = 0; r < points.rows(); ++r) {
      lo = std::min(lo, points(r, c));
      hi = std::max(hi, points(r, c));
    }
    spread = std::max(spread, hi - lo);
  }
  if (!(spread > 0.0)) return 0.0;

  // Occupied-cell count falls (roughly monotonically) as the cell grows;
  // bisect in log space and keep whichever bracket lands closer to the target.
  double small = spread * 1e-6;
  double large = spread * 2.0;
  auto count = [&](double cell) { return static_cast<double>(voxel_keep(points, cell).size()); };
  for (int it = 0; it < 40; ++it) {
    const double mid = std::sqrt(small * large);
    (count(mid) > target ? small : large) = mid;
  }
  return std::fabs(count(small) - target) < std::fabs(count(large) - target) ? small : large;
}

Matrix voxel_thin(const Matrix& points, double cell) {
  if (!(cell > 0.0)) return points;
  const auto keep = voxel_keep(points, cell);
  Matrix out(keep.size(), points.cols());
  for (std::size_t i = 0; i < keep.size(); ++i) {
    std::copy_n(points.row(keep[i]).begin(), points.cols(), out.row(i).begin());
  }
  return out;
}

// ---------------------------------------------------------------------------

Matrix FeatureModel::transform_preprocessed(const Matrix& rows) const {
  Matrix scores = project(pca, rows, components);
  for (std::size_t r = 0; r < scores.rows(); ++r) {
    for (std::size_t c = 0; c < components; ++c) scores(r, c) /= scale[c];
  }
  return scores;
}

Matrix FeatureModel::transform(const Matrix& reflectance_rows) const {
  return transform_preprocessed(
      preprocess_rows(reflectance_rows, prep, msc_reference.values()));
}

FeatureModel fit_features(const Matrix& reflectance_rows, const std::vector<double>& wavelengths,
                          const PreprocessSettings& prep, ComponentPolicy policy,
                          std::size_t fixed_components) {
  if (reflectance_rows.rows() < 2) throw InvalidArgument("need at least two training spectra");
  FeatureModel model;
  model.prep = prep;
  Matrix rows = preprocess_rows(reflectance_rows, {prep.drop_leading, prep.savgol, ScatterMethod::None});
  if (prep.scatter == ScatterMethod::Msc) {
    model.msc_reference = Spectrum(mean_row(rows), wavelengths);
  }
  const auto ref = model.msc_reference.values();
  parallel_for(rows.rows(), [&](std::size_t r) {
    if (prep.scatter == ScatterMethod::Snv) snv_inplace(rows.row(r));
    if (prep.scatter == ScatterMethod::Msc) msc_apply_inplace(rows.row(r), ref);
  });
  model.pca = fit_pca(rows, wavelengths);
  model.components = retained_components(model.pca, policy, fixed_components);
  model.scale.resize(model.components);
  for (std::size_t c = 0; c < model.components; ++c) {
    const double sd = std::sqrt(model.pca.eigenvalues[c]);
    model.scale[c] = sd > 0.0 ? sd : 1.0;
  }
  return model;
}

Detector train_on_features(FeatureModel features, const Matrix& points,
                           const DetectorSettings& settings, std::size_t pixels) {
  const double cell = thinning_cell(points, settings.pixels_per_point);
  const Matrix train_points = voxel_thin(points, cell);
  auto result = train_full(train_points, settings.nu, settings.kernel, settings.solver);
  Detector d;
  d.summary.pixels = pixels;
  d.summary.train_points = train_points.rows();
  d.summary.voxel_cell = cell;
  d.summary.support_vectors = result.model.alphas.size();
  d.summary.sv_fraction =
      static_cast<double>(d.summary.support_vectors) / static_cast<double>(train_points.rows());
  const auto errors = std::count_if(result.decision.begin(), result.decision.end(),
                                    [](double v) { return v < 0.0; });
  d.summary.margin_error_fraction =
      static_cast<double>(errors) / static_cast<double>(train_points.rows());
  d.summary.components = features.components;
  d.summary.explained = std::accumulate(features.pca.explained_ratio.begin(),
                                        features.pca.explained_ratio.begin() +
                                            static_cast<std::ptrdiff_t>(features.components),
                                        0.0);
  d.summary.broken_stick = broken_stick_count(features.pca.eigenvalues);
  d.summary.updates = result.model.stats.updates;
  d.features = std::move(features);
  d.svm = std::move(result.model);
  return d;
}

Detector train_detector(const Matrix& reflectance_rows, const std::vector<double>& wavelengths,
                        const DetectorSettings& settings) {
  auto features = fit_features(reflectance_rows, wavelengths, settings.prep, settings.policy,
                               settings.fixed_components);
  const Matrix points = features.transform(reflectance_rows);
  return train_on_features(std::move(features), points, settings, reflectance_rows.rows());
}

Prediction predict_rows(const Detector& detector, const Matrix& reflectance_rows) {
  if (reflectance_rows.rows() == 0) throw InvalidArgument("nothing to predict");
  Prediction p;
  p.scores = decide_all(detector.svm, detector.features.transform(reflectance_rows));
  p.inlier.resize(p.scores.size());
  std::size_t inliers = 0;
  for (std::size_t i = 0; i < p.scores.size(); ++i) {
    p.inlier[i] = p.scores[i] >= 0.0 ? 1 : 0;
    inliers += p.inlier[i];
  }
  p.inlier_fraction = static_cast<double>(inliers) / static_cast<double>(p.scores.size());
  return p;
}

std::string verdict_name(Verdict v) { return v == Verdict::Pure ? "pure" : "adulterated"; }

Verdict verdict_for(double inlier_fraction, double threshold) {
  return inlier_fraction >= threshold ? Verdict::Pure : Verdict::Adulterated;
}

// ---------------------------------------------------------------------------

namespace {

std::map<std::string, std::string> read_key_values(const std::filesystem::path& path) {
  const auto table = io::read_csv(path);
  const auto ck = table.column("key");
  const auto cv = table.column("value");
  std::map<std::string, std::string> out;
  for (const auto& row : table.rows) out[row[ck]] = row[cv];
  return out;
}

const std::string& require(const std::map<std::string, std::string>& kv, const std::string& key,
                           const std::filesystem::path& where) {
  const auto it = kv.find(key);
  if (it == kv.end()) throw FormatError(where.string() + ": missing '" + key + "'");
  return it->second;
}

}  // namespace

void save_detector(const Detector& d, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const auto& f = d.features;
  io::CsvWriter prep({"key", "value"});
  prep.row({"drop_leading", std::to_string(f.prep.drop_leading)});
  prep.row({"savgol_window", std::to_string(f.prep.savgol.window)});
  prep.row({"savgol_polyorder", std::to_string(f.prep.savgol.polyorder)});
  prep.row({"scatter", scatter_name(f.prep.scatter)});
  prep.row({"components", std::to_string(f.components)});
  prep.save(dir / "preprocess.csv");

  io::CsvWriter scale({"component", "scale"});
  for (std::size_t c = 0; c < f.scale.size(); ++c) {
    scale.row({std::to_string(c), io::format_double(f.scale[c])});
  }
  scale.save(dir / "scale.csv");
  if (f.prep.scatter == ScatterMethod::Msc) {
    save_spectrum_csv(f.msc_reference, dir / "msc_reference.csv", "reference");
  }
  save_pca(f.pca, dir / "pca");
  save_ocsvm(d.svm, dir / "svm");

  const auto& s = d.summary;
  io::CsvWriter summary({"key", "value"});
  summary.row({"pixels", std::to_string(s.pixels)});
  summary.row({"train_points", std::to_string(s.train_points)});
  summary.row({"voxel_cell", io::format_double(s.voxel_cell)});
  summary.row({"support_vectors", std::to_string(s.support_vectors)});
  summary.row({"sv_fraction", io::format_double(s.sv_fraction)});
  summary.row({"margin_error_fraction", io::format_double(s.margin_error_fraction)});
  summary.row({"components", std::to_string(s.components)});
  summary.row({"explained", io::format_double(s.explained)});
  summary.row({"broken_stick", std::to_string(s.broken_stick)});
  summary.row({"updates", std::to_string(s.updates)});
  summary.row({"kernel", kernel_name(d.svm.kernel.kind)});
  summary.row({"gamma", io::format_double(d.svm.kernel.gamma)});
  summary.row({"nu", io::format_double(d.svm.nu)});
  summary.row({"rho", io::format_double(d.svm.rho)});
  summary.save(dir / "summary.csv");
}

Detector load_detector(const std::filesystem::path& dir) {
  Detector d;
  auto& f = d.features;
  const auto prep_path = dir / "preprocess.csv";
  const auto prep = read_key_values(prep_path);
  f.prep.drop_leading = static_cast<std::size_t>(io::parse_int(require(prep, "drop_leading", prep_path)));
  f.prep.savgol.window = static_cast<std::size_t>(io::parse_int(require(prep, "savgol_window", prep_path)));
  f.prep.savgol.polyorder =
      static_cast<std::size_t>(io::parse_int(require(prep, "savgol_polyorder", prep_path)));
  f.prep.savgol.validate();
  f.prep.scatter = parse_scatter(require(prep, "scatter", prep_path));
  f.components = static_cast<std::size_t>(io::parse_int(require(prep, "components", prep_path)));

  const auto scale = io::read_csv(dir / "scale.csv");
  const auto cs = scale.column("scale");
  for (const auto& row : scale.rows) f.scale.push_back(io::parse_double(row[cs]));
  if (f.scale.size() != f.components) throw FormatError("scale.csv does not match components");

  if (f.prep.scatter == ScatterMethod::Msc) {
    f.msc_reference = load_spectrum_csv(dir / "msc_reference.csv");
  }
  f.pca = load_pca(dir / "pca");
  if (f.components == 0 || f.components > f.pca.components()) {
    throw FormatError("component count outside the stored PCA model");
  }
  d.svm = load_ocsvm(dir / "svm");
  if (d.svm.dims() != f.components) throw FormatError("SVM dimension does not match components");

  const auto summary_path = dir / "summary.csv";
  if (std::filesystem::exists(summary_path)) {
    const auto kv = read_key_values(summary_path);
    auto get = [&](const std::string& k) { return require(kv, k, summary_path); };
    auto& s = d.summary;
    s.pixels = static_cast<std::size_t>(io::parse_int(get("pixels")));
    s.train_points = static_cast<std::size_t>(io::parse_int(get("train_points")));
    s.voxel_cell = io::parse_double(get("voxel_cell"));
    s.support_vectors = static_cast<std::size_t>(io::parse_int(get("support_vectors")));
    s.sv_fraction = io::parse_double(get("sv_fraction"));
    s.margin_error_fraction = io::parse_double(get("margin_error_fraction"));
    s.components = static_cast<std::size_t>(io::parse_int(get("components")));
    s.explained = io::parse_double(get("explained"));
    s.broken_stick = static_cast<std::size_t>(io::parse_int(get("broken_stick")));
    s.updates = static_cast<std::size_t>(io::parse_int(get("updates")));
  }
  return d;
}

// ---------------------------------------------------------------------------

namespace {

std::vector<double> average_ranks(std::span<const double> v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> rank(v.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) rank[order[k]] = r;
    i = j + 1;
  }
  return rank;
}

}  // namespace

double spearman(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.size() < 2) throw InvalidArgument("spearman needs two equal series");
  const auto ra = average_ranks(a);
  const auto rb = average_ranks(b);
  const double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / static_cast<double>(ra.size());
  const double mb = std::accumulate(rb.begin(), rb.end(), 0.0) / static_cast<double>(rb.size());
  double sab = 0.0;
  double saa = 0.0;
  double sbb = 0.0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    sab += (ra[i] - ma) * (rb[i] - mb);
    saa += (ra[i] - ma) * (ra[i] - ma);
    sbb += (rb[i] - mb) * (rb[i] - mb);
  }
  if (saa == 0.0 || sbb == 0.0) throw InvalidArgument("spearman: constant series");
  return sab / std::sqrt(saa * sbb);
}

}  // namespace hsi
