#include "hsi/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <array>
#include <functional>
#include <map>
#include <ostream>

#include "hsi/annotate.hpp"
#include "hsi/config.hpp"
#include "hsi/error.hpp"
#include "hsi/io.hpp"
#include "hsi/parallel.hpp"
#include "hsi/pipeline.hpp"
#include "hsi/reduce.hpp"
#include "hsi/segment.hpp"
#include "hsi/synth.hpp"

namespace hsi {

namespace {

namespace fs = std::filesystem;

void require_file(const fs::path& path, const std::string& field) {
  if (path.empty()) throw ConfigError(field + ": required");
  if (!fs::exists(path)) throw ConfigError(field + ": no such file or directory: " + path.string());
}

fs::path hdr_path(const fs::path& p) {
  if (p.extension() == ".hdr") return p;
  fs::path h = p;
  return h.replace_extension(".hdr");
}

void require_cube(const fs::path& path, const std::string& field) {
  if (path.empty()) throw ConfigError(field + ": required");
  require_file(hdr_path(path), field);
}

struct Input {
  HyperCube reflectance;
  Mask roi;
};

// Subcommand flags that do not live in the config file.
struct Flags {
  fs::path white;
  fs::path dark;
  std::string white_region;  // x0,y0,x1,y1
  fs::path msc_reference;
};

long long flag_int(std::string_view text, const std::string& flag) {
  try {
    return io::parse_int(io::trim(text));
  } catch (const Error& e) {
    throw ConfigError(flag + ": " + e.what());
  }
}

Mask parse_region(const std::string& text, const HyperCube& cube) {
  const auto parts = io::split(text, ',');
  if (parts.size() != 4) throw ConfigError("--white-region: expected x0,y0,x1,y1");
  std::array<std::size_t, 4> v{};
  for (std::size_t i = 0; i < 4; ++i) {
    const long long n = flag_int(parts[i], "--white-region");
    if (n < 0) throw ConfigError("--white-region: negative coordinate");
    v[i] = static_cast<std::size_t>(n);
  }
  if (v[0] >= v[2] || v[1] >= v[3] || v[2] > cube.width() || v[3] > cube.height()) {
    throw ConfigError("--white-region: empty or outside the frame");
  }
  return rect_mask(cube.width(), cube.height(), v[0], v[1], v[2], v[3]);
}

// references.csv first, then any per-target override from the flags.
std::optional<ReferencePair> references_for(const HyperCube& cube, const PipelineConfig& cfg,
                                            const Flags& flags = {}) {
  if (cube.domain() == Domain::Reflectance) return std::nullopt;
  std::optional<Spectrum> white;
  std::optional<Spectrum> dark;
  if (!cfg.references.empty()) {
    require_file(cfg.references, "paths.references");
    auto refs = load_references_csv(cfg.references);
    white = std::move(refs.white);
    dark = std::move(refs.dark);
  }
  if (!flags.white.empty()) {
    require_file(flags.white, "--white");
    white = load_spectrum_csv(flags.white);
  }
  if (!flags.white_region.empty()) white = reference_from_region(cube, parse_region(flags.white_region, cube));
  if (!flags.dark.empty()) {
    require_file(flags.dark, "--dark");
    dark = load_spectrum_csv(flags.dark);
  }
  if (!white || !dark) throw ConfigError("paths.references: required for a radiance cube");
  return ReferencePair{std::move(*white), std::move(*dark)};
}

Input load_input(const fs::path& cube_path, const PipelineConfig& cfg, std::size_t drop_leading) {
  const HyperCube cube = load_cube(cube_path);
  HyperCube refl = to_reflectance(cube, references_for(cube, cfg), drop_leading);
  Mask roi = extract_roi(refl);
  return {std::move(refl), std::move(roi)};
}

void key_values(const std::vector<std::pair<std::string, std::string>>& kv, const fs::path& path) {
  io::CsvWriter csv({"key", "value"});
  for (const auto& [k, v] : kv) csv.row({k, v});
  csv.save(path);
}

std::string num(double v) { return io::format_double(v); }

// ---------------------------------------------------------------------------

int cmd_generate(const PipelineConfig& cfg, std::ostream& out) {
  const Endmembers em = gen_endmembers(cfg.endmember_seed);
  const Scene scene = gen_scene(cfg.scene, em);
  fs::create_directories(cfg.out);
  save_cube(scene.radiance, cfg.out / "cube.hdr");
  save_label_pgm(scene.ground_truth, cfg.out / "ground_truth.pgm");
  save_label_csv(scene.ground_truth, cfg.out / "ground_truth.csv");
  save_references_csv({scene.white, scene.dark}, cfg.out / "references.csv");

  io::CsvWriter csv({"wavelength_nm", "red_chili", "rice_bran", "wheat_bran", "saw_dust"});
  const auto& axis = em.of(Material::RedChili).wavelengths();
  for (std::size_t b = 0; b < axis.size(); ++b) {
    const double row[] = {axis[b], em.spectra[0].reflectance[b], em.spectra[1].reflectance[b],
                          em.spectra[2].reflectance[b], em.spectra[3].reflectance[b]};
    csv.row(row);
  }
  csv.save(cfg.out / "endmembers.csv");

  const double sample = static_cast<double>(scene.sample.count());
  const double share = static_cast<double>(scene.ground_truth.count(Label::Adulterant)) / sample;
  key_values({{"width", std::to_string(cfg.scene.width)},
              {"height", std::to_string(cfg.scene.height)},
              {"adulterant", material_name(cfg.scene.adulterant)},
              {"fraction", num(cfg.scene.fraction)},
              {"target_area_fraction", num(cfg.scene.area_fraction())},
              {"adulterant_pixel_share", num(share)},
              {"sample_pixels", std::to_string(scene.sample.count())},
              {"mixed_pixels", std::to_string(scene.mixed.count())},
              {"seed", std::to_string(cfg.scene.seed)},
              {"endmember_seed", std::to_string(cfg.endmember_seed)}},
             cfg.out / "scene.csv");
  out << "generated " << cfg.scene.width << "x" << cfg.scene.height << " scene, adulterant pixel share "
      << num(share) << "\n";
  return kExitOk;
}

int cmd_calibrate(const PipelineConfig& cfg, const Flags& flags, std::ostream& out) {
  require_cube(cfg.cube, "paths.cube");
  const HyperCube cube = load_cube(cfg.cube);
  if (cube.domain() != Domain::RadianceDN) throw InvalidArgument("calibrate expects a radiance cube");
  const HyperCube refl = to_reflectance(cube, references_for(cube, cfg, flags), cfg.prep.drop_leading);
  fs::create_directories(cfg.out);
  save_cube(refl, cfg.out / "reflectance.hdr", Encoding::Float32);
  out << "reflectance cube with " << refl.bands() << " bands from " << num(refl.wavelengths().front())
      << " nm\n";
  return kExitOk;
}

int cmd_segment(const PipelineConfig& cfg, std::ostream& out) {
  require_cube(cfg.cube, "paths.cube");
  const Input in = load_input(cfg.cube, cfg, cfg.prep.drop_leading);
  fs::create_directories(cfg.out);
  save_pbm(in.roi, cfg.out / "roi.pbm");
  save_mask_csv(in.roi, cfg.out / "roi.csv");
  out << "roi pixels " << in.roi.count() << "\n";
  return kExitOk;
}

int cmd_preprocess(const PipelineConfig& cfg, const Flags& flags, std::ostream& out) {
  require_cube(cfg.cube, "paths.cube");
  const Input in = load_input(cfg.cube, cfg, cfg.prep.drop_leading);
  const Matrix rows = pixel_rows(in.reflectance, in.roi);
  if (rows.rows() < 2) throw InvalidArgument("ROI holds fewer than two pixels");

  // Auto: MSC for a single population (pure sample), SNV for a mixture.
  ScatterMethod method = ScatterMethod::Msc;
  std::string basis = "config";
  if (cfg.scatter) {
    method = *cfg.scatter;
  } else {
    const auto ann = annotate_mixture(in.reflectance, in.roi, cfg.annotate);
    method = ann.unimodal ? ScatterMethod::Msc : ScatterMethod::Snv;
    basis = ann.unimodal ? "auto: single population" : "auto: mixture";
  }
  PreprocessSettings prep = cfg.prep;
  prep.scatter = ScatterMethod::None;
  Matrix spectra = preprocess_rows(rows, prep);
  std::vector<double> reference = mean_row(spectra);
  if (!flags.msc_reference.empty()) {
    require_file(flags.msc_reference, "--msc");
    const Spectrum ref = load_spectrum_csv(flags.msc_reference);
    if (ref.wavelengths() != in.reflectance.wavelengths()) {
      throw ConfigError("--msc: reference axis differs from the calibrated cube");
    }
    reference = ref.values();
    basis = "reference file";
  }
  prep.scatter = method;
  spectra = preprocess_rows(rows, prep, reference);

  const std::size_t bands = in.reflectance.bands();
  const std::size_t n = in.reflectance.pixels();
  std::vector<double> values(n * bands, 0.0);
  const auto idx = mask_indices(in.roi);
  for (std::size_t r = 0; r < idx.size(); ++r) {
    for (std::size_t b = 0; b < bands; ++b) values[b * n + idx[r]] = spectra(r, b);
  }
  fs::create_directories(cfg.out);
  save_cube(HyperCube(in.reflectance.width(), in.reflectance.height(), in.reflectance.wavelengths(),
                      std::move(values), Domain::Reflectance),
            cfg.out / "preprocessed.hdr", Encoding::Float32);
  save_spectrum_csv(Spectrum(mean_row(spectra), in.reflectance.wavelengths()),
                    cfg.out / "mean_spectrum.csv", "mean");
  key_values({{"scatter", scatter_name(method)},
              {"basis", basis},
              {"pixels", std::to_string(rows.rows())},
              {"savgol_window", std::to_string(prep.savgol.window)},
              {"savgol_polyorder", std::to_string(prep.savgol.polyorder)}},
             cfg.out / "preprocess.csv");
  out << "preprocessed " << rows.rows() << " spectra with SG + " << scatter_name(method) << "\n";
  return kExitOk;
}

int cmd_annotate(const PipelineConfig& cfg, std::ostream& out) {
  require_cube(cfg.cube, "paths.cube");
  if (!cfg.ground_truth.empty()) require_file(cfg.ground_truth, "paths.ground_truth");
  const Input in = load_input(cfg.cube, cfg, cfg.prep.drop_leading);
  const auto ann = annotate_mixture(in.reflectance, in.roi, cfg.annotate);
  fs::create_directories(cfg.out);
  save_label_pgm(ann.labels, cfg.out / "labels.pgm");
  save_label_csv(ann.labels, cfg.out / "labels.csv");

  std::vector<std::pair<std::string, std::string>> kv = {
      {"unimodal", ann.unimodal ? "1" : "0"},
      {"centroid_low", num(ann.clustering.centroids.front())},
      {"centroid_high", num(ann.clustering.centroids.back())},
      {"iterations", std::to_string(ann.clustering.iterations)},
      {"inertia", num(ann.clustering.inertia)},
      {"chili_pixels", std::to_string(ann.labels.count(Label::Chili))},
      {"adulterant_pixels", std::to_string(ann.labels.count(Label::Adulterant))}};
  if (!cfg.ground_truth.empty()) {
    const LabelMap gt = load_label_csv(cfg.ground_truth, ann.labels.width, ann.labels.height);
    const double acc = label_agreement(ann.labels, gt, gt.sample_mask());
    kv.emplace_back("accuracy", num(acc));
    out << "label accuracy vs ground truth " << num(acc) << "\n";
  }
  key_values(kv, cfg.out / "annotate.csv");
  out << "chili " << ann.labels.count(Label::Chili) << ", adulterant "
      << ann.labels.count(Label::Adulterant) << (ann.unimodal ? " (single population)" : "") << "\n";
  return kExitOk;
}

int cmd_pca(const PipelineConfig& cfg, std::ostream& out) {
  require_cube(cfg.cube, "paths.cube");
  const Input in = load_input(cfg.cube, cfg, cfg.prep.drop_leading);
  const Matrix rows = pixel_rows(in.reflectance, in.roi);
  PreprocessSettings prep = cfg.prep;
  prep.scatter = cfg.scatter.value_or(ScatterMethod::Msc);
  const FeatureModel f = fit_features(rows, in.reflectance.wavelengths(), prep, cfg.policy, cfg.fixed_components);
  fs::create_directories(cfg.out);
  save_pca(f.pca, cfg.out / "pca");

  const Matrix scores = project(f.pca, preprocess_rows(rows, prep, f.msc_reference.values()), f.components);
  std::vector<std::string> header = {"x", "y"};
  for (std::size_t c = 0; c < f.components; ++c) header.push_back("pc" + std::to_string(c + 1));
  io::CsvWriter csv(header);
  const auto idx = mask_indices(in.roi);
  for (std::size_t r = 0; r < idx.size(); ++r) {
    std::vector<std::string> cells = {std::to_string(idx[r] % in.roi.width),
                                      std::to_string(idx[r] / in.roi.width)};
    for (std::size_t c = 0; c < f.components; ++c) cells.push_back(num(scores(r, c)));
    csv.row(cells);
  }
  csv.save(cfg.out / "scores.csv");

  double explained = 0.0;
  for (std::size_t c = 0; c < f.components; ++c) explained += f.pca.explained_ratio[c];
  key_values({{"policy", policy_name(cfg.policy)},
              {"broken_stick", std::to_string(broken_stick_count(f.pca.eigenvalues))},
              {"retained", std::to_string(f.components)},
              {"explained", num(explained)},
              {"scatter", scatter_name(prep.scatter)}},
             cfg.out / "components.csv");
  out << "retained " << f.components << " components explaining " << num(explained) << "\n";
  return kExitOk;
}

int cmd_train(const PipelineConfig& cfg, std::ostream& out) {
  require_cube(cfg.cube, "paths.cube");
  const Input in = load_input(cfg.cube, cfg, cfg.prep.drop_leading);
  const Detector d =
      train_detector(pixel_rows(in.reflectance, in.roi), in.reflectance.wavelengths(), cfg.detector_settings());
  save_detector(d, cfg.out / "model");
  out << "trained " << kernel_name(d.svm.kernel.kind) << " one-class SVM (nu " << num(d.svm.nu) << ") on "
      << d.summary.train_points << " of " << d.summary.pixels << " pixels, " << d.summary.support_vectors
      << " support vectors\n";
  return kExitOk;
}

int cmd_predict(const PipelineConfig& cfg, std::ostream& out) {
  require_cube(cfg.cube, "paths.cube");
  require_file(cfg.model, "paths.model");
  if (!cfg.ground_truth.empty()) require_file(cfg.ground_truth, "paths.ground_truth");
  const Detector d = load_detector(cfg.model);
  const Input in = load_input(cfg.cube, cfg, d.features.prep.drop_leading);
  const Prediction p = predict_rows(d, pixel_rows(in.reflectance, in.roi));
  const auto idx = mask_indices(in.roi);
  const std::size_t w = in.roi.width;
  const std::size_t h = in.roi.height;

  std::string pgm = "P5\n" + std::to_string(w) + " " + std::to_string(h) + "\n255\n";
  std::string pixels(w * h, static_cast<char>(128));
  io::CsvWriter csv({"x", "y", "score", "inlier"});
  for (std::size_t r = 0; r < idx.size(); ++r) {
    pixels[idx[r]] = static_cast<char>(p.inlier[r] ? 255 : 0);
    csv.row({std::to_string(idx[r] % w), std::to_string(idx[r] / w), num(p.scores[r]),
             p.inlier[r] ? "1" : "0"});
  }
  fs::create_directories(cfg.out);
  io::write_file_atomic(cfg.out / "prediction.pgm", pgm + pixels);
  csv.save(cfg.out / "prediction.csv");

  const Verdict v = verdict_for(p.inlier_fraction, cfg.verdict_threshold);
  std::vector<std::pair<std::string, std::string>> kv = {
      {"pixels", std::to_string(idx.size())},
      {"inlier_fraction", num(p.inlier_fraction)},
      {"outlier_fraction", num(1.0 - p.inlier_fraction)},
      {"verdict_threshold", num(cfg.verdict_threshold)},
      {"verdict", verdict_name(v)}};
  if (!cfg.ground_truth.empty()) {
    const LabelMap gt = load_label_csv(cfg.ground_truth, w, h);
    std::size_t agree = 0;
    for (std::size_t r = 0; r < idx.size(); ++r) {
      agree += (p.inlier[r] != 0) == (gt.labels[idx[r]] == Label::Chili) ? 1 : 0;
    }
    const double sample = static_cast<double>(gt.sample_mask().count());
    kv.emplace_back("agreement", num(static_cast<double>(agree) / static_cast<double>(idx.size())));
    kv.emplace_back("ground_truth_adulterant_share",
                    num(static_cast<double>(gt.count(Label::Adulterant)) / sample));
  }
  key_values(kv, cfg.out / "verdict.csv");
  out << "inlier fraction " << num(p.inlier_fraction) << ", verdict " << verdict_name(v) << "\n";
  return kExitOk;
}

// Train/holdout split of the training cube plus one outlier set per extra cube.
struct Study {
  FeatureModel features;
  Matrix train_points;
  std::vector<EvalSet> sets;
  Input train;
};

Study build_study(const PipelineConfig& cfg) {
  require_cube(cfg.cube, "paths.cube");
  if (cfg.outlier_cubes.empty()) throw ConfigError("paths.outlier_cubes: at least one cube required");
  for (const auto& c : cfg.outlier_cubes) require_cube(c, "paths.outlier_cubes");
  Input train = load_input(cfg.cube, cfg, cfg.prep.drop_leading);
  const auto [train_mask, holdout_mask] = checkerboard_split(train.roi);
  const Matrix train_rows = pixel_rows(train.reflectance, train_mask);
  const auto settings = cfg.detector_settings();
  FeatureModel features = fit_features(train_rows, train.reflectance.wavelengths(), settings.prep,
                                       settings.policy, settings.fixed_components);
  const Matrix scores = features.transform(train_rows);
  Matrix points = voxel_thin(scores, thinning_cell(scores, settings.pixels_per_point));
  std::vector<EvalSet> sets;
  sets.push_back({"holdout", features.transform(pixel_rows(train.reflectance, holdout_mask)), Expected::Inlier});
  for (const auto& c : cfg.outlier_cubes) {
    const Input in = load_input(c, cfg, cfg.prep.drop_leading);
    sets.push_back({c.generic_string(), features.transform(pixel_rows(in.reflectance, in.roi)),
                    Expected::Outlier});
  }
  return {std::move(features), std::move(points), std::move(sets), std::move(train)};
}

int cmd_gridsearch(const PipelineConfig& cfg, std::ostream& out) {
  const Study s = build_study(cfg);
  const auto report = grid_search(s.train_points, s.sets, cfg.grid_gammas, cfg.grid_nus, cfg.kernel, cfg.solver);
  fs::create_directories(cfg.out);
  report.save_csv(cfg.out / "gridsearch.csv");
  if (!report.best) throw ConvergenceError("no grid cell trained successfully");
  const auto& best = report.grid[*report.best];
  out << "best gamma " << num(best.gamma) << ", nu " << num(best.nu) << ", min accuracy "
      << num(best.criterion) << "\n";
  return kExitOk;
}

int cmd_report(const PipelineConfig& cfg, std::ostream& out) {
  const Study s = build_study(cfg);
  const auto rows = nu_sweep(s.train_points, s.sets, cfg.kernel, cfg.sweep_nus, cfg.solver);
  fs::create_directories(cfg.out);
  save_sweep_csv(rows, cfg.out / "nu_sweep.csv");

  std::vector<std::string> header = {"set", "row"};
  for (std::size_t c = 0; c < s.features.components; ++c) header.push_back("pc" + std::to_string(c + 1));
  io::CsvWriter scores(header);
  for (const auto& set : s.sets) {
    for (std::size_t r = 0; r < set.points.rows(); ++r) {
      std::vector<std::string> cells = {set.name, std::to_string(r)};
      for (double v : set.points.row(r)) cells.push_back(num(v));
      scores.row(cells);
    }
  }
  scores.save(cfg.out / "pca_scores.csv");

  std::vector<fs::path> cubes = {cfg.cube};
  cubes.insert(cubes.end(), cfg.outlier_cubes.begin(), cfg.outlier_cubes.end());
  for (std::size_t i = 0; i < cubes.size(); ++i) {
    const Input in = i == 0 ? s.train : load_input(cubes[i], cfg, cfg.prep.drop_leading);
    const auto ann = annotate_mixture(in.reflectance, in.roi, cfg.annotate);
    save_label_pgm(ann.labels, cfg.out / ("labels_" + std::to_string(i) + ".pgm"));
  }
  out << "nu sweep over " << rows.size() << " values, " << s.sets.size() << " evaluation sets\n";
  return kExitOk;
}

using Command = std::function<int(const PipelineConfig&, const Flags&, std::ostream&)>;

Command plain(int (*fn)(const PipelineConfig&, std::ostream&)) {
  return [fn](const PipelineConfig& cfg, const Flags&, std::ostream& out) { return fn(cfg, out); };
}

const std::vector<std::pair<std::string, std::pair<std::string, Command>>>& commands() {
  static const std::vector<std::pair<std::string, std::pair<std::string, Command>>> table = {
      {"generate", {"synthesise a radiance cube with ground truth", plain(cmd_generate)}},
      {"calibrate", {"trim leading bands and convert radiance to reflectance", cmd_calibrate}},
      {"segment", {"extract the sample region of interest", plain(cmd_segment)}},
      {"preprocess", {"Savitzky-Golay smoothing plus scatter correction", cmd_preprocess}},
      {"annotate", {"two-cluster labelling at 500 nm", plain(cmd_annotate)}},
      {"pca", {"principal components of the sample spectra", plain(cmd_pca)}},
      {"train", {"fit the one-class detector on a pure sample", plain(cmd_train)}},
      {"predict", {"score a sample with a trained detector", plain(cmd_predict)}},
      {"gridsearch", {"search (gamma, nu) against held-out and outlier sets", plain(cmd_gridsearch)}},
      {"report", {"nu sweep, score table and label maps", plain(cmd_report)}},
  };
  return table;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Hyperspectral chili powder adulteration pipeline", "hsi"};
  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> threads;
  bool print = false;
  app.add_option("--config", config_path, "key = value config file");
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--seed", seed, "scene seed");
  app.add_option("--threads", threads, "worker threads, 0 for all cores");
  app.add_flag("--print-config", print, "print the effective configuration and exit");
  app.require_subcommand(0, 1);
  std::map<CLI::App*, const Command*> handlers;
  std::map<std::string, CLI::App*> subs;
  for (const auto& [name, entry] : commands()) {
    auto* sub = app.add_subcommand(name, entry.first);
    sub->fallthrough();
    handlers[sub] = &entry.second;
    subs[name] = sub;
  }
  Flags flags;
  std::string savgol;
  bool snv = false;
  subs["calibrate"]->add_option("--white", flags.white, "white reference CSV (wavelength_nm,value)");
  subs["calibrate"]->add_option("--dark", flags.dark, "dark reference CSV (wavelength_nm,value)");
  subs["calibrate"]->add_option("--white-region", flags.white_region,
                                "take the white reference from pixels x0,y0,x1,y1 of the cube");
  subs["preprocess"]->add_option("--savgol", savgol, "window,order");
  auto* snv_flag = subs["preprocess"]->add_flag("--snv", snv, "force SNV");
  subs["preprocess"]->add_option("--msc", flags.msc_reference, "force MSC against this reference CSV")
      ->excludes(snv_flag);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    PipelineConfig cfg;
    if (!config_path.empty()) cfg = load_config(config_path);
    if (!out_dir.empty()) cfg.out = out_dir;
    if (seed) cfg.scene.seed = *seed;
    if (threads) cfg.threads = *threads;
    if (!savgol.empty()) {
      const auto parts = io::split(savgol, ',');
      if (parts.size() != 2) throw ConfigError("--savgol: expected window,order");
      cfg.prep.savgol.window = static_cast<std::size_t>(std::max(0LL, flag_int(parts[0], "--savgol")));
      cfg.prep.savgol.polyorder = static_cast<std::size_t>(std::max(0LL, flag_int(parts[1], "--savgol")));
    }
    if (snv) cfg.scatter = ScatterMethod::Snv;
    if (!flags.msc_reference.empty()) cfg.scatter = ScatterMethod::Msc;
    cfg.validate();
    set_thread_count(cfg.threads);
    if (print) {
      out << print_config(cfg);
      return kExitOk;
    }
    const auto chosen = app.get_subcommands();
    if (chosen.empty()) {
      err << app.help();
      return kExitConfig;
    }
    return (*handlers.at(chosen.front()))(cfg, flags, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}

}  // namespace hsi
