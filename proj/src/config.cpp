#include "hsi/config.hpp"

#include <cctype>
#include <cmath>
#include <functional>
#include <map>

#include "hsi/error.hpp"
#include "hsi/io.hpp"

namespace hsi {

namespace {

using Setter = std::function<void(PipelineConfig&, const std::string&)>;
using Getter = std::function<std::string(const PipelineConfig&)>;

struct Field {
  std::string section;
  std::string key;
  Setter set;
  Getter get;
};

std::string join(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + io::format_double(v[i]);
  return out;
}

std::vector<double> doubles(const std::string& text) {
  std::vector<double> out;
  for (const auto& part : io::split(text, ',')) {
    const auto t = io::trim(part);
    if (!t.empty()) out.push_back(io::parse_double(t));
  }
  return out;
}

std::size_t count(const std::string& text) {
  const long long v = io::parse_int(text);
  if (v < 0) throw InvalidArgument("expected a non-negative integer, got " + text);
  return static_cast<std::size_t>(v);
}

std::uint64_t seed(const std::string& text) {
  std::size_t used = 0;
  const unsigned long long v = std::stoull(text, &used);
  if (used != text.size() || text.front() == '-') throw InvalidArgument("bad seed '" + text + "'");
  return v;
}

ComponentPolicy parse_policy(const std::string& s) {
  if (s == "fixed") return ComponentPolicy::Fixed;
  if (s == "broken_stick") return ComponentPolicy::BrokenStick;
  if (s == "max2_broken_stick") return ComponentPolicy::MaxOf2AndBrokenStick;
  throw InvalidArgument("unknown component policy '" + s + "'");
}

#define DOUBLE_FIELD(sec, key, member)                                                  \
  Field {                                                                               \
    sec, key, [](PipelineConfig& c, const std::string& v) { c.member = io::parse_double(v); }, \
        [](const PipelineConfig& c) { return io::format_double(c.member); }            \
  }
#define COUNT_FIELD(sec, key, member)                                                   \
  Field {                                                                               \
    sec, key, [](PipelineConfig& c, const std::string& v) { c.member = count(v); },     \
        [](const PipelineConfig& c) { return std::to_string(c.member); }                \
  }
#define PATH_FIELD(sec, key, member)                                                    \
  Field {                                                                               \
    sec, key, [](PipelineConfig& c, const std::string& v) { c.member = v; },            \
        [](const PipelineConfig& c) { return c.member.generic_string(); }               \
  }

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      PATH_FIELD("paths", "cube", cube),
      PATH_FIELD("paths", "references", references),
      PATH_FIELD("paths", "model", model),
      PATH_FIELD("paths", "ground_truth", ground_truth),
      {"paths", "outlier_cubes",
       [](PipelineConfig& c, const std::string& v) {
         c.outlier_cubes.clear();
         for (const auto& part : io::split(v, ',')) {
           const auto t = io::trim(part);
           if (!t.empty()) c.outlier_cubes.emplace_back(std::string(t));
         }
       },
       [](const PipelineConfig& c) {
         std::string out;
         for (std::size_t i = 0; i < c.outlier_cubes.size(); ++i) {
           out += (i ? "," : "") + c.outlier_cubes[i].generic_string();
         }
         return out;
       }},
      PATH_FIELD("paths", "out", out),

      COUNT_FIELD("scene", "width", scene.width),
      COUNT_FIELD("scene", "height", scene.height),
      {"scene", "adulterant",
       [](PipelineConfig& c, const std::string& v) { c.scene.adulterant = parse_material(v); },
       [](const PipelineConfig& c) { return material_name(c.scene.adulterant); }},
      DOUBLE_FIELD("scene", "fraction", scene.fraction),
      DOUBLE_FIELD("scene", "grain_px", scene.grain_px),
      DOUBLE_FIELD("scene", "noise_sigma", scene.noise_sigma),
      DOUBLE_FIELD("scene", "roi_radius", scene.roi_radius),
      {"scene", "seed", [](PipelineConfig& c, const std::string& v) { c.scene.seed = seed(v); },
       [](const PipelineConfig& c) { return std::to_string(c.scene.seed); }},
      {"scene", "endmember_seed",
       [](PipelineConfig& c, const std::string& v) { c.endmember_seed = seed(v); },
       [](const PipelineConfig& c) { return std::to_string(c.endmember_seed); }},

      COUNT_FIELD("preprocess", "drop_leading", prep.drop_leading),
      COUNT_FIELD("preprocess", "savgol_window", prep.savgol.window),
      COUNT_FIELD("preprocess", "savgol_polyorder", prep.savgol.polyorder),
      {"preprocess", "scatter",
       [](PipelineConfig& c, const std::string& v) {
         if (v == "auto") {
           c.scatter.reset();
         } else {
           c.scatter = parse_scatter(v);
         }
       },
       [](const PipelineConfig& c) { return c.scatter ? scatter_name(*c.scatter) : "auto"; }},

      DOUBLE_FIELD("annotate", "band_nm", annotate.band_nm),
      COUNT_FIELD("annotate", "max_iter", annotate.max_iter),
      DOUBLE_FIELD("annotate", "relative_tol", annotate.relative_tol),
      DOUBLE_FIELD("annotate", "min_gap_fraction", annotate.min_gap_fraction),
      DOUBLE_FIELD("annotate", "min_bimodality", annotate.min_bimodality),
      {"annotate", "chili_reference",
       [](PipelineConfig& c, const std::string& v) {
         if (v.empty()) {
           c.annotate.chili_reference.reset();
         } else {
           c.annotate.chili_reference = io::parse_double(v);
         }
       },
       [](const PipelineConfig& c) {
         return c.annotate.chili_reference ? io::format_double(*c.annotate.chili_reference) : "";
       }},
      DOUBLE_FIELD("annotate", "adulterant_gap", annotate.adulterant_gap),

      {"pca", "components",
       [](PipelineConfig& c, const std::string& v) {
         if (!v.empty() && std::isdigit(static_cast<unsigned char>(v.front()))) {
           c.policy = ComponentPolicy::Fixed;
           c.fixed_components = count(v);
         } else {
           c.policy = parse_policy(v);
         }
       },
       [](const PipelineConfig& c) {
         return c.policy == ComponentPolicy::Fixed ? std::to_string(c.fixed_components)
                                                   : policy_name(c.policy);
       }},

      {"svm", "kernel",
       [](PipelineConfig& c, const std::string& v) { c.kernel.kind = parse_kernel(v); },
       [](const PipelineConfig& c) { return kernel_name(c.kernel.kind); }},
      DOUBLE_FIELD("svm", "gamma", kernel.gamma),
      {"svm", "degree",
       [](PipelineConfig& c, const std::string& v) { c.kernel.degree = static_cast<int>(io::parse_int(v)); },
       [](const PipelineConfig& c) { return std::to_string(c.kernel.degree); }},
      DOUBLE_FIELD("svm", "coef0", kernel.coef0),
      DOUBLE_FIELD("svm", "nu", nu),
      DOUBLE_FIELD("svm", "tol", solver.tol),
      COUNT_FIELD("svm", "max_updates", solver.max_updates),
      DOUBLE_FIELD("svm", "pixels_per_point", pixels_per_point),

      DOUBLE_FIELD("predict", "verdict_threshold", verdict_threshold),

      {"grid", "gammas", [](PipelineConfig& c, const std::string& v) { c.grid_gammas = doubles(v); },
       [](const PipelineConfig& c) { return join(c.grid_gammas); }},
      {"grid", "nus", [](PipelineConfig& c, const std::string& v) { c.grid_nus = doubles(v); },
       [](const PipelineConfig& c) { return join(c.grid_nus); }},

      {"report", "nus", [](PipelineConfig& c, const std::string& v) { c.sweep_nus = doubles(v); },
       [](const PipelineConfig& c) { return join(c.sweep_nus); }},

      COUNT_FIELD("run", "threads", threads),
  };
  return table;
}

#undef DOUBLE_FIELD
#undef COUNT_FIELD
#undef PATH_FIELD

[[noreturn]] void fail(const std::string& field, const std::string& why) {
  throw ConfigError(field + ": " + why);
}

void check_positive_list(const std::string& field, const std::vector<double>& v, bool unit) {
  if (v.empty()) fail(field, "list must not be empty");
  for (double x : v) {
    if (!(x > 0.0) || !std::isfinite(x) || (unit && x > 1.0)) {
      fail(field, "value " + io::format_double(x) + (unit ? " outside (0, 1]" : " must be > 0"));
    }
  }
}

}  // namespace

void PipelineConfig::validate() const {
  try {
    scene.validate();
  } catch (const InvalidArgument& e) {
    fail("scene", e.what());
  }
  try {
    prep.savgol.validate();
  } catch (const InvalidArgument& e) {
    fail("preprocess.savgol_window", e.what());
  }
  if (!(annotate.band_nm > 0.0)) fail("annotate.band_nm", "must be > 0");
  if (annotate.max_iter == 0) fail("annotate.max_iter", "must be >= 1");
  if (!(annotate.relative_tol > 0.0)) fail("annotate.relative_tol", "must be > 0");
  if (!(annotate.min_gap_fraction >= 0.0 && annotate.min_gap_fraction < 1.0)) {
    fail("annotate.min_gap_fraction", "must lie in [0, 1)");
  }
  if (!(annotate.min_bimodality >= 0.0)) fail("annotate.min_bimodality", "must be >= 0");
  if (!(annotate.adulterant_gap >= 0.0)) fail("annotate.adulterant_gap", "must be >= 0");
  if (policy == ComponentPolicy::Fixed && fixed_components == 0) fail("pca.components", "must be >= 1");
  try {
    kernel.validate();
  } catch (const InvalidArgument& e) {
    fail("svm.kernel", e.what());
  }
  if (!(nu > 0.0 && nu <= 1.0)) fail("svm.nu", "must lie in (0, 1], got " + io::format_double(nu));
  if (!(solver.tol > 0.0)) fail("svm.tol", "must be > 0");
  if (solver.max_updates == 0) fail("svm.max_updates", "must be >= 1");
  if (!(pixels_per_point >= 0.0) || !std::isfinite(pixels_per_point)) {
    fail("svm.pixels_per_point", "must be >= 0");
  }
  if (!(verdict_threshold >= 0.0 && verdict_threshold <= 1.0)) {
    fail("predict.verdict_threshold", "must lie in [0, 1]");
  }
  check_positive_list("grid.gammas", grid_gammas, false);
  check_positive_list("grid.nus", grid_nus, true);
  check_positive_list("report.nus", sweep_nus, true);
}

DetectorSettings PipelineConfig::detector_settings() const {
  DetectorSettings s;
  s.prep = prep;
  s.prep.scatter = scatter.value_or(ScatterMethod::Msc);
  s.policy = policy;
  s.fixed_components = fixed_components;
  s.kernel = kernel;
  s.nu = nu;
  s.solver = solver;
  s.pixels_per_point = pixels_per_point;
  return s;
}

PipelineConfig parse_config(std::string_view text, PipelineConfig base) {
  std::map<std::pair<std::string, std::string>, const Field*> index;
  for (const auto& f : fields()) index[{f.section, f.key}] = &f;

  std::string section;
  std::size_t line_no = 0;
  for (const auto& raw : io::split(text, '\n')) {
    ++line_no;
    auto line = io::trim(raw);
    if (line.empty() || line.front() == '#' || line.front() == ';') continue;
    const std::string where = "line " + std::to_string(line_no);
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(where + ": unterminated section header");
      section = std::string(io::trim(line.substr(1, line.size() - 2)));
      bool known = false;
      for (const auto& f : fields()) known = known || f.section == section;
      if (!known) throw ConfigError(where + ": unknown section [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError(where + ": expected key = value");
    const std::string key(io::trim(line.substr(0, eq)));
    const std::string value(io::trim(line.substr(eq + 1)));
    const auto it = index.find({section, key});
    const std::string name = section.empty() ? key : section + "." + key;
    if (it == index.end()) throw ConfigError(where + ": unknown key '" + name + "'");
    try {
      it->second->set(base, value);
    } catch (const std::exception& e) {
      throw ConfigError(name + ": " + e.what());
    }
  }
  return base;
}

PipelineConfig load_config(const std::filesystem::path& path, PipelineConfig base) {
  if (!std::filesystem::exists(path)) throw ConfigError("config file not found: " + path.string());
  return parse_config(io::read_file(path), std::move(base));
}

std::string print_config(const PipelineConfig& config) {
  std::string out;
  std::string section;
  for (const auto& f : fields()) {
    if (f.section != section) {
      if (!section.empty()) out += "\n";
      section = f.section;
      out += "[" + section + "]\n";
    }
    out += f.key + " = " + f.get(config) + "\n";
  }
  return out;
}

}  // namespace hsi
