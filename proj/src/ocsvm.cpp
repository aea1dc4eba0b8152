#include "hsi/ocsvm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "hsi/error.hpp"
#include "hsi/io.hpp"
#include "hsi/parallel.hpp"

namespace hsi {

std::string kernel_name(KernelKind k) {
  switch (k) {
    case KernelKind::Linear: return "linear";
    case KernelKind::Polynomial: return "polynomial";
    case KernelKind::Rbf: return "rbf";
  }
  return "?";
}

KernelKind parse_kernel(const std::string& name) {
  if (name == "linear") return KernelKind::Linear;
  if (name == "polynomial" || name == "poly") return KernelKind::Polynomial;
  // Gaussian and RBF are the same kernel.
  if (name == "rbf" || name == "gaussian") return KernelKind::Rbf;
  throw InvalidArgument("unknown kernel '" + name + "'");
}

void KernelSpec::validate() const {
  if (kind == KernelKind::Linear) return;
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw InvalidArgument("kernel gamma must be > 0");
  if (kind == KernelKind::Polynomial) {
    if (degree < 1) throw InvalidArgument("polynomial degree must be >= 1");
    if (!std::isfinite(coef0)) throw InvalidArgument("polynomial coef0 must be finite");
  }
}

double kernel_eval(const KernelSpec& spec, std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw InvalidArgument("kernel_eval: dimension mismatch");
  switch (spec.kind) {
    case KernelKind::Linear: return dot(a, b);
    case KernelKind::Polynomial: {
      const double base = spec.gamma * dot(a, b) + spec.coef0;
      double r = 1.0;
      for (int i = 0; i < spec.degree; ++i) r *= base;
      return r;
    }
    case KernelKind::Rbf: {
      double d2 = 0.0;
      for (std::size_t i = 0; i < a.size(); ++i) d2 += (a[i] - b[i]) * (a[i] - b[i]);
      return std::exp(-spec.gamma * d2);
    }
  }
  return 0.0;
}

// ---------------------------------------------------------------------------
// Solver

TrainResult train_full(const Matrix& points, double nu, const KernelSpec& kernel,
                       const TrainOptions& options) {
  kernel.validate();
  const std::size_t n = points.rows();
  if (n < 2) throw InvalidArgument("train needs at least two points");
  if (!(nu > 0.0 && nu <= 1.0)) throw InvalidArgument("nu must lie in (0, 1]");
  for (double v : points.data()) {
    if (!std::isfinite(v)) throw InvalidArgument("train: non-finite input");
  }
  const double bound = 1.0 / (nu * static_cast<double>(n));

  Matrix q(n, n);
  parallel_for(n, [&](std::size_t i) {
    for (std::size_t j = 0; j < n; ++j) q(i, j) = kernel_eval(kernel, points.row(i), points.row(j));
  });

  // Fill the box greedily from the first point so that sum(alpha) = 1.
  std::vector<double> alpha(n, 0.0);
  double remaining = 1.0;
  for (std::size_t i = 0; i < n && remaining > 0.0; ++i) {
    alpha[i] = std::min(bound, remaining);
    remaining -= alpha[i];
  }
  std::vector<double> grad(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    if (alpha[j] == 0.0) continue;
    for (std::size_t t = 0; t < n; ++t) grad[t] += alpha[j] * q(t, j);
  }

  TrainStats stats;
  stats.vacuous_bound = bound >= 1.0;
  while (true) {
    // i: smallest gradient that may still grow; j: largest that may shrink.
    std::size_t up = n;
    std::size_t low = n;
    for (std::size_t t = 0; t < n; ++t) {
      if (alpha[t] < bound && (up == n || grad[t] < grad[up])) up = t;
      if (alpha[t] > 0.0 && (low == n || grad[t] > grad[low])) low = t;
    }
    const double violation = (up == n || low == n) ? 0.0 : grad[low] - grad[up];
    stats.max_violation = violation;
    if (violation < options.tol) break;
    if (stats.updates == options.max_updates) {
      throw ConvergenceError("one-class SVM did not reach tol " + io::format_double(options.tol) +
                             " within " + std::to_string(options.max_updates) +
                             " updates (violation " + io::format_double(violation) + ")");
    }
    ++stats.updates;
    const double curvature = std::max(q(up, up) + q(low, low) - 2.0 * q(up, low), 1e-12);
    double delta = violation / curvature;
    delta = std::min({delta, bound - alpha[up], alpha[low]});
    if (delta == bound - alpha[up]) {
      alpha[up] = bound;
    } else {
      alpha[up] += delta;
    }
    if (delta == alpha[low]) {
      alpha[low] = 0.0;
    } else {
      alpha[low] -= delta;
    }
    for (std::size_t t = 0; t < n; ++t) grad[t] += delta * (q(t, up) - q(t, low));
  }

  // rho from the free vectors; otherwise the middle of the KKT interval.
  constexpr double kFreeSlack = 1e-10;
  double free_sum = 0.0;
  std::size_t free_count = 0;
  double upper_max = -std::numeric_limits<double>::infinity();
  double zero_min = std::numeric_limits<double>::infinity();
  for (std::size_t t = 0; t < n; ++t) {
    if (alpha[t] > 0.0 && alpha[t] < bound - kFreeSlack) {
      free_sum += grad[t];
      ++free_count;
    } else if (alpha[t] > 0.0) {
      upper_max = std::max(upper_max, grad[t]);
    } else {
      zero_min = std::min(zero_min, grad[t]);
    }
  }
  double rho = 0.0;
  if (free_count > 0) {
    rho = free_sum / static_cast<double>(free_count);
  } else if (std::isfinite(upper_max) && std::isfinite(zero_min)) {
    rho = 0.5 * (upper_max + zero_min);
  } else {
    rho = std::isfinite(upper_max) ? upper_max : zero_min;
  }

  stats.objective = 0.5 * dot(alpha, grad);

  TrainResult out;
  out.alpha = alpha;
  out.decision.resize(n);
  for (std::size_t t = 0; t < n; ++t) out.decision[t] = grad[t] - rho;

  OcsvmModel& m = out.model;
  const std::size_t sv_count =
      static_cast<std::size_t>(std::count_if(alpha.begin(), alpha.end(), [](double a) { return a > 0.0; }));
  m.support_vectors = Matrix(sv_count, points.cols());
  std::size_t k = 0;
  for (std::size_t t = 0; t < n; ++t) {
    if (alpha[t] <= 0.0) continue;
    std::copy(points.row(t).begin(), points.row(t).end(), m.support_vectors.row(k).begin());
    m.alphas.push_back(alpha[t]);
    ++k;
  }
  m.rho = rho;
  m.nu = nu;
  m.kernel = kernel;
  m.n_train = n;
  m.stats = stats;
  return out;
}

OcsvmModel train(const Matrix& points, double nu, const KernelSpec& kernel,
                 const TrainOptions& options) {
  return train_full(points, nu, kernel, options).model;
}

double decide(const OcsvmModel& model, std::span<const double> x) {
  if (x.size() != model.dims()) throw InvalidArgument("decide: dimension mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < model.alphas.size(); ++i) {
    s += model.alphas[i] * kernel_eval(model.kernel, model.support_vectors.row(i), x);
  }
  return s - model.rho;
}

std::vector<double> decide_all(const OcsvmModel& model, const Matrix& points) {
  if (points.rows() > 0 && points.cols() != model.dims()) {
    throw InvalidArgument("decide: dimension mismatch");
  }
  std::vector<double> out(points.rows());
  parallel_for(points.rows(), [&](std::size_t i) { out[i] = decide(model, points.row(i)); });
  return out;
}

std::string expected_name(Expected e) { return e == Expected::Inlier ? "inlier" : "outlier"; }

double accuracy(const OcsvmModel& model, const Matrix& points, Expected expected) {
  if (points.rows() == 0) throw InvalidArgument("accuracy: empty point set");
  const auto scores = decide_all(model, points);
  std::size_t hits = 0;
  for (double s : scores) {
    const bool inlier = s >= 0.0;
    if (inlier == (expected == Expected::Inlier)) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(points.rows());
}

// ---------------------------------------------------------------------------
// Model selection

namespace {

struct Evaluated {
  double criterion = 0.0;
  std::vector<double> accuracies;
  double sv_fraction = 0.0;
  double margin_error_fraction = 0.0;
};

Evaluated evaluate(const Matrix& train_points, std::span<const EvalSet> eval_sets, double nu,
                   const KernelSpec& kernel, const TrainOptions& options) {
  const auto result = train_full(train_points, nu, kernel, options);
  Evaluated e;
  const double n = static_cast<double>(train_points.rows());
  e.sv_fraction = static_cast<double>(result.model.alphas.size()) / n;
  e.margin_error_fraction =
      static_cast<double>(std::count_if(result.decision.begin(), result.decision.end(),
                                        [](double d) { return d < 0.0; })) /
      n;
  e.criterion = std::numeric_limits<double>::infinity();
  for (const auto& set : eval_sets) {
    e.accuracies.push_back(accuracy(result.model, set.points, set.expected));
    e.criterion = std::min(e.criterion, e.accuracies.back());
  }
  return e;
}

void check_sets(std::span<const EvalSet> eval_sets) {
  if (eval_sets.empty()) throw InvalidArgument("at least one evaluation set is required");
  for (const auto& s : eval_sets) {
    if (s.points.rows() == 0) throw InvalidArgument("evaluation set '" + s.name + "' is empty");
  }
}

}  // namespace

GridSearchReport grid_search(const Matrix& train_points, std::span<const EvalSet> eval_sets,
                             std::span<const double> gammas, std::span<const double> nus,
                             const KernelSpec& base, const TrainOptions& options) {
  if (gammas.empty() || nus.empty()) throw InvalidArgument("grid_search: empty grid");
  check_sets(eval_sets);
  GridSearchReport report;
  for (const auto& s : eval_sets) report.set_names.push_back(s.name);
  for (double gamma : gammas) {
    for (double nu : nus) {
      GridCell cell;
      cell.gamma = gamma;
      cell.nu = nu;
      KernelSpec k = base;
      k.gamma = gamma;
      try {
        auto e = evaluate(train_points, eval_sets, nu, k, options);
        cell.accuracies = std::move(e.accuracies);
        cell.criterion = e.criterion;
        cell.sv_fraction = e.sv_fraction;
        cell.margin_error_fraction = e.margin_error_fraction;
      } catch (const Error& err) {
        cell.error = err.what();
      }
      report.grid.push_back(std::move(cell));
    }
  }
  for (std::size_t i = 0; i < report.grid.size(); ++i) {
    const auto& c = report.grid[i];
    if (c.error) continue;
    if (!report.best) {
      report.best = i;
      continue;
    }
    const auto& b = report.grid[*report.best];
    const bool better =
        c.criterion > b.criterion ||
        (c.criterion == b.criterion &&
         (c.gamma < b.gamma || (c.gamma == b.gamma && c.nu < b.nu)));
    if (better) report.best = i;
  }
  return report;
}

void GridSearchReport::save_csv(const std::filesystem::path& path) const {
  std::vector<std::string> header = {"gamma", "nu"};
  for (const auto& n : set_names) header.push_back("acc_" + n);
  header.insert(header.end(), {"criterion", "sv_fraction", "margin_error_fraction", "best", "error"});
  io::CsvWriter csv(header);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto& c = grid[i];
    std::vector<std::string> row = {io::format_double(c.gamma), io::format_double(c.nu)};
    for (std::size_t s = 0; s < set_names.size(); ++s) {
      row.push_back(c.error ? "" : io::format_double(c.accuracies[s]));
    }
    row.push_back(c.error ? "" : io::format_double(c.criterion));
    row.push_back(c.error ? "" : io::format_double(c.sv_fraction));
    row.push_back(c.error ? "" : io::format_double(c.margin_error_fraction));
    row.push_back(best && *best == i ? "1" : "0");
    std::string err = c.error.value_or("");
    std::replace(err.begin(), err.end(), ',', ';');
    row.push_back(err);
    csv.row(row);
  }
  csv.save(path);
}

std::vector<SweepRow> nu_sweep(const Matrix& train_points, std::span<const EvalSet> eval_sets,
                               const KernelSpec& kernel, std::span<const double> nus,
                               const TrainOptions& options) {
  if (nus.empty()) throw InvalidArgument("nu_sweep: empty nu list");
  check_sets(eval_sets);
  std::vector<SweepRow> rows;
  for (double nu : nus) {
    SweepRow row;
    row.nu = nu;
    try {
      const auto e = evaluate(train_points, eval_sets, nu, kernel, options);
      row.criterion = e.criterion;
      row.sv_fraction = e.sv_fraction;
      row.margin_error_fraction = e.margin_error_fraction;
    } catch (const Error& err) {
      row.error = err.what();
    }
    rows.push_back(row);
  }
  return rows;
}

void save_sweep_csv(std::span<const SweepRow> rows, const std::filesystem::path& path) {
  io::CsvWriter csv({"nu", "min_accuracy", "sv_fraction", "margin_error_fraction", "error"});
  for (const auto& r : rows) {
    std::string err = r.error.value_or("");
    std::replace(err.begin(), err.end(), ',', ';');
    csv.row({io::format_double(r.nu), r.error ? "" : io::format_double(r.criterion),
             r.error ? "" : io::format_double(r.sv_fraction),
             r.error ? "" : io::format_double(r.margin_error_fraction), err});
  }
  csv.save(path);
}

// ---------------------------------------------------------------------------
// Persistence

void save_ocsvm(const OcsvmModel& model, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::vector<std::string> header = {"sv"};
  for (std::size_t d = 0; d < model.dims(); ++d) header.push_back("x" + std::to_string(d));
  io::CsvWriter svs(header);
  io::CsvWriter alphas({"sv", "alpha"});
  for (std::size_t i = 0; i < model.alphas.size(); ++i) {
    std::vector<std::string> row = {std::to_string(i)};
    for (double v : model.support_vectors.row(i)) row.push_back(io::format_double(v));
    svs.row(row);
    alphas.row({std::to_string(i), io::format_double(model.alphas[i])});
  }
  svs.save(dir / "svs.csv");
  alphas.save(dir / "alphas.csv");

  io::CsvWriter meta({"key", "value"});
  meta.row({"kernel", kernel_name(model.kernel.kind)});
  meta.row({"gamma", io::format_double(model.kernel.gamma)});
  meta.row({"degree", std::to_string(model.kernel.degree)});
  meta.row({"coef0", io::format_double(model.kernel.coef0)});
  meta.row({"nu", io::format_double(model.nu)});
  meta.row({"rho", io::format_double(model.rho)});
  meta.row({"n_train", std::to_string(model.n_train)});
  meta.row({"dims", std::to_string(model.dims())});
  meta.save(dir / "meta.csv");
}

OcsvmModel load_ocsvm(const std::filesystem::path& dir) {
  const auto meta_table = io::read_csv(dir / "meta.csv");
  std::map<std::string, std::string> meta;
  for (const auto& row : meta_table.rows) meta[row[0]] = row[1];
  auto get = [&](const std::string& key) {
    const auto it = meta.find(key);
    if (it == meta.end()) throw FormatError("meta.csv missing '" + key + "'");
    return it->second;
  };
  OcsvmModel m;
  m.kernel.kind = parse_kernel(get("kernel"));
  m.kernel.gamma = io::parse_double(get("gamma"));
  m.kernel.degree = static_cast<int>(io::parse_int(get("degree")));
  m.kernel.coef0 = io::parse_double(get("coef0"));
  m.nu = io::parse_double(get("nu"));
  m.rho = io::parse_double(get("rho"));
  m.n_train = static_cast<std::size_t>(io::parse_int(get("n_train")));
  const auto dims = static_cast<std::size_t>(io::parse_int(get("dims")));

  const auto svs = io::read_csv(dir / "svs.csv");
  const auto alphas = io::read_csv(dir / "alphas.csv");
  if (svs.rows.size() != alphas.rows.size()) throw FormatError("svs.csv and alphas.csv differ in length");
  if (svs.header.size() != dims + 1) throw FormatError("svs.csv width does not match dims");
  m.support_vectors = Matrix(svs.rows.size(), dims);
  for (std::size_t i = 0; i < svs.rows.size(); ++i) {
    for (std::size_t d = 0; d < dims; ++d) m.support_vectors(i, d) = io::parse_double(svs.rows[i][d + 1]);
    m.alphas.push_back(io::parse_double(alphas.rows[i][alphas.column("alpha")]));
  }
  return m;
}

}  // namespace hsi
