#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hsi/linalg.hpp"

namespace hsi {

enum class KernelKind { Linear, Polynomial, Rbf };

std::string kernel_name(KernelKind k);
KernelKind parse_kernel(const std::string& name);

struct KernelSpec {
  KernelKind kind = KernelKind::Rbf;
  double gamma = 0.1;  // Polynomial, Rbf
  int degree = 3;      // Polynomial
  double coef0 = 0.0;  // Polynomial

  static KernelSpec linear() { return {KernelKind::Linear, 0.0, 0, 0.0}; }
  static KernelSpec rbf(double gamma) { return {KernelKind::Rbf, gamma, 0, 0.0}; }
  static KernelSpec polynomial(double gamma, int degree, double coef0 = 0.0) {
    return {KernelKind::Polynomial, gamma, degree, coef0};
  }

  void validate() const;
  friend bool operator==(const KernelSpec&, const KernelSpec&) = default;
};

double kernel_eval(const KernelSpec& spec, std::span<const double> a, std::span<const double> b);

struct TrainOptions {
  double tol = 1e-6;
  std::size_t max_updates = 1'000'000;
};

struct TrainStats {
  std::size_t updates = 0;
  double max_violation = 0.0;
  double objective = 0.0;
  /// nu * n < 1: the box 1/(nu n) exceeds 1 and never binds.
  bool vacuous_bound = false;
};

/// One-class nu-SVM in the normalised dual: sum(alpha) = 1, 0 <= alpha <= 1/(nu n).
struct OcsvmModel {
  Matrix support_vectors;
  std::vector<double> alphas;
  double rho = 0.0;
  double nu = 0.0;
  KernelSpec kernel;
  std::size_t n_train = 0;
  TrainStats stats;

  double upper_bound() const { return 1.0 / (nu * static_cast<double>(n_train)); }
  std::size_t dims() const { return support_vectors.cols(); }
};

/// Full training output: the model plus per-point dual values and decisions
/// (needed to check the nu-property on the training set).
struct TrainResult {
  OcsvmModel model;
  std::vector<double> alpha;     // per training point
  std::vector<double> decision;  // sum_j alpha_j k(x_j, x_i) - rho
};

/// Pairwise coordinate descent on the maximal KKT-violating pair.
TrainResult train_full(const Matrix& points, double nu, const KernelSpec& kernel,
                       const TrainOptions& options = {});
OcsvmModel train(const Matrix& points, double nu, const KernelSpec& kernel,
                 const TrainOptions& options = {});

/// sum_i alpha_i k(sv_i, x) - rho; inlier iff >= 0.
double decide(const OcsvmModel& model, std::span<const double> x);
std::vector<double> decide_all(const OcsvmModel& model, const Matrix& points);

enum class Expected { Inlier, Outlier };

std::string expected_name(Expected e);

double accuracy(const OcsvmModel& model, const Matrix& points, Expected expected);

struct EvalSet {
  std::string name;
  Matrix points;
  Expected expected = Expected::Outlier;
};

struct GridCell {
  double gamma = 0.0;
  double nu = 0.0;
  std::vector<double> accuracies;  // per eval set, in input order
  double criterion = 0.0;          // min of accuracies
  double sv_fraction = 0.0;
  double margin_error_fraction = 0.0;
  std::optional<std::string> error;
};

struct GridSearchReport {
  std::vector<std::string> set_names;
  std::vector<GridCell> grid;
  std::optional<std::size_t> best;  // index into grid

  void save_csv(const std::filesystem::path& path) const;
};

/// Trains one model per (gamma, nu); the best cell maximises the minimum
/// accuracy across eval sets, ties to smaller gamma then smaller nu.
/// `base` supplies the kernel kind plus degree/coef0 for polynomials.
GridSearchReport grid_search(const Matrix& train_points, std::span<const EvalSet> eval_sets,
                             std::span<const double> gammas, std::span<const double> nus,
                             const KernelSpec& base, const TrainOptions& options = {});

struct SweepRow {
  double nu = 0.0;
  double criterion = 0.0;
  double sv_fraction = 0.0;
  double margin_error_fraction = 0.0;
  std::optional<std::string> error;
};

std::vector<SweepRow> nu_sweep(const Matrix& train_points, std::span<const EvalSet> eval_sets,
                               const KernelSpec& kernel, std::span<const double> nus,
                               const TrainOptions& options = {});
void save_sweep_csv(std::span<const SweepRow> rows, const std::filesystem::path& path);

/// svs.csv, alphas.csv and meta.csv inside `dir`.
void save_ocsvm(const OcsvmModel& model, const std::filesystem::path& dir);
OcsvmModel load_ocsvm(const std::filesystem::path& dir);

}  // namespace hsi
