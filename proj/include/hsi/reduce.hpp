#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include "hsi/hypercube.hpp"
#include "hsi/linalg.hpp"

namespace hsi {

/// Principal components of a set of spectra.
///
/// `loadings` holds one orthonormal row per component in descending
/// eigenvalue order; the largest-magnitude entry of each row is positive.
/// Every component is kept; callers choose how many to project onto.
struct PcaModel {
  Spectrum mean;
  Matrix loadings;
  std::vector<double> eigenvalues;
  std::vector<double> explained_ratio;

  std::size_t components() const { return loadings.rows(); }
  std::size_t bands() const { return loadings.cols(); }
};

/// Rows of `samples` are spectra on `wavelengths`. Covariance uses 1/(n-1).
PcaModel fit_pca(const Matrix& samples, const std::vector<double>& wavelengths);
PcaModel fit_pca(std::span<const Spectrum> spectra);

/// Number of leading components whose explained ratio beats the broken-stick
/// expectation, scanning until the first failure; at least 1.
std::size_t broken_stick_count(std::span<const double> eigenvalues);

/// Expected broken-stick share of component k (0-based) out of p.
double broken_stick_share(std::size_t k, std::size_t p);

/// n x m scores on the first m components.
Matrix project(const PcaModel& model, const Matrix& samples, std::size_t m);
Matrix project(const PcaModel& model, std::span<const Spectrum> spectra, std::size_t m);

/// Inverse of project: mean + scores * loadings[0..m).
Matrix reconstruct(const PcaModel& model, const Matrix& scores);

enum class ComponentPolicy { Fixed, BrokenStick, MaxOf2AndBrokenStick };

std::size_t retained_components(const PcaModel& model, ComponentPolicy policy,
                                std::size_t fixed = 2);

/// mean.csv, loadings.csv and eigenvalues.csv inside `dir`.
void save_pca(const PcaModel& model, const std::filesystem::path& dir);
PcaModel load_pca(const std::filesystem::path& dir);

}  // namespace hsi
