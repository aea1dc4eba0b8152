#pragma once

#include <span>
#include <vector>

#include "hsi/hypercube.hpp"

namespace hsi {

struct SavGolSpec {
  std::size_t window = 11;
  std::size_t polyorder = 3;

  void validate() const;
  friend bool operator==(const SavGolSpec&, const SavGolSpec&) = default;
};

/// Precomputed Savitzky-Golay smoothing weights for one window geometry.
///
/// Interior samples use the centred weights. The first and last half-window
/// samples are evaluated from the polynomial fitted to the first/last full
/// window, so every polynomial of degree <= polyorder passes through unchanged.
class SavGolFilter {
 public:
  explicit SavGolFilter(SavGolSpec spec);

  const SavGolSpec& spec() const { return spec_; }
  /// Weights that evaluate the window fit at window offset `pos` (0..window-1).
  std::span<const double> weights(std::size_t pos) const;

  void apply(std::span<const double> in, std::span<double> out) const;

 private:
  SavGolSpec spec_;
  std::vector<double> weights_;  // window x window, row = evaluation position
};

/// Shared filter for `spec`; built once per geometry.
const SavGolFilter& savgol_filter(const SavGolSpec& spec);

Spectrum savgol(const Spectrum& s, const SavGolSpec& spec = {});

/// (s - mean) / sample std, n-1 denominator.
Spectrum snv(const Spectrum& s);
void snv_inplace(std::span<double> v);

struct MscReference {
  Spectrum mean_spectrum;
};

MscReference msc_fit(std::span<const Spectrum> spectra);

/// Least-squares fit s ~ a + b*ref, returns (s - a) / b.
Spectrum msc_apply(const Spectrum& s, const MscReference& ref);
void msc_apply_inplace(std::span<double> v, std::span<const double> ref);

enum class ScatterMethod { None, Snv, Msc };

}  // namespace hsi
