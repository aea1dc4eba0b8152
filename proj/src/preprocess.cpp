#include "hsi/preprocess.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numeric>
#include <utility>

#include "hsi/error.hpp"

namespace hsi {

void SavGolSpec::validate() const {
  if (window < 1 || window % 2 == 0) throw InvalidArgument("savgol window must be odd");
  if (polyorder >= window) throw InvalidArgument("savgol polyorder must be below the window");
}

namespace {

// Solves the symmetric positive definite system in place (Cholesky).
std::vector<double> solve_spd(std::vector<double> a, std::vector<double> b, std::size_t n) {
  for (std::size_t j = 0; j < n; ++j) {
    double d = a[j * n + j];
    for (std::size_t k = 0; k < j; ++k) d -= a[j * n + k] * a[j * n + k];
    if (!(d > 0.0)) throw Error("savgol normal equations are singular");
    d = std::sqrt(d);
    a[j * n + j] = d;
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = a[i * n + j];
      for (std::size_t k = 0; k < j; ++k) s -= a[i * n + k] * a[j * n + k];
      a[i * n + j] = s / d;
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    double s = b[i];
    for (std::size_t k = 0; k < i; ++k) s -= a[i * n + k] * b[k];
    b[i] = s / a[i * n + i];
  }
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t k = i + 1; k < n; ++k) s -= a[k * n + i] * b[k];
    b[i] = s / a[i * n + i];
  }
  return b;
}

}  // namespace

SavGolFilter::SavGolFilter(SavGolSpec spec) : spec_(spec) {
  spec_.validate();
  const std::size_t w = spec_.window;
  const std::size_t terms = spec_.polyorder + 1;
  const double half = static_cast<double>(w / 2);
  const double scale = half > 0.0 ? half : 1.0;

  // Scaled abscissae keep the normal matrix well conditioned.
  std::vector<double> t(w);
  for (std::size_t k = 0; k < w; ++k) t[k] = (static_cast<double>(k) - half) / scale;
  auto basis = [&](double x, std::size_t j) { return std::pow(x, static_cast<double>(j)); };

  std::vector<double> gram(terms * terms, 0.0);
  for (std::size_t i = 0; i < terms; ++i) {
    for (std::size_t j = 0; j < terms; ++j) {
      for (std::size_t k = 0; k < w; ++k) gram[i * terms + j] += basis(t[k], i) * basis(t[k], j);
    }
  }
  // weights(pos)[k] = e(t_pos)^T G^-1 e(t_k); solve G z = e(t_pos) once per pos.
  weights_.assign(w * w, 0.0);
  for (std::size_t pos = 0; pos < w; ++pos) {
    std::vector<double> rhs(terms);
    for (std::size_t j = 0; j < terms; ++j) rhs[j] = basis(t[pos], j);
    const auto z = solve_spd(gram, rhs, terms);
    for (std::size_t k = 0; k < w; ++k) {
      double s = 0.0;
      for (std::size_t j = 0; j < terms; ++j) s += z[j] * basis(t[k], j);
      weights_[pos * w + k] = s;
    }
  }
}

std::span<const double> SavGolFilter::weights(std::size_t pos) const {
  return {weights_.data() + pos * spec_.window, spec_.window};
}

void SavGolFilter::apply(std::span<const double> in, std::span<double> out) const {
  const std::size_t w = spec_.window;
  const std::size_t n = in.size();
  if (n < w) {
    throw InvalidArgument("savgol: spectrum has " + std::to_string(n) + " bands, window is " +
                          std::to_string(w));
  }
  if (out.size() != n) throw InvalidArgument("savgol: output length mismatch");
  const std::size_t half = w / 2;
  auto eval = [&](std::size_t start, std::size_t pos) {
    const auto wt = weights(pos);
    double s = 0.0;
    for (std::size_t k = 0; k < w; ++k) s += wt[k] * in[start + k];
    return s;
  };
  std::vector<double> tmp(n);
  for (std::size_t i = 0; i < half; ++i) tmp[i] = eval(0, i);
  for (std::size_t i = half; i + half < n; ++i) tmp[i] = eval(i - half, half);
  for (std::size_t i = n - half; i < n; ++i) tmp[i] = eval(n - w, i - (n - w));
  std::copy(tmp.begin(), tmp.end(), out.begin());
}

const SavGolFilter& savgol_filter(const SavGolSpec& spec) {
  static std::mutex mu;
  static std::map<std::pair<std::size_t, std::size_t>, std::unique_ptr<SavGolFilter>> cache;
  spec.validate();
  std::lock_guard lock(mu);
  auto& slot = cache[{spec.window, spec.polyorder}];
  if (!slot) slot = std::make_unique<SavGolFilter>(spec);
  return *slot;
}

Spectrum savgol(const Spectrum& s, const SavGolSpec& spec) {
  std::vector<double> out(s.size());
  savgol_filter(spec).apply(s.values(), out);
  return s.with_values(std::move(out));
}

// ---------------------------------------------------------------------------

void snv_inplace(std::span<double> v) {
  const std::size_t n = v.size();
  if (n < 2) throw InvalidArgument("snv needs at least two bands");
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(n);
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));
  if (!(sd > 0.0)) throw InvalidArgument("snv: spectrum has zero standard deviation");
  for (double& x : v) x = (x - mean) / sd;
}

Spectrum snv(const Spectrum& s) {
  std::vector<double> v = s.values();
  snv_inplace(v);
  return s.with_values(std::move(v));
}

MscReference msc_fit(std::span<const Spectrum> spectra) {
  if (spectra.size() < 2) throw InvalidArgument("msc_fit needs at least two spectra");
  const std::size_t n = spectra.front().size();
  std::vector<double> mean(n, 0.0);
  for (const auto& s : spectra) {
    if (s.size() != n) throw InvalidArgument("msc_fit: spectra differ in length");
    for (std::size_t b = 0; b < n; ++b) mean[b] += s[b];
  }
  for (double& m : mean) m /= static_cast<double>(spectra.size());
  for (double m : mean) {
    if (!std::isfinite(m)) throw InvalidArgument("msc_fit: non-finite mean spectrum");
  }
  const double mu = std::accumulate(mean.begin(), mean.end(), 0.0) / static_cast<double>(n);
  double var = 0.0;
  for (double m : mean) var += (m - mu) * (m - mu);
  if (!(var > 0.0)) throw InvalidArgument("msc_fit: reference spectrum is flat");
  return {spectra.front().with_values(std::move(mean))};
}

void msc_apply_inplace(std::span<double> v, std::span<const double> ref) {
  const std::size_t n = v.size();
  if (ref.size() != n) throw InvalidArgument("msc_apply: length differs from reference");
  double mr = 0.0;
  double ms = 0.0;
  for (std::size_t b = 0; b < n; ++b) {
    mr += ref[b];
    ms += v[b];
  }
  mr /= static_cast<double>(n);
  ms /= static_cast<double>(n);
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t b = 0; b < n; ++b) {
    sxy += (ref[b] - mr) * (v[b] - ms);
    sxx += (ref[b] - mr) * (ref[b] - mr);
  }
  if (!(sxx > 0.0)) throw InvalidArgument("msc_apply: reference is flat");
  const double slope = sxy / sxx;
  if (!(std::abs(slope) >= 1e-12)) {
    throw InvalidArgument("msc_apply: spectrum is uncorrelated with the reference");
  }
  const double offset = ms - slope * mr;
  for (double& x : v) x = (x - offset) / slope;
}

Spectrum msc_apply(const Spectrum& s, const MscReference& ref) {
  std::vector<double> v = s.values();
  msc_apply_inplace(v, ref.mean_spectrum.values());
  return s.with_values(std::move(v));
}

}  // namespace hsi
