#include "hsi/reduce.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "hsi/calibrate.hpp"
#include "hsi/error.hpp"
#include "hsi/io.hpp"

namespace hsi {

PcaModel fit_pca(const Matrix& samples, const std::vector<double>& wavelengths) {
  const std::size_t n = samples.rows();
  const std::size_t p = samples.cols();
  if (n < 2) throw InvalidArgument("fit_pca needs at least two spectra");
  if (wavelengths.size() != p) throw InvalidArgument("fit_pca: axis length differs from data");
  for (double v : samples.data()) {
    if (!std::isfinite(v)) throw InvalidArgument("fit_pca: non-finite value in data");
  }

  std::vector<double> mean(p, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = samples.row(i);
    for (std::size_t b = 0; b < p; ++b) mean[b] += r[b];
  }
  for (double& m : mean) m /= static_cast<double>(n);

  // Upper triangle in fixed row order, mirrored afterwards.
  Matrix cov(p, p);
  std::vector<double> centred(p);
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = samples.row(i);
    for (std::size_t b = 0; b < p; ++b) centred[b] = r[b] - mean[b];
    for (std::size_t a = 0; a < p; ++a) {
      const double ca = centred[a];
      double* dst = &cov(a, 0);
      for (std::size_t b = a; b < p; ++b) dst[b] += ca * centred[b];
    }
  }
  const double denom = static_cast<double>(n - 1);
  for (std::size_t a = 0; a < p; ++a) {
    for (std::size_t b = a; b < p; ++b) {
      cov(a, b) /= denom;
      cov(b, a) = cov(a, b);
    }
  }

  auto eig = jacobi_eigen(cov);
  PcaModel model;
  model.mean = Spectrum(std::move(mean), wavelengths);
  model.loadings = std::move(eig.vectors);
  model.eigenvalues = std::move(eig.values);
  for (double& v : model.eigenvalues) v = std::max(v, 0.0);
  for (std::size_t c = 0; c < p; ++c) {
    auto row = model.loadings.row(c);
    std::size_t big = 0;
    for (std::size_t b = 1; b < p; ++b) {
      if (std::abs(row[b]) > std::abs(row[big])) big = b;
    }
    if (row[big] < 0.0) {
      for (double& x : row) x = -x;
    }
  }
  const double trace = std::accumulate(model.eigenvalues.begin(), model.eigenvalues.end(), 0.0);
  model.explained_ratio.resize(p);
  for (std::size_t c = 0; c < p; ++c) {
    model.explained_ratio[c] = trace > 0.0 ? model.eigenvalues[c] / trace : 0.0;
  }
  return model;
}

namespace {

Matrix stack(std::span<const Spectrum> spectra) {
  if (spectra.empty()) return {};
  const std::size_t p = spectra.front().size();
  Matrix m(spectra.size(), p);
  for (std::size_t i = 0; i < spectra.size(); ++i) {
    if (spectra[i].size() != p) throw InvalidArgument("spectra differ in length");
    std::copy(spectra[i].values().begin(), spectra[i].values().end(), m.row(i).begin());
  }
  return m;
}

}  // namespace

PcaModel fit_pca(std::span<const Spectrum> spectra) {
  if (spectra.size() < 2) throw InvalidArgument("fit_pca needs at least two spectra");
  return fit_pca(stack(spectra), spectra.front().wavelengths());
}

double broken_stick_share(std::size_t k, std::size_t p) {
  double s = 0.0;
  for (std::size_t i = k + 1; i <= p; ++i) s += 1.0 / static_cast<double>(i);
  return s / static_cast<double>(p);
}

std::size_t broken_stick_count(std::span<const double> eigenvalues) {
  if (eigenvalues.empty()) throw InvalidArgument("broken_stick_count: no eigenvalues");
  double total = 0.0;
  for (double v : eigenvalues) total += std::max(v, 0.0);
  if (!(total > 0.0)) throw InvalidArgument("broken_stick_count: all eigenvalues are zero");
  const std::size_t p = eigenvalues.size();
  std::size_t m = 0;
  while (m < p && std::max(eigenvalues[m], 0.0) / total > broken_stick_share(m, p)) ++m;
  return std::max<std::size_t>(m, 1);
}

Matrix project(const PcaModel& model, const Matrix& samples, std::size_t m) {
  if (m > model.components()) {
    throw InvalidArgument("cannot project onto " + std::to_string(m) + " of " +
                          std::to_string(model.components()) + " components");
  }
  if (samples.cols() != model.bands()) throw InvalidArgument("project: band count mismatch");
  const auto& mean = model.mean.values();
  Matrix scores(samples.rows(), m);
  std::vector<double> centred(model.bands());
  for (std::size_t i = 0; i < samples.rows(); ++i) {
    const auto r = samples.row(i);
    for (std::size_t b = 0; b < centred.size(); ++b) centred[b] = r[b] - mean[b];
    for (std::size_t c = 0; c < m; ++c) scores(i, c) = dot(centred, model.loadings.row(c));
  }
  return scores;
}

Matrix project(const PcaModel& model, std::span<const Spectrum> spectra, std::size_t m) {
  return project(model, stack(spectra), m);
}

Matrix reconstruct(const PcaModel& model, const Matrix& scores) {
  const std::size_t m = scores.cols();
  if (m > model.components()) throw InvalidArgument("reconstruct: too many score columns");
  Matrix out(scores.rows(), model.bands());
  for (std::size_t i = 0; i < scores.rows(); ++i) {
    auto r = out.row(i);
    std::copy(model.mean.values().begin(), model.mean.values().end(), r.begin());
    for (std::size_t c = 0; c < m; ++c) {
      const double s = scores(i, c);
      const auto l = model.loadings.row(c);
      for (std::size_t b = 0; b < r.size(); ++b) r[b] += s * l[b];
    }
  }
  return out;
}

std::size_t retained_components(const PcaModel& model, ComponentPolicy policy, std::size_t fixed) {
  std::size_t m = 0;
  switch (policy) {
    case ComponentPolicy::Fixed: m = fixed; break;
    case ComponentPolicy::BrokenStick: m = broken_stick_count(model.eigenvalues); break;
    case ComponentPolicy::MaxOf2AndBrokenStick:
      m = std::max<std::size_t>(2, broken_stick_count(model.eigenvalues));
      break;
  }
  if (m == 0 || m > model.components()) {
    throw InvalidArgument("retained component count " + std::to_string(m) + " out of range");
  }
  return m;
}

void save_pca(const PcaModel& model, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  save_spectrum_csv(model.mean, dir / "mean.csv", "mean");

  io::CsvWriter loadings({"component", "band", "wavelength_nm", "loading"});
  for (std::size_t c = 0; c < model.components(); ++c) {
    for (std::size_t b = 0; b < model.bands(); ++b) {
      loadings.row({std::to_string(c), std::to_string(b),
                    io::format_double(model.mean.wavelengths()[b]),
                    io::format_double(model.loadings(c, b))});
    }
  }
  loadings.save(dir / "loadings.csv");

  io::CsvWriter eig({"component", "eigenvalue", "explained_ratio"});
  for (std::size_t c = 0; c < model.eigenvalues.size(); ++c) {
    eig.row({std::to_string(c), io::format_double(model.eigenvalues[c]),
             io::format_double(model.explained_ratio[c])});
  }
  eig.save(dir / "eigenvalues.csv");
}

PcaModel load_pca(const std::filesystem::path& dir) {
  PcaModel model;
  model.mean = load_spectrum_csv(dir / "mean.csv");
  const std::size_t p = model.mean.size();

  const auto eig = io::read_csv(dir / "eigenvalues.csv");
  const auto ce = eig.column("eigenvalue");
  const auto cr = eig.column("explained_ratio");
  for (const auto& row : eig.rows) {
    model.eigenvalues.push_back(io::parse_double(row[ce]));
    model.explained_ratio.push_back(io::parse_double(row[cr]));
  }

  const auto lt = io::read_csv(dir / "loadings.csv");
  const auto cc = lt.column("component");
  const auto cb = lt.column("band");
  const auto cl = lt.column("loading");
  const std::size_t k = model.eigenvalues.size();
  model.loadings = Matrix(k, p);
  if (lt.rows.size() != k * p) throw FormatError("loadings.csv: expected " + std::to_string(k * p) + " rows");
  for (const auto& row : lt.rows) {
    const auto c = static_cast<std::size_t>(io::parse_int(row[cc]));
    const auto b = static_cast<std::size_t>(io::parse_int(row[cb]));
    if (c >= k || b >= p) throw FormatError("loadings.csv: index out of range");
    model.loadings(c, b) = io::parse_double(row[cl]);
  }
  return model;
}

}  // namespace hsi
