#include <gtest/gtest.h>

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <random>

#include "hsi/error.hpp"
#include "hsi/linalg.hpp"
#include "hsi/reduce.hpp"
#include "support.hpp"

namespace hsi {
namespace {

std::vector<double> axis_of(std::size_t p) { return test::linear_axis(p, 400.0, 1.0); }

TEST(Jacobi, MatchesEigenOnSmallSymmetricMatrices) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t p = 1 + trial % 8;
    const Matrix x = test::random_matrix(p + 5, p, rng);
    Matrix cov(p, p);
    Eigen::MatrixXd e(p, p);
    for (std::size_t i = 0; i < p; ++i) {
      for (std::size_t j = 0; j < p; ++j) {
        double s = 0.0;
        for (std::size_t r = 0; r < x.rows(); ++r) s += x(r, i) * x(r, j);
        cov(i, j) = e(i, j) = s / static_cast<double>(x.rows() - 1);
      }
    }
    const SymmetricEigen got = jacobi_eigen(cov);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> oracle(e);
    Eigen::VectorXd want = oracle.eigenvalues().reverse();
    for (std::size_t k = 0; k < p; ++k) {
      ASSERT_NEAR(got.values[k], want(static_cast<Eigen::Index>(k)), 1e-8);
      // A v = lambda v for the returned vector.
      for (std::size_t i = 0; i < p; ++i) {
        double av = 0.0;
        for (std::size_t j = 0; j < p; ++j) av += cov(i, j) * got.vectors(k, j);
        ASSERT_NEAR(av, got.values[k] * got.vectors(k, i), 1e-8);
      }
    }
  }
}

TEST(FitPca, RankOneData) {
  const std::vector<double> v = {0.6, 0.0, -0.8};
  Matrix x(20, 3);
  for (std::size_t r = 0; r < 20; ++r) {
    const double t = static_cast<double>(r) - 7.5;
    for (std::size_t c = 0; c < 3; ++c) x(r, c) = t * v[c];
  }
  const PcaModel m = fit_pca(x, axis_of(3));
  EXPECT_GT(m.eigenvalues[0], 0.0);
  EXPECT_NEAR(m.eigenvalues[1], 0.0, 1e-10);
  EXPECT_NEAR(m.eigenvalues[2], 0.0, 1e-10);
  EXPECT_NEAR(m.explained_ratio[0], 1.0, 1e-12);
  // Largest-magnitude entry positive: -v.
  EXPECT_NEAR(m.loadings(0, 0), -0.6, 1e-12);
  EXPECT_NEAR(m.loadings(0, 2), 0.8, 1e-12);
}

TEST(FitPca, IsotropicCloud) {
  std::mt19937_64 rng(37);
  const Matrix x = test::random_matrix(10000, 3, rng);
  const PcaModel m = fit_pca(x, axis_of(3));
  EXPECT_LT((m.eigenvalues[0] - m.eigenvalues[2]) / m.eigenvalues[0], 0.2);
}

TEST(FitPca, Preconditions) {
  EXPECT_THROW(fit_pca(Matrix(1, 3), axis_of(3)), InvalidArgument);
  EXPECT_THROW(fit_pca(Matrix(4, 3), axis_of(2)), InvalidArgument);
  Matrix bad(3, 2, 1.0);
  bad(1, 1) = std::nan("");
  EXPECT_THROW(fit_pca(bad, axis_of(2)), InvalidArgument);
}

TEST(FitPca, InvariantsOnRandomData) {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t p = 3 + trial % 10;
    const std::size_t n = 30 + 7 * static_cast<std::size_t>(trial);
    Matrix x = test::random_matrix(n, p, rng);
    // Correlate the columns a little.
    for (std::size_t r = 0; r < n; ++r) {
      for (std::size_t c = 1; c < p; ++c) x(r, c) += 0.5 * x(r, c - 1);
    }
    const PcaModel m = fit_pca(x, axis_of(p));

    // Orthonormal loadings, descending non-negative eigenvalues, sign rule.
    for (std::size_t i = 0; i < p; ++i) {
      for (std::size_t j = 0; j < p; ++j) {
        ASSERT_NEAR(dot(m.loadings.row(i), m.loadings.row(j)), i == j ? 1.0 : 0.0, 1e-8);
      }
      const auto row = m.loadings.row(i);
      const auto big = std::max_element(row.begin(), row.end(),
                                        [](double a, double b) { return std::fabs(a) < std::fabs(b); });
      ASSERT_GT(*big, 0.0);
      ASSERT_GE(m.eigenvalues[i], 0.0);
      if (i) ASSERT_LE(m.eigenvalues[i], m.eigenvalues[i - 1]);
    }

    // Trace identity.
    double total = 0.0;
    for (std::size_t c = 0; c < p; ++c) {
      double mean = 0.0;
      for (std::size_t r = 0; r < n; ++r) mean += x(r, c);
      mean /= static_cast<double>(n);
      for (std::size_t r = 0; r < n; ++r) total += (x(r, c) - mean) * (x(r, c) - mean);
    }
    total /= static_cast<double>(n - 1);
    double eig = 0.0;
    double ratio = 0.0;
    for (std::size_t k = 0; k < p; ++k) {
      eig += m.eigenvalues[k];
      ratio += m.explained_ratio[k];
    }
    ASSERT_NEAR(eig, total, 1e-8 * total);
    ASSERT_NEAR(ratio, 1.0, 1e-12);

    // Full reconstruction.
    const Matrix back = reconstruct(m, project(m, x, p));
    double err = 0.0;
    double norm = 0.0;
    for (std::size_t i = 0; i < x.data().size(); ++i) {
      err += (back.data()[i] - x.data()[i]) * (back.data()[i] - x.data()[i]);
      norm += x.data()[i] * x.data()[i];
    }
    ASSERT_LT(std::sqrt(err / norm), 1e-8);

    // Uncorrelated score columns.
    const Matrix s = project(m, x, p);
    for (std::size_t i = 0; i < p; ++i) {
      for (std::size_t j = i + 1; j < p; ++j) {
        double c = 0.0;
        for (std::size_t r = 0; r < n; ++r) c += s(r, i) * s(r, j);
        c /= static_cast<double>(n - 1);
        ASSERT_LT(std::fabs(c), 1e-6 * m.eigenvalues[0]);
      }
    }
  }
}

TEST(Project, MeanAndLoadings) {
  std::mt19937_64 rng(43);
  const Matrix x = test::random_matrix(50, 6, rng);
  const PcaModel m = fit_pca(x, axis_of(6));
  Matrix probe(2, 6);
  for (std::size_t c = 0; c < 6; ++c) {
    probe(0, c) = m.mean[c];
    probe(1, c) = m.mean[c] + m.loadings(0, c);
  }
  const Matrix s = project(m, probe, 3);
  for (std::size_t k = 0; k < 3; ++k) {
    EXPECT_NEAR(s(0, k), 0.0, 1e-12);
    EXPECT_NEAR(s(1, k), k == 0 ? 1.0 : 0.0, 1e-12);
  }
  EXPECT_THROW(project(m, probe, 7), InvalidArgument);
  EXPECT_THROW(project(m, Matrix(1, 5), 2), InvalidArgument);
}

TEST(BrokenStick, Examples) {
  EXPECT_NEAR(broken_stick_share(0, 3), 11.0 / 18.0, 1e-15);
  const std::vector<double> one = {1.0, 0.0, 0.0};
  EXPECT_EQ(broken_stick_count(one), 1u);
  const std::vector<double> equal = {1.0, 1.0, 1.0, 1.0};
  EXPECT_EQ(broken_stick_count(equal), 1u);
  const std::vector<double> mixed = {0.7, 0.25, 0.05};
  EXPECT_NEAR(broken_stick_share(1, 3), 5.0 / 18.0, 1e-15);
  EXPECT_NEAR(broken_stick_share(2, 3), 1.0 / 9.0, 1e-15);
  EXPECT_EQ(broken_stick_count(mixed), 1u);
  const std::vector<double> two = {0.62, 0.3, 0.08};
  EXPECT_EQ(broken_stick_count(two), 2u);
  const std::vector<double> zeros = {0.0, 0.0};
  EXPECT_THROW(broken_stick_count(zeros), InvalidArgument);
  EXPECT_THROW(broken_stick_count(std::vector<double>{}), InvalidArgument);
}

TEST(RetainedComponents, Policies) {
  PcaModel m;
  m.loadings = Matrix(4, 4);
  m.eigenvalues = {0.9, 0.05, 0.03, 0.02};
  EXPECT_EQ(retained_components(m, ComponentPolicy::BrokenStick), 1u);
  EXPECT_EQ(retained_components(m, ComponentPolicy::MaxOf2AndBrokenStick), 2u);
  EXPECT_EQ(retained_components(m, ComponentPolicy::Fixed, 3), 3u);
  EXPECT_THROW(retained_components(m, ComponentPolicy::Fixed, 5), InvalidArgument);
  m.eigenvalues = {0.53, 0.28, 0.16, 0.03};
  EXPECT_EQ(retained_components(m, ComponentPolicy::MaxOf2AndBrokenStick), 3u);
}

TEST(FitPca, SyntheticChiliFirstTwoComponents) {
  const auto c = test::calibrated(test::scene_spec(Material::RiceBran, 0.0));
  PreprocessSettings prep;
  const Matrix rows = pixel_rows(c.reflectance, c.roi);
  const FeatureModel f = fit_features(rows, c.reflectance.wavelengths(), prep, ComponentPolicy::MaxOf2AndBrokenStick);
  EXPECT_GE(f.pca.explained_ratio[0] + f.pca.explained_ratio[1], 0.85);
  EXPECT_EQ(f.components, 2u);
}

TEST(PcaFiles, RoundTrip) {
  const auto dir = test::temp_dir();
  std::mt19937_64 rng(47);
  const PcaModel m = fit_pca(test::random_matrix(40, 5, rng), axis_of(5));
  save_pca(m, dir / "pca");
  const PcaModel back = load_pca(dir / "pca");
  EXPECT_EQ(back.mean, m.mean);
  EXPECT_EQ(back.loadings, m.loadings);
  EXPECT_EQ(back.eigenvalues, m.eigenvalues);
  EXPECT_EQ(back.explained_ratio, m.explained_ratio);
}

}  // namespace
}  // namespace hsi
