#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "hsi/annotate.hpp"
#include "hsi/error.hpp"
#include "hsi/io.hpp"
#include "support.hpp"

namespace hsi {
namespace {

TEST(FarthestPointInit, Examples) {
  const std::vector<double> two = {0.0, 1.0};
  EXPECT_EQ(farthest_point_init(two, 2), (std::vector<double>{0.0, 1.0}));
  // 0 and 1 tie for farthest from the mean 0.5; the lower index wins.
  const std::vector<double> three = {0.0, 0.5, 1.0};
  EXPECT_EQ(farthest_point_init(three, 2), (std::vector<double>{0.0, 1.0}));
  const std::vector<double> reversed = {1.0, 0.5, 0.0};
  EXPECT_EQ(farthest_point_init(reversed, 2), (std::vector<double>{1.0, 0.0}));
  const std::vector<double> flat = {0.3, 0.3, 0.3};
  EXPECT_THROW(farthest_point_init(flat, 2), InvalidArgument);
  EXPECT_THROW(farthest_point_init(two, 0), InvalidArgument);
}

TEST(FarthestPointInit, OneSeedPerModeMatchesExhaustiveOracle) {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> a(0.2, 0.03);
  std::normal_distribution<double> b(0.8, 0.03);
  std::vector<double> v(1000);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = i % 2 ? a(rng) : b(rng);
  const auto init = farthest_point_init(v, 2);

  // Oracle: exhaustive argmax of |x - mean|, then of the distance to it.
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  std::size_t first = 0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (std::fabs(v[i] - mean) > std::fabs(v[first] - mean)) first = i;
  }
  std::size_t second = 0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (std::fabs(v[i] - v[first]) > std::fabs(v[second] - v[first])) second = i;
  }
  EXPECT_EQ(init, (std::vector<double>{v[first], v[second]}));
  EXPECT_NE(init[0] < 0.5, init[1] < 0.5);
}

TEST(Kmeans, TwoSeparatedPairs) {
  const std::vector<double> v = {0.0, 0.1, 0.9, 1.0};
  const auto r = kmeans(v, 2);
  EXPECT_NEAR(r.centroids[0], 0.05, 1e-15);
  EXPECT_NEAR(r.centroids[1], 0.95, 1e-15);
  EXPECT_NEAR(r.inertia, 0.01, 1e-15);
  EXPECT_EQ(r.assignments, (std::vector<std::size_t>{0, 0, 1, 1}));
}

TEST(Kmeans, SingleClusterIsTheMean) {
  const std::vector<double> v = {1.0, 2.0, 4.0, 9.0};
  const auto r = kmeans(v, 1);
  EXPECT_DOUBLE_EQ(r.centroids[0], 4.0);
  EXPECT_DOUBLE_EQ(r.inertia, 9.0 + 4.0 + 0.0 + 25.0);
}

TEST(Kmeans, RecoversGeneratingModes) {
  std::mt19937_64 rng(23);
  std::normal_distribution<double> z(0.0, 1.0);
  std::vector<double> v(500);
  std::vector<std::size_t> truth(500);
  for (std::size_t i = 0; i < v.size(); ++i) {
    truth[i] = rng() % 2;
    v[i] = (truth[i] ? 6.0 : 0.0) + z(rng);
  }
  const auto r = kmeans(v, 2);
  const std::size_t high = r.centroids[1] > r.centroids[0] ? 1 : 0;
  std::size_t agree = 0;
  for (std::size_t i = 0; i < v.size(); ++i) agree += (r.assignments[i] == high) == (truth[i] == 1);
  EXPECT_GE(static_cast<double>(agree) / 500.0, 0.99);
}

TEST(Kmeans, InertiaNeverIncreases) {
  std::mt19937_64 rng(29);
  for (int trial = 0; trial < 50; ++trial) {
    std::lognormal_distribution<double> d(0.0, 0.5 + 0.02 * trial);
    std::vector<double> v(300);
    for (double& x : v) x = d(rng);
    const auto r = kmeans(v, 2 + trial % 3);
    ASSERT_FALSE(r.inertia_history.empty());
    for (std::size_t i = 1; i < r.inertia_history.size(); ++i) {
      ASSERT_LE(r.inertia_history[i], r.inertia_history[i - 1] + 1e-12);
    }
    for (auto a : r.assignments) ASSERT_LT(a, r.centroids.size());
    ASSERT_GE(r.inertia, 0.0);
  }
}

// Cube from endmembers: `pick(x, y)` names each pixel's material.
template <typename Pick>
HyperCube material_cube(std::size_t size, Pick pick, std::uint64_t seed, double scale_second = 1.0) {
  const auto& em = test::endmembers();
  const auto& axis = em.of(Material::RedChili).wavelengths();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 0.004);
  const std::size_t n = size * size;
  std::vector<double> v(n * axis.size());
  for (std::size_t p = 0; p < n; ++p) {
    const Material m = pick(p % size, p / size);
    const double k = m == Material::RedChili ? 1.0 : scale_second;
    for (std::size_t b = 0; b < axis.size(); ++b) v[b * n + p] = k * em.of(m)[b] + noise(rng);
  }
  return HyperCube(size, size, axis, std::move(v), Domain::Reflectance);
}

Material checker(std::size_t x, std::size_t y) {
  return ((x / 8) + (y / 8)) % 2 ? Material::SawDust : Material::RedChili;
}

double chili_accuracy(const LabelMap& labels, std::size_t size) {
  std::size_t ok = 0;
  for (std::size_t y = 0; y < size; ++y) {
    for (std::size_t x = 0; x < size; ++x) {
      const Label want = checker(x, y) == Material::RedChili ? Label::Chili : Label::Adulterant;
      ok += labels.at(x, y) == want;
    }
  }
  return static_cast<double>(ok) / static_cast<double>(size * size);
}

TEST(AnnotateMixture, CheckerboardOfChiliAndSawDust) {
  const HyperCube cube = material_cube(64, checker, 3);
  const auto ann = annotate_mixture(cube, Mask(64, 64, true));
  EXPECT_FALSE(ann.unimodal);
  EXPECT_GE(chili_accuracy(ann.labels, 64), 0.95);
  EXPECT_EQ(ann.labels.source, LabelSource::Clustered);
}

TEST(AnnotateMixture, DarkerAdulterantIsMislabelled) {
  // Saw dust scaled far below chili at 500 nm: the intensity rule swaps the classes.
  const HyperCube cube = material_cube(64, checker, 3, 0.05);
  const auto ann = annotate_mixture(cube, Mask(64, 64, true));
  EXPECT_LE(chili_accuracy(ann.labels, 64), 0.05);
}

TEST(AnnotateMixture, PureChiliSceneIsChili) {
  const auto c = test::calibrated(test::scene_spec(Material::RiceBran, 0.0));
  const auto ann = annotate_mixture(c.reflectance, c.roi);
  EXPECT_TRUE(ann.unimodal);
  EXPECT_GE(static_cast<double>(ann.labels.count(Label::Chili)) / static_cast<double>(c.roi.count()), 0.99);
}

TEST(AnnotateMixture, PureAdulterantWithChiliReference) {
  const auto chili = test::calibrated(test::scene_spec(Material::SawDust, 0.0));
  const auto plane = band_at(chili.reflectance, 500.0);
  double ref = 0.0;
  for (std::size_t p = 0; p < chili.roi.bits.size(); ++p) ref += chili.roi.bits[p] ? plane.values[p] : 0.0;
  AnnotateOptions opt;
  opt.chili_reference = ref / static_cast<double>(chili.roi.count());

  for (Material m : kAdulterants) {
    const auto pure = test::calibrated(test::scene_spec(m, 1.0));
    const auto ann = annotate_mixture(pure.reflectance, pure.roi, opt);
    EXPECT_TRUE(ann.unimodal) << material_name(m);
    EXPECT_EQ(ann.labels.count(Label::Adulterant), pure.roi.count()) << material_name(m);
  }
  const auto ann = annotate_mixture(chili.reflectance, chili.roi, opt);
  EXPECT_EQ(ann.labels.count(Label::Chili), chili.roi.count());
}

TEST(AnnotateMixture, BackgroundExactlyOutsideRoi) {
  const auto c = test::calibrated(test::scene_spec(Material::WheatBran, 0.2));
  const auto ann = annotate_mixture(c.reflectance, c.roi);
  for (std::size_t p = 0; p < c.roi.bits.size(); ++p) {
    ASSERT_EQ(ann.labels.labels[p] == Label::Background, !c.roi.bits[p]);
  }
}

TEST(AnnotateMixture, InvariantUnderIncreasingAffineMaps) {
  const auto c = test::calibrated(test::scene_spec(Material::RiceBran, 0.2));
  const auto base = annotate_mixture(c.reflectance, c.roi);
  for (auto [a, b] : {std::pair{2.5, -0.3}, {0.01, 7.0}}) {
    std::vector<double> v = c.reflectance.values();
    for (double& x : v) x = a * x + b;
    const HyperCube t(c.reflectance.width(), c.reflectance.height(), c.reflectance.wavelengths(), std::move(v),
                      Domain::Reflectance);
    EXPECT_EQ(annotate_mixture(t, c.roi).labels, base.labels);
  }
}

TEST(AnnotateMixture, Deterministic) {
  const auto c = test::calibrated(test::scene_spec(Material::SawDust, 0.14));
  EXPECT_EQ(annotate_mixture(c.reflectance, c.roi).labels, annotate_mixture(c.reflectance, c.roi).labels);
}

TEST(AnnotateMixture, Preconditions) {
  const HyperCube flat(4, 4, default_axis(), std::vector<double>(16 * 224, 0.2), Domain::Reflectance);
  EXPECT_THROW(annotate_mixture(flat, Mask(4, 4, true)), InvalidArgument);
  EXPECT_THROW(annotate_mixture(flat, Mask(4, 4)), InvalidArgument);
  EXPECT_THROW(annotate_mixture(flat, Mask(3, 4, true)), InvalidArgument);
  const HyperCube dn(4, 4, default_axis(), std::vector<double>(16 * 224, 0.2), Domain::RadianceDN);
  EXPECT_THROW(annotate_mixture(dn, Mask(4, 4, true)), InvalidArgument);
}

TEST(LabelFiles, CsvRoundTripAndPgmLevels) {
  const auto dir = test::temp_dir();
  LabelMap m{3, 2, {Label::Chili, Label::Adulterant, Label::Background, Label::Adulterant, Label::Chili,
                    Label::Chili},
             LabelSource::GroundTruth};
  save_label_csv(m, dir / "l.csv");
  LabelMap back = load_label_csv(dir / "l.csv", 3, 2);
  EXPECT_EQ(back.labels, m.labels);

  save_label_pgm(m, dir / "l.pgm");
  const std::string pgm = io::read_file(dir / "l.pgm");
  const std::string pixels = pgm.substr(pgm.size() - 6);
  EXPECT_EQ(static_cast<unsigned char>(pixels[0]), 255);
  EXPECT_EQ(static_cast<unsigned char>(pixels[1]), 0);
  EXPECT_EQ(static_cast<unsigned char>(pixels[2]), 128);
}

TEST(LabelAgreement, CountsOnlyTheRegion) {
  const LabelMap a{2, 1, {Label::Chili, Label::Adulterant}, LabelSource::Clustered};
  const LabelMap b{2, 1, {Label::Chili, Label::Chili}, LabelSource::GroundTruth};
  EXPECT_DOUBLE_EQ(label_agreement(a, b, Mask(2, 1, true)), 0.5);
  Mask first(2, 1);
  first.set(0, 0);
  EXPECT_DOUBLE_EQ(label_agreement(a, b, first), 1.0);
  EXPECT_THROW(label_agreement(a, b, Mask(2, 1)), InvalidArgument);
}

}  // namespace
}  // namespace hsi
