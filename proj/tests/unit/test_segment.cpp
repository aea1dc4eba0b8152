#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <queue>
#include <random>

#include "hsi/error.hpp"
#include "hsi/io.hpp"
#include "hsi/segment.hpp"
#include "support.hpp"

namespace hsi {
namespace {

BandImage image_of(std::vector<double> values, std::size_t width) {
  const std::size_t height = values.size() / width;
  return BandImage{width, height, 500.0, 0, std::move(values)};
}

// Between-class variance of the split v <= t straight from the values.
double between_class(const std::vector<double>& values, double t) {
  double n0 = 0.0, n1 = 0.0, s0 = 0.0, s1 = 0.0;
  for (double v : values) {
    if (v <= t) {
      n0 += 1.0;
      s0 += v;
    } else {
      n1 += 1.0;
      s1 += v;
    }
  }
  if (n0 == 0.0 || n1 == 0.0) return 0.0;
  const double n = n0 + n1;
  const double d = s0 / n0 - s1 / n1;
  return (n0 / n) * (n1 / n) * d * d;
}

// Exhaustive scan over the 255 interior bin edges of a 256-bin histogram.
double oracle_best_between(const std::vector<double>& values) {
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  double best = 0.0;
  for (int t = 0; t < kOtsuBins - 1; ++t) {
    const double edge = *lo + (*hi - *lo) * static_cast<double>(t + 1) / kOtsuBins;
    best = std::max(best, between_class(values, edge));
  }
  return best;
}

TEST(Otsu, SeparatesTwoLevels) {
  std::vector<double> v(100, 0.1);
  std::fill(v.begin() + 50, v.end(), 0.9);
  const double t = otsu_threshold(image_of(v, 10));
  EXPECT_GT(t, 0.1);
  EXPECT_LT(t, 0.9);
  EXPECT_NEAR(otsu_separability(image_of(v, 10)), 1.0, 1e-12);
}

TEST(Otsu, ConstantOrEmptyImageIsAnError) {
  EXPECT_THROW(otsu_threshold(image_of(std::vector<double>(16, 0.4), 4)), InvalidArgument);
  EXPECT_THROW(otsu_threshold(BandImage{}), InvalidArgument);
}

TEST(Otsu, GaussianMixtureMatchesExhaustiveScan) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> a(0.2, 0.01);
  std::normal_distribution<double> b(0.8, 0.01);
  std::vector<double> v;
  for (int i = 0; i < 2000; ++i) v.push_back(i % 3 == 0 ? b(rng) : a(rng));
  const double t = otsu_threshold(image_of(v, 40));
  EXPECT_GE(t, 0.4);
  EXPECT_LE(t, 0.6);
  EXPECT_NEAR(between_class(v, t), oracle_best_between(v), 1e-12);
}

TEST(Otsu, RandomImagesMatchExhaustiveScan) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 30; ++trial) {
    std::uniform_real_distribution<double> u(-3.0, 5.0);
    std::gamma_distribution<double> g(1.0 + trial % 4, 1.0);
    std::vector<double> v(900);
    for (double& x : v) x = trial % 2 ? u(rng) : g(rng);
    const double t = otsu_threshold(image_of(v, 30));
    const double best = oracle_best_between(v);
    ASSERT_NEAR(between_class(v, t), best, 1e-12 * (1.0 + best)) << "trial " << trial;
  }
}

TEST(ConnectedComponents, EmptyMask) {
  const Regions r = connected_components(Mask(5, 4));
  EXPECT_EQ(r.count, 0u);
  EXPECT_TRUE(std::all_of(r.ids.begin(), r.ids.end(), [](auto id) { return id == 0; }));
}

TEST(ConnectedComponents, DiagonalPixelsAreSeparate) {
  Mask m(2, 2);
  m.set(0, 0);
  m.set(1, 1);
  const Regions r = connected_components(m);
  EXPECT_EQ(r.count, 2u);
  EXPECT_EQ(r.ids[0], 1u);
  EXPECT_EQ(r.ids[3], 2u);
}

// Breadth-first flood fill started from the last pixel backwards: a different
// visiting order from the raster scan under test.
std::vector<int> flood_fill(const Mask& m, int& count) {
  std::vector<int> id(m.bits.size(), 0);
  count = 0;
  for (std::size_t s = m.bits.size(); s-- > 0;) {
    if (!m.bits[s] || id[s]) continue;
    id[s] = ++count;
    std::queue<std::size_t> q;
    q.push(s);
    while (!q.empty()) {
      const std::size_t p = q.front();
      q.pop();
      const std::size_t x = p % m.width;
      const std::size_t y = p / m.width;
      std::vector<std::size_t> next;
      if (y + 1 < m.height) next.push_back(p + m.width);
      if (x + 1 < m.width) next.push_back(p + 1);
      if (y > 0) next.push_back(p - m.width);
      if (x > 0) next.push_back(p - 1);
      for (std::size_t n : next) {
        if (m.bits[n] && !id[n]) {
          id[n] = count;
          q.push(n);
        }
      }
    }
  }
  return id;
}

TEST(ConnectedComponents, RandomMasksMatchFloodFill) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 100; ++trial) {
    Mask m(32, 32);
    std::bernoulli_distribution on(0.3 + 0.004 * trial);
    for (auto& b : m.bits) b = on(rng) ? 1 : 0;
    int count = 0;
    const auto oracle = flood_fill(m, count);
    const Regions r = connected_components(m);
    ASSERT_EQ(r.count, static_cast<std::uint32_t>(count));
    // Same partition: the id correspondence is a bijection.
    std::map<std::uint32_t, int> fwd;
    std::map<int, std::uint32_t> back;
    std::uint32_t next_new = 1;
    for (std::size_t p = 0; p < m.bits.size(); ++p) {
      ASSERT_EQ(r.ids[p] == 0, oracle[p] == 0);
      if (!r.ids[p]) continue;
      auto [it, fresh] = fwd.emplace(r.ids[p], oracle[p]);
      ASSERT_EQ(it->second, oracle[p]);
      auto [jt, fresh_back] = back.emplace(oracle[p], r.ids[p]);
      ASSERT_EQ(jt->second, r.ids[p]);
      // Canonical numbering: ids appear in first-encounter raster order.
      if (fresh) ASSERT_EQ(r.ids[p], next_new++);
      (void)fresh_back;
    }
  }
}

TEST(FillHoles, OnlyEnclosedBackgroundIsFilled) {
  Mask m(5, 5);
  for (std::size_t y = 0; y < 4; ++y) {
    for (std::size_t x = 0; x < 4; ++x) m.set(x, y, x == 0 || y == 0 || x == 3 || y == 3);
  }
  const Mask f = fill_holes(m);
  EXPECT_TRUE(f.at(1, 1));
  EXPECT_TRUE(f.at(2, 2));
  EXPECT_FALSE(f.at(4, 4));
  EXPECT_EQ(f.count(), 16u);
}

HyperCube square_scene(std::size_t size, std::size_t side, std::mt19937_64& rng) {
  const auto axis = default_axis();
  const Spectrum& chili = test::endmembers().of(Material::RedChili);
  std::normal_distribution<double> noise(0.0, 0.004);
  const std::size_t n = size * size;
  const std::size_t x0 = (size - side) / 2;
  std::vector<double> v(n * axis.size());
  for (std::size_t b = 0; b < axis.size(); ++b) {
    for (std::size_t p = 0; p < n; ++p) {
      const std::size_t x = p % size;
      const std::size_t y = p / size;
      const bool inside = x >= x0 && x < x0 + side && y >= x0 && y < x0 + side;
      v[b * n + p] = (inside ? chili[b] : 0.02) + noise(rng);
    }
  }
  return HyperCube(size, size, axis, std::move(v), Domain::Reflectance);
}

TEST(ExtractRoi, CentredSquareSample) {
  std::mt19937_64 rng(1);
  const HyperCube cube = square_scene(128, 40, rng);
  const Mask roi = extract_roi(cube);
  std::size_t disagree = 0;
  for (std::size_t y = 0; y < 128; ++y) {
    for (std::size_t x = 0; x < 128; ++x) {
      const bool inside = x >= 44 && x < 84 && y >= 44 && y < 84;
      disagree += roi.at(x, y) != inside ? 1 : 0;
    }
  }
  EXPECT_LE(static_cast<double>(disagree), 0.01 * 1600.0);
}

TEST(ExtractRoi, SyntheticDiskMatchesGeneratorMask) {
  for (double fraction : {0.0, 0.1, 0.3}) {
    const SceneSpec spec = test::scene_spec(Material::SawDust, fraction);
    const auto c = test::calibrated(spec);
    std::size_t disagree = 0;
    for (std::size_t p = 0; p < c.roi.bits.size(); ++p) disagree += c.roi.bits[p] != c.scene.sample.bits[p];
    EXPECT_LE(static_cast<double>(disagree), 0.01 * static_cast<double>(c.scene.sample.count()))
        << "fraction " << fraction;
  }
}

TEST(ExtractRoi, OneComponentWithoutHoles) {
  for (Material m : kAdulterants) {
    for (double fraction : {0.0, 0.16, 0.3}) {
      const auto c = test::calibrated(test::scene_spec(m, fraction, 4));
      EXPECT_EQ(connected_components(c.roi).count, 1u);
      EXPECT_EQ(fill_holes(c.roi), c.roi);
    }
  }
}

TEST(ExtractRoi, FullFrameSample) {
  const auto axis = default_axis();
  const Spectrum& chili = test::endmembers().of(Material::RedChili);
  std::mt19937_64 rng(2);
  std::normal_distribution<double> noise(0.0, 0.004);
  const std::size_t n = 48 * 48;
  std::vector<double> v(n * axis.size());
  for (std::size_t b = 0; b < axis.size(); ++b) {
    for (std::size_t p = 0; p < n; ++p) v[b * n + p] = chili[b] + noise(rng);
  }
  const Mask roi = extract_roi(HyperCube(48, 48, axis, std::move(v), Domain::Reflectance));
  EXPECT_EQ(roi.count(), n);
}

TEST(ExtractRoi, ConstantCubeIsAnError) {
  const HyperCube cube(8, 8, default_axis(), std::vector<double>(64 * 224, 0.3), Domain::Reflectance);
  EXPECT_THROW(extract_roi(cube), InvalidArgument);
}

TEST(FalseColor, ConstantCubeGivesZeros) {
  const HyperCube cube(4, 4, default_axis(), std::vector<double>(16 * 224, 0.3), Domain::Reflectance);
  for (const auto& ch : false_color(cube)) {
    EXPECT_TRUE(std::all_of(ch.values.begin(), ch.values.end(), [](double v) { return v == 0.0; }));
  }
}

TEST(FalseColor, NarrowSpanIsAnError) {
  const HyperCube cube(1, 1, test::linear_axis(11, 500.0, 10.0), std::vector<double>(11, 0.3),
                       Domain::Reflectance);
  EXPECT_THROW(false_color(cube), InvalidArgument);
}

TEST(FalseColor, ChannelsAndChiliColour) {
  const auto c = test::calibrated(test::scene_spec(Material::RiceBran, 0.0));
  const auto rgb = false_color(c.reflectance);
  EXPECT_EQ(rgb[0].wavelength, c.reflectance.wavelengths()[nearest_band_index(c.reflectance.wavelengths(), 698.0)]);
  EXPECT_EQ(rgb[2].wavelength, c.reflectance.wavelengths()[nearest_band_index(c.reflectance.wavelengths(), 450.0)]);
  double r = 0.0;
  double b = 0.0;
  for (std::size_t p = 0; p < c.scene.sample.bits.size(); ++p) {
    if (!c.scene.sample.bits[p]) continue;
    r += rgb[0].values[p];
    b += rgb[2].values[p];
  }
  EXPECT_LT(b, r);
  for (const auto& ch : rgb) {
    const auto [lo, hi] = std::minmax_element(ch.values.begin(), ch.values.end());
    EXPECT_EQ(*lo, 0.0);
    EXPECT_EQ(*hi, 1.0);
  }
}

TEST(MaskFiles, PbmRoundTripAndCsv) {
  const auto dir = test::temp_dir();
  std::mt19937_64 rng(4);
  Mask m(13, 7);
  for (auto& b : m.bits) b = rng() % 3 == 0;
  save_pbm(m, dir / "m.pbm");
  EXPECT_EQ(load_pbm(dir / "m.pbm"), m);
  save_mask_csv(m, dir / "m.csv");
  const auto table = io::read_csv(dir / "m.csv");
  EXPECT_EQ(table.header, (std::vector<std::string>{"x", "y"}));
  EXPECT_EQ(table.rows.size(), m.count());
}

}  // namespace
}  // namespace hsi
