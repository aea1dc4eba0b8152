#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "hsi/calibrate.hpp"
#include "hsi/error.hpp"
#include "support.hpp"

namespace hsi {
namespace {

TEST(ReferenceFromRegion, OnePixelIsThatSpectrum) {
  const HyperCube cube(2, 1, {500.0, 600.0}, {1.0, 5.0, 2.0, 7.0}, Domain::RadianceDN);
  const Spectrum s = reference_from_region(cube, rect_mask(2, 1, 1, 0, 2, 1));
  EXPECT_EQ(s.values(), (std::vector<double>{5.0, 7.0}));
  EXPECT_EQ(s.wavelengths(), cube.wavelengths());
}

TEST(ReferenceFromRegion, MeanOfTwoPixels) {
  // Pixel 0 holds [0, 2], pixel 1 holds [2, 0].
  const HyperCube cube(2, 1, {500.0, 600.0}, {0.0, 2.0, 2.0, 0.0}, Domain::RadianceDN);
  const Spectrum s = reference_from_region(cube, Mask(2, 1, true));
  EXPECT_EQ(s.values(), (std::vector<double>{1.0, 1.0}));
}

TEST(ReferenceFromRegion, EmptyOrMismatchedMask) {
  const HyperCube cube(2, 1, {500.0}, {1.0, 2.0}, Domain::RadianceDN);
  EXPECT_THROW(reference_from_region(cube, Mask(2, 1)), InvalidArgument);
  EXPECT_THROW(reference_from_region(cube, Mask(3, 1, true)), InvalidArgument);
  EXPECT_THROW(rect_mask(2, 1, 0, 0, 3, 1), InvalidArgument);
  EXPECT_THROW(rect_mask(2, 1, 1, 0, 1, 1), InvalidArgument);
}

TEST(ReferenceFromRegion, WhitePatchOfSyntheticScene) {
  SceneSpec spec;
  const Scene scene = gen_scene(spec, test::endmembers());
  const Spectrum w = reference_from_region(scene.radiance, scene.white_patch);
  ASSERT_EQ(scene.white_patch.count(), 100u);
  // DN noise is noise_sigma * 3500 per value; the mean of 100 has a tenth of that.
  const double se = spec.noise_sigma * 3500.0 / 10.0;
  for (std::size_t b = 0; b < w.size(); ++b) EXPECT_NEAR(w[b], scene.white[b], 4.0 * se);
}

TEST(Elm, WhiteMapsToOneAndDarkToZero) {
  const std::vector<double> axis = {450.0, 550.0, 650.0};
  const Spectrum white({900.0, 1200.0, 3000.0}, axis);
  const Spectrum dark({100.0, 110.0, 120.0}, axis);
  // Two pixels, white then dark, band-major.
  const HyperCube raw(2, 1, axis, {900.0, 100.0, 1200.0, 110.0, 3000.0, 120.0}, Domain::RadianceDN);
  const HyperCube r = elm_reflectance(raw, {white, dark});
  EXPECT_EQ(r.domain(), Domain::Reflectance);
  for (std::size_t b = 0; b < 3; ++b) {
    EXPECT_EQ(r.at(0, 0, b), 1.0);
    EXPECT_EQ(r.at(1, 0, b), 0.0);
  }
}

TEST(Elm, DirectEvaluation) {
  const HyperCube raw(1, 1, {500.0}, {60.0}, Domain::RadianceDN);
  const HyperCube r = elm_reflectance(raw, {Spectrum({100.0}, {500.0}), Spectrum({20.0}, {500.0})});
  EXPECT_DOUBLE_EQ(r.at(0, 0, 0), 0.5);
}

TEST(Elm, NoClamping) {
  const HyperCube raw(2, 1, {500.0}, {130.0, 10.0}, Domain::RadianceDN);
  const HyperCube r = elm_reflectance(raw, {Spectrum({100.0}, {500.0}), Spectrum({20.0}, {500.0})});
  EXPECT_DOUBLE_EQ(r.at(0, 0, 0), 110.0 / 80.0);
  EXPECT_DOUBLE_EQ(r.at(1, 0, 0), -10.0 / 80.0);
}

TEST(Elm, DegenerateReferenceNamesTheBand) {
  const std::vector<double> axis = {450.0, 550.0, 650.0};
  const HyperCube raw(1, 1, axis, {1.0, 1.0, 1.0}, Domain::RadianceDN);
  try {
    elm_reflectance(raw, {Spectrum({5.0, 5.0, 5.0}, axis), Spectrum({1.0, 5.0, 1.0}, axis)});
    FAIL() << "expected InvalidArgument";
  } catch (const InvalidArgument& e) {
    EXPECT_NE(std::string(e.what()).find("band 1"), std::string::npos) << e.what();
  }
}

TEST(Elm, PreconditionsOnDomainAndAxis) {
  const std::vector<double> axis = {450.0, 550.0};
  const ReferencePair refs{Spectrum({5.0, 5.0}, axis), Spectrum({1.0, 1.0}, axis)};
  EXPECT_THROW(elm_reflectance(HyperCube(1, 1, axis, {2.0, 2.0}, Domain::Reflectance), refs),
               InvalidArgument);
  EXPECT_THROW(elm_reflectance(HyperCube(1, 1, {450.0, 551.0}, {2.0, 2.0}, Domain::RadianceDN), refs),
               InvalidArgument);
}

// Calibrating a*Rr + (1-a)*B gives a*R.
TEST(Elm, AffineProperty) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> dn(50.0, 4000.0);
  std::uniform_real_distribution<double> coef(-1.5, 2.5);
  const std::size_t bands = 17;
  const auto axis = test::linear_axis(bands, 420.0, 10.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> w(bands);
    std::vector<double> b(bands);
    for (std::size_t i = 0; i < bands; ++i) {
      b[i] = dn(rng) * 0.05;
      w[i] = b[i] + dn(rng);
    }
    const ReferencePair refs{Spectrum(w, axis), Spectrum(b, axis)};
    const double a = coef(rng);
    std::vector<double> rr(3 * bands);
    std::vector<double> mixed(3 * bands);
    for (std::size_t i = 0; i < rr.size(); ++i) {
      rr[i] = dn(rng);
      mixed[i] = a * rr[i] + (1.0 - a) * b[i / 3];
    }
    const HyperCube r1 = elm_reflectance(HyperCube(3, 1, axis, rr, Domain::RadianceDN), refs);
    const HyperCube r2 = elm_reflectance(HyperCube(3, 1, axis, mixed, Domain::RadianceDN), refs);
    for (std::size_t i = 0; i < rr.size(); ++i) {
      ASSERT_NEAR(r2.values()[i], a * r1.values()[i], 1e-12 * (1.0 + std::fabs(a * r1.values()[i])));
    }
  }
}

TEST(Elm, SyntheticRoundTrip) {
  SceneSpec spec;
  spec.adulterant = Material::WheatBran;
  spec.fraction = 0.2;
  spec.noise_sigma = 0.0;
  const Scene clean = gen_scene(spec, test::endmembers());
  const HyperCube r = elm_reflectance(clean.radiance, {clean.white, clean.dark});
  double worst = 0.0;
  for (std::size_t i = 0; i < r.values().size(); ++i) {
    worst = std::max(worst, std::fabs(r.values()[i] - clean.reflectance.values()[i]));
  }
  // Only the float rounding of the DN values remains.
  EXPECT_LE(worst, 1e-6);
}

TEST(SliceSpectrum, MatchesSliceBands) {
  const Spectrum s({1.0, 2.0, 3.0, 4.0}, {400.0, 410.0, 420.0, 430.0});
  const Spectrum t = slice_spectrum(s, 1);
  EXPECT_EQ(t.values(), (std::vector<double>{2.0, 3.0, 4.0}));
  EXPECT_EQ(t.wavelengths(), (std::vector<double>{410.0, 420.0, 430.0}));
  EXPECT_THROW(slice_spectrum(s, 4), InvalidArgument);
}

TEST(SpectrumCsv, RoundTrip) {
  const auto dir = test::temp_dir();
  const Spectrum s({0.1, 1.0 / 3.0, 2e-9}, {400.0, 401.7, 433.25});
  save_spectrum_csv(s, dir / "s.csv");
  EXPECT_EQ(load_spectrum_csv(dir / "s.csv"), s);
}

}  // namespace
}  // namespace hsi
