// Copyright (c) the hodr authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include <gtest/gtest.h>

#include <cmath>

#include "hodr/image.hpp"
#include "hodr/resize.hpp"
#include "hodr/synthetic.hpp"
#include "oracles.hpp"

namespace hodr {
namespace {

TEST(Image, StorageLengthIsWidthTimesHeightTimesChannels) {
  const Image img(7, 5, 3, 0.25);
  EXPECT_EQ(img.size(), 7u * 5u * 3u);
  EXPECT_EQ(img.plane_size(), 35u);
  for (double s : img.samples()) EXPECT_EQ(s, 0.25);
}

TEST(Image, RejectsNonPositiveDims) {
  EXPECT_THROW(Image(0, 4, 1), Error);
  EXPECT_THROW(Image(4, -1, 1), Error);
  EXPECT_THROW(Image(4, 4, 0), Error);
}

TEST(Image, PlanarRowMajorLayout) {
  Image img(3, 2, 2);
  img.at(1, 1, 2) = 9.0;
  EXPECT_EQ(img.samples()[1 * 6 + 1 * 3 + 2], 9.0);
  EXPECT_EQ(img.plane(1)[5], 9.0);
}

TEST(Image, ClipBoundsEverySample) {
  Image img(4, 4, 1);
  for (size_t i = 0; i < img.size(); ++i) img.samples()[i] = -1.0 + 0.2 * i;
  const Image c = clip(img);
  for (double s : c.samples()) {
    EXPECT_GE(s, 0.0);
    EXPECT_LE(s, 1.0);
  }
}

TEST(Image, LuminanceUsesRec601) {
  Image img(1, 1, 3);
  img.at(0, 0, 0) = 0.2;
  img.at(1, 0, 0) = 0.4;
  img.at(2, 0, 0) = 0.9;
  EXPECT_NEAR(luminance(img).at(0, 0, 0), 0.299 * 0.2 + 0.587 * 0.4 + 0.114 * 0.9, 1e-15);
}

TEST(Image, ShapeMismatchIsReported) {
  try {
    require_same_shape(Image(4, 4, 1), Image(4, 5, 1), "test");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDimensionMismatch);
  }
}

class ResizeEveryMethod : public ::testing::TestWithParam<ResizeMethod> {};

TEST_P(ResizeEveryMethod, ScaleOneIsSampleIdentical) {
  const Image img = oracle::random_image(13, 9, 3, 1);
  EXPECT_EQ(resize(img, 1.0, GetParam()), img);
}

TEST_P(ResizeEveryMethod, ConstantStaysConstant) {
  const Image img(20, 14, 3, 0.3);
  for (double scale : {0.5, 0.73, 1.37, 2.0, 3.0}) {
    const Image out = resize(img, scale, GetParam());
    for (double s : out.samples()) EXPECT_NEAR(s, 0.3, 1e-12) << "scale " << scale;
  }
}

TEST_P(ResizeEveryMethod, OutputDimsAreRoundedScale) {
  const Image img(21, 10, 1, 0.5);
  const Image out = resize(img, 1.3, GetParam());
  EXPECT_EQ(out.width(), 27);  // round(27.3)
  EXPECT_EQ(out.height(), 13);
}

TEST_P(ResizeEveryMethod, ClampedOutputStaysInUnitRange) {
  const Image img = oracle::random_image(16, 16, 1, 2);
  for (double scale : {0.6, 1.7}) {
    const Image out = resize(img, scale, GetParam());
    for (double s : out.samples()) {
      EXPECT_GE(s, 0.0);
      EXPECT_LE(s, 1.0);
    }
  }
}

INSTANTIATE_TEST_SUITE_P(Methods, ResizeEveryMethod, ::testing::ValuesIn(kAllResizeMethods),
                         [](const auto& info) { return std::string(to_string(info.param)); });

TEST(Resize, AreaHalvesToBlockMeans) {
  Image img(4, 4, 1);
  const double blocks[2][2] = {{0.1, 0.9}, {0.4, 0.6}};
  for (int y = 0; y < 4; ++y) {
    for (int x = 0; x < 4; ++x) img.at(0, y, x) = blocks[y / 2][x / 2] + 0.01 * ((x + y) % 2);
  }
  const Image out = resize(img, 0.5, ResizeMethod::kArea);
  const Image want = oracle::block_mean(img, 2);
  for (size_t i = 0; i < out.size(); ++i) EXPECT_NEAR(out.samples()[i], want.samples()[i], 1e-14);
}

TEST(Resize, AreaIntegerFactorsMatchBlockMeanOracle) {
  const Image img = oracle::random_image(24, 12, 3, 3);
  for (int f : {2, 3, 4}) {
    const Image out = resize(img, {24 / f, 12 / f}, ResizeMethod::kArea);
    EXPECT_LT(max_abs_diff(out, oracle::block_mean(img, f)), 1e-14) << f;
  }
}

TEST(Resize, AreaPreservesMeanForFractionalRatios) {
  const Image img = oracle::random_image(30, 20, 1, 4);
  const Image out = resize(img, {17, 11}, ResizeMethod::kArea, Clamp::kNo);
  // Box integration conserves total mass per unit area.
  EXPECT_NEAR(mean(out), mean(img), 1e-12);
}

TEST(Resize, BilinearDoublingOfTwoPixels) {
  Image img(2, 1, 1);
  img.at(0, 0, 0) = 0.0;
  img.at(0, 0, 1) = 1.0;
  const Image out = resize(img, {4, 1}, ResizeMethod::kBilinear);
  // Half-pixel centres map outputs to source x = -0.25, 0.25, 0.75, 1.25.
  EXPECT_NEAR(out.at(0, 0, 0), 0.0, 1e-15);
  EXPECT_NEAR(out.at(0, 0, 1), 0.25, 1e-15);
  EXPECT_NEAR(out.at(0, 0, 2), 0.75, 1e-15);
  EXPECT_NEAR(out.at(0, 0, 3), 1.0, 1e-15);
}

TEST(Resize, BicubicReproducesLinearRampsInTheInterior) {
  Image img(16, 4, 1);
  for (int y = 0; y < 4; ++y) {
    for (int x = 0; x < 16; ++x) img.at(0, y, x) = 0.05 * x;
  }
  const Image out = resize(img, {32, 4}, ResizeMethod::kBicubic, Clamp::kNo);
  // Catmull-Rom has linear precision.
  for (int x = 4; x < 28; ++x) {
    EXPECT_NEAR(out.at(0, 1, x), 0.05 * ((x + 0.5) / 2.0 - 0.5), 1e-12) << x;
  }
}

TEST(Resize, BicubicOvershootsAStepWithoutClamp) {
  Image img(8, 1, 1, 0.0);
  for (int x = 4; x < 8; ++x) img.at(0, 0, x) = 1.0;
  const Image out = resize(img, {16, 1}, ResizeMethod::kBicubic, Clamp::kNo);
  double hi = 0.0;
  for (double s : out.samples()) hi = std::max(hi, s);
  EXPECT_GT(hi, 1.0);
}

TEST(Resize, NonPositiveScaleIsAnError) {
  const Image img(4, 4, 1);
  EXPECT_THROW(resize(img, 0.0, ResizeMethod::kArea), Error);
  EXPECT_THROW(resize(img, -2.0, ResizeMethod::kBilinear), Error);
}

TEST(Resize, TinyScalesKeepAtLeastOnePixel) {
  const Image img(4, 4, 1, 0.5);
  const Image out = resize(img, 0.01, ResizeMethod::kArea);
  EXPECT_EQ(out.width(), 1);
  EXPECT_EQ(out.height(), 1);
  EXPECT_NEAR(out.at(0, 0, 0), 0.5, 1e-15);
}

TEST(Resize, ParseNames) {
  for (ResizeMethod m : kAllResizeMethods) EXPECT_EQ(parse_resize_method(to_string(m)), m);
  EXPECT_FALSE(parse_resize_method("lanczos"));
}

TEST(Synthetic, DeterministicAndInRange) {
  const Image a = synthetic_image(5, {40, 30}, 3);
  EXPECT_EQ(a, synthetic_image(5, {40, 30}, 3));
  EXPECT_NE(a, synthetic_image(6, {40, 30}, 3));
  for (double s : a.samples()) {
    EXPECT_GE(s, 0.0);
    EXPECT_LE(s, 1.0);
  }
}

}  // namespace
}  // namespace hodr
