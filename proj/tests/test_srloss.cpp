#include <doctest.h>

#include <cmath>
#include <random>

#include "fieldops/geometry.hpp"
#include "fieldops/metrics.hpp"
#include "fieldops/srloss.hpp"
#include "test_support.hpp"

using namespace fieldops;

namespace {

// Straight-line re-computation of the conv stack, sharing no code with the
// implementation: weights re-derived from the declared generator, valid 3x3
// convolution and half-rectification written out longhand.
std::vector<double> oracle_conv_stack(const Image& img, std::uint32_t seed, int depth,
                                      int& out_w, int& out_h) {
    std::mt19937 rng(seed);
    std::vector<std::vector<double>> layer_weights;
    for (int l = 0; l < depth; ++l) {
        std::vector<double> w(9);
        for (int i = 0; i < 9; ++i) w[i] = double(rng()) / 4294967296.0 - 0.5;
        layer_weights.push_back(w);
    }
    std::vector<double> cur = img.data;
    int w = img.width, h = img.height;
    for (int l = 0; l < depth; ++l) {
        std::vector<double> next(std::size_t(w - 2) * (h - 2));
        for (int y = 0; y < h - 2; ++y)
            for (int x = 0; x < w - 2; ++x) {
                double acc = 0.0;
                for (int ky = 0; ky < 3; ++ky)
                    for (int kx = 0; kx < 3; ++kx)
                        acc += layer_weights[l][ky * 3 + kx] *
                               cur[std::size_t(y + ky) * w + (x + kx)];
                next[std::size_t(y) * (w - 2) + x] = acc > 0.0 ? acc : 0.0;
            }
        cur = std::move(next);
        w -= 2;
        h -= 2;
    }
    out_w = w;
    out_h = h;
    return cur;
}

}  // namespace

TEST_SUITE("srloss") {

TEST_CASE("downsample4x of a constant image is constant at quarter dims") {
    Image img = Image::filled(16, 8, 37.0);
    Image out = downsample4x(img);
    CHECK(out.width == 4);
    CHECK(out.height == 2);
    for (double v : out.data) CHECK(v == 37.0);
}

TEST_CASE("downsample4x of 0..15 averages to 7.5") {
    Image img = Image::filled(4, 4, 0.0);
    for (int i = 0; i < 16; ++i) img.data[i] = double(i);
    Image out = downsample4x(img);
    REQUIRE(out.data.size() == 1);
    CHECK(out.data[0] == 7.5);
}

TEST_CASE("downsample4x rejects non-divisible dims") {
    CHECK_THROWS_WITH_AS(downsample4x(Image::filled(6, 6, 0.0)),
                         doctest::Contains("divisible by 4"), Error);
}

TEST_CASE("downsample4x preserves mean intensity exactly") {
    std::mt19937 rng(501);
    for (int trial = 0; trial < 20; ++trial) {
        Image img = testsup::random_image(rng, 16, 32);  // integer data: sums are exact
        Image out = downsample4x(img);
        double sum_in = 0.0, sum_out = 0.0;
        for (double v : img.data) sum_in += v;
        for (double v : out.data) sum_out += v;
        CHECK(sum_in / double(img.data.size()) == sum_out / double(out.data.size()));
    }
}

TEST_CASE("adversarial objective examples") {
    CHECK(adversarial_objective({1.0}, {0.0}) == 0.0);
    CHECK(adversarial_objective({0.5}, {0.5}) ==
          doctest::Approx(-1.3862943611).epsilon(1e-9));
    CHECK(adversarial_objective({0.0}, {1.0}) == 2.0 * std::log(1e-12));
    CHECK_THROWS_AS(adversarial_objective({}, {0.5}), Error);
    CHECK_THROWS_WITH_AS(adversarial_objective({0.5}, {1.5}),
                         doctest::Contains("outside"), Error);
}

TEST_CASE("adversarial objective is monotone in its arguments") {
    std::mt19937 rng(502);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> d_real(3), d_fake(3);
        for (double& v : d_real) v = 0.1 + 0.8 * testsup::unit_real(rng);
        for (double& v : d_fake) v = 0.1 + 0.8 * testsup::unit_real(rng);
        double base = adversarial_objective(d_real, d_fake);

        auto up = d_real;
        up[trial % 3] += 0.05;
        CHECK(adversarial_objective(up, d_fake) > base);

        auto worse = d_fake;
        worse[trial % 3] += 0.05;
        CHECK(adversarial_objective(d_real, worse) < base);
    }
    // maximized by a perfect discriminator
    CHECK(adversarial_objective({1.0}, {0.0}) >= adversarial_objective({0.9}, {0.1}));
}

TEST_CASE("feature loss with the identity extractor equals mse") {
    std::mt19937 rng(503);
    for (int trial = 0; trial < 30; ++trial) {
        Image hr = testsup::random_image(rng, 12, 9);
        Image sr = testsup::random_image(rng, 12, 9);
        CHECK(feature_loss(hr, sr, IdentityExtractor{}) == image_quality(hr, sr).mse);
    }
}

TEST_CASE("feature loss is zero for identical inputs and symmetric") {
    std::mt19937 rng(504);
    Image hr = testsup::random_image(rng, 10, 10);
    Image sr = testsup::random_image(rng, 10, 10);
    ConvStackExtractor conv(42, 2);
    CHECK(feature_loss(hr, hr, conv) == 0.0);
    CHECK(feature_loss(hr, sr, conv) == feature_loss(sr, hr, conv));
    CHECK(feature_loss(hr, sr, conv) >= 0.0);
}

TEST_CASE("conv extractor matches the straight-line oracle") {
    std::mt19937 rng(505);
    Image hr = testsup::random_image(rng, 8, 8);
    Image sr = testsup::random_image(rng, 8, 8);
    ConvStackExtractor conv(42, 2);

    int w = 0, h = 0;
    auto expect_hr = oracle_conv_stack(hr, 42, 2, w, h);
    FeatureMap got_hr = conv.extract(hr);
    CHECK(got_hr.width == w);
    CHECK(got_hr.height == h);
    REQUIRE(got_hr.data.size() == expect_hr.size());
    for (std::size_t i = 0; i < expect_hr.size(); ++i)
        CHECK(got_hr.data[i] == expect_hr[i]);

    auto expect_sr = oracle_conv_stack(sr, 42, 2, w, h);
    double expect_loss = 0.0;
    for (std::size_t i = 0; i < expect_sr.size(); ++i) {
        double d = expect_hr[i] - expect_sr[i];
        expect_loss += d * d;
    }
    expect_loss /= double(w) * double(h);
    CHECK(feature_loss(hr, sr, conv) == doctest::Approx(expect_loss).epsilon(1e-12));
}

TEST_CASE("extractor rejects mismatched and undersized inputs") {
    std::mt19937 rng(506);
    Image a = testsup::random_image(rng, 8, 8);
    Image b = testsup::random_image(rng, 9, 8);
    CHECK_THROWS_AS(feature_loss(a, b, IdentityExtractor{}), Error);
    CHECK_THROWS_AS(ConvStackExtractor(1, 0), Error);
    CHECK_THROWS_WITH_AS(ConvStackExtractor(1, 4).extract(a),
                         doctest::Contains("too small"), Error);
}

TEST_CASE("extractor is deterministic") {
    std::mt19937 rng(507);
    Image img = testsup::random_image(rng, 10, 10);
    FeatureMap m1 = ConvStackExtractor(7, 3).extract(img);
    FeatureMap m2 = ConvStackExtractor(7, 3).extract(img);
    CHECK(m1.data == m2.data);
}

TEST_CASE("cv loss vanishes for identical images") {
    std::mt19937 rng(508);
    Image hr = testsup::random_image(rng, 24, 24);
    Image ref = testsup::random_image(rng, 24, 24);
    CHECK(cv_loss(hr, hr, ref) == 0.0);

    Image flat = Image::filled(16, 16, 128.0);
    CHECK(cv_loss(flat, flat, flat) == 0.0);
}

TEST_CASE("cv loss is positive for a shifted scene and matches the pipeline") {
    Image ref = Image::filled(64, 64, 0.0);
    Image hr = ref, sr = ref;
    for (int y = 24; y < 40; ++y)
        for (int x = 22; x < 38; ++x) hr.at(x, y) = 255.0;
    for (int y = 24; y < 40; ++y)
        for (int x = 24; x < 40; ++x) sr.at(x, y) = 255.0;
    for (int y = 20; y < 44; ++y)
        for (int x = 20; x < 44; ++x) ref.at(x, y) = 200.0;

    double loss = cv_loss(hr, sr, ref);
    CHECK(loss > 0.0);

    // pipeline recomposition: run the registration and curl stages directly
    ScalarField cv_hr = curl_scalar(register_images(ref, hr, {}));
    ScalarField cv_sr = curl_scalar(register_images(ref, sr, {}));
    double expect = 0.0;
    for (std::size_t i = 0; i < cv_hr.data.size(); ++i) {
        double d = cv_hr.data[i] - cv_sr.data[i];
        expect += d * d;
    }
    expect /= double(cv_hr.data.size());
    CHECK(loss == doctest::Approx(expect).epsilon(1e-12));

    CHECK_THROWS_AS(cv_loss(hr, sr, Image::filled(32, 32, 0.0)), Error);
}

}  // TEST_SUITE
