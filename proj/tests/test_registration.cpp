#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "fieldops/registration.hpp"
#include "test_support.hpp"

using namespace fieldops;

namespace {

Image square_image(int dims, int cx, int cy, int size, double fg = 255.0,
                   double bg = 0.0) {
    Image img = Image::filled(dims, dims, bg);
    for (int y = cy; y < cy + size; ++y)
        for (int x = cx; x < cx + size; ++x) img.at(x, y) = fg;
    return img;
}

// Exhaustive integer-shift SSD minimizer; the independent oracle for
// translation recovery. Returns the shift s minimizing
// sum_x (moving(x + s) - fixed(x))^2 with border clamping.
std::pair<int, int> best_integer_shift(const Image& fixed, const Image& moving,
                                       int radius) {
    double best = std::numeric_limits<double>::infinity();
    std::pair<int, int> arg{0, 0};
    for (int sy = -radius; sy <= radius; ++sy) {
        for (int sx = -radius; sx <= radius; ++sx) {
            double ssd = 0.0;
            for (int y = 0; y < fixed.height; ++y)
                for (int x = 0; x < fixed.width; ++x) {
                    int mx = std::clamp(x + sx, 0, moving.width - 1);
                    int my = std::clamp(y + sy, 0, moving.height - 1);
                    double d = moving.at(mx, my) - fixed.at(x, y);
                    ssd += d * d;
                }
            if (ssd < best) {
                best = ssd;
                arg = {sx, sy};
            }
        }
    }
    return arg;
}

double max_abs_component(const VectorField& f) {
    double m = 0.0;
    for (double v : f.data) m = std::max(m, std::abs(v));
    return m;
}

}  // namespace

TEST_SUITE("registration") {

TEST_CASE("warp by the zero field is the identity") {
    std::mt19937 rng(301);
    Image img = testsup::random_image(rng, 13, 9);
    Image out = warp(img, VectorField::zeros(13, 9, 2));
    CHECK(out.data == img.data);
}

TEST_CASE("warp of a ramp by a unit shift moves one column") {
    // 4x4 ramp img(x, y) = 10x + y, hand-evaluated bilinear samples
    Image img = Image::filled(4, 4, 0.0);
    for (int y = 0; y < 4; ++y)
        for (int x = 0; x < 4; ++x) img.at(x, y) = 10.0 * x + y;
    VectorField f = VectorField::zeros(4, 4, 2);
    for (std::size_t i = 0; i < f.data.size(); i += 2) f.data[i] = 1.0;
    Image out = warp(img, f);
    for (int y = 0; y < 4; ++y)
        for (int x = 0; x < 4; ++x) {
            int sx = std::min(x + 1, 3);  // border clamps to the last column
            CHECK(out.at(x, y) == doctest::Approx(10.0 * sx + y).epsilon(1e-12));
        }
}

TEST_CASE("warp rejects bad fields") {
    Image img = Image::filled(4, 4, 1.0);
    VectorField nan_field = VectorField::zeros(4, 4, 2);
    nan_field.data[0] = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(warp(img, nan_field), Error);
    CHECK_THROWS_AS(warp(img, VectorField::zeros(4, 4, 3)), Error);
    CHECK_THROWS_AS(warp(img, VectorField::zeros(5, 4, 2)), Error);
}

TEST_CASE("warp is linear in the image before clamping") {
    std::mt19937 rng(302);
    // values small enough that no combination clamps
    Image x = testsup::random_image(rng, 8, 8, 255);
    Image y = testsup::random_image(rng, 8, 8, 255);
    for (double& v : x.data) v *= 0.2;
    for (double& v : y.data) v *= 0.2;
    VectorField f = testsup::random_field(rng, 8, 8, 2, 1.0);
    double a = 0.3, b = 0.6;
    Image mix = x;
    for (std::size_t i = 0; i < mix.data.size(); ++i)
        mix.data[i] = a * x.data[i] + b * y.data[i];
    Image wm = warp(mix, f);
    Image wx = warp(x, f);
    Image wy = warp(y, f);
    for (std::size_t i = 0; i < wm.data.size(); ++i)
        CHECK(wm.data[i] == doctest::Approx(a * wx.data[i] + b * wy.data[i]).epsilon(1e-12));
}

TEST_CASE("registering an image to itself returns a null field") {
    std::mt19937 rng(303);
    Image img = testsup::random_image(rng, 32, 32);
    VectorField u = register_images(img, img);
    CHECK(max_abs_component(u) <= 0.05);
}

TEST_CASE("registering 1x1 images returns the zero field") {
    Image a = Image::filled(1, 1, 10.0);
    Image b = Image::filled(1, 1, 200.0);
    VectorField u = register_images(a, b);
    CHECK(u.width == 1);
    CHECK(u.data == std::vector<double>{0.0, 0.0});
}

TEST_CASE("translation recovery on the shifted-square scene") {
    Image fixed = square_image(64, 20, 20, 16);
    Image moving = square_image(64, 24, 20, 16);
    auto [ox, oy] = best_integer_shift(fixed, moving, 8);
    CHECK(ox == 4);
    CHECK(oy == 0);

    RegResult res = register_images_traced(fixed, moving, {});
    double sum_x = 0.0, sum_y = 0.0;
    int count = 0;
    for (int y = 20; y < 36; ++y)
        for (int x = 20; x < 36; ++x) {
            sum_x += res.field.at(x, y, 0);
            sum_y += res.field.at(x, y, 1);
            ++count;
        }
    double mean_x = sum_x / count;
    double mean_y = sum_y / count;
    CHECK(std::abs(mean_x - ox) <= 0.5);
    CHECK(std::abs(mean_y - oy) <= 0.5);

    // accepted energies never increase, at any level
    for (const auto& trace : res.energy_trace) {
        REQUIRE(!trace.empty());
        for (std::size_t i = 1; i < trace.size(); ++i) CHECK(trace[i] <= trace[i - 1]);
    }
}

TEST_CASE("registration is deterministic") {
    std::mt19937 rng(304);
    Image fixed = testsup::random_image(rng, 24, 24);
    Image moving = testsup::random_image(rng, 24, 24);
    VectorField u1 = register_images(fixed, moving);
    VectorField u2 = register_images(fixed, moving);
    CHECK(u1.data == u2.data);
}

TEST_CASE("analytic energy gradient matches central finite differences") {
    std::mt19937 rng(305);
    for (int seed_trial = 0; seed_trial < 3; ++seed_trial) {
        Image fixed = testsup::random_image(rng, 8, 8);
        Image moving = testsup::random_image(rng, 8, 8);
        VectorField u = VectorField::zeros(8, 8, 2);
        // components in [0.05, 0.45]: away from bilinear kinks at the lattice
        for (double& v : u.data) v = 0.05 + 0.4 * testsup::unit_real(rng);

        auto [energy, grad] = registration_energy_gradient(fixed, moving, u, 1.0);
        CHECK(std::isfinite(energy));
        double num = 0.0, den = 0.0;
        for (std::size_t i = 0; i < u.data.size(); ++i) {
            double h = 1e-5;
            VectorField up = u, um = u;
            up.data[i] += h;
            um.data[i] -= h;
            double actual = up.data[i] - um.data[i];
            double fd = (registration_energy(fixed, moving, up, 1.0) -
                         registration_energy(fixed, moving, um, 1.0)) /
                        actual;
            num += (grad.data[i] - fd) * (grad.data[i] - fd);
            den += fd * fd;
        }
        REQUIRE(den > 0.0);
        CHECK(std::sqrt(num / den) <= 1e-3);
    }
}

TEST_CASE("atlas of identical images is that image") {
    std::mt19937 rng(306);
    Image img = testsup::random_image(rng, 32, 32);
    Image atlas = build_atlas({img, img, img}, {}, 2);
    for (std::size_t i = 0; i < img.data.size(); ++i)
        CHECK(atlas.data[i] == doctest::Approx(img.data[i]).epsilon(1e-6));
}

TEST_CASE("atlas of a single image is that image") {
    std::mt19937 rng(307);
    Image img = testsup::random_image(rng, 16, 16);
    Image atlas = build_atlas({img}, {}, 1);
    CHECK(atlas.data == img.data);
}

TEST_CASE("atlas centroid of two offset squares stays at the mean centroid") {
    Image a = square_image(64, 20, 24, 16);
    Image b = square_image(64, 28, 24, 16);
    Image atlas = build_atlas({a, b}, {}, 2);
    double mass = 0.0, mx = 0.0, my = 0.0;
    for (int y = 0; y < 64; ++y)
        for (int x = 0; x < 64; ++x) {
            mass += atlas.at(x, y);
            mx += atlas.at(x, y) * x;
            my += atlas.at(x, y) * y;
        }
    REQUIRE(mass > 0.0);
    // mean centroid of the inputs: x = (27.5 + 35.5) / 2, y = 31.5
    CHECK(std::abs(mx / mass - 31.5) <= 1.0);
    CHECK(std::abs(my / mass - 31.5) <= 1.0);
}

TEST_CASE("atlas input validation") {
    CHECK_THROWS_AS(build_atlas({}, {}, 1), Error);
    Image a = Image::filled(4, 4, 1.0);
    Image b = Image::filled(5, 4, 1.0);
    CHECK_THROWS_AS(build_atlas({a, b}, {}, 1), Error);
    CHECK_THROWS_AS(build_atlas({a}, {}, 0), Error);
}

TEST_CASE("reg params are validated") {
    RegParams p;
    p.levels = 0;
    CHECK_THROWS_AS(validate(p), Error);
    p = {};
    p.step = 0.0;
    CHECK_THROWS_AS(validate(p), Error);
    p = {};
    p.tol = 0.0;
    CHECK_THROWS_AS(validate(p), Error);
    Image a = Image::filled(4, 4, 1.0);
    Image b = Image::filled(5, 5, 1.0);
    CHECK_THROWS_AS(register_images(a, b), Error);
}

}  // TEST_SUITE
