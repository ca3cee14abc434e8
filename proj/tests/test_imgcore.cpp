#include <doctest.h>

#include <cmath>
#include <cstring>
#include <string>

#include "fieldops/pgm.hpp"
#include "fieldops/vf1.hpp"
#include "test_support.hpp"

using namespace fieldops;

namespace {

std::vector<std::uint8_t> bytes_of(const std::string& s) {
    return std::vector<std::uint8_t>(s.begin(), s.end());
}

}  // namespace

TEST_SUITE("imgcore") {

TEST_CASE("pgm P2 decode") {
    Image img = decode_image(bytes_of("P2\n2 2\n255\n0 128 255 64\n"));
    CHECK(img.width == 2);
    CHECK(img.height == 2);
    CHECK(img.max_value == 255);
    CHECK(img.data == std::vector<double>{0, 128, 255, 64});
}

TEST_CASE("pgm header comments are skipped") {
    Image img = decode_image(bytes_of("P2 # magic\n# full line\n2 1 # dims\n255\n7 9"));
    CHECK(img.width == 2);
    CHECK(img.data == std::vector<double>{7, 9});
}

TEST_CASE("pgm bad magic") {
    CHECK_THROWS_WITH_AS(decode_image(bytes_of("P7\n1 1\n255\n\x00")),
                         doctest::Contains("magic"), Error);
}

TEST_CASE("pgm encode smallest image") {
    Image img = Image::filled(1, 1, 0.0);
    auto bytes = encode_image(img);
    std::string expect = std::string("P5\n1 1\n255\n") + '\0';
    CHECK(std::string(bytes.begin(), bytes.end()) == expect);
}

TEST_CASE("pgm encode extremes payload") {
    Image img{2, 1, 255, {255, 0}};
    auto bytes = encode_image(img);
    REQUIRE(bytes.size() >= 2);
    CHECK(bytes[bytes.size() - 2] == 0xFF);
    CHECK(bytes.back() == 0x00);
}

TEST_CASE("pgm encode rounds half-up") {
    auto enc = encode_image(Image{2, 1, 255, {127.5, 126.4999}});
    CHECK(enc[enc.size() - 2] == 128);
    CHECK(enc.back() == 126);
}

TEST_CASE("pgm 16-bit payloads are big-endian") {
    Image img{2, 1, 65535, {256, 65535}};
    auto bytes = encode_image(img);
    std::size_t n = bytes.size();
    CHECK(bytes[n - 4] == 0x01);
    CHECK(bytes[n - 3] == 0x00);
    CHECK(bytes[n - 2] == 0xFF);
    CHECK(bytes[n - 1] == 0xFF);
    Image back = decode_image(bytes);
    CHECK(back.data == img.data);
    CHECK(back.max_value == 65535);
}

TEST_CASE("pgm truncation and trailing errors") {
    CHECK_THROWS_AS(decode_image(bytes_of("P5\n2 2\n255\nab")), Error);  // 2 of 4 bytes
    CHECK_THROWS_WITH_AS(decode_image(bytes_of("P5\n2 2\n255\nabcde")),
                         doctest::Contains("trailing"), Error);
    CHECK_THROWS_AS(decode_image(bytes_of("P2\n2 2\n255\n1 2 3")), Error);
    CHECK_THROWS_WITH_AS(decode_image(bytes_of("P2\n2 2\n255\n1 2 3 4 5")),
                         doctest::Contains("trailing"), Error);
}

TEST_CASE("pgm rejects pixels above max value") {
    CHECK_THROWS_WITH_AS(decode_image(bytes_of("P2\n1 1\n100\n101")),
                         doctest::Contains("max value"), Error);
}

TEST_CASE("pgm round-trips: decode(encode(x)) == round(x), encode(decode(b)) == b") {
    std::mt19937 rng(7);
    for (int trial = 0; trial < 25; ++trial) {
        int w = 1 + int(rng() % 9);
        int h = 1 + int(rng() % 9);
        int maxv = trial % 3 == 0 ? 1023 : 255;
        Image img = testsup::random_image(rng, w, h, maxv);
        // real-valued image: decode(encode(.)) quantizes half-up
        Image real = img;
        for (double& v : real.data)
            v = std::min(double(maxv), v + testsup::unit_real(rng));
        Image round_tripped = decode_image(encode_image(real));
        for (std::size_t i = 0; i < real.data.size(); ++i)
            CHECK(round_tripped.data[i] == std::floor(real.data[i] + 0.5));
        // canonical bytes: encode(decode(b)) == b
        auto canonical = encode_image(img);
        CHECK(encode_image(decode_image(canonical)) == canonical);
    }
}

TEST_CASE("pgm header corruption never yields an invalid image") {
    std::mt19937 rng(11);
    Image img = testsup::random_image(rng, 5, 4);
    auto canonical = encode_image(img);
    std::size_t header_len = std::string("P5\n5 4\n255\n").size();
    for (std::size_t pos = 0; pos < header_len; ++pos) {
        for (int trial = 0; trial < 16; ++trial) {
            auto corrupted = canonical;
            std::uint8_t replacement = std::uint8_t(rng() % 256);
            if (replacement == corrupted[pos]) continue;
            corrupted[pos] = replacement;
            try {
                Image out = decode_image(corrupted);
                validate(out);  // anything decoded must satisfy every invariant
            } catch (const Error&) {
                // structured rejection is the expected outcome
            }
        }
    }
}

TEST_CASE("vf1 decode example") {
    std::string header = "VF1 2 1 2\n";
    std::vector<std::uint8_t> bytes(header.begin(), header.end());
    const float payload[] = {1.0f, 0.0f, 0.0f, 1.0f};
    const auto* p = reinterpret_cast<const std::uint8_t*>(payload);
    bytes.insert(bytes.end(), p, p + sizeof payload);
    VectorField f = decode_field(bytes);
    CHECK(f.width == 2);
    CHECK(f.height == 1);
    CHECK(f.channels == 2);
    CHECK(f.data == std::vector<double>{1, 0, 0, 1});
}

TEST_CASE("vf1 round-trip is bit-exact") {
    std::mt19937 rng(23);
    for (int trial = 0; trial < 25; ++trial) {
        int w = 1 + int(rng() % 8);
        int h = 1 + int(rng() % 8);
        int ch = trial % 2 == 0 ? 2 : 3;
        VectorField f = testsup::random_float_field(rng, w, h, ch);
        auto bytes = encode_field(f);
        VectorField back = decode_field(bytes);
        CHECK(back.width == f.width);
        CHECK(back.height == f.height);
        CHECK(back.channels == f.channels);
        CHECK(back.data == f.data);
        CHECK(encode_field(back) == bytes);
    }
}

TEST_CASE("vf1 truncated payload") {
    std::string header = "VF1 2 2 2\n";
    std::vector<std::uint8_t> bytes(header.begin(), header.end());
    bytes.resize(bytes.size() + 12, 0);  // needs 32 payload bytes
    CHECK_THROWS_WITH_AS(decode_field(bytes), doctest::Contains("truncated"), Error);
}

TEST_CASE("vf1 channel count is checked per container kind") {
    ScalarField s{2, 2, {1, 2, 3, 4}};
    auto scalar_bytes = encode_scalar_field(s);
    CHECK_THROWS_WITH_AS(decode_field(scalar_bytes), doctest::Contains("channels"), Error);

    VectorField f = VectorField::zeros(2, 2, 2);
    auto field_bytes = encode_field(f);
    CHECK_THROWS_AS(decode_scalar_field(field_bytes), Error);

    ScalarField back = decode_scalar_field(scalar_bytes);
    CHECK(back.data == s.data);
}

TEST_CASE("vf1 rejects non-finite components") {
    std::string header = "VF1 1 1 2\n";
    std::vector<std::uint8_t> bytes(header.begin(), header.end());
    const float payload[] = {std::numeric_limits<float>::quiet_NaN(), 0.0f};
    const auto* p = reinterpret_cast<const std::uint8_t*>(payload);
    bytes.insert(bytes.end(), p, p + sizeof payload);
    CHECK_THROWS_WITH_AS(decode_field(bytes), doctest::Contains("non-finite"), Error);
}

TEST_CASE("vf1 header corruption is rejected or re-validated") {
    std::mt19937 rng(31);
    VectorField f = testsup::random_float_field(rng, 3, 2, 2);
    auto canonical = encode_field(f);
    for (std::size_t pos = 0; pos < std::string("VF1 3 2 2\n").size(); ++pos) {
        for (int trial = 0; trial < 16; ++trial) {
            auto corrupted = canonical;
            std::uint8_t replacement = std::uint8_t(rng() % 256);
            if (replacement == corrupted[pos]) continue;
            corrupted[pos] = replacement;
            try {
                VectorField out = decode_field(corrupted);
                validate(out);
            } catch (const Error&) {
            }
        }
    }
}

TEST_CASE("type invariants are enforced") {
    Image img{2, 2, 255, {0, 0, 0}};
    CHECK_THROWS_AS(validate(img), Error);
    img.data = {0, 0, 0, 300};
    CHECK_THROWS_AS(validate(img), Error);
    VectorField f = VectorField::zeros(2, 2, 2);
    f.channels = 4;
    CHECK_THROWS_AS(validate(f), Error);
    VectorField nan_field = VectorField::zeros(2, 2, 2);
    nan_field.data[1] = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(validate(nan_field), Error);
}

}  // TEST_SUITE
