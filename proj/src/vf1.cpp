#include "fieldops/vf1.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <string>

namespace fieldops {

namespace {

constexpr long kMaxDim = 1 << 20;

struct Vf1Header {
    long width = 0;
    long height = 0;
    long channels = 0;
    std::size_t payload_offset = 0;
};

long parse_long(std::span<const std::uint8_t> b, std::size_t& pos, const char* what) {
    if (pos >= b.size() || b[pos] < '0' || b[pos] > '9')
        throw Error(ErrorKind::Format, std::string("vf1: expected ") + what +
                                           " at byte " + std::to_string(pos));
    long value = 0;
    while (pos < b.size() && b[pos] >= '0' && b[pos] <= '9') {
        value = value * 10 + (b[pos] - '0');
        if (value > kMaxDim * 64)
            throw Error(ErrorKind::Range, std::string("vf1: ") + what + " too large at byte " +
                                              std::to_string(pos));
        ++pos;
    }
    return value;
}

void expect_space(std::span<const std::uint8_t> b, std::size_t& pos) {
    if (pos >= b.size() || b[pos] != ' ')
        throw Error(ErrorKind::Format, "vf1: expected space at byte " + std::to_string(pos));
    ++pos;
    while (pos < b.size() && b[pos] == ' ') ++pos;
}

Vf1Header parse_header(std::span<const std::uint8_t> b) {
    if (b.size() < 4 || std::memcmp(b.data(), "VF1", 3) != 0)
        throw Error(ErrorKind::Format, "vf1: bad magic at byte 0: expected VF1");
    std::size_t pos = 3;
    Vf1Header h;
    expect_space(b, pos);
    h.width = parse_long(b, pos, "width");
    expect_space(b, pos);
    h.height = parse_long(b, pos, "height");
    expect_space(b, pos);
    h.channels = parse_long(b, pos, "channels");
    if (pos >= b.size() || b[pos] != '\n')
        throw Error(ErrorKind::Format,
                    "vf1: expected newline after header at byte " + std::to_string(pos));
    h.payload_offset = pos + 1;
    if (h.width < 1 || h.width > kMaxDim || h.height < 1 || h.height > kMaxDim)
        throw Error(ErrorKind::Range, "vf1: dimensions out of range");
    return h;
}

std::vector<double> parse_payload(std::span<const std::uint8_t> b, const Vf1Header& h) {
    std::size_t count = std::size_t(h.width) * std::size_t(h.height) * std::size_t(h.channels);
    std::size_t need = count * 4;
    std::size_t have = b.size() - h.payload_offset;
    if (have < need)
        throw Error(ErrorKind::Truncated,
                    "vf1: truncated payload: expected " + std::to_string(need) +
                        " bytes, got " + std::to_string(have));
    if (have > need)
        throw Error(ErrorKind::Format, "vf1: trailing data after payload at byte " +
                                           std::to_string(h.payload_offset + need));
    std::vector<double> data(count);
    const std::uint8_t* p = b.data() + h.payload_offset;
    for (std::size_t i = 0; i < count; ++i, p += 4) {
        std::uint32_t bits = std::uint32_t(p[0]) | (std::uint32_t(p[1]) << 8) |
                             (std::uint32_t(p[2]) << 16) | (std::uint32_t(p[3]) << 24);
        float v = std::bit_cast<float>(bits);
        if (!std::isfinite(v))
            throw Error(ErrorKind::Validation,
                        "vf1: non-finite component at element " + std::to_string(i));
        data[i] = double(v);
    }
    return data;
}

void append_payload(std::vector<std::uint8_t>& out, const std::vector<double>& data) {
    out.reserve(out.size() + data.size() * 4);
    for (double d : data) {
        std::uint32_t bits = std::bit_cast<std::uint32_t>(float(d));
        out.push_back(std::uint8_t(bits & 0xff));
        out.push_back(std::uint8_t((bits >> 8) & 0xff));
        out.push_back(std::uint8_t((bits >> 16) & 0xff));
        out.push_back(std::uint8_t((bits >> 24) & 0xff));
    }
}

std::vector<std::uint8_t> make_header(int w, int h, int c) {
    char header[64];
    int len = std::snprintf(header, sizeof header, "VF1 %d %d %d\n", w, h, c);
    return std::vector<std::uint8_t>(header, header + len);
}

}  // namespace

VectorField decode_field(std::span<const std::uint8_t> bytes) {
    Vf1Header h = parse_header(bytes);
    if (h.channels != 2 && h.channels != 3)
        throw Error(ErrorKind::Range,
                    "vf1: channels must be 2 or 3, got " + std::to_string(h.channels));
    VectorField f;
    f.width = int(h.width);
    f.height = int(h.height);
    f.channels = int(h.channels);
    f.data = parse_payload(bytes, h);
    return f;
}

std::vector<std::uint8_t> encode_field(const VectorField& field) {
    validate(field);
    auto out = make_header(field.width, field.height, field.channels);
    append_payload(out, field.data);
    return out;
}

ScalarField decode_scalar_field(std::span<const std::uint8_t> bytes) {
    Vf1Header h = parse_header(bytes);
    if (h.channels != 1)
        throw Error(ErrorKind::Range,
                    "vf1: scalar map must have 1 channel, got " + std::to_string(h.channels));
    ScalarField f;
    f.width = int(h.width);
    f.height = int(h.height);
    f.data = parse_payload(bytes, h);
    return f;
}

std::vector<std::uint8_t> encode_scalar_field(const ScalarField& field) {
    validate(field);
    auto out = make_header(field.width, field.height, 1);
    append_payload(out, field.data);
    return out;
}

}  // namespace fieldops
