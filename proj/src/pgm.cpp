#include "fieldops/pgm.hpp"

#include <cmath>
#include <cstdio>
#include <string>

namespace fieldops {

namespace {

constexpr long kMaxDim = 1 << 20;

bool is_space(std::uint8_t c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f';
}

std::string at_byte(std::size_t pos) {
    return " at byte " + std::to_string(pos);
}

// Skips whitespace and '#' comments (which run to end of line).
void skip_separators(std::span<const std::uint8_t> b, std::size_t& pos) {
    while (pos < b.size()) {
        if (is_space(b[pos])) {
            ++pos;
        } else if (b[pos] == '#') {
            while (pos < b.size() && b[pos] != '\n') ++pos;
        } else {
            return;
        }
    }
}

long read_uint(std::span<const std::uint8_t> b, std::size_t& pos, const char* what) {
    skip_separators(b, pos);
    if (pos >= b.size())
        throw Error(ErrorKind::Truncated,
                    std::string("pgm: missing ") + what + at_byte(pos));
    if (b[pos] < '0' || b[pos] > '9')
        throw Error(ErrorKind::Format,
                    std::string("pgm: expected digit for ") + what + at_byte(pos));
    long value = 0;
    while (pos < b.size() && b[pos] >= '0' && b[pos] <= '9') {
        value = value * 10 + (b[pos] - '0');
        if (value > kMaxDim * 64)
            throw Error(ErrorKind::Range,
                        std::string("pgm: ") + what + " too large" + at_byte(pos));
        ++pos;
    }
    return value;
}

}  // namespace

Image decode_image(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 2)
        throw Error(ErrorKind::Truncated, "pgm: input shorter than magic at byte 0");
    if (bytes[0] != 'P' || (bytes[1] != '2' && bytes[1] != '5'))
        throw Error(ErrorKind::Format, "pgm: bad magic at byte 0: expected P2 or P5");
    bool binary = bytes[1] == '5';

    std::size_t pos = 2;
    if (pos < bytes.size() && !is_space(bytes[pos]) && bytes[pos] != '#')
        throw Error(ErrorKind::Format, "pgm: junk after magic" + at_byte(pos));

    long width = read_uint(bytes, pos, "width");
    long height = read_uint(bytes, pos, "height");
    long max_value = read_uint(bytes, pos, "max value");
    if (width < 1 || width > kMaxDim)
        throw Error(ErrorKind::Range, "pgm: width out of range" + at_byte(pos));
    if (height < 1 || height > kMaxDim)
        throw Error(ErrorKind::Range, "pgm: height out of range" + at_byte(pos));
    if (max_value < 1 || max_value > 65535)
        throw Error(ErrorKind::Range, "pgm: max value out of range [1, 65535]" + at_byte(pos));

    Image img;
    img.width = int(width);
    img.height = int(height);
    img.max_value = int(max_value);
    std::size_t n = std::size_t(width) * std::size_t(height);

    if (binary) {
        // Exactly one whitespace byte separates the header from the payload.
        if (pos >= bytes.size())
            throw Error(ErrorKind::Truncated, "pgm: missing payload" + at_byte(pos));
        if (!is_space(bytes[pos]))
            throw Error(ErrorKind::Format,
                        "pgm: expected single whitespace before payload" + at_byte(pos));
        ++pos;
        int bpp = max_value <= 255 ? 1 : 2;
        std::size_t need = n * bpp;
        std::size_t have = bytes.size() - pos;
        if (have < need)
            throw Error(ErrorKind::Truncated,
                        "pgm: truncated payload: expected " + std::to_string(need) +
                            " bytes, got " + std::to_string(have) + at_byte(pos));
        if (have > need)
            throw Error(ErrorKind::Format,
                        "pgm: trailing data after payload" + at_byte(pos + need));
        img.data.resize(n);
        if (bpp == 1) {
            for (std::size_t i = 0; i < n; ++i) {
                std::uint8_t v = bytes[pos + i];
                if (v > max_value)
                    throw Error(ErrorKind::Range,
                                "pgm: pixel exceeds max value" + at_byte(pos + i));
                img.data[i] = double(v);
            }
        } else {
            for (std::size_t i = 0; i < n; ++i) {
                unsigned v = (unsigned(bytes[pos + 2 * i]) << 8) | bytes[pos + 2 * i + 1];
                if (v > unsigned(max_value))
                    throw Error(ErrorKind::Range,
                                "pgm: pixel exceeds max value" + at_byte(pos + 2 * i));
                img.data[i] = double(v);
            }
        }
    } else {
        img.data.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t value_pos = pos;
            long v = read_uint(bytes, value_pos, "pixel value");
            if (v > max_value)
                throw Error(ErrorKind::Range, "pgm: pixel exceeds max value" + at_byte(pos));
            img.data[i] = double(v);
            pos = value_pos;
        }
        skip_separators(bytes, pos);
        if (pos != bytes.size())
            throw Error(ErrorKind::Format, "pgm: trailing data after pixels" + at_byte(pos));
    }
    return img;
}

std::vector<std::uint8_t> encode_image(const Image& img) {
    validate(img);
    char header[64];
    int len = std::snprintf(header, sizeof header, "P5\n%d %d\n%d\n", img.width,
                            img.height, img.max_value);
    std::vector<std::uint8_t> out(header, header + len);
    int bpp = img.max_value <= 255 ? 1 : 2;
    out.reserve(out.size() + img.data.size() * bpp);
    for (double v : img.data) {
        auto q = (unsigned long)(std::floor(v + 0.5));  // round half-up
        if (bpp == 1) {
            out.push_back(std::uint8_t(q));
        } else {
            out.push_back(std::uint8_t(q >> 8));
            out.push_back(std::uint8_t(q & 0xff));
        }
    }
    return out;
}

}  // namespace fieldops
