#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "fieldops/types.hpp"

namespace fieldops {

/**
 * Decode a PGM file (P2 ASCII or P5 binary, netpbm convention).
 *
 * '#' comments are allowed anywhere whitespace is allowed in the header.
 * P5 payloads use one byte per pixel when max_value <= 255, otherwise two
 * big-endian bytes. The payload must match the header exactly: missing bytes
 * raise a truncation error, trailing bytes a format error. Errors carry the
 * byte offset of the offending input.
 */
Image decode_image(std::span<const std::uint8_t> bytes);

/**
 * Encode to canonical P5: header "P5\n<w> <h>\n<max>\n" followed by the
 * payload, no comments. Values are rounded half-up to integers.
 */
std::vector<std::uint8_t> encode_image(const Image& img);

}  // namespace fieldops
