#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "fieldops/types.hpp"

namespace fieldops {

/**
 * VF1 container, bit-exact: ASCII first line "VF1 <width> <height> <channels>\n"
 * followed immediately by width*height*channels IEEE-754 little-endian 32-bit
 * floats, row-major, channel-interleaved per pixel.
 *
 * Vector fields use channels 2 or 3. Scalar maps reuse the container with
 * channels = 1 via the *_scalar_field functions. Components read from a file
 * are exact float values, so decode_field(encode_field(f)) is bit-exact for
 * any field whose components are float-representable (in particular anything
 * that was ever decoded); encoding rounds other doubles to nearest float.
 */
VectorField decode_field(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> encode_field(const VectorField& field);

ScalarField decode_scalar_field(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> encode_scalar_field(const ScalarField& field);

}  // namespace fieldops
