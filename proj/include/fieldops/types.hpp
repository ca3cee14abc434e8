#pragma once

#include <cstddef>
#include <vector>

#include "fieldops/error.hpp"

namespace fieldops {

/**
 * 2-D grayscale raster.
 *
 * Pixel data is row-major: the value of pixel (x, y) lives at
 * data[y * width + x]. Intensities are kept as reals in [0, max_value];
 * the file codecs quantize on write (round half-up) so registration and
 * metric math can stay real-valued in between.
 */
struct Image {
    int width = 0;
    int height = 0;
    int max_value = 255;
    std::vector<double> data;

    static Image filled(int width, int height, double value, int max_value = 255);

    double at(int x, int y) const { return data[std::size_t(y) * width + x]; }
    double& at(int x, int y) { return data[std::size_t(y) * width + x]; }
    std::size_t pixel_count() const { return std::size_t(width) * height; }
};

/**
 * Dense per-pixel displacement field, in pixel units.
 *
 * channels = 2 stores (u_x, u_y); channels = 3 adds u_z for the planar
 * three-component convention. Layout is row-major and channel-interleaved:
 * component c of pixel (x, y) is data[(y * width + x) * channels + c].
 */
struct VectorField {
    int width = 0;
    int height = 0;
    int channels = 2;
    std::vector<double> data;

    static VectorField zeros(int width, int height, int channels = 2);

    double at(int x, int y, int c) const {
        return data[(std::size_t(y) * width + x) * channels + c];
    }
    double& at(int x, int y, int c) {
        return data[(std::size_t(y) * width + x) * channels + c];
    }
    std::size_t pixel_count() const { return std::size_t(width) * height; }
};

/// Dense per-pixel scalar map; same layout as Image but unbounded values.
struct ScalarField {
    int width = 0;
    int height = 0;
    std::vector<double> data;

    static ScalarField zeros(int width, int height);

    double at(int x, int y) const { return data[std::size_t(y) * width + x]; }
    double& at(int x, int y) { return data[std::size_t(y) * width + x]; }
    std::size_t pixel_count() const { return std::size_t(width) * height; }
};

// Invariant checks. Each throws Error(ErrorKind::Validation) with the first
// violated condition.
void validate(const Image& img);
void validate(const VectorField& field);
void validate(const ScalarField& field);

}  // namespace fieldops
