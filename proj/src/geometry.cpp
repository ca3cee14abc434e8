#include "fieldops/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fieldops/kernels.hpp"
#include "fieldops/registration.hpp"

namespace fieldops {

ScalarField jacobian_determinant(const VectorField& field) {
    validate(field);
    if (field.channels != 2)
        throw Error(ErrorKind::Dimension,
                    "jacobian determinant: field must have 2 channels, got " +
                        std::to_string(field.channels));
    ScalarField out = ScalarField::zeros(field.width, field.height);
    kernels::jacobian_det(field.data, field.width, field.height, out.data);
    return out;
}

ScalarField curl_scalar(const VectorField& field) {
    validate(field);
    if (field.channels != 2)
        throw Error(ErrorKind::Dimension, "curl: scalar curl needs a 2-channel field, got " +
                                              std::to_string(field.channels));
    ScalarField out = ScalarField::zeros(field.width, field.height);
    kernels::curl2(field.data, field.width, field.height, out.data);
    return out;
}

VectorField curl_planar3(const VectorField& field) {
    validate(field);
    if (field.channels != 3)
        throw Error(ErrorKind::Dimension, "curl: planar curl needs a 3-channel field, got " +
                                              std::to_string(field.channels));
    VectorField out = VectorField::zeros(field.width, field.height, 3);
    kernels::curl3(field.data, field.width, field.height, out.data);
    return out;
}

ScalarField extract_channel(const VectorField& field, int channel) {
    validate(field);
    if (channel < 0 || channel >= field.channels)
        throw Error(ErrorKind::Range, "extract_channel: channel " + std::to_string(channel) +
                                          " out of range");
    ScalarField out = ScalarField::zeros(field.width, field.height);
    for (int y = 0; y < field.height; ++y)
        for (int x = 0; x < field.width; ++x) out.at(x, y) = field.at(x, y, channel);
    return out;
}

Image render_grid(const VectorField& field, const GridRenderParams& p) {
    validate(field);
    if (field.channels != 2)
        throw Error(ErrorKind::Dimension, "render_grid: field must have 2 channels");
    if (p.spacing < 2)
        throw Error(ErrorKind::Validation, "render_grid: spacing must be >= 2");
    if (p.max_value < 1)
        throw Error(ErrorKind::Validation, "render_grid: max_value must be >= 1");
    double background = p.background_value < 0.0 ? double(p.max_value) : p.background_value;
    Image grid;
    grid.width = field.width;
    grid.height = field.height;
    grid.max_value = p.max_value;
    grid.data.resize(grid.pixel_count());
    for (int y = 0; y < grid.height; ++y)
        for (int x = 0; x < grid.width; ++x)
            grid.at(x, y) = (x % p.spacing == 0 || y % p.spacing == 0) ? p.line_value
                                                                       : background;
    validate(grid);
    return warp(grid, field);
}

Image field_to_image(const ScalarField& f, int max_value) {
    validate(f);
    if (max_value < 1)
        throw Error(ErrorKind::Validation, "field_to_image: max_value must be >= 1");
    auto [lo_it, hi_it] = std::minmax_element(f.data.begin(), f.data.end());
    double lo = *lo_it;
    double hi = *hi_it;
    Image out;
    out.width = f.width;
    out.height = f.height;
    out.max_value = max_value;
    out.data.resize(f.data.size());
    if (hi == lo) {
        double mid = double(max_value / 2);  // constant maps render mid-gray
        std::fill(out.data.begin(), out.data.end(), mid);
    } else {
        double scale = double(max_value) / (hi - lo);
        for (std::size_t i = 0; i < f.data.size(); ++i)
            out.data[i] = std::floor((f.data[i] - lo) * scale + 0.5);
    }
    return out;
}

}  // namespace fieldops
