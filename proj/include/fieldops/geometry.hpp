#pragma once

#include "fieldops/types.hpp"

namespace fieldops {

struct GridRenderParams {
    int spacing = 8;               // pixels between grid lines, >= 2
    double line_value = 0.0;
    double background_value = -1.0;  // negative means "use max_value"
    int max_value = 255;             // intensity ceiling of the rendered image
};

/**
 * Per-pixel det(I + grad u) of the map x -> x + u(x). Derivatives use central
 * differences in the interior and one-sided differences on the borders, so
 * linear fields are differentiated exactly.
 */
ScalarField jacobian_determinant(const VectorField& field);

/// Scalar curl d(u_y)/dx - d(u_x)/dy of a 2-channel field.
ScalarField curl_scalar(const VectorField& field);

/**
 * Curl of a planar 3-component field (each component a function of (x, y),
 * d/dz == 0): (d(u_z)/dy, -d(u_z)/dx, d(u_y)/dx - d(u_x)/dy).
 */
VectorField curl_planar3(const VectorField& field);

/// Copies one component of a field into a scalar map (used for rendering).
ScalarField extract_channel(const VectorField& field, int channel);

/**
 * Renders a synthetic grid image (lines every spacing pixels) over the
 * field's domain and warps it by the field: the deformed-grid visualization.
 */
Image render_grid(const VectorField& field, const GridRenderParams& p = {});

/**
 * Affine min-max normalization of a scalar map to [0, max_value], rounded
 * half-up; a constant map renders as max_value / 2 (rounded down).
 */
Image field_to_image(const ScalarField& f, int max_value = 255);

}  // namespace fieldops
