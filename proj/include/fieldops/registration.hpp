#pragma once

#include <utility>
#include <vector>

#include "fieldops/types.hpp"

namespace fieldops {

struct RegParams {
    int levels = 3;            // pyramid depth
    int iters_per_level = 200; // iteration cap per level
    double step = 0.5;         // gradient step, intensity-normalized units
    double smooth_weight = 1.0;
    double tol = 1e-5;         // relative energy-decrease stopping threshold
};

void validate(const RegParams& p);

/**
 * Backward warp: out(x) = bilinear sample of img at x + field(x), so the
 * field maps output-grid coordinates into the image being resampled.
 * Samples outside the domain clamp to the nearest border pixel; output is
 * clamped to [0, max_value].
 */
Image warp(const Image& img, const VectorField& field);

struct RegResult {
    VectorField field;
    // Accepted energies per pyramid level, coarsest level first; entry 0 of
    // each trace is the energy of the level's starting field.
    std::vector<std::vector<double>> energy_trace;
};

/**
 * Variational registration: minimizes
 *     E(u) = sum_x (warp(moving, u)(x) - fixed(x))^2
 *          + smooth_weight * sum_x |grad u(x)|^2
 * over intensity-normalized images by coarse-to-fine gradient descent. Each
 * level starts from the upsampled coarser solution (or the zero field,
 * whichever has lower energy), so E(result) <= E(0). Deterministic: identical
 * inputs and params give a bit-identical field.
 */
RegResult register_images_traced(const Image& fixed, const Image& moving,
                                 const RegParams& p = {});
VectorField register_images(const Image& fixed, const Image& moving,
                            const RegParams& p = {});

/**
 * Iterative template construction. T_0 is the pixelwise mean; each round
 * registers every image to T_k, warps it, and averages the warped images
 * into T_{k+1}. Returns T_rounds.
 */
Image build_atlas(const std::vector<Image>& images, const RegParams& p, int rounds);

// Registration energy on intensity-normalized images, and its analytic
// gradient with respect to the displacement field. Exposed so the gradient
// can be checked against finite differences of the energy.
double registration_energy(const Image& fixed, const Image& moving,
                           const VectorField& field, double smooth_weight);
std::pair<double, VectorField> registration_energy_gradient(const Image& fixed,
                                                            const Image& moving,
                                                            const VectorField& field,
                                                            double smooth_weight);

}  // namespace fieldops
