#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "fieldops/registration.hpp"
#include "fieldops/types.hpp"

namespace fieldops {

struct FeatureMap {
    int width = 0;
    int height = 0;
    std::vector<double> data;
};

/// Deterministic map Image -> FeatureMap: the same image always yields an
/// identical feature map.
class FeatureExtractor {
public:
    virtual ~FeatureExtractor() = default;
    virtual FeatureMap extract(const Image& img) const = 0;
};

/// Pixels as features: the feature map is the raw intensity raster.
class IdentityExtractor final : public FeatureExtractor {
public:
    FeatureMap extract(const Image& img) const override;
};

/**
 * Fixed-seed stack of depth 3x3 valid convolutions, each followed by
 * half-rectification max(0, .). Layer kernels are drawn row-major from
 * mt19937(seed), one layer after another, with each weight
 * rng() / 2^32 - 0.5. Every layer shrinks the map by 2 in each axis.
 */
class ConvStackExtractor final : public FeatureExtractor {
public:
    ConvStackExtractor(std::uint32_t seed, int depth);
    FeatureMap extract(const Image& img) const override;

private:
    std::vector<std::array<double, 9>> layer_kernels_;
};

/// Each output pixel is the arithmetic mean of its 4x4 source block.
Image downsample4x(const Image& img);

/**
 * Discriminator-side adversarial objective:
 * mean(ln d_real) + mean(ln(1 - d_fake)), natural log, with arguments
 * clamped to [1e-12, 1] so degenerate probabilities stay finite.
 */
double adversarial_objective(const std::vector<double>& d_real,
                             const std::vector<double>& d_fake);

/// Mean squared feature-space distance: (1/(W*H)) * sum (phi(hr) - phi(sr))^2.
double feature_loss(const Image& hr, const Image& sr, const FeatureExtractor& phi);

/**
 * Curl-map loss. CV(I) is the scalar curl of the displacement field from
 * registering I against the caller-supplied reference; the loss is the mean
 * squared difference of CV(hr) and CV(sr).
 */
double cv_loss(const Image& hr, const Image& sr, const Image& reference,
               const RegParams& p = {});

}  // namespace fieldops
