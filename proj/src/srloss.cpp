#include "fieldops/srloss.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "fieldops/geometry.hpp"
#include "fieldops/kernels.hpp"

namespace fieldops {

FeatureMap IdentityExtractor::extract(const Image& img) const {
    validate(img);
    return {img.width, img.height, img.data};
}

ConvStackExtractor::ConvStackExtractor(std::uint32_t seed, int depth) {
    if (depth < 1)
        throw Error(ErrorKind::Validation, "conv extractor: depth must be >= 1");
    std::mt19937 rng(seed);
    layer_kernels_.resize(depth);
    for (auto& kernel : layer_kernels_)
        for (double& w : kernel) w = double(rng()) / 4294967296.0 - 0.5;
}

FeatureMap ConvStackExtractor::extract(const Image& img) const {
    validate(img);
    int depth = int(layer_kernels_.size());
    if (img.width - 2 * depth < 1 || img.height - 2 * depth < 1)
        throw Error(ErrorKind::Dimension,
                    "conv extractor: image " + std::to_string(img.width) + "x" +
                        std::to_string(img.height) + " too small for depth " +
                        std::to_string(depth));
    FeatureMap map{img.width, img.height, img.data};
    for (const auto& kernel : layer_kernels_) {
        FeatureMap next{map.width - 2, map.height - 2, {}};
        next.data.resize(std::size_t(next.width) * next.height);
        kernels::conv3x3_relu(map.data, map.width, map.height,
                              std::span<const double>(kernel.data(), 9), next.data);
        map = std::move(next);
    }
    return map;
}

Image downsample4x(const Image& img) {
    validate(img);
    if (img.width % 4 != 0 || img.height % 4 != 0)
        throw Error(ErrorKind::Dimension,
                    "downsample4x: width and height must be divisible by 4, got " +
                        std::to_string(img.width) + "x" + std::to_string(img.height));
    Image out;
    out.width = img.width / 4;
    out.height = img.height / 4;
    out.max_value = img.max_value;
    out.data.resize(out.pixel_count());
    kernels::block_mean(img.data, img.width, img.height, 4, out.data);
    return out;
}

double adversarial_objective(const std::vector<double>& d_real,
                             const std::vector<double>& d_fake) {
    if (d_real.empty() || d_fake.empty())
        throw Error(ErrorKind::Validation, "adversarial objective: empty probability list");
    static constexpr double eps = 1e-12;
    auto mean_log = [](const std::vector<double>& values, bool complement,
                       const char* which) {
        double sum = 0.0;
        for (std::size_t i = 0; i < values.size(); ++i) {
            double v = values[i];
            if (!(v >= 0.0 && v <= 1.0))
                throw Error(ErrorKind::Range,
                            std::string("adversarial objective: ") + which + " value at index " +
                                std::to_string(i) + " outside [0, 1]");
            double arg = complement ? 1.0 - v : v;
            sum += std::log(std::clamp(arg, eps, 1.0));
        }
        return sum / double(values.size());
    };
    return mean_log(d_real, false, "d_real") + mean_log(d_fake, true, "d_fake");
}

double feature_loss(const Image& hr, const Image& sr, const FeatureExtractor& phi) {
    validate(hr);
    validate(sr);
    if (hr.width != sr.width || hr.height != sr.height)
        throw Error(ErrorKind::Dimension, "feature loss: image dimension mismatch");
    FeatureMap fh = phi.extract(hr);
    FeatureMap fs = phi.extract(sr);
    if (fh.width != fs.width || fh.height != fs.height)
        throw Error(ErrorKind::Dimension, "feature loss: extractor output dims differ");
    return kernels::ssd_mean(fh.data, fs.data, fh.width, fh.height);
}

double cv_loss(const Image& hr, const Image& sr, const Image& reference,
               const RegParams& p) {
    validate(hr);
    validate(sr);
    validate(reference);
    if (hr.width != sr.width || hr.height != sr.height ||
        hr.width != reference.width || hr.height != reference.height)
        throw Error(ErrorKind::Dimension, "cv loss: all three images must share dims");
    ScalarField cv_hr = curl_scalar(register_images(reference, hr, p));
    ScalarField cv_sr = curl_scalar(register_images(reference, sr, p));
    return kernels::ssd_mean(cv_hr.data, cv_sr.data, cv_hr.width, cv_hr.height);
}

}  // namespace fieldops
