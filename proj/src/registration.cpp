#include "fieldops/registration.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fieldops/kernels.hpp"

namespace fieldops {

namespace {

void require_same_dims(const Image& a, const Image& b, const char* what) {
    if (a.width != b.width || a.height != b.height)
        throw Error(ErrorKind::Dimension,
                    std::string(what) + ": dimension mismatch " + std::to_string(a.width) +
                        "x" + std::to_string(a.height) + " vs " + std::to_string(b.width) +
                        "x" + std::to_string(b.height));
}

std::vector<double> normalized(const Image& img) {
    std::vector<double> out(img.data.size());
    double inv = 1.0 / double(img.max_value);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = img.data[i] * inv;
    return out;
}

struct Level {
    int w = 0;
    int h = 0;
    std::vector<double> fixed;
    std::vector<double> moving;
};

// Finest level first. Levels are added by 2x area-mean downsampling until the
// requested depth is reached or the next level would drop below 4 px.
std::vector<Level> build_pyramid(const Image& fixed, const Image& moving, int levels) {
    std::vector<Level> pyr;
    pyr.push_back({fixed.width, fixed.height, normalized(fixed), normalized(moving)});
    while (int(pyr.size()) < levels) {
        const Level& prev = pyr.back();
        int nw = (prev.w + 1) / 2;
        int nh = (prev.h + 1) / 2;
        if (nw < 4 || nh < 4) break;
        Level next;
        next.w = nw;
        next.h = nh;
        next.fixed.resize(std::size_t(nw) * nh);
        next.moving.resize(std::size_t(nw) * nh);
        kernels::block_mean(prev.fixed, prev.w, prev.h, 2, next.fixed);
        kernels::block_mean(prev.moving, prev.w, prev.h, 2, next.moving);
        pyr.push_back(std::move(next));
    }
    return pyr;
}

double sample_channel(const std::vector<double>& grid, int w, int h, int channels,
                      int c, double sx, double sy) {
    double cx = std::clamp(sx, 0.0, double(w - 1));
    double cy = std::clamp(sy, 0.0, double(h - 1));
    int x0 = w > 1 ? std::min(int(cx), w - 2) : 0;
    int y0 = h > 1 ? std::min(int(cy), h - 2) : 0;
    int x1 = w > 1 ? x0 + 1 : 0;
    int y1 = h > 1 ? y0 + 1 : 0;
    double fx = cx - x0;
    double fy = cy - y0;
    auto at = [&](int x, int y) { return grid[(std::size_t(y) * w + x) * channels + c]; };
    return (1.0 - fy) * ((1.0 - fx) * at(x0, y0) + fx * at(x1, y0)) +
           fy * ((1.0 - fx) * at(x0, y1) + fx * at(x1, y1));
}

// Bilinear field upsampling with component scaling x2.
std::vector<double> upsample_field(const std::vector<double>& u, int w, int h,
                                   int nw, int nh) {
    std::vector<double> out(std::size_t(nw) * nh * 2);
    double sx_scale = double(w) / double(nw);
    double sy_scale = double(h) / double(nh);
    for (int y = 0; y < nh; ++y) {
        for (int x = 0; x < nw; ++x) {
            double sx = (x + 0.5) * sx_scale - 0.5;
            double sy = (y + 0.5) * sy_scale - 0.5;
            std::size_t p = (std::size_t(y) * nw + x) * 2;
            out[p] = 2.0 * sample_channel(u, w, h, 2, 0, sx, sy);
            out[p + 1] = 2.0 * sample_channel(u, w, h, 2, 1, sx, sy);
        }
    }
    return out;
}

void descend_level(const Level& L, std::vector<double>& u, const RegParams& p,
                   int level_index, std::vector<double>& trace) {
    double energy = kernels::reg_energy(L.fixed, L.moving, L.w, L.h, u, p.smooth_weight);
    trace.push_back(energy);
    std::vector<double> grad(u.size());
    std::vector<double> trial(u.size());
    for (int iter = 1; iter <= p.iters_per_level; ++iter) {
        kernels::reg_energy_grad(L.fixed, L.moving, L.w, L.h, u, p.smooth_weight, grad);
        double s = p.step;
        bool accepted = false;
        double trial_energy = 0.0;
        for (int halving = 0; halving <= 10; ++halving) {
            for (std::size_t i = 0; i < u.size(); ++i) trial[i] = u[i] - s * grad[i];
            trial_energy =
                kernels::reg_energy(L.fixed, L.moving, L.w, L.h, trial, p.smooth_weight);
            if (!std::isfinite(trial_energy))
                throw Error(ErrorKind::Divergence,
                            "register: non-finite energy at level " +
                                std::to_string(level_index) + " iteration " +
                                std::to_string(iter));
            if (trial_energy < energy) {
                accepted = true;
                break;
            }
            s /= 2.0;
        }
        if (!accepted) break;  // stalled: no halving found a decrease
        double rel = (energy - trial_energy) / std::max(energy, 1e-300);
        u.swap(trial);
        energy = trial_energy;
        trace.push_back(energy);
        if (rel < p.tol) break;
    }
}

}  // namespace

void validate(const RegParams& p) {
    if (p.levels < 1)
        throw Error(ErrorKind::Validation, "reg params: levels must be >= 1");
    if (p.iters_per_level < 1)
        throw Error(ErrorKind::Validation, "reg params: iters_per_level must be >= 1");
    if (!(p.step > 0.0))
        throw Error(ErrorKind::Validation, "reg params: step must be > 0");
    if (!(p.smooth_weight >= 0.0))
        throw Error(ErrorKind::Validation, "reg params: smooth_weight must be >= 0");
    if (!(p.tol > 0.0))
        throw Error(ErrorKind::Validation, "reg params: tol must be > 0");
}

Image warp(const Image& img, const VectorField& field) {
    validate(img);
    validate(field);
    if (field.channels != 2)
        throw Error(ErrorKind::Dimension, "warp: field must have 2 channels");
    if (field.width != img.width || field.height != img.height)
        throw Error(ErrorKind::Dimension, "warp: field dimensions must match image");
    Image out;
    out.width = img.width;
    out.height = img.height;
    out.max_value = img.max_value;
    out.data.resize(img.data.size());
    kernels::warp_bilinear(img.data, img.width, img.height, double(img.max_value),
                           field.data, out.data);
    return out;
}

RegResult register_images_traced(const Image& fixed, const Image& moving,
                                 const RegParams& p) {
    validate(fixed);
    validate(moving);
    validate(p);
    require_same_dims(fixed, moving, "register");

    std::vector<Level> pyr = build_pyramid(fixed, moving, p.levels);
    RegResult result;
    std::vector<double> u(std::size_t(pyr.back().w) * pyr.back().h * 2, 0.0);
    for (int li = int(pyr.size()) - 1; li >= 0; --li) {
        const Level& L = pyr[li];
        if (li < int(pyr.size()) - 1)
            u = upsample_field(u, pyr[li + 1].w, pyr[li + 1].h, L.w, L.h);
        // Fall back to the zero field whenever it beats the upsampled start,
        // so the final energy can never exceed E(0).
        std::vector<double> zero(u.size(), 0.0);
        double e_init = kernels::reg_energy(L.fixed, L.moving, L.w, L.h, u, p.smooth_weight);
        double e_zero = kernels::reg_energy(L.fixed, L.moving, L.w, L.h, zero, p.smooth_weight);
        if (e_zero < e_init) u.swap(zero);
        result.energy_trace.emplace_back();
        descend_level(L, u, p, li, result.energy_trace.back());
    }

    VectorField field;
    field.width = fixed.width;
    field.height = fixed.height;
    field.channels = 2;
    field.data = std::move(u);
    validate(field);
    result.field = std::move(field);
    return result;
}

VectorField register_images(const Image& fixed, const Image& moving, const RegParams& p) {
    return register_images_traced(fixed, moving, p).field;
}

Image build_atlas(const std::vector<Image>& images, const RegParams& p, int rounds) {
    if (images.empty())
        throw Error(ErrorKind::Validation, "atlas: need at least one image");
    if (rounds < 1)
        throw Error(ErrorKind::Validation, "atlas: rounds must be >= 1");
    validate(p);
    for (const Image& img : images) {
        validate(img);
        require_same_dims(images.front(), img, "atlas");
        if (img.max_value != images.front().max_value)
            throw Error(ErrorKind::Validation, "atlas: images must share max_value");
    }

    auto mean_of = [&](const std::vector<Image>& imgs) {
        Image t = imgs.front();
        double inv = 1.0 / double(imgs.size());
        for (std::size_t i = 0; i < t.data.size(); ++i) {
            double sum = 0.0;
            for (const Image& img : imgs) sum += img.data[i];
            t.data[i] = sum * inv;
        }
        return t;
    };

    Image atlas = mean_of(images);
    for (int round = 0; round < rounds; ++round) {
        std::vector<Image> warped;
        warped.reserve(images.size());
        for (const Image& img : images)
            warped.push_back(warp(img, register_images(atlas, img, p)));
        atlas = mean_of(warped);
    }
    return atlas;
}

namespace {

VectorField checked_field(const Image& fixed, const Image& moving,
                          const VectorField& field) {
    validate(fixed);
    validate(moving);
    validate(field);
    require_same_dims(fixed, moving, "registration energy");
    if (field.channels != 2)
        throw Error(ErrorKind::Dimension, "registration energy: field must have 2 channels");
    if (field.width != fixed.width || field.height != fixed.height)
        throw Error(ErrorKind::Dimension, "registration energy: field dimensions must match");
    return field;
}

}  // namespace

double registration_energy(const Image& fixed, const Image& moving,
                           const VectorField& field, double smooth_weight) {
    VectorField f = checked_field(fixed, moving, field);
    return kernels::reg_energy(normalized(fixed), normalized(moving), fixed.width,
                               fixed.height, f.data, smooth_weight);
}

std::pair<double, VectorField> registration_energy_gradient(const Image& fixed,
                                                            const Image& moving,
                                                            const VectorField& field,
                                                            double smooth_weight) {
    VectorField f = checked_field(fixed, moving, field);
    VectorField grad = VectorField::zeros(f.width, f.height, 2);
    double energy =
        kernels::reg_energy_grad(normalized(fixed), normalized(moving), fixed.width,
                                 fixed.height, f.data, smooth_weight, grad.data);
    return {energy, std::move(grad)};
}

}  // namespace fieldops
