#include "fieldops/kernels.hpp"

#include <algorithm>
#include <cmath>

// Implementation pattern: each kernel body is a per-row function defined once;
// the serial variant loops over rows, the parallel variant runs the identical
// row function under an OpenMP static schedule. Reductions always go through
// per-row partials summed in row order, so the result does not depend on the
// thread count.

#if defined(_OPENMP)
#define FIELDOPS_PRAGMA_OMP(x) _Pragma(#x)
#else
#define FIELDOPS_PRAGMA_OMP(x)
#endif

namespace fieldops::kernels {

namespace {

struct Sample {
    double value;
    double dx;  // d value / d sample_x (0 where border clamping is active)
    double dy;
};

inline Sample sample_bilinear(const double* img, int w, int h, double sx, double sy) {
    double cx = std::clamp(sx, 0.0, double(w - 1));
    double cy = std::clamp(sy, 0.0, double(h - 1));
    int x0 = w > 1 ? std::min(int(cx), w - 2) : 0;
    int y0 = h > 1 ? std::min(int(cy), h - 2) : 0;
    int x1 = w > 1 ? x0 + 1 : 0;
    int y1 = h > 1 ? y0 + 1 : 0;
    double fx = cx - x0;
    double fy = cy - y0;
    double v00 = img[std::size_t(y0) * w + x0];
    double v10 = img[std::size_t(y0) * w + x1];
    double v01 = img[std::size_t(y1) * w + x0];
    double v11 = img[std::size_t(y1) * w + x1];
    Sample s;
    s.value = (1.0 - fy) * ((1.0 - fx) * v00 + fx * v10) +
              fy * ((1.0 - fx) * v01 + fx * v11);
    bool inside_x = sx > 0.0 && sx < double(w - 1);
    bool inside_y = sy > 0.0 && sy < double(h - 1);
    s.dx = inside_x ? (1.0 - fy) * (v10 - v00) + fy * (v11 - v01) : 0.0;
    s.dy = inside_y ? (1.0 - fx) * (v01 - v00) + fx * (v11 - v10) : 0.0;
    return s;
}

inline void warp_row(int y, const double* img, int w, int h, double max_value,
                     const double* field, double* out) {
    for (int x = 0; x < w; ++x) {
        std::size_t p = std::size_t(y) * w + x;
        Sample s = sample_bilinear(img, w, h, x + field[2 * p], y + field[2 * p + 1]);
        out[p] = std::clamp(s.value, 0.0, max_value);
    }
}

// Derivative of one interleaved field channel, central in the interior and
// one-sided on the borders. Exact for fields linear in the differenced axis.
inline double ddx(const double* field, int w, int c, int channels, int x, int y) {
    const double* row = field + std::size_t(y) * w * channels;
    if (w == 1) return 0.0;
    if (x == 0) return row[std::size_t(channels) + c] - row[c];
    if (x == w - 1)
        return row[std::size_t(x) * channels + c] - row[std::size_t(x - 1) * channels + c];
    return (row[std::size_t(x + 1) * channels + c] - row[std::size_t(x - 1) * channels + c]) / 2.0;
}

inline double ddy(const double* field, int w, int h, int c, int channels, int x, int y) {
    std::size_t stride = std::size_t(w) * channels;
    const double* col = field + std::size_t(x) * channels;
    if (h == 1) return 0.0;
    if (y == 0) return col[stride + c] - col[c];
    if (y == h - 1) return col[std::size_t(y) * stride + c] - col[std::size_t(y - 1) * stride + c];
    return (col[std::size_t(y + 1) * stride + c] - col[std::size_t(y - 1) * stride + c]) / 2.0;
}

inline void jacobian_row(int y, const double* field, int w, int h, double* out) {
    for (int x = 0; x < w; ++x) {
        double ux_x = ddx(field, w, 0, 2, x, y);
        double ux_y = ddy(field, w, h, 0, 2, x, y);
        double uy_x = ddx(field, w, 1, 2, x, y);
        double uy_y = ddy(field, w, h, 1, 2, x, y);
        out[std::size_t(y) * w + x] = (1.0 + ux_x) * (1.0 + uy_y) - ux_y * uy_x;
    }
}

inline void curl2_row(int y, const double* field, int w, int h, double* out) {
    for (int x = 0; x < w; ++x)
        out[std::size_t(y) * w + x] =
            ddx(field, w, 1, 2, x, y) - ddy(field, w, h, 0, 2, x, y);
}

inline void curl3_row(int y, const double* field, int w, int h, double* out) {
    for (int x = 0; x < w; ++x) {
        std::size_t p = (std::size_t(y) * w + x) * 3;
        out[p + 0] = ddy(field, w, h, 2, 3, x, y);
        out[p + 1] = -ddx(field, w, 2, 3, x, y);
        out[p + 2] = ddx(field, w, 1, 3, x, y) - ddy(field, w, h, 0, 3, x, y);
    }
}

inline void block_mean_row(int oy, const double* img, int w, int h, int factor,
                           int ow, double* out) {
    for (int ox = 0; ox < ow; ++ox) {
        int x0 = ox * factor;
        int y0 = oy * factor;
        int x1 = std::min(x0 + factor, w);
        int y1 = std::min(y0 + factor, h);
        double sum = 0.0;
        for (int y = y0; y < y1; ++y)
            for (int x = x0; x < x1; ++x) sum += img[std::size_t(y) * w + x];
        out[std::size_t(oy) * ow + ox] = sum / (double(x1 - x0) * double(y1 - y0));
    }
}

inline void conv3x3_row(int oy, const double* img, int w, const double* k, int ow,
                        double* out) {
    for (int ox = 0; ox < ow; ++ox) {
        double acc = 0.0;
        for (int ky = 0; ky < 3; ++ky)
            for (int kx = 0; kx < 3; ++kx)
                acc += k[ky * 3 + kx] * img[std::size_t(oy + ky) * w + (ox + kx)];
        out[std::size_t(oy) * ow + ox] = acc > 0.0 ? acc : 0.0;
    }
}

inline double ssd_row(int y, const double* a, const double* b, int w) {
    double sum = 0.0;
    for (int x = 0; x < w; ++x) {
        double d = a[std::size_t(y) * w + x] - b[std::size_t(y) * w + x];
        sum += d * d;
    }
    return sum;
}

inline void moment_sums_row(int y, const double* a, const double* b, int w,
                            double* sa, double* sb) {
    double ra = 0.0;
    double rb = 0.0;
    for (int x = 0; x < w; ++x) {
        ra += a[std::size_t(y) * w + x];
        rb += b[std::size_t(y) * w + x];
    }
    sa[y] = ra;
    sb[y] = rb;
}

inline void central_sums_row(int y, const double* a, const double* b, int w,
                             double ma, double mb, double* saa, double* sbb,
                             double* sab) {
    double raa = 0.0;
    double rbb = 0.0;
    double rab = 0.0;
    for (int x = 0; x < w; ++x) {
        double da = a[std::size_t(y) * w + x] - ma;
        double db = b[std::size_t(y) * w + x] - mb;
        raa += da * da;
        rbb += db * db;
        rab += da * db;
    }
    saa[y] = raa;
    sbb[y] = rbb;
    sab[y] = rab;
}

// One pixel's share of the registration energy: squared residual plus the
// diffusion penalty of the forward differences rooted at the pixel.
inline double reg_energy_pixel(const double* fixed, const double* moving, int w,
                               int h, const double* field, double lambda, int x,
                               int y) {
    std::size_t p = std::size_t(y) * w + x;
    Sample s = sample_bilinear(moving, w, h, x + field[2 * p], y + field[2 * p + 1]);
    double r = s.value - fixed[p];
    double e = r * r;
    double reg = 0.0;
    for (int c = 0; c < 2; ++c) {
        double uc = field[2 * p + c];
        if (x + 1 < w) {
            double d = field[2 * (p + 1) + c] - uc;
            reg += d * d;
        }
        if (y + 1 < h) {
            double d = field[2 * (p + w) + c] - uc;
            reg += d * d;
        }
    }
    return e + lambda * reg;
}

inline double reg_energy_row(int y, const double* fixed, const double* moving, int w,
                             int h, const double* field, double lambda) {
    double sum = 0.0;
    for (int x = 0; x < w; ++x)
        sum += reg_energy_pixel(fixed, moving, w, h, field, lambda, x, y);
    return sum;
}

inline void reg_grad_row(int y, const double* fixed, const double* moving, int w,
                         int h, const double* field, double lambda, double* grad) {
    for (int x = 0; x < w; ++x) {
        std::size_t p = std::size_t(y) * w + x;
        Sample s = sample_bilinear(moving, w, h, x + field[2 * p], y + field[2 * p + 1]);
        double r = s.value - fixed[p];
        double gx = 2.0 * r * s.dx;
        double gy = 2.0 * r * s.dy;
        // diffusion term: 2*lambda * sum over 4-neighbors of (u(p) - u(q))
        for (int c = 0; c < 2; ++c) {
            double uc = field[2 * p + c];
            double g = 0.0;
            if (x + 1 < w) g += uc - field[2 * (p + 1) + c];
            if (x > 0) g += uc - field[2 * (p - 1) + c];
            if (y + 1 < h) g += uc - field[2 * (p + w) + c];
            if (y > 0) g += uc - field[2 * (p - w) + c];
            g *= 2.0 * lambda;
            grad[2 * p + c] = (c == 0 ? gx : gy) + g;
        }
    }
}

// Row partials accumulated in row order; identical in both variants.
inline double accumulate_rows(const std::vector<double>& row_sums) {
    double total = 0.0;
    for (double s : row_sums) total += s;
    return total;
}

}  // namespace

// The loop macro is variadic so row bodies may contain commas.
#define FIELDOPS_KERNEL_BODIES(LOOP)                                                   \
    void warp_bilinear(std::span<const double> img, int w, int h, double max_value,    \
                       std::span<const double> field, std::span<double> out) {         \
        LOOP(h, warp_row(y, img.data(), w, h, max_value, field.data(), out.data()))    \
    }                                                                                  \
    void jacobian_det(std::span<const double> field, int w, int h,                     \
                      std::span<double> out) {                                         \
        LOOP(h, jacobian_row(y, field.data(), w, h, out.data()))                       \
    }                                                                                  \
    void curl2(std::span<const double> field, int w, int h, std::span<double> out) {   \
        LOOP(h, curl2_row(y, field.data(), w, h, out.data()))                          \
    }                                                                                  \
    void curl3(std::span<const double> field, int w, int h, std::span<double> out) {   \
        LOOP(h, curl3_row(y, field.data(), w, h, out.data()))                          \
    }                                                                                  \
    void block_mean(std::span<const double> img, int w, int h, int factor,             \
                    std::span<double> out) {                                           \
        int ow = (w + factor - 1) / factor;                                            \
        int oh = (h + factor - 1) / factor;                                            \
        LOOP(oh, block_mean_row(y, img.data(), w, h, factor, ow, out.data()))          \
    }                                                                                  \
    void conv3x3_relu(std::span<const double> img, int w, int h,                       \
                      std::span<const double> kernel3x3, std::span<double> out) {      \
        int ow = w - 2;                                                                \
        int oh = h - 2;                                                                \
        LOOP(oh, conv3x3_row(y, img.data(), w, kernel3x3.data(), ow, out.data()))      \
    }                                                                                  \
    double ssd_mean(std::span<const double> a, std::span<const double> b, int w,       \
                    int h) {                                                           \
        std::vector<double> rows(h);                                                   \
        LOOP(h, rows[y] = ssd_row(y, a.data(), b.data(), w))                           \
        return accumulate_rows(rows) / (double(w) * double(h));                        \
    }                                                                                  \
    Moments image_moments(std::span<const double> a, std::span<const double> b,        \
                          int w, int h) {                                              \
        std::size_t n = std::size_t(w) * h;                                            \
        std::vector<double> sa(h), sb(h), saa(h), sbb(h), sab(h);                      \
        LOOP(h, moment_sums_row(y, a.data(), b.data(), w, sa.data(), sb.data()))       \
        Moments m;                                                                     \
        m.mean_a = accumulate_rows(sa) / double(n);                                    \
        m.mean_b = accumulate_rows(sb) / double(n);                                    \
        LOOP(h, central_sums_row(y, a.data(), b.data(), w, m.mean_a, m.mean_b,         \
                                 saa.data(), sbb.data(), sab.data()))                  \
        m.var_a = accumulate_rows(saa) / double(n);                                    \
        m.var_b = accumulate_rows(sbb) / double(n);                                    \
        m.cov = accumulate_rows(sab) / double(n);                                      \
        return m;                                                                      \
    }                                                                                  \
    double reg_energy(std::span<const double> fixed, std::span<const double> moving,   \
                      int w, int h, std::span<const double> field, double lambda) {    \
        std::vector<double> rows(h);                                                   \
        LOOP(h, rows[y] = reg_energy_row(y, fixed.data(), moving.data(), w, h,         \
                                         field.data(), lambda))                        \
        return accumulate_rows(rows);                                                  \
    }                                                                                  \
    double reg_energy_grad(std::span<const double> fixed,                              \
                           std::span<const double> moving, int w, int h,               \
                           std::span<const double> field, double lambda,               \
                           std::span<double> grad) {                                   \
        std::vector<double> rows(h);                                                   \
        LOOP(h, rows[y] = reg_energy_row(y, fixed.data(), moving.data(), w, h,         \
                                         field.data(), lambda);                        \
             reg_grad_row(y, fixed.data(), moving.data(), w, h, field.data(), lambda,  \
                          grad.data()))                                                \
        return accumulate_rows(rows);                                                  \
    }

namespace serial {

#define FIELDOPS_SERIAL_LOOP(count, ...)      \
    for (int y = 0; y < (count); ++y) {       \
        __VA_ARGS__;                          \
    }

FIELDOPS_KERNEL_BODIES(FIELDOPS_SERIAL_LOOP)

#undef FIELDOPS_SERIAL_LOOP

}  // namespace serial

namespace parallel {

#define FIELDOPS_PARALLEL_LOOP(count, ...)                                      \
    FIELDOPS_PRAGMA_OMP(omp parallel for schedule(static) if ((count) >= 16))   \
    for (int y = 0; y < (count); ++y) {                                         \
        __VA_ARGS__;                                                            \
    }

FIELDOPS_KERNEL_BODIES(FIELDOPS_PARALLEL_LOOP)

#undef FIELDOPS_PARALLEL_LOOP

}  // namespace parallel

// Dispatch layer: the parallel variants degrade to the serial code path when
// OpenMP is absent, so these are always safe to call.

void warp_bilinear(std::span<const double> img, int w, int h, double max_value,
                   std::span<const double> field, std::span<double> out) {
    parallel::warp_bilinear(img, w, h, max_value, field, out);
}

void jacobian_det(std::span<const double> field, int w, int h, std::span<double> out) {
    parallel::jacobian_det(field, w, h, out);
}

void curl2(std::span<const double> field, int w, int h, std::span<double> out) {
    parallel::curl2(field, w, h, out);
}

void curl3(std::span<const double> field, int w, int h, std::span<double> out) {
    parallel::curl3(field, w, h, out);
}

void block_mean(std::span<const double> img, int w, int h, int factor,
                std::span<double> out) {
    parallel::block_mean(img, w, h, factor, out);
}

void conv3x3_relu(std::span<const double> img, int w, int h,
                  std::span<const double> kernel3x3, std::span<double> out) {
    parallel::conv3x3_relu(img, w, h, kernel3x3, out);
}

double ssd_mean(std::span<const double> a, std::span<const double> b, int w, int h) {
    return parallel::ssd_mean(a, b, w, h);
}

Moments image_moments(std::span<const double> a, std::span<const double> b, int w,
                      int h) {
    return parallel::image_moments(a, b, w, h);
}

double reg_energy(std::span<const double> fixed, std::span<const double> moving,
                  int w, int h, std::span<const double> field, double lambda) {
    return parallel::reg_energy(fixed, moving, w, h, field, lambda);
}

double reg_energy_grad(std::span<const double> fixed, std::span<const double> moving,
                       int w, int h, std::span<const double> field, double lambda,
                       std::span<double> grad) {
    return parallel::reg_energy_grad(fixed, moving, w, h, field, lambda, grad);
}

}  // namespace fieldops::kernels
