#pragma once

#include <span>
#include <vector>

namespace fieldops::kernels {

// Data-parallel inner loops shared by the modules above them. Every kernel
// exists twice: kernels::serial is the reference implementation, and
// kernels::parallel runs the same row function under OpenMP. Both produce
// bit-identical output for identical input: per-pixel kernels write each
// output element independently, and reductions accumulate fixed per-row
// partial sums in row order regardless of thread count.
//
// The unprefixed functions dispatch to the parallel variant (which falls back
// to serial when the build has no OpenMP support).

struct Moments {
    double mean_a = 0.0;
    double mean_b = 0.0;
    double var_a = 0.0;   // population variance (divide by N)
    double var_b = 0.0;
    double cov = 0.0;     // population covariance
};

#define FIELDOPS_DECLARE_KERNELS                                                      \
    /* out(x,y) = bilinear sample of img at (x,y) + u(x,y), border-clamped,           \
       then clamped to [0, max_value]. field has 2 interleaved channels. */           \
    void warp_bilinear(std::span<const double> img, int w, int h, double max_value,   \
                       std::span<const double> field, std::span<double> out);         \
    /* per-pixel det(I + grad u); central differences interior, one-sided borders */  \
    void jacobian_det(std::span<const double> field, int w, int h,                    \
                      std::span<double> out);                                         \
    /* scalar curl d(u_y)/dx - d(u_x)/dy of a 2-channel field */                      \
    void curl2(std::span<const double> field, int w, int h, std::span<double> out);   \
    /* planar 3-channel curl (d/dz == 0): (du_z/dy, -du_z/dx, du_y/dx - du_x/dy) */   \
    void curl3(std::span<const double> field, int w, int h, std::span<double> out);   \
    /* factor x factor block means; edge blocks average the available pixels */       \
    void block_mean(std::span<const double> img, int w, int h, int factor,            \
                    std::span<double> out);                                           \
    /* valid 3x3 convolution followed by max(0, .); out dims (w-2) x (h-2) */         \
    void conv3x3_relu(std::span<const double> img, int w, int h,                      \
                      std::span<const double> kernel3x3, std::span<double> out);      \
    /* mean of squared differences */                                                 \
    double ssd_mean(std::span<const double> a, std::span<const double> b, int w,      \
                    int h);                                                           \
    /* joint means, population variances and covariance of two rasters */             \
    Moments image_moments(std::span<const double> a, std::span<const double> b,       \
                          int w, int h);                                              \
    /* SSD + diffusion energy of a displacement field on pre-normalized images */     \
    double reg_energy(std::span<const double> fixed, std::span<const double> moving,  \
                      int w, int h, std::span<const double> field, double lambda);    \
    /* same energy, plus its analytic gradient with respect to the field */           \
    double reg_energy_grad(std::span<const double> fixed,                             \
                           std::span<const double> moving, int w, int h,              \
                           std::span<const double> field, double lambda,              \
                           std::span<double> grad);

namespace serial {
FIELDOPS_DECLARE_KERNELS
}

namespace parallel {
FIELDOPS_DECLARE_KERNELS
}

FIELDOPS_DECLARE_KERNELS

#undef FIELDOPS_DECLARE_KERNELS

}  // namespace fieldops::kernels
