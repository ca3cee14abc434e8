// Times the serial reference kernels against the OpenMP variants on a large
// synthetic scene and verifies that both produce bit-identical output.

#include <chrono>
#include <cstdio>
#include <cstring>
#include <functional>
#include <random>
#include <vector>

#include "fieldops/kernels.hpp"

#if defined(_OPENMP)
#include <omp.h>
#endif

using namespace fieldops;
using Clock = std::chrono::steady_clock;

namespace {

constexpr int kWidth = 2048;
constexpr int kHeight = 2048;
constexpr int kReps = 5;

double time_ms(const std::function<void()>& fn) {
    // one warm-up, then best of kReps
    fn();
    double best = 1e300;
    for (int r = 0; r < kReps; ++r) {
        auto t0 = Clock::now();
        fn();
        double ms = std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
        if (ms < best) best = ms;
    }
    return best;
}

struct Row {
    const char* name;
    double serial_ms;
    double parallel_ms;
    bool identical;
};

void print_row(const Row& row) {
    std::printf("%-16s %10.2f ms %10.2f ms %8.2fx   %s\n", row.name, row.serial_ms,
                row.parallel_ms, row.serial_ms / row.parallel_ms,
                row.identical ? "bitwise-equal" : "MISMATCH");
}

}  // namespace

int main() {
    std::mt19937 rng(1234);
    auto rand_unit = [&]() { return double(rng()) / 4294967296.0; };

    std::size_t n = std::size_t(kWidth) * kHeight;
    std::vector<double> img_a(n), img_b(n), field(n * 2), field3(n * 3);
    for (double& v : img_a) v = rand_unit() * 255.0;
    for (double& v : img_b) v = rand_unit() * 255.0;
    for (double& v : field) v = rand_unit() * 8.0 - 4.0;
    for (double& v : field3) v = rand_unit() * 8.0 - 4.0;

#if defined(_OPENMP)
    std::printf("%d x %d scene, OpenMP with up to %d threads, best of %d reps\n\n",
                kWidth, kHeight, omp_get_max_threads(), kReps);
#else
    std::printf("%d x %d scene, OpenMP disabled in this build, best of %d reps\n\n",
                kWidth, kHeight, kReps);
#endif
    std::printf("%-16s %13s %13s %9s\n", "kernel", "serial", "parallel", "speedup");

    std::vector<double> out_s(n), out_p(n);
    std::vector<Row> rows;

    rows.push_back({"warp_bilinear",
                    time_ms([&] {
                        kernels::serial::warp_bilinear(img_a, kWidth, kHeight, 255.0,
                                                       field, out_s);
                    }),
                    time_ms([&] {
                        kernels::parallel::warp_bilinear(img_a, kWidth, kHeight, 255.0,
                                                         field, out_p);
                    }),
                    out_s == out_p});

    rows.push_back({"jacobian_det",
                    time_ms([&] {
                        kernels::serial::jacobian_det(field, kWidth, kHeight, out_s);
                    }),
                    time_ms([&] {
                        kernels::parallel::jacobian_det(field, kWidth, kHeight, out_p);
                    }),
                    out_s == out_p});

    rows.push_back(
        {"curl2",
         time_ms([&] { kernels::serial::curl2(field, kWidth, kHeight, out_s); }),
         time_ms([&] { kernels::parallel::curl2(field, kWidth, kHeight, out_p); }),
         out_s == out_p});

    std::vector<double> out3_s(n * 3), out3_p(n * 3);
    rows.push_back(
        {"curl3",
         time_ms([&] { kernels::serial::curl3(field3, kWidth, kHeight, out3_s); }),
         time_ms([&] { kernels::parallel::curl3(field3, kWidth, kHeight, out3_p); }),
         out3_s == out3_p});

    std::vector<double> block_s(n / 16), block_p(n / 16);
    rows.push_back({"block_mean4",
                    time_ms([&] {
                        kernels::serial::block_mean(img_a, kWidth, kHeight, 4, block_s);
                    }),
                    time_ms([&] {
                        kernels::parallel::block_mean(img_a, kWidth, kHeight, 4, block_p);
                    }),
                    block_s == block_p});

    std::vector<double> kern = {0.1, -0.2, 0.3, 0.4, -0.5, 0.6, 0.7, -0.8, 0.9};
    std::vector<double> conv_s(std::size_t(kWidth - 2) * (kHeight - 2));
    std::vector<double> conv_p(conv_s.size());
    rows.push_back({"conv3x3_relu",
                    time_ms([&] {
                        kernels::serial::conv3x3_relu(img_a, kWidth, kHeight, kern,
                                                      conv_s);
                    }),
                    time_ms([&] {
                        kernels::parallel::conv3x3_relu(img_a, kWidth, kHeight, kern,
                                                        conv_p);
                    }),
                    conv_s == conv_p});

    double ssd_s = 0.0, ssd_p = 0.0;
    rows.push_back(
        {"ssd_mean",
         time_ms([&] { ssd_s = kernels::serial::ssd_mean(img_a, img_b, kWidth, kHeight); }),
         time_ms(
             [&] { ssd_p = kernels::parallel::ssd_mean(img_a, img_b, kWidth, kHeight); }),
         ssd_s == ssd_p});

    kernels::Moments mom_s, mom_p;
    rows.push_back({"image_moments",
                    time_ms([&] {
                        mom_s = kernels::serial::image_moments(img_a, img_b, kWidth,
                                                               kHeight);
                    }),
                    time_ms([&] {
                        mom_p = kernels::parallel::image_moments(img_a, img_b, kWidth,
                                                                 kHeight);
                    }),
                    std::memcmp(&mom_s, &mom_p, sizeof mom_s) == 0});

    std::vector<double> na(img_a), nb(img_b);
    for (double& v : na) v /= 255.0;
    for (double& v : nb) v /= 255.0;
    std::vector<double> grad_s(n * 2), grad_p(n * 2);
    double e_s = 0.0, e_p = 0.0;
    rows.push_back({"reg_energy_grad",
                    time_ms([&] {
                        e_s = kernels::serial::reg_energy_grad(na, nb, kWidth, kHeight,
                                                               field, 1.0, grad_s);
                    }),
                    time_ms([&] {
                        e_p = kernels::parallel::reg_energy_grad(na, nb, kWidth, kHeight,
                                                                 field, 1.0, grad_p);
                    }),
                    e_s == e_p && grad_s == grad_p});

    bool all_identical = true;
    for (const Row& row : rows) {
        print_row(row);
        all_identical = all_identical && row.identical;
    }
    if (!all_identical) {
        std::printf("\nserial/parallel outputs diverged\n");
        return 1;
    }
    return 0;
}
