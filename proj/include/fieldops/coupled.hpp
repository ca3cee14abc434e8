#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "fieldops/types.hpp"

namespace fieldops {

struct CoupledConfig {
    int max_iters = 5;
    double psnr_min = 30.0;   // dB
    double ssim_min = 0.9;
    double penalty_scale = 0.5;  // in (0, 1]
};

void validate(const CoupledConfig& cfg);

enum class RunStatus { Accepted, Rejected, Error };

/**
 * Machine-readable run summary. Serialized as one "key=value" line per
 * entry, keys sorted lexicographically, so identical runs produce
 * byte-identical reports. Key namespace: command, input.<i>, output.<i>,
 * iterations, status, free-form note keys, and one key per metric.
 */
struct RunReport {
    std::string command;
    std::vector<std::string> inputs;
    std::vector<std::string> outputs;
    std::map<std::string, double> metrics;
    std::map<std::string, std::string> notes;
    RunStatus status = RunStatus::Accepted;
    int iterations = 1;
};

/// Shortest round-trip decimal form; infinities render as "inf"/"-inf".
std::string format_scalar(double v);
std::string serialize_report(const RunReport& report);

/**
 * A parameterized Image -> Image map with one adjustable parameter; the
 * accept/reject loop scales the parameter by penalty_scale after every
 * rejection.
 */
struct CandidateProducer {
    std::function<Image(const Image& input, double param)> produce;
    double initial_param = 1.0;
};

/**
 * Generate-evaluate-penalize loop: produce a candidate, score it against the
 * reference, accept when psnr >= psnr_min and ssim >= ssim_min, otherwise
 * scale the producer parameter and retry, up to max_iters attempts. The
 * returned report carries the final candidate's mse/psnr/ssim and the number
 * of producer invocations.
 */
RunReport coupled_run(const Image& input, const CandidateProducer& producer,
                      const Image& reference, const CoupledConfig& cfg = {});

}  // namespace fieldops
