#include "fieldops/coupled.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

#include "fieldops/metrics.hpp"

namespace fieldops {

void validate(const CoupledConfig& cfg) {
    if (cfg.max_iters < 1)
        throw Error(ErrorKind::Validation, "coupled config: max_iters must be >= 1");
    if (!(cfg.penalty_scale > 0.0 && cfg.penalty_scale <= 1.0))
        throw Error(ErrorKind::Validation, "coupled config: penalty_scale must be in (0, 1]");
}

std::string format_scalar(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::string serialize_report(const RunReport& report) {
    std::vector<std::pair<std::string, std::string>> lines;
    lines.emplace_back("command", report.command);
    for (std::size_t i = 0; i < report.inputs.size(); ++i)
        lines.emplace_back("input." + std::to_string(i), report.inputs[i]);
    for (std::size_t i = 0; i < report.outputs.size(); ++i)
        lines.emplace_back("output." + std::to_string(i), report.outputs[i]);
    for (const auto& [key, value] : report.metrics)
        lines.emplace_back(key, format_scalar(value));
    for (const auto& [key, value] : report.notes) lines.emplace_back(key, value);
    lines.emplace_back("iterations", std::to_string(report.iterations));
    const char* status = report.status == RunStatus::Accepted   ? "accepted"
                         : report.status == RunStatus::Rejected ? "rejected"
                                                                : "error";
    lines.emplace_back("status", status);
    std::sort(lines.begin(), lines.end());
    std::string out;
    for (const auto& [key, value] : lines) {
        out += key;
        out += '=';
        out += value;
        out += '\n';
    }
    return out;
}

RunReport coupled_run(const Image& input, const CandidateProducer& producer,
                      const Image& reference, const CoupledConfig& cfg) {
    validate(input);
    validate(reference);
    validate(cfg);
    if (!producer.produce)
        throw Error(ErrorKind::Validation, "coupled run: producer has no function");

    RunReport report;
    report.command = "coupled";
    double param = producer.initial_param;
    for (int iter = 1; iter <= cfg.max_iters; ++iter) {
        Image candidate;
        try {
            candidate = producer.produce(input, param);
        } catch (const Error& e) {
            throw Error(e.kind(), "coupled run: producer failed at iteration " +
                                      std::to_string(iter) + ": " + e.what());
        } catch (const std::exception& e) {
            throw Error(ErrorKind::Validation,
                        "coupled run: producer failed at iteration " +
                            std::to_string(iter) + ": " + e.what());
        }
        QualityReport q = image_quality(candidate, reference);
        report.metrics["mse"] = q.mse;
        report.metrics["psnr"] = q.psnr;
        report.metrics["ssim"] = q.ssim;
        report.iterations = iter;
        if (q.psnr >= cfg.psnr_min && q.ssim >= cfg.ssim_min) {
            report.status = RunStatus::Accepted;
            return report;
        }
        param *= cfg.penalty_scale;
    }
    report.status = RunStatus::Rejected;
    return report;
}

}  // namespace fieldops
