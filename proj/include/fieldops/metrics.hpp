#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fieldops/types.hpp"

namespace fieldops {

struct ConfusionCounts {
    long long tp = 0;
    long long fp = 0;
    long long tn = 0;
    long long fn = 0;
};

struct BoundingBox {
    double xmin = 0.0;
    double ymin = 0.0;
    double xmax = 0.0;
    double ymax = 0.0;
};

struct Detection {
    std::string image_id;
    std::string label;
    double score = 0.0;  // confidence in [0, 1]
    BoundingBox box;
};

struct GroundTruth {
    std::string image_id;
    std::string label;
    BoundingBox box;
};

struct QualityReport {
    double mse = 0.0;
    double psnr = 0.0;  // +inf when mse == 0
    double ssim = 0.0;
};

// Rates are undefined (not 0) when their denominator is zero; silently
// defaulting 0/0 would corrupt averages downstream.
struct Rates {
    std::optional<double> precision;
    std::optional<double> recall;
    std::optional<double> specificity;
};

struct PrPoint {
    double recall = 0.0;
    double precision = 0.0;
};

struct ClassEval {
    std::string label;
    double ap = 0.0;
    int ground_truths = 0;
    int detections = 0;
    bool missing_ground_truth = false;  // detections scored against zero GTs
    std::vector<PrPoint> pr;
};

struct DetectionEval {
    double map = 0.0;
    std::vector<ClassEval> classes;  // sorted by label
};

void validate(const ConfusionCounts& c);
void validate(const BoundingBox& b);

/**
 * MSE, PSNR and SSIM of two images with identical dims and max_value.
 * MSE = (1/HW) * sum (X - Y)^2; PSNR = 10*log10(MAX^2 / MSE), +inf for
 * identical images. SSIM uses global single-window statistics with
 * population variances and c1 = (0.01*MAX)^2, c2 = (0.03*MAX)^2; a
 * sliding-window SSIM will not match these values.
 */
QualityReport image_quality(const Image& x, const Image& y);

/// precision TP/(TP+FP), recall TP/(TP+FN), specificity TN/(TN+FP)
Rates classification_rates(const ConfusionCounts& c);

/// Intersection area over union area; 0 for disjoint boxes.
double iou(const BoundingBox& a, const BoundingBox& b);

/**
 * VOC-style detection evaluation. Per class, detections sort by descending
 * score (ties: image_id, then box, ascending) and greedily match the
 * unmatched same-image ground truth of highest IoU >= iou_thresh. AP is the
 * area under the all-point-interpolated precision envelope; mAP averages the
 * per-class APs over the union of labels present.
 */
DetectionEval evaluate_detections(const std::vector<Detection>& dets,
                                  const std::vector<GroundTruth>& gts,
                                  double iou_thresh = 0.5);

/**
 * Fraction of images on which every model emits the identical label — the
 * share of the workload the panel resolves without a human. Takes one
 * image_id -> label map per model; all models must cover the same image set.
 */
double rtp(const std::vector<std::map<std::string, std::string>>& per_model_labels);

/**
 * Parses the VOC annotation subset: an <annotation> root with <filename> and
 * repeated <object> elements holding <name> and <bndbox> with
 * <xmin><ymin><xmax><ymax>. Unknown elements are ignored. Never crashes on
 * arbitrary bytes; malformed input raises Error with the offending element
 * or byte offset.
 */
std::vector<GroundTruth> parse_voc_xml(std::span<const std::uint8_t> bytes);

/**
 * Parses "image_id,label,score,xmin,ymin,xmax,ymax" lines. An optional
 * header line is detected by a non-numeric score field. Scores outside
 * [0, 1] are an error, not clamped; all errors name the line number.
 */
std::vector<Detection> parse_detections_csv(std::string_view text);

/// One "image_id,label" line per image; duplicate ids are an error.
std::map<std::string, std::string> parse_predictions_csv(std::string_view text);

}  // namespace fieldops
