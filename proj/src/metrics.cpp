#include "fieldops/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <tuple>

#include "fieldops/kernels.hpp"
#include "text_util.hpp"

namespace fieldops {

void validate(const ConfusionCounts& c) {
    if (c.tp < 0 || c.fp < 0 || c.tn < 0 || c.fn < 0)
        throw Error(ErrorKind::Validation, "confusion counts must be non-negative");
}

void validate(const BoundingBox& b) {
    if (!(b.xmin < b.xmax) || !(b.ymin < b.ymax))
        throw Error(ErrorKind::Validation, "bounding box: xmin < xmax and ymin < ymax required");
}

QualityReport image_quality(const Image& x, const Image& y) {
    validate(x);
    validate(y);
    if (x.width != y.width || x.height != y.height)
        throw Error(ErrorKind::Dimension, "image quality: dimension mismatch");
    if (x.max_value != y.max_value)
        throw Error(ErrorKind::Dimension, "image quality: max_value mismatch");

    double max_i = double(x.max_value);
    QualityReport q;
    q.mse = kernels::ssd_mean(x.data, y.data, x.width, x.height);
    q.psnr = q.mse == 0.0 ? std::numeric_limits<double>::infinity()
                          : 10.0 * std::log10(max_i * max_i / q.mse);

    kernels::Moments m = kernels::image_moments(x.data, y.data, x.width, x.height);
    double c1 = (0.01 * max_i) * (0.01 * max_i);
    double c2 = (0.03 * max_i) * (0.03 * max_i);
    double num = (2.0 * m.mean_a * m.mean_b + c1) * (2.0 * m.cov + c2);
    double den = (m.mean_a * m.mean_a + m.mean_b * m.mean_b + c1) *
                 (m.var_a + m.var_b + c2);
    q.ssim = num / den;
    return q;
}

Rates classification_rates(const ConfusionCounts& c) {
    validate(c);
    Rates r;
    if (c.tp + c.fp > 0) r.precision = double(c.tp) / double(c.tp + c.fp);
    if (c.tp + c.fn > 0) r.recall = double(c.tp) / double(c.tp + c.fn);
    if (c.tn + c.fp > 0) r.specificity = double(c.tn) / double(c.tn + c.fp);
    return r;
}

double iou(const BoundingBox& a, const BoundingBox& b) {
    validate(a);
    validate(b);
    double iw = std::min(a.xmax, b.xmax) - std::max(a.xmin, b.xmin);
    double ih = std::min(a.ymax, b.ymax) - std::max(a.ymin, b.ymin);
    if (iw <= 0.0 || ih <= 0.0) return 0.0;
    double inter = iw * ih;
    double area_a = (a.xmax - a.xmin) * (a.ymax - a.ymin);
    double area_b = (b.xmax - b.xmin) * (b.ymax - b.ymin);
    return inter / (area_a + area_b - inter);
}

namespace {

// Area under the all-point interpolated precision envelope: precision at
// recall r is the maximum precision at any recall >= r, computed as a
// running maximum from the right.
double envelope_area(const std::vector<PrPoint>& pr) {
    std::vector<double> envelope(pr.size());
    double running = 0.0;
    for (std::size_t i = pr.size(); i-- > 0;) {
        running = std::max(running, pr[i].precision);
        envelope[i] = running;
    }
    double area = 0.0;
    double prev_recall = 0.0;
    for (std::size_t i = 0; i < pr.size(); ++i) {
        area += (pr[i].recall - prev_recall) * envelope[i];
        prev_recall = pr[i].recall;
    }
    return area;
}

}  // namespace

DetectionEval evaluate_detections(const std::vector<Detection>& dets,
                                  const std::vector<GroundTruth>& gts,
                                  double iou_thresh) {
    if (!(iou_thresh > 0.0 && iou_thresh < 1.0))
        throw Error(ErrorKind::Range, "evaluate_detections: iou threshold must be in (0, 1)");
    for (const Detection& d : dets) {
        validate(d.box);
        if (!(d.score >= 0.0 && d.score <= 1.0))
            throw Error(ErrorKind::Range, "evaluate_detections: score outside [0, 1]");
    }
    for (const GroundTruth& g : gts) validate(g.box);

    std::set<std::string> labels;
    for (const Detection& d : dets) labels.insert(d.label);
    for (const GroundTruth& g : gts) labels.insert(g.label);

    DetectionEval eval;
    for (const std::string& label : labels) {
        ClassEval ce;
        ce.label = label;

        std::vector<const Detection*> class_dets;
        for (const Detection& d : dets)
            if (d.label == label) class_dets.push_back(&d);
        std::vector<const GroundTruth*> class_gts;
        for (const GroundTruth& g : gts)
            if (g.label == label) class_gts.push_back(&g);
        ce.detections = int(class_dets.size());
        ce.ground_truths = int(class_gts.size());

        // Deterministic sweep order: score desc, then image id and box.
        std::stable_sort(class_dets.begin(), class_dets.end(),
                         [](const Detection* a, const Detection* b) {
                             if (a->score != b->score) return a->score > b->score;
                             if (a->image_id != b->image_id) return a->image_id < b->image_id;
                             auto ka = std::tie(a->box.xmin, a->box.ymin, a->box.xmax,
                                                a->box.ymax);
                             auto kb = std::tie(b->box.xmin, b->box.ymin, b->box.xmax,
                                                b->box.ymax);
                             return ka < kb;
                         });

        if (class_gts.empty()) {
            ce.ap = 0.0;
            ce.missing_ground_truth = !class_dets.empty();
        } else {
            std::vector<bool> matched(class_gts.size(), false);
            int tp = 0;
            int fp = 0;
            for (const Detection* d : class_dets) {
                int best = -1;
                double best_iou = 0.0;
                for (std::size_t i = 0; i < class_gts.size(); ++i) {
                    if (matched[i] || class_gts[i]->image_id != d->image_id) continue;
                    double overlap = iou(d->box, class_gts[i]->box);
                    if (overlap >= iou_thresh && overlap > best_iou) {
                        best = int(i);
                        best_iou = overlap;
                    }
                }
                if (best >= 0) {
                    matched[best] = true;
                    ++tp;
                } else {
                    ++fp;
                }
                ce.pr.push_back({double(tp) / double(class_gts.size()),
                                 double(tp) / double(tp + fp)});
            }
            ce.ap = envelope_area(ce.pr);
        }
        eval.classes.push_back(std::move(ce));
    }

    double sum = 0.0;
    for (const ClassEval& ce : eval.classes) sum += ce.ap;
    eval.map = eval.classes.empty() ? 0.0 : sum / double(eval.classes.size());
    return eval;
}

double rtp(const std::vector<std::map<std::string, std::string>>& per_model_labels) {
    if (per_model_labels.size() < 2)
        throw Error(ErrorKind::Validation, "rtp: need at least 2 models");
    const auto& first = per_model_labels.front();
    for (std::size_t m = 1; m < per_model_labels.size(); ++m) {
        const auto& other = per_model_labels[m];
        if (other.size() != first.size())
            throw Error(ErrorKind::Validation,
                        "rtp: model " + std::to_string(m) + " covers a different image set");
        for (const auto& [id, _] : first)
            if (!other.contains(id))
                throw Error(ErrorKind::Validation, "rtp: model " + std::to_string(m) +
                                                       " is missing image '" + id + "'");
    }
    if (first.empty()) throw Error(ErrorKind::Validation, "rtp: empty image set");

    std::size_t consensus = 0;
    for (const auto& [id, label] : first) {
        bool unanimous = true;
        for (std::size_t m = 1; m < per_model_labels.size() && unanimous; ++m)
            unanimous = per_model_labels[m].at(id) == label;
        if (unanimous) ++consensus;
    }
    return double(consensus) / double(first.size());
}

std::vector<Detection> parse_detections_csv(std::string_view text) {
    std::vector<Detection> dets;
    auto lines = text::split_lines(text);
    for (std::size_t li = 0; li < lines.size(); ++li) {
        std::string_view line = lines[li];
        if (text::trim(line).empty()) continue;
        auto fields = text::split_fields(line);
        std::string ctx = "detections csv: line " + std::to_string(li + 1);
        if (li == 0 && fields.size() >= 3) {
            double probe = 0.0;
            if (!text::try_parse_double(fields[2], probe)) continue;  // header line
        }
        if (fields.size() != 7)
            throw Error(ErrorKind::Parse, ctx + ": expected 7 columns, got " +
                                              std::to_string(fields.size()));
        Detection d;
        d.image_id = std::string(text::trim(fields[0]));
        d.label = std::string(text::trim(fields[1]));
        d.score = text::parse_double(fields[2], ctx);
        d.box.xmin = text::parse_double(fields[3], ctx);
        d.box.ymin = text::parse_double(fields[4], ctx);
        d.box.xmax = text::parse_double(fields[5], ctx);
        d.box.ymax = text::parse_double(fields[6], ctx);
        if (!(d.score >= 0.0 && d.score <= 1.0))
            throw Error(ErrorKind::Range, ctx + ": score outside [0, 1]");
        if (!(d.box.xmin < d.box.xmax) || !(d.box.ymin < d.box.ymax))
            throw Error(ErrorKind::Validation, ctx + ": invalid box");
        dets.push_back(std::move(d));
    }
    return dets;
}

std::map<std::string, std::string> parse_predictions_csv(std::string_view text) {
    std::map<std::string, std::string> labels;
    auto lines = text::split_lines(text);
    for (std::size_t li = 0; li < lines.size(); ++li) {
        std::string_view line = lines[li];
        if (text::trim(line).empty()) continue;
        auto fields = text::split_fields(line);
        std::string ctx = "predictions csv: line " + std::to_string(li + 1);
        if (fields.size() != 2)
            throw Error(ErrorKind::Parse, ctx + ": expected 2 columns, got " +
                                              std::to_string(fields.size()));
        std::string id(text::trim(fields[0]));
        if (id.empty()) throw Error(ErrorKind::Parse, ctx + ": empty image id");
        if (labels.contains(id))
            throw Error(ErrorKind::Parse, ctx + ": duplicate image id '" + id + "'");
        labels[id] = std::string(text::trim(fields[1]));
    }
    return labels;
}

}  // namespace fieldops
