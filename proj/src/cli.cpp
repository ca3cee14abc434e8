#include "fieldops/cli.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <iterator>

#include <CLI11.hpp>

#include "fieldops/coupled.hpp"
#include "fieldops/geometry.hpp"
#include "fieldops/metrics.hpp"
#include "fieldops/pgm.hpp"
#include "fieldops/quality.hpp"
#include "fieldops/registration.hpp"
#include "fieldops/srloss.hpp"
#include "fieldops/vf1.hpp"
#include "text_util.hpp"

namespace fieldops {

namespace {

std::vector<std::uint8_t> read_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::Io, "cannot open file: " + path);
    std::vector<std::uint8_t> bytes{std::istreambuf_iterator<char>(in),
                                    std::istreambuf_iterator<char>()};
    if (in.bad()) throw Error(ErrorKind::Io, "failed reading file: " + path);
    return bytes;
}

std::string read_text(const std::string& path) {
    auto bytes = read_bytes(path);
    return std::string(bytes.begin(), bytes.end());
}

void write_bytes(const std::string& path, const std::vector<std::uint8_t>& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::Io, "cannot open file for writing: " + path);
    out.write(reinterpret_cast<const char*>(bytes.data()),
              std::streamsize(bytes.size()));
    if (!out) throw Error(ErrorKind::Io, "failed writing file: " + path);
}

Image load_image(const std::string& path) { return decode_image(read_bytes(path)); }

VectorField load_field(const std::string& path) { return decode_field(read_bytes(path)); }

std::vector<std::string> split_list(const std::string& list, const char* what) {
    std::vector<std::string> items;
    for (auto part : text::split_fields(list)) {
        auto trimmed = text::trim(part);
        if (trimmed.empty())
            throw Error(ErrorKind::Usage, std::string("empty entry in ") + what + " list");
        items.emplace_back(trimmed);
    }
    return items;
}

std::vector<double> load_probabilities(const std::string& path) {
    std::vector<double> values;
    auto text = read_text(path);
    auto lines = text::split_lines(text);
    for (std::size_t li = 0; li < lines.size(); ++li) {
        if (text::trim(lines[li]).empty()) continue;
        for (auto field : text::split_fields(lines[li]))
            values.push_back(text::parse_double(
                field, path + ": line " + std::to_string(li + 1)));
    }
    return values;
}

struct ScalarStats {
    double min = 0.0;
    double max = 0.0;
    double mean = 0.0;
};

ScalarStats scan_stats(const std::vector<double>& values) {
    ScalarStats s;
    s.min = *std::min_element(values.begin(), values.end());
    s.max = *std::max_element(values.begin(), values.end());
    double sum = 0.0;
    for (double v : values) sum += v;
    s.mean = sum / double(values.size());
    return s;
}

// ---- subcommand option bags -------------------------------------------------

struct RegisterArgs {
    std::string fixed, moving, out;
    RegParams p;
};

struct WarpArgs {
    std::string image, field, out;
};

struct AtlasArgs {
    std::string images, out;
    int rounds = 1;
    RegParams p;
};

struct JdArgs {
    std::string field, out, raw;
};

struct CurlArgs {
    std::string field, out, images;
};

struct GridArgs {
    std::string field, out;
    int spacing = 8;
};

struct MetricsImgArgs {
    std::string x, y;
};

struct MetricsDetArgs {
    std::string dets, gt;
    double iou = 0.5;
};

struct MetricsRtpArgs {
    std::string preds;
};

struct Down4Args {
    std::string image, out;
};

struct AdvArgs {
    std::string dreal, dfake;
};

struct FeatArgs {
    std::string hr, sr;
    std::string extractor = "identity";
    unsigned seed = 42;
    int depth = 2;
};

struct SrCvArgs {
    std::string hr, sr, ref;
};

struct QualityEvalArgs {
    std::string matrix, weights;
};

struct QualitySelectArgs {
    std::string tasks, anchor;
    int n = 1;
};

struct QualityFitArgs {
    std::string tasks;
    int steps = 100;
    double lr = 0.01;
};

struct CoupledArgs {
    std::string input, ref;
    CoupledConfig cfg;
};

// ---- handlers ---------------------------------------------------------------

RunReport do_register(const RegisterArgs& a) {
    Image fixed = load_image(a.fixed);
    Image moving = load_image(a.moving);
    RegResult res = register_images_traced(fixed, moving, a.p);
    write_bytes(a.out, encode_field(res.field));
    RunReport r;
    r.command = "register";
    r.inputs = {a.fixed, a.moving};
    r.outputs = {a.out};
    // both at full resolution: the finest level's starting and final energy
    r.metrics["energy.initial"] = res.energy_trace.back().front();
    r.metrics["energy.final"] = res.energy_trace.back().back();
    r.metrics["levels"] = double(res.energy_trace.size());
    double accepted = 0;
    for (const auto& trace : res.energy_trace) accepted += double(trace.size() - 1);
    r.metrics["steps.accepted"] = accepted;
    return r;
}

RunReport do_warp(const WarpArgs& a) {
    Image out = warp(load_image(a.image), load_field(a.field));
    write_bytes(a.out, encode_image(out));
    RunReport r;
    r.command = "warp";
    r.inputs = {a.image, a.field};
    r.outputs = {a.out};
    return r;
}

RunReport do_atlas(const AtlasArgs& a) {
    auto paths = split_list(a.images, "--images");
    std::vector<Image> images;
    images.reserve(paths.size());
    for (const auto& path : paths) images.push_back(load_image(path));
    Image atlas = build_atlas(images, a.p, a.rounds);
    write_bytes(a.out, encode_image(atlas));
    RunReport r;
    r.command = "atlas";
    r.inputs = paths;
    r.outputs = {a.out};
    r.metrics["images"] = double(images.size());
    r.metrics["rounds"] = double(a.rounds);
    return r;
}

RunReport do_jd(const JdArgs& a) {
    ScalarField jd = jacobian_determinant(load_field(a.field));
    write_bytes(a.out, encode_image(field_to_image(jd)));
    RunReport r;
    r.command = "jd";
    r.inputs = {a.field};
    r.outputs = {a.out};
    if (!a.raw.empty()) {
        write_bytes(a.raw, encode_scalar_field(jd));
        r.outputs.push_back(a.raw);
    }
    ScalarStats s = scan_stats(jd.data);
    r.metrics["jd.min"] = s.min;
    r.metrics["jd.max"] = s.max;
    r.metrics["jd.mean"] = s.mean;
    // folding indicator: pixels whose local map is orientation-reversing
    r.metrics["jd.nonpositive"] =
        double(std::count_if(jd.data.begin(), jd.data.end(),
                             [](double v) { return v <= 0.0; }));
    return r;
}

RunReport do_curl(const CurlArgs& a) {
    VectorField field = load_field(a.field);
    RunReport r;
    r.command = "curl";
    r.inputs = {a.field};
    r.outputs = {a.out};

    std::vector<ScalarField> channels;
    if (field.channels == 2) {
        ScalarField c = curl_scalar(field);
        write_bytes(a.out, encode_scalar_field(c));
        channels.push_back(std::move(c));
    } else {
        VectorField c3 = curl_planar3(field);
        write_bytes(a.out, encode_field(c3));
        for (int c = 0; c < 3; ++c) channels.push_back(extract_channel(c3, c));
    }
    r.metrics["curl.channels"] = double(channels.size());
    for (std::size_t c = 0; c < channels.size(); ++c) {
        ScalarStats s = scan_stats(channels[c].data);
        std::string prefix = "curl." + std::to_string(c) + ".";
        r.metrics[prefix + "min"] = s.min;
        r.metrics[prefix + "max"] = s.max;
    }
    if (!a.images.empty()) {
        auto paths = split_list(a.images, "--images");
        if (paths.size() != channels.size())
            throw Error(ErrorKind::Usage,
                        "curl: --images needs " + std::to_string(channels.size()) +
                            " paths for this field, got " + std::to_string(paths.size()));
        for (std::size_t c = 0; c < channels.size(); ++c) {
            write_bytes(paths[c], encode_image(field_to_image(channels[c])));
            r.outputs.push_back(paths[c]);
        }
    }
    return r;
}

RunReport do_grid(const GridArgs& a) {
    GridRenderParams p;
    p.spacing = a.spacing;
    Image img = render_grid(load_field(a.field), p);
    write_bytes(a.out, encode_image(img));
    RunReport r;
    r.command = "grid";
    r.inputs = {a.field};
    r.outputs = {a.out};
    r.metrics["spacing"] = double(a.spacing);
    return r;
}

RunReport do_metrics_img(const MetricsImgArgs& a) {
    QualityReport q = image_quality(load_image(a.x), load_image(a.y));
    RunReport r;
    r.command = "metrics img";
    r.inputs = {a.x, a.y};
    r.metrics["mse"] = q.mse;
    r.metrics["psnr"] = q.psnr;
    r.metrics["ssim"] = q.ssim;
    return r;
}

RunReport do_metrics_det(const MetricsDetArgs& a) {
    auto dets = parse_detections_csv(read_text(a.dets));
    auto gts = parse_voc_xml(read_bytes(a.gt));
    DetectionEval eval = evaluate_detections(dets, gts, a.iou);
    RunReport r;
    r.command = "metrics det";
    r.inputs = {a.dets, a.gt};
    r.metrics["map"] = eval.map;
    for (const ClassEval& ce : eval.classes) {
        r.metrics["ap." + ce.label] = ce.ap;
        if (ce.missing_ground_truth)
            r.notes["warning." + ce.label] = "detections scored against zero ground truths";
    }
    return r;
}

RunReport do_metrics_rtp(const MetricsRtpArgs& a) {
    auto paths = split_list(a.preds, "--preds");
    std::vector<std::map<std::string, std::string>> models;
    models.reserve(paths.size());
    for (const auto& path : paths) models.push_back(parse_predictions_csv(read_text(path)));
    double value = rtp(models);
    RunReport r;
    r.command = "metrics rtp";
    r.inputs = paths;
    r.metrics["rtp"] = value;
    r.metrics["models"] = double(models.size());
    r.metrics["images"] = double(models.front().size());
    return r;
}

RunReport do_down4(const Down4Args& a) {
    Image out = downsample4x(load_image(a.image));
    write_bytes(a.out, encode_image(out));
    RunReport r;
    r.command = "srloss down4";
    r.inputs = {a.image};
    r.outputs = {a.out};
    return r;
}

RunReport do_adv(const AdvArgs& a) {
    double value =
        adversarial_objective(load_probabilities(a.dreal), load_probabilities(a.dfake));
    RunReport r;
    r.command = "srloss adv";
    r.inputs = {a.dreal, a.dfake};
    r.metrics["adversarial"] = value;
    return r;
}

RunReport do_feat(const FeatArgs& a) {
    Image hr = load_image(a.hr);
    Image sr = load_image(a.sr);
    double value = 0.0;
    if (a.extractor == "identity") {
        value = feature_loss(hr, sr, IdentityExtractor{});
    } else {
        value = feature_loss(hr, sr, ConvStackExtractor(a.seed, a.depth));
    }
    RunReport r;
    r.command = "srloss feat";
    r.inputs = {a.hr, a.sr};
    r.metrics["feature_loss"] = value;
    r.notes["extractor"] = a.extractor;
    return r;
}

RunReport do_srloss_cv(const SrCvArgs& a) {
    double value = cv_loss(load_image(a.hr), load_image(a.sr), load_image(a.ref));
    RunReport r;
    r.command = "srloss cv";
    r.inputs = {a.hr, a.sr, a.ref};
    r.metrics["cv_loss"] = value;
    return r;
}

RunReport do_quality_eval(const QualityEvalArgs& a) {
    EvalMatrix e = load_eval_matrix_csv(read_text(a.matrix), read_text(a.weights));
    std::vector<double> x = ordered_attribute_eval(e);
    RunReport r;
    r.command = "quality eval";
    r.inputs = {a.matrix, a.weights};
    for (std::size_t i = 0; i < x.size(); ++i)
        r.metrics["x." + std::to_string(i)] = x[i];
    return r;
}

RunReport do_quality_select(const QualitySelectArgs& a) {
    std::vector<MetaTask> tasks = load_meta_tasks_csv(read_text(a.tasks));
    auto anchor_it = std::find_if(tasks.begin(), tasks.end(),
                                  [&](const MetaTask& t) { return t.id == a.anchor; });
    if (anchor_it == tasks.end())
        throw Error(ErrorKind::Usage, "quality select: anchor task '" + a.anchor +
                                          "' not found in " + a.tasks);
    MetaTask anchor = *anchor_it;
    std::vector<MetaTask> candidates;
    for (const MetaTask& t : tasks)
        if (t.id != a.anchor) candidates.push_back(t);

    RegressionModel model;  // gradients taken at the zero model
    model.weights.assign(anchor.inputs.front().size(), 0.0);
    TaskSelection sel = select_meta_tasks(candidates, anchor, model, a.n);

    RunReport r;
    r.command = "quality select";
    r.inputs = {a.tasks};
    r.metrics["selected"] = double(sel.ids.size());
    for (std::size_t i = 0; i < sel.ids.size(); ++i)
        r.notes["selected." + std::to_string(i)] = sel.ids[i];
    if (sel.excluded_zero_gradient)
        r.notes["warning.zero_gradient"] = "tasks with zero gradient were excluded";
    return r;
}

RunReport do_quality_fit(const QualityFitArgs& a) {
    std::vector<MetaTask> tasks = load_meta_tasks_csv(read_text(a.tasks));
    FitResult fit = joint_gradient_fit(tasks, a.steps, a.lr);
    RunReport r;
    r.command = "quality fit";
    r.inputs = {a.tasks};
    r.metrics["loss.initial"] = fit.loss_trace.front();
    r.metrics["loss.final"] = fit.loss_trace.back();
    r.metrics["steps"] = double(a.steps);
    r.metrics["model.bias"] = fit.model.bias;
    for (std::size_t j = 0; j < fit.model.weights.size(); ++j)
        r.metrics["model.w." + std::to_string(j)] = fit.model.weights[j];
    return r;
}

RunReport do_coupled(const CoupledArgs& a) {
    Image input = load_image(a.input);
    Image ref = load_image(a.ref);
    // The built-in producer is the identity map: this invocation gates the
    // input image against the reference. Parameterized producers are a
    // library-level interface.
    CandidateProducer producer{[](const Image& img, double) { return img; }, 1.0};
    RunReport r = coupled_run(input, producer, ref, a.cfg);
    r.inputs = {a.input, a.ref};
    return r;
}

}  // namespace

int run_command(const std::vector<std::string>& args, std::ostream& out,
                std::ostream& err) {
    CLI::App app{"displacement-field geometry, registration and image-quality toolkit"};
    app.name("fieldops");
    app.require_subcommand(1);

    RegisterArgs reg_args;
    auto* reg = app.add_subcommand("register", "estimate a displacement field");
    reg->add_option("--fixed", reg_args.fixed)->required();
    reg->add_option("--moving", reg_args.moving)->required();
    reg->add_option("--out", reg_args.out)->required();
    reg->add_option("--levels", reg_args.p.levels);
    reg->add_option("--iters", reg_args.p.iters_per_level);
    reg->add_option("--step", reg_args.p.step);
    reg->add_option("--smooth", reg_args.p.smooth_weight);
    reg->add_option("--tol", reg_args.p.tol);

    WarpArgs warp_args;
    auto* warp_cmd = app.add_subcommand("warp", "resample an image through a field");
    warp_cmd->add_option("--image", warp_args.image)->required();
    warp_cmd->add_option("--field", warp_args.field)->required();
    warp_cmd->add_option("--out", warp_args.out)->required();

    AtlasArgs atlas_args;
    auto* atlas_cmd = app.add_subcommand("atlas", "build a template by register-and-average");
    atlas_cmd->add_option("--images", atlas_args.images)->required();
    atlas_cmd->add_option("--rounds", atlas_args.rounds)->required();
    atlas_cmd->add_option("--out", atlas_args.out)->required();

    JdArgs jd_args;
    auto* jd_cmd = app.add_subcommand("jd", "jacobian determinant map of a field");
    jd_cmd->add_option("--field", jd_args.field)->required();
    jd_cmd->add_option("--out", jd_args.out)->required();
    jd_cmd->add_option("--raw", jd_args.raw);

    CurlArgs curl_args;
    auto* curl_cmd = app.add_subcommand("curl", "curl map of a field");
    curl_cmd->add_option("--field", curl_args.field)->required();
    curl_cmd->add_option("--out", curl_args.out)->required();
    curl_cmd->add_option("--images", curl_args.images);

    GridArgs grid_args;
    auto* grid_cmd = app.add_subcommand("grid", "deformed-grid visualization");
    grid_cmd->add_option("--field", grid_args.field)->required();
    grid_cmd->add_option("--spacing", grid_args.spacing);
    grid_cmd->add_option("--out", grid_args.out)->required();

    auto* metrics_cmd = app.add_subcommand("metrics", "quality and detection metrics");
    metrics_cmd->require_subcommand(1);

    MetricsImgArgs mimg_args;
    auto* mimg = metrics_cmd->add_subcommand("img", "MSE / PSNR / SSIM");
    mimg->add_option("--x", mimg_args.x)->required();
    mimg->add_option("--y", mimg_args.y)->required();

    MetricsDetArgs mdet_args;
    auto* mdet = metrics_cmd->add_subcommand("det", "detection AP / mAP");
    mdet->add_option("--dets", mdet_args.dets)->required();
    mdet->add_option("--gt", mdet_args.gt)->required();
    mdet->add_option("--iou", mdet_args.iou);

    MetricsRtpArgs mrtp_args;
    auto* mrtp = metrics_cmd->add_subcommand("rtp", "panel consensus fraction");
    mrtp->add_option("--preds", mrtp_args.preds)->required();

    auto* srloss_cmd = app.add_subcommand("srloss", "super-resolution loss evaluators");
    srloss_cmd->require_subcommand(1);

    Down4Args down4_args;
    auto* down4 = srloss_cmd->add_subcommand("down4", "4x block-mean downsampling");
    down4->add_option("--image", down4_args.image)->required();
    down4->add_option("--out", down4_args.out)->required();

    AdvArgs adv_args;
    auto* adv = srloss_cmd->add_subcommand("adv", "adversarial objective");
    adv->add_option("--dreal", adv_args.dreal)->required();
    adv->add_option("--dfake", adv_args.dfake)->required();

    FeatArgs feat_args;
    auto* feat = srloss_cmd->add_subcommand("feat", "feature-space loss");
    feat->add_option("--hr", feat_args.hr)->required();
    feat->add_option("--sr", feat_args.sr)->required();
    feat->add_option("--extractor", feat_args.extractor)
        ->check(CLI::IsMember({"identity", "conv"}));
    feat->add_option("--seed", feat_args.seed);
    feat->add_option("--depth", feat_args.depth);

    SrCvArgs srcv_args;
    auto* srcv = srloss_cmd->add_subcommand("cv", "curl-map loss");
    srcv->add_option("--hr", srcv_args.hr)->required();
    srcv->add_option("--sr", srcv_args.sr)->required();
    srcv->add_option("--ref", srcv_args.ref)->required();

    auto* quality_cmd = app.add_subcommand("quality", "quality-evaluation primitives");
    quality_cmd->require_subcommand(1);

    QualityEvalArgs qeval_args;
    auto* qeval = quality_cmd->add_subcommand("eval", "ordered-attribute evaluation");
    qeval->add_option("--matrix", qeval_args.matrix)->required();
    qeval->add_option("--weights", qeval_args.weights)->required();

    QualitySelectArgs qsel_args;
    auto* qsel = quality_cmd->add_subcommand("select", "gradient-similarity task ranking");
    qsel->add_option("--tasks", qsel_args.tasks)->required();
    qsel->add_option("--anchor", qsel_args.anchor)->required();
    qsel->add_option("--n", qsel_args.n)->required();

    QualityFitArgs qfit_args;
    auto* qfit = quality_cmd->add_subcommand("fit", "joint-gradient regression fit");
    qfit->add_option("--tasks", qfit_args.tasks)->required();
    qfit->add_option("--steps", qfit_args.steps)->required();
    qfit->add_option("--lr", qfit_args.lr)->required();

    CoupledArgs coupled_args;
    auto* coupled_cmd = app.add_subcommand("coupled", "generate-evaluate-penalize gate");
    coupled_cmd->add_option("--input", coupled_args.input)->required();
    coupled_cmd->add_option("--ref", coupled_args.ref)->required();
    coupled_cmd->add_option("--max-iters", coupled_args.cfg.max_iters);
    coupled_cmd->add_option("--psnr-min", coupled_args.cfg.psnr_min);
    coupled_cmd->add_option("--ssim-min", coupled_args.cfg.ssim_min);
    coupled_cmd->add_option("--penalty", coupled_args.cfg.penalty_scale);

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(std::move(reversed));
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e, out, err);
        return code == 0 ? 0 : 1;
    }

    try {
        RunReport report;
        if (*reg) report = do_register(reg_args);
        else if (*warp_cmd) report = do_warp(warp_args);
        else if (*atlas_cmd) report = do_atlas(atlas_args);
        else if (*jd_cmd) report = do_jd(jd_args);
        else if (*curl_cmd) report = do_curl(curl_args);
        else if (*grid_cmd) report = do_grid(grid_args);
        else if (*mimg) report = do_metrics_img(mimg_args);
        else if (*mdet) report = do_metrics_det(mdet_args);
        else if (*mrtp) report = do_metrics_rtp(mrtp_args);
        else if (*down4) report = do_down4(down4_args);
        else if (*adv) report = do_adv(adv_args);
        else if (*feat) report = do_feat(feat_args);
        else if (*srcv) report = do_srloss_cv(srcv_args);
        else if (*qeval) report = do_quality_eval(qeval_args);
        else if (*qsel) report = do_quality_select(qsel_args);
        else if (*qfit) report = do_quality_fit(qfit_args);
        else if (*coupled_cmd) report = do_coupled(coupled_args);
        else {
            err << "error: no subcommand selected\n";
            return 1;
        }
        out << serialize_report(report);
        if (report.status == RunStatus::Accepted) return 0;
        if (report.status == RunStatus::Rejected) return 2;
        return 1;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace fieldops
