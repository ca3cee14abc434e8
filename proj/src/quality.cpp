#include "fieldops/quality.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "text_util.hpp"

namespace fieldops {

void validate(const EvalMatrix& e) {
    if (e.k < 1) throw Error(ErrorKind::Validation, "eval matrix: k must be >= 1");
    if (e.d.size() != std::size_t(e.k) * e.k)
        throw Error(ErrorKind::Dimension, "eval matrix: d must be k x k");
    if (e.p.size() != std::size_t(e.k))
        throw Error(ErrorKind::Dimension, "eval matrix: p must have length k");
    for (double v : e.d)
        if (!std::isfinite(v))
            throw Error(ErrorKind::Validation, "eval matrix: non-finite entry in d");
    for (double v : e.p)
        if (!std::isfinite(v))
            throw Error(ErrorKind::Validation, "eval matrix: non-finite entry in p");
}

void validate(const MetaTask& t) {
    if (t.inputs.empty())
        throw Error(ErrorKind::Validation, "meta task '" + t.id + "': no samples");
    if (t.inputs.size() != t.targets.size())
        throw Error(ErrorKind::Dimension,
                    "meta task '" + t.id + "': one target per input required");
    std::size_t m = t.inputs.front().size();
    if (m == 0)
        throw Error(ErrorKind::Validation, "meta task '" + t.id + "': empty feature vector");
    for (const auto& x : t.inputs)
        if (x.size() != m)
            throw Error(ErrorKind::Dimension,
                        "meta task '" + t.id + "': inconsistent feature length");
}

std::vector<double> ordered_attribute_eval(const EvalMatrix& e) {
    validate(e);
    std::vector<double> x(e.k, 0.0);
    for (int i = 0; i < e.k; ++i) {
        double sum = 0.0;
        for (int j = 0; j < e.k; ++j) sum += e.d[std::size_t(i) * e.k + j] * e.p[j];
        x[i] = sum;
    }
    return x;
}

namespace {

double predict(const RegressionModel& m, const std::vector<double>& x) {
    double v = m.bias;
    for (std::size_t j = 0; j < x.size(); ++j) v += m.weights[j] * x[j];
    return v;
}

void require_model_match(const MetaTask& t, const RegressionModel& m) {
    validate(t);
    if (m.weights.size() != t.inputs.front().size())
        throw Error(ErrorKind::Dimension, "meta task '" + t.id +
                                              "': feature length does not match model");
}

}  // namespace

double task_mse(const MetaTask& t, const RegressionModel& m) {
    require_model_match(t, m);
    double sum = 0.0;
    for (std::size_t i = 0; i < t.inputs.size(); ++i) {
        double r = predict(m, t.inputs[i]) - t.targets[i];
        sum += r * r;
    }
    return sum / double(t.inputs.size());
}

std::vector<double> task_gradient(const MetaTask& t, const RegressionModel& m) {
    require_model_match(t, m);
    std::size_t width = m.weights.size();
    std::vector<double> g(width + 1, 0.0);
    for (std::size_t i = 0; i < t.inputs.size(); ++i) {
        double r = predict(m, t.inputs[i]) - t.targets[i];
        for (std::size_t j = 0; j < width; ++j) g[j] += r * t.inputs[i][j];
        g[width] += r;
    }
    double scale = 2.0 / double(t.inputs.size());
    for (double& v : g) v *= scale;
    return g;
}

double gradient_cosine(const std::vector<double>& g1, const std::vector<double>& g2) {
    if (g1.size() != g2.size())
        throw Error(ErrorKind::Dimension, "gradient cosine: length mismatch");
    if (g1.empty()) throw Error(ErrorKind::Dimension, "gradient cosine: empty vectors");
    double dot = 0.0, n1 = 0.0, n2 = 0.0;
    for (std::size_t i = 0; i < g1.size(); ++i) {
        dot += g1[i] * g2[i];
        n1 += g1[i] * g1[i];
        n2 += g2[i] * g2[i];
    }
    if (n1 == 0.0 || n2 == 0.0)
        throw Error(ErrorKind::Validation,
                    "gradient cosine: zero vector has undefined similarity");
    return std::clamp(dot / (std::sqrt(n1) * std::sqrt(n2)), -1.0, 1.0);
}

namespace {

bool is_zero(const std::vector<double>& g) {
    return std::all_of(g.begin(), g.end(), [](double v) { return v == 0.0; });
}

}  // namespace

TaskSelection select_meta_tasks(const std::vector<MetaTask>& tasks,
                                const MetaTask& anchor, const RegressionModel& model,
                                int n) {
    if (n < 0 || std::size_t(n) > tasks.size())
        throw Error(ErrorKind::Range, "select_meta_tasks: n must be in [0, task count]");
    TaskSelection sel;
    std::vector<double> anchor_grad = task_gradient(anchor, model);
    if (is_zero(anchor_grad)) {
        sel.excluded_zero_gradient = true;
        return sel;  // nothing is comparable against a zero anchor gradient
    }
    std::vector<std::pair<double, std::string>> ranked;  // (-cosine, id)
    for (const MetaTask& t : tasks) {
        std::vector<double> g = task_gradient(t, model);
        if (is_zero(g)) {
            sel.excluded_zero_gradient = true;
            continue;
        }
        ranked.emplace_back(-gradient_cosine(g, anchor_grad), t.id);
    }
    std::sort(ranked.begin(), ranked.end());
    std::size_t take = std::min<std::size_t>(n, ranked.size());
    for (std::size_t i = 0; i < take; ++i) sel.ids.push_back(ranked[i].second);
    return sel;
}

FitResult joint_gradient_fit(const std::vector<MetaTask>& tasks, int steps, double lr) {
    if (tasks.empty())
        throw Error(ErrorKind::Validation, "joint gradient fit: need at least one task");
    if (!(lr > 0.0))
        throw Error(ErrorKind::Validation, "joint gradient fit: lr must be > 0");
    if (steps < 0)
        throw Error(ErrorKind::Validation, "joint gradient fit: steps must be >= 0");
    std::size_t width = 0;
    for (const MetaTask& t : tasks) {
        validate(t);
        if (width == 0) width = t.inputs.front().size();
        if (t.inputs.front().size() != width)
            throw Error(ErrorKind::Dimension,
                        "joint gradient fit: tasks disagree on feature length");
    }

    FitResult result;
    result.model.weights.assign(width, 0.0);
    result.model.bias = 0.0;

    auto mean_loss = [&](int step) {
        double sum = 0.0;
        for (const MetaTask& t : tasks) sum += task_mse(t, result.model);
        double loss = sum / double(tasks.size());
        if (!std::isfinite(loss))
            throw Error(ErrorKind::Divergence,
                        "joint gradient fit: non-finite loss at step " + std::to_string(step));
        return loss;
    };

    result.loss_trace.push_back(mean_loss(0));
    for (int step = 1; step <= steps; ++step) {
        std::vector<double> joint(width + 1, 0.0);
        for (const MetaTask& t : tasks) {
            std::vector<double> g = task_gradient(t, result.model);
            for (std::size_t j = 0; j < joint.size(); ++j) joint[j] += g[j];
        }
        for (double& v : joint) v /= double(tasks.size());
        for (std::size_t j = 0; j < width; ++j) result.model.weights[j] -= lr * joint[j];
        result.model.bias -= lr * joint[width];
        result.loss_trace.push_back(mean_loss(step));
    }
    return result;
}

std::vector<MetaTask> load_meta_tasks_csv(std::string_view text) {
    std::map<std::string, std::size_t> index;
    std::vector<MetaTask> tasks;
    std::size_t feature_count = 0;
    auto lines = text::split_lines(text);
    for (std::size_t li = 0; li < lines.size(); ++li) {
        std::string_view line = lines[li];
        if (text::trim(line).empty()) continue;
        auto fields = text::split_fields(line);
        std::string ctx = "tasks csv: line " + std::to_string(li + 1);
        if (fields.size() < 3)
            throw Error(ErrorKind::Parse,
                        ctx + ": expected task_id,y,x1,... with at least one feature");
        std::string id(text::trim(fields[0]));
        if (id.empty()) throw Error(ErrorKind::Parse, ctx + ": empty task id");
        if (feature_count == 0) feature_count = fields.size() - 2;
        if (fields.size() - 2 != feature_count)
            throw Error(ErrorKind::Parse,
                        ctx + ": expected " + std::to_string(feature_count) +
                            " features, got " + std::to_string(fields.size() - 2));
        double y = text::parse_double(fields[1], ctx);
        std::vector<double> x(feature_count);
        for (std::size_t j = 0; j < feature_count; ++j)
            x[j] = text::parse_double(fields[2 + j], ctx);
        auto [it, inserted] = index.try_emplace(id, tasks.size());
        if (inserted) tasks.push_back(MetaTask{id, {}, {}});
        MetaTask& task = tasks[it->second];
        task.inputs.push_back(std::move(x));
        task.targets.push_back(y);
    }
    for (const MetaTask& t : tasks) validate(t);
    return tasks;
}

EvalMatrix load_eval_matrix_csv(std::string_view matrix_text,
                                std::string_view weights_text) {
    EvalMatrix e;
    std::vector<std::vector<double>> rows;
    auto lines = text::split_lines(matrix_text);
    for (std::size_t li = 0; li < lines.size(); ++li) {
        if (text::trim(lines[li]).empty()) continue;
        auto fields = text::split_fields(lines[li]);
        std::vector<double> row;
        for (auto f : fields)
            row.push_back(text::parse_double(f, "matrix csv: line " + std::to_string(li + 1)));
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw Error(ErrorKind::Parse, "matrix csv: empty matrix");
    e.k = int(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != std::size_t(e.k))
            throw Error(ErrorKind::Parse, "matrix csv: row " + std::to_string(i + 1) +
                                              " has " + std::to_string(rows[i].size()) +
                                              " values, expected " + std::to_string(e.k));
        e.d.insert(e.d.end(), rows[i].begin(), rows[i].end());
    }

    auto wlines = text::split_lines(weights_text);
    for (std::size_t li = 0; li < wlines.size(); ++li) {
        if (text::trim(wlines[li]).empty()) continue;
        for (auto field : text::split_fields(wlines[li]))
            e.p.push_back(
                text::parse_double(field, "weights csv: line " + std::to_string(li + 1)));
    }
    if (e.p.size() != std::size_t(e.k))
        throw Error(ErrorKind::Parse, "weights csv: expected " + std::to_string(e.k) +
                                          " values, got " + std::to_string(e.p.size()));
    validate(e);
    return e;
}

}  // namespace fieldops
