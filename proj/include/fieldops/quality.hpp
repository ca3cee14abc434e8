#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "fieldops/error.hpp"

namespace fieldops {

/// k x k evaluation matrix d (row-major) with a length-k weight vector p.
struct EvalMatrix {
    int k = 0;
    std::vector<double> d;
    std::vector<double> p;
};

/// One rater's quality-scoring dataset: feature vectors with one target each.
struct MetaTask {
    std::string id;
    std::vector<std::vector<double>> inputs;
    std::vector<double> targets;
};

struct RegressionModel {
    std::vector<double> weights;
    double bias = 0.0;
};

void validate(const EvalMatrix& e);
void validate(const MetaTask& t);

/// Ordered-attribute evaluation: x = d * p (matrix-vector product).
std::vector<double> ordered_attribute_eval(const EvalMatrix& e);

/// Mean squared error of the linear model on one task.
double task_mse(const MetaTask& t, const RegressionModel& m);

/**
 * Gradient of the task MSE (1/n) * sum (w.x + b - y)^2 with respect to
 * (weights, bias): a length-(m+1) vector, bias component last.
 */
std::vector<double> task_gradient(const MetaTask& t, const RegressionModel& m);

/// Cosine of the angle between two gradients; zero vectors are an error.
double gradient_cosine(const std::vector<double>& g1, const std::vector<double>& g2);

struct TaskSelection {
    std::vector<std::string> ids;       // descending cosine, ties by id
    bool excluded_zero_gradient = false;
};

/**
 * Ranks tasks by the cosine between their gradient at the given model and
 * the anchor task's gradient, descending (ties broken by id ascending), and
 * returns the top-n ids. Tasks with an exactly zero gradient are excluded
 * and flagged; a zero anchor gradient excludes everything.
 */
TaskSelection select_meta_tasks(const std::vector<MetaTask>& tasks,
                                const MetaTask& anchor, const RegressionModel& model,
                                int n);

struct FitResult {
    RegressionModel model;
    // loss_trace[0] is the mean-over-tasks MSE at the zero model;
    // loss_trace[s] the value after step s.
    std::vector<double> loss_trace;
};

/**
 * Joint-gradient descent from a zero model: each step applies
 * -lr * (unweighted mean of per-task gradients).
 */
FitResult joint_gradient_fit(const std::vector<MetaTask>& tasks, int steps, double lr);

// CSV surfaces.
// Tasks: "task_id,y,x1,...,xm" rows grouped by task_id (order of first
// appearance); every row must carry the same feature count.
std::vector<MetaTask> load_meta_tasks_csv(std::string_view text);
// Matrix: k lines of k comma-separated values. Weights: k values separated
// by commas and/or newlines.
EvalMatrix load_eval_matrix_csv(std::string_view matrix_text,
                                std::string_view weights_text);

}  // namespace fieldops
