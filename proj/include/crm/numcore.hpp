#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

namespace crm {

using ParamVector = std::vector<double>;

bool all_finite(const ParamVector& v);

struct LossGradient {
    double loss = 0.0;
    ParamVector grad;
};

// Bias-corrected Adam. State is caller-owned; adam_step is a pure function.
struct AdamState {
    std::int64_t step = 0;
    ParamVector m;
    ParamVector v;
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

AdamState make_adam(std::size_t n_params, double lr);

std::pair<AdamState, ParamVector> adam_step(const AdamState& state,
                                            const ParamVector& params,
                                            const ParamVector& grad);

using LossFn = std::function<double(const ParamVector&)>;
using GradFn = std::function<ParamVector(const ParamVector&)>;

// Central differences with a fixed step h > 0.
ParamVector finite_diff_grad(const LossFn& loss_fn, const ParamVector& at, double h);

struct GradCheckReport {
    bool pass = false;
    double max_rel_error = 0.0;
    std::size_t worst_coordinate = 0;
    std::vector<double> rel_errors;
};

// Compares analytic_grad_fn against central differences with a relative step
// h_i = 1e-5 * max(1, |x_i|). Relative error metric: |a - f| / (|a| + |f|).
GradCheckReport check_gradient(const LossFn& loss_fn,
                               const GradFn& analytic_grad_fn,
                               const ParamVector& at,
                               double tol);

}  // namespace crm
