#include "crm/numcore.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "crm/error.hpp"

namespace crm {

bool all_finite(const ParamVector& v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

AdamState make_adam(std::size_t n_params, double lr) {
    AdamState s;
    s.m.assign(n_params, 0.0);
    s.v.assign(n_params, 0.0);
    s.lr = lr;
    return s;
}

std::pair<AdamState, ParamVector> adam_step(const AdamState& state,
                                            const ParamVector& params,
                                            const ParamVector& grad) {
    const std::size_t n = params.size();
    if (state.m.size() != n || state.v.size() != n || grad.size() != n) {
        throw ContractViolation("adam_step: parameter/moment/gradient length mismatch");
    }
    AdamState next = state;
    next.step = state.step + 1;
    ParamVector out = params;
    const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(next.step));
    const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(next.step));
    for (std::size_t i = 0; i < n; ++i) {
        next.m[i] = state.beta1 * state.m[i] + (1.0 - state.beta1) * grad[i];
        next.v[i] = state.beta2 * state.v[i] + (1.0 - state.beta2) * grad[i] * grad[i];
        const double mhat = next.m[i] / bc1;
        const double vhat = next.v[i] / bc2;
        out[i] -= state.lr * mhat / (std::sqrt(vhat) + state.eps);
    }
    if (all_finite(grad) && !all_finite(out)) {
        throw NumericError("adam_step: non-finite parameters after update");
    }
    return {std::move(next), std::move(out)};
}

namespace {

double probe(const LossFn& fn, ParamVector& x, std::size_t i, double delta, const char* side) {
    const double saved = x[i];
    x[i] = saved + delta;
    const double val = fn(x);
    x[i] = saved;
    if (!std::isfinite(val)) {
        throw NumericError("finite differences: non-finite loss at coordinate " +
                           std::to_string(i) + " (" + side + " probe)");
    }
    return val;
}

}  // namespace

ParamVector finite_diff_grad(const LossFn& loss_fn, const ParamVector& at, double h) {
    if (!(h > 0.0)) throw ContractViolation("finite_diff_grad: h must be > 0");
    ParamVector x = at;
    ParamVector g(at.size());
    for (std::size_t i = 0; i < at.size(); ++i) {
        const double up = probe(loss_fn, x, i, h, "+h");
        const double dn = probe(loss_fn, x, i, -h, "-h");
        g[i] = (up - dn) / (2.0 * h);
    }
    return g;
}

GradCheckReport check_gradient(const LossFn& loss_fn,
                               const GradFn& analytic_grad_fn,
                               const ParamVector& at,
                               double tol) {
    if (!(tol > 0.0)) throw ContractViolation("check_gradient: tol must be > 0");
    const ParamVector analytic = analytic_grad_fn(at);
    if (analytic.size() != at.size()) {
        throw ContractViolation("check_gradient: analytic gradient length mismatch");
    }
    GradCheckReport report;
    report.rel_errors.resize(at.size(), 0.0);
    ParamVector x = at;
    for (std::size_t i = 0; i < at.size(); ++i) {
        const double h = 1e-5 * std::max(1.0, std::abs(at[i]));
        const double up = probe(loss_fn, x, i, h, "+h");
        const double dn = probe(loss_fn, x, i, -h, "-h");
        const double fd = (up - dn) / (2.0 * h);
        const double a = analytic[i];
        // |a - f| / (|a| + |f|), with a small floor so coordinates whose true
        // gradient is ~0 are judged on an absolute scale instead of FD noise.
        const double denom = std::max(std::abs(a) + std::abs(fd), 1e-6);
        const double rel = std::abs(a - fd) / denom;
        report.rel_errors[i] = rel;
        if (rel > report.max_rel_error) {
            report.max_rel_error = rel;
            report.worst_coordinate = i;
        }
    }
    report.pass = report.max_rel_error <= tol;
    return report;
}

}  // namespace crm
