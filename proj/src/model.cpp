#include "crm/model.hpp"

#include <cmath>
#include <string>

#include "crm/error.hpp"

namespace crm {

namespace {

std::vector<int> layer_dims(const ArchDescriptor& arch) {
    std::vector<int> dims;
    dims.push_back(arch.input_dim);
    dims.insert(dims.end(), arch.hidden.begin(), arch.hidden.end());
    dims.push_back(1);
    return dims;
}

void validate_arch(const ArchDescriptor& arch) {
    if (arch.input_dim <= 0) throw ContractViolation("arch: input_dim must be positive");
    for (int h : arch.hidden) {
        if (h <= 0) throw ContractViolation("arch: hidden dims must be positive");
    }
}

}  // namespace

std::size_t param_count(const ArchDescriptor& arch) {
    validate_arch(arch);
    const auto dims = layer_dims(arch);
    std::size_t total = 0;
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
        total += static_cast<std::size_t>(dims[l] + 1) * static_cast<std::size_t>(dims[l + 1]);
    }
    return total;
}

ParamVector init_params(const ArchDescriptor& arch, Rng& rng) {
    validate_arch(arch);
    const auto dims = layer_dims(arch);
    ParamVector p;
    p.reserve(param_count(arch));
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
        const int fan_in = dims[l];
        const int fan_out = dims[l + 1];
        const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
        for (int i = 0; i < fan_in * fan_out; ++i) p.push_back(rng.uniform(-bound, bound));
        for (int i = 0; i < fan_out; ++i) p.push_back(0.0);
    }
    return p;
}

ParamVector init_params(const ArchDescriptor& arch, std::uint64_t seed) {
    Rng rng(seed);
    return init_params(arch, rng);
}

double reward_forward(const RewardModel& m, const ResponseFeatures& t) {
    validate_arch(m.arch);
    if (static_cast<int>(t.size()) != m.arch.input_dim) {
        throw ContractViolation("reward_forward: feature length " + std::to_string(t.size()) +
                                " does not match input_dim " + std::to_string(m.arch.input_dim));
    }
    if (m.params.size() != param_count(m.arch)) {
        throw ContractViolation("reward_forward: parameter length does not match architecture");
    }
    const auto dims = layer_dims(m.arch);
    std::vector<double> act = t;
    std::size_t offset = 0;
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
        const int in = dims[l];
        const int out = dims[l + 1];
        const bool last = (l + 2 == dims.size());
        std::vector<double> next(static_cast<std::size_t>(out));
        for (int o = 0; o < out; ++o) {
            double s = m.params[offset + static_cast<std::size_t>(in) * out + o];  // bias
            const std::size_t row = offset + static_cast<std::size_t>(o) * in;
            for (int i = 0; i < in; ++i) s += m.params[row + i] * act[i];
            next[static_cast<std::size_t>(o)] = last ? s : std::tanh(s);
        }
        offset += static_cast<std::size_t>(in + 1) * out;
        act = std::move(next);
    }
    return act[0];
}

double reward_forward_grad(const RewardModel& m, const ResponseFeatures& t, ParamVector& grad_out) {
    validate_arch(m.arch);
    if (static_cast<int>(t.size()) != m.arch.input_dim) {
        throw ContractViolation("reward_forward_grad: feature length mismatch");
    }
    const std::size_t n_params = param_count(m.arch);
    if (m.params.size() != n_params) {
        throw ContractViolation("reward_forward_grad: parameter length does not match architecture");
    }
    const auto dims = layer_dims(m.arch);
    const std::size_t n_layers = dims.size() - 1;

    // Forward, keeping post-activation outputs of every layer.
    std::vector<std::vector<double>> acts(n_layers + 1);
    acts[0] = t;
    std::vector<std::size_t> offsets(n_layers);
    std::size_t offset = 0;
    for (std::size_t l = 0; l < n_layers; ++l) {
        offsets[l] = offset;
        const int in = dims[l];
        const int out = dims[l + 1];
        const bool last = (l + 1 == n_layers);
        acts[l + 1].resize(static_cast<std::size_t>(out));
        for (int o = 0; o < out; ++o) {
            double s = m.params[offset + static_cast<std::size_t>(in) * out + o];
            const std::size_t row = offset + static_cast<std::size_t>(o) * in;
            for (int i = 0; i < in; ++i) s += m.params[row + i] * acts[l][i];
            acts[l + 1][static_cast<std::size_t>(o)] = last ? s : std::tanh(s);
        }
        offset += static_cast<std::size_t>(in + 1) * out;
    }

    // Backward: scalar output, seed delta = 1.
    grad_out.assign(n_params, 0.0);
    std::vector<double> delta{1.0};
    for (std::size_t l = n_layers; l-- > 0;) {
        const int in = dims[l];
        const int out = dims[l + 1];
        const std::size_t base = offsets[l];
        for (int o = 0; o < out; ++o) {
            const double d = delta[static_cast<std::size_t>(o)];
            const std::size_t row = base + static_cast<std::size_t>(o) * in;
            for (int i = 0; i < in; ++i) grad_out[row + i] = d * acts[l][i];
            grad_out[base + static_cast<std::size_t>(in) * out + o] = d;
        }
        if (l == 0) break;
        std::vector<double> prev(static_cast<std::size_t>(in), 0.0);
        for (int i = 0; i < in; ++i) {
            double s = 0.0;
            for (int o = 0; o < out; ++o) {
                s += m.params[base + static_cast<std::size_t>(o) * in + i] *
                     delta[static_cast<std::size_t>(o)];
            }
            const double a = acts[l][i];  // tanh output of the previous layer
            prev[static_cast<std::size_t>(i)] = s * (1.0 - a * a);
        }
        delta = std::move(prev);
    }
    return acts[n_layers][0];
}

ParamVector reward_grad(const RewardModel& m, const ResponseFeatures& t) {
    ParamVector g;
    reward_forward_grad(m, t, g);
    return g;
}

double dpo_implicit_reward(double logp_policy, double logp_ref, double beta) {
    if (!std::isfinite(logp_policy) || !std::isfinite(logp_ref)) {
        throw ContractViolation("dpo_implicit_reward: non-finite log-probability");
    }
    if (!(beta > 0.0)) throw ContractViolation("dpo_implicit_reward: beta must be > 0");
    if (logp_policy > 1e-12 || logp_ref > 1e-12) {
        throw ContractViolation("dpo_implicit_reward: log-probabilities must be <= 0");
    }
    return beta * (logp_policy - logp_ref);
}

ResponseFeatures Standardizer::apply(const ResponseFeatures& x) const {
    if (identity()) return x;
    if (x.size() != mean.size()) {
        throw ContractViolation("standardizer: feature length mismatch");
    }
    ResponseFeatures out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = (x[i] - mean[i]) / stddev[i];
    return out;
}

Standardizer fit_standardizer(const std::vector<const ResponseFeatures*>& rows) {
    if (rows.empty()) throw ContractViolation("fit_standardizer: no rows");
    const std::size_t d = rows.front()->size();
    Standardizer s;
    s.mean.assign(d, 0.0);
    s.stddev.assign(d, 0.0);
    for (const auto* row : rows) {
        if (row->size() != d) throw ContractViolation("fit_standardizer: ragged rows");
        for (std::size_t i = 0; i < d; ++i) s.mean[i] += (*row)[i];
    }
    const double n = static_cast<double>(rows.size());
    for (std::size_t i = 0; i < d; ++i) s.mean[i] /= n;
    for (const auto* row : rows) {
        for (std::size_t i = 0; i < d; ++i) {
            const double c = (*row)[i] - s.mean[i];
            s.stddev[i] += c * c;
        }
    }
    for (std::size_t i = 0; i < d; ++i) {
        s.stddev[i] = std::sqrt(s.stddev[i] / n);
        if (s.stddev[i] < 1e-12) s.stddev[i] = 1.0;
    }
    return s;
}

double ScoredModel::score(const ResponseFeatures& raw) const {
    return reward_forward(model, standardizer.apply(raw));
}

}  // namespace crm
