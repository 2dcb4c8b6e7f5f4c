#include "crm/losses.hpp"

#include <cmath>

#include "crm/error.hpp"

namespace crm {

namespace {

double sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

// log(1 + e^z) without overflow.
double log1p_exp(double z) { return z > 36.0 ? z : std::log1p(std::exp(z)); }

struct ResponseEval {
    double reward = 0.0;
    ParamVector grad;
};

// Shared BT accumulation so that crm_objective(lambda > 0) produces the same
// floating-point sequence for its BT term as bt_nll does.
LossGradient bt_from_evals(const std::vector<ResponseEval>& chosen,
                           const std::vector<ResponseEval>& rejected,
                           std::size_t n_params) {
    LossGradient out;
    out.grad.assign(n_params, 0.0);
    const double inv_n = 1.0 / static_cast<double>(chosen.size());
    for (std::size_t i = 0; i < chosen.size(); ++i) {
        const double delta = chosen[i].reward - rejected[i].reward;
        out.loss += log1p_exp(-delta);
        const double coeff = -inv_n * sigmoid(-delta);
        for (std::size_t p = 0; p < n_params; ++p) {
            out.grad[p] += coeff * (chosen[i].grad[p] - rejected[i].grad[p]);
        }
    }
    out.loss *= inv_n;
    return out;
}

void eval_batch(const RewardModel& m,
                const PreferenceBatch& batch,
                std::vector<ResponseEval>& chosen,
                std::vector<ResponseEval>& rejected) {
    chosen.resize(batch.size());
    rejected.resize(batch.size());
    for (std::size_t i = 0; i < batch.size(); ++i) {
        chosen[i].reward = reward_forward_grad(m, batch[i].chosen, chosen[i].grad);
        rejected[i].reward = reward_forward_grad(m, batch[i].rejected, rejected[i].grad);
    }
}

struct BinnedValues {
    std::vector<Sample> samples;            // per bin
    std::vector<std::vector<std::size_t>> members;  // response index per bin slot
};

BinnedValues bin_values(const BinSpec& bins,
                        const std::vector<double>& values,
                        const std::vector<double>& z) {
    BinnedValues out;
    out.samples.resize(static_cast<std::size_t>(bins.bin_count));
    out.members.resize(static_cast<std::size_t>(bins.bin_count));
    for (std::size_t i = 0; i < values.size(); ++i) {
        const auto b = static_cast<std::size_t>(assign(bins, z[i]));
        out.samples[b].push_back(values[i]);
        out.members[b].push_back(i);
    }
    return out;
}

std::vector<int> bin_counts(const BinnedValues& bv) {
    std::vector<int> counts;
    counts.reserve(bv.samples.size());
    for (const auto& s : bv.samples) counts.push_back(static_cast<int>(s.size()));
    return counts;
}

// Scatters d(mmd)/d(value) from bin-local slots back onto response indices.
void scatter_mmd_grads(const PairwiseBinMmdResult& mmd,
                       const BinnedValues& bv,
                       std::vector<double>& coeff_by_value) {
    for (std::size_t b = 0; b < bv.members.size(); ++b) {
        for (std::size_t s = 0; s < bv.members[b].size(); ++s) {
            coeff_by_value[bv.members[b][s]] += mmd.grads[b][s];
        }
    }
}

}  // namespace

double bt_prob(double r_w, double r_l) {
    if (!std::isfinite(r_w) || !std::isfinite(r_l)) {
        throw ContractViolation("bt_prob: non-finite reward");
    }
    return sigmoid(r_w - r_l);
}

LossGradient bt_nll(const RewardModel& m, const PreferenceBatch& batch) {
    if (batch.empty()) throw ContractViolation("bt_nll: empty batch");
    std::vector<ResponseEval> chosen, rejected;
    eval_batch(m, batch, chosen, rejected);
    return bt_from_evals(chosen, rejected, param_count(m.arch));
}

CrmResult crm_objective(const RewardModel& m, const PreferenceBatch& batch, const CrmConfig& cfg) {
    if (batch.empty()) throw ContractViolation("crm_objective: empty batch");
    if (cfg.lambda < 0.0) throw ContractViolation("crm_objective: lambda must be >= 0");

    CrmResult result;
    if (cfg.lambda == 0.0) {
        result.lg = bt_nll(m, batch);
        result.diag.bt_term = result.lg.loss;
        return result;
    }
    if (cfg.bins.bin_count <= 0) {
        throw ContractViolation("crm_objective: bins must be fitted before use");
    }

    const std::size_t n = batch.size();
    const std::size_t n_params = param_count(m.arch);
    std::vector<ResponseEval> chosen, rejected;
    eval_batch(m, batch, chosen, rejected);
    result.lg = bt_from_evals(chosen, rejected, n_params);
    result.diag.bt_term = result.lg.loss;

    // Per-response MMD gradient coefficients, chosen block then rejected block.
    std::vector<double> coeff_chosen(n, 0.0), coeff_rejected(n, 0.0);

    if (cfg.variant == CrmVariant::Unconditional) {
        std::vector<double> values(2 * n), z(2 * n);
        for (std::size_t i = 0; i < n; ++i) {
            values[i] = chosen[i].reward;
            z[i] = batch[i].z_chosen;
            values[n + i] = rejected[i].reward;
            z[n + i] = batch[i].z_rejected;
        }
        const BinnedValues bv = bin_values(cfg.bins, values, z);
        const PairwiseBinMmdResult mmd = pairwise_bin_mmd(bv.samples, cfg.kernel, cfg.estimator, true);
        result.diag.mmd_term = mmd.value;
        result.diag.mmd_vacuous = mmd.vacuous;
        result.diag.usable_bins = mmd.usable_bins;
        result.diag.skipped_bins = mmd.skipped_bins;
        result.diag.bin_counts_pooled = bin_counts(bv);
        result.diag.bandwidth_pooled = mmd.resolved_bandwidth;
        std::vector<double> coeff(2 * n, 0.0);
        scatter_mmd_grads(mmd, bv, coeff);
        for (std::size_t i = 0; i < n; ++i) {
            coeff_chosen[i] = coeff[i];
            coeff_rejected[i] = coeff[n + i];
        }
    } else {
        std::vector<double> cv(n), cz(n), rv(n), rz(n);
        for (std::size_t i = 0; i < n; ++i) {
            cv[i] = chosen[i].reward;
            cz[i] = batch[i].z_chosen;
            rv[i] = rejected[i].reward;
            rz[i] = batch[i].z_rejected;
        }
        const BinnedValues bc = bin_values(cfg.bins, cv, cz);
        const BinnedValues br = bin_values(cfg.bins, rv, rz);
        const PairwiseBinMmdResult mc = pairwise_bin_mmd(bc.samples, cfg.kernel, cfg.estimator, true);
        const PairwiseBinMmdResult mr = pairwise_bin_mmd(br.samples, cfg.kernel, cfg.estimator, true);
        result.diag.mmd_term = mc.value + mr.value;
        result.diag.mmd_vacuous = mc.vacuous && mr.vacuous;
        result.diag.usable_bins = mc.usable_bins + mr.usable_bins;
        result.diag.skipped_bins = mc.skipped_bins + mr.skipped_bins;
        result.diag.bin_counts_chosen = bin_counts(bc);
        result.diag.bin_counts_rejected = bin_counts(br);
        result.diag.bandwidth_chosen = mc.resolved_bandwidth;
        result.diag.bandwidth_rejected = mr.resolved_bandwidth;
        scatter_mmd_grads(mc, bc, coeff_chosen);
        scatter_mmd_grads(mr, br, coeff_rejected);
    }

    result.lg.loss += cfg.lambda * result.diag.mmd_term;
    for (std::size_t i = 0; i < n; ++i) {
        if (coeff_chosen[i] != 0.0) {
            const double c = cfg.lambda * coeff_chosen[i];
            for (std::size_t p = 0; p < n_params; ++p) result.lg.grad[p] += c * chosen[i].grad[p];
        }
        if (coeff_rejected[i] != 0.0) {
            const double c = cfg.lambda * coeff_rejected[i];
            for (std::size_t p = 0; p < n_params; ++p) result.lg.grad[p] += c * rejected[i].grad[p];
        }
    }
    return result;
}

CrmResult causal_dpo_loss(const std::vector<DpoPair>& pairs, double beta, const CrmConfig& cfg) {
    if (pairs.empty()) throw ContractViolation("causal_dpo_loss: empty batch");
    if (!(beta > 0.0)) throw ContractViolation("causal_dpo_loss: beta must be > 0");
    if (cfg.lambda < 0.0) throw ContractViolation("causal_dpo_loss: lambda must be >= 0");

    const std::size_t n = pairs.size();
    // Implicit rewards, one per response: [w0, l0, w1, l1, ...]
    std::vector<double> h(2 * n), z(2 * n);
    for (std::size_t i = 0; i < n; ++i) {
        h[2 * i] = dpo_implicit_reward(pairs[i].policy_logp_w, pairs[i].ref_logp_w, beta);
        h[2 * i + 1] = dpo_implicit_reward(pairs[i].policy_logp_l, pairs[i].ref_logp_l, beta);
        z[2 * i] = pairs[i].z_w;
        z[2 * i + 1] = pairs[i].z_l;
    }

    CrmResult result;
    result.lg.grad.assign(2 * n, 0.0);
    const double inv_n = 1.0 / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double delta = h[2 * i] - h[2 * i + 1];
        result.lg.loss += log1p_exp(-delta);
        const double coeff = -inv_n * sigmoid(-delta);
        result.lg.grad[2 * i] += coeff * beta;
        result.lg.grad[2 * i + 1] -= coeff * beta;
    }
    result.lg.loss *= inv_n;
    result.diag.bt_term = result.lg.loss;

    if (cfg.lambda == 0.0) return result;
    if (cfg.bins.bin_count <= 0) {
        throw ContractViolation("causal_dpo_loss: bins must be fitted before use");
    }

    if (cfg.variant == CrmVariant::Unconditional) {
        const BinnedValues bv = bin_values(cfg.bins, h, z);
        const PairwiseBinMmdResult mmd = pairwise_bin_mmd(bv.samples, cfg.kernel, cfg.estimator, true);
        result.diag.mmd_term = mmd.value;
        result.diag.mmd_vacuous = mmd.vacuous;
        result.diag.usable_bins = mmd.usable_bins;
        result.diag.skipped_bins = mmd.skipped_bins;
        result.diag.bin_counts_pooled = bin_counts(bv);
        result.diag.bandwidth_pooled = mmd.resolved_bandwidth;
        std::vector<double> coeff(2 * n, 0.0);
        scatter_mmd_grads(mmd, bv, coeff);
        for (std::size_t i = 0; i < 2 * n; ++i) {
            result.lg.grad[i] += cfg.lambda * coeff[i] * beta;
        }
    } else {
        std::vector<double> hw(n), zw(n), hl(n), zl(n);
        for (std::size_t i = 0; i < n; ++i) {
            hw[i] = h[2 * i];
            zw[i] = z[2 * i];
            hl[i] = h[2 * i + 1];
            zl[i] = z[2 * i + 1];
        }
        const BinnedValues bw = bin_values(cfg.bins, hw, zw);
        const BinnedValues bl = bin_values(cfg.bins, hl, zl);
        const PairwiseBinMmdResult mw = pairwise_bin_mmd(bw.samples, cfg.kernel, cfg.estimator, true);
        const PairwiseBinMmdResult ml = pairwise_bin_mmd(bl.samples, cfg.kernel, cfg.estimator, true);
        result.diag.mmd_term = mw.value + ml.value;
        result.diag.mmd_vacuous = mw.vacuous && ml.vacuous;
        result.diag.usable_bins = mw.usable_bins + ml.usable_bins;
        result.diag.skipped_bins = mw.skipped_bins + ml.skipped_bins;
        result.diag.bin_counts_chosen = bin_counts(bw);
        result.diag.bin_counts_rejected = bin_counts(bl);
        result.diag.bandwidth_chosen = mw.resolved_bandwidth;
        result.diag.bandwidth_rejected = ml.resolved_bandwidth;
        std::vector<double> cw(n, 0.0), cl(n, 0.0);
        scatter_mmd_grads(mw, bw, cw);
        scatter_mmd_grads(ml, bl, cl);
        for (std::size_t i = 0; i < n; ++i) {
            result.lg.grad[2 * i] += cfg.lambda * cw[i] * beta;
            result.lg.grad[2 * i + 1] += cfg.lambda * cl[i] * beta;
        }
    }
    result.lg.loss += cfg.lambda * result.diag.mmd_term;
    return result;
}

}  // namespace crm
