#pragma once

#include <vector>

#include "crm/binning.hpp"
#include "crm/kernels.hpp"
#include "crm/model.hpp"
#include "crm/numcore.hpp"

namespace crm {

// One labeled comparison. Features are whatever the model consumes (the
// trainer standardizes before batching); each response carries its own Z.
struct PreferencePair {
    ResponseFeatures chosen;
    ResponseFeatures rejected;
    double z_chosen = 0.0;
    double z_rejected = 0.0;
};

using PreferenceBatch = std::vector<PreferencePair>;

enum class CrmVariant { Unconditional, Conditional };

struct CrmConfig {
    double lambda = 0.0;
    CrmVariant variant = CrmVariant::Conditional;
    BinSpec bins;
    KernelSpec kernel;
    MmdEstimator estimator = MmdEstimator::Biased;
};

// P(w preferred over l) under Bradley-Terry, computed as sigma(r_w - r_l).
double bt_prob(double r_w, double r_l);

// Mean negative log-likelihood of the observed preferences.
LossGradient bt_nll(const RewardModel& m, const PreferenceBatch& batch);

struct CrmDiagnostics {
    double bt_term = 0.0;
    double mmd_term = 0.0;  // unweighted sum of squared MMDs
    bool mmd_vacuous = false;
    int usable_bins = 0;
    int skipped_bins = 0;
    std::vector<int> bin_counts_pooled;    // unconditional variant
    std::vector<int> bin_counts_chosen;    // conditional variant
    std::vector<int> bin_counts_rejected;  // conditional variant
    double bandwidth_pooled = 0.0;
    double bandwidth_chosen = 0.0;
    double bandwidth_rejected = 0.0;
};

struct CrmResult {
    LossGradient lg;
    CrmDiagnostics diag;
};

// bt_nll + lambda * pairwise-bin MMD over reward values. Unconditional: all
// 2n responses pooled and binned by Z. Conditional: the regularizer is applied
// within the chosen subset and within the rejected subset, then summed.
// With lambda == 0 the result is bit-identical to bt_nll.
CrmResult crm_objective(const RewardModel& m, const PreferenceBatch& batch, const CrmConfig& cfg);

// One DPO comparison: policy and reference log-probabilities for the
// preferred (w) and dispreferred (l) responses, plus per-response Z.
struct DpoPair {
    double policy_logp_w = 0.0;
    double policy_logp_l = 0.0;
    double ref_logp_w = 0.0;
    double ref_logp_l = 0.0;
    double z_w = 0.0;
    double z_l = 0.0;
};

// DPO loss with the same MMD regularizer applied to the implicit rewards
// beta * (logp_policy - logp_ref). The gradient is taken with respect to the
// policy log-probabilities, laid out [w0, l0, w1, l1, ...].
CrmResult causal_dpo_loss(const std::vector<DpoPair>& pairs, double beta, const CrmConfig& cfg);

}  // namespace crm
