#pragma once

#include <cstdint>
#include <vector>

#include "crm/numcore.hpp"
#include "crm/rng.hpp"

namespace crm {

using ResponseFeatures = std::vector<double>;

// Reward head architecture: input -> hidden (tanh) ... -> scalar (linear).
// Empty hidden list means a plain linear model.
struct ArchDescriptor {
    int input_dim = 0;
    std::vector<int> hidden;

    bool operator==(const ArchDescriptor&) const = default;
};

// Parameters are laid out layer-major, weights (out x in, row-major) before
// biases, per layer.
std::size_t param_count(const ArchDescriptor& arch);

// Weights i.i.d. uniform in [-1/sqrt(fan_in), +1/sqrt(fan_in)], biases 0.
ParamVector init_params(const ArchDescriptor& arch, Rng& rng);
ParamVector init_params(const ArchDescriptor& arch, std::uint64_t seed);

struct RewardModel {
    ArchDescriptor arch;
    ParamVector params;
};

double reward_forward(const RewardModel& m, const ResponseFeatures& t);

// d reward / d params. Appending to grad_out allows reuse of one buffer.
ParamVector reward_grad(const RewardModel& m, const ResponseFeatures& t);

// Forward pass that also fills grad_out (resized to param_count). Returns the reward.
double reward_forward_grad(const RewardModel& m, const ResponseFeatures& t, ParamVector& grad_out);

// beta * (logp_policy - logp_ref), the DPO implicit reward.
double dpo_implicit_reward(double logp_policy, double logp_ref, double beta);

// Per-feature affine map fit on the training split: (x - mean) / std.
// Constant features pass through centered (std floor substitutes 1).
struct Standardizer {
    std::vector<double> mean;
    std::vector<double> stddev;

    bool identity() const { return mean.empty(); }
    ResponseFeatures apply(const ResponseFeatures& x) const;
};

Standardizer fit_standardizer(const std::vector<const ResponseFeatures*>& rows);

// A reward model together with its input standardization; the unit most
// evaluation code consumes.
struct ScoredModel {
    RewardModel model;
    Standardizer standardizer;

    double score(const ResponseFeatures& raw) const;
};

}  // namespace crm
