#pragma once

#include <vector>

namespace crm {

enum class BinMode { Binary, Categorical, Quantile, UniformWidth };

// Frozen discretization of a spurious factor Z. Fit once on the training
// split; assignment is pure and deterministic afterwards.
struct BinSpec {
    BinMode mode = BinMode::Quantile;
    int bin_count = 0;               // M actually in effect (after tie collapsing)
    std::vector<double> edges;       // interior edges, strictly increasing (continuous modes)
    std::vector<double> categories;  // observed values, first-appearance order (binary/categorical)
    bool allow_overflow = false;     // categorical: route unseen values to a trailing extra bin
};

// Continuous modes (quantile/uniform-width) require requested_bins >= 2 and at
// least two distinct values. Heavy ties may collapse quantile edges, so
// bin_count can come out lower than requested.
BinSpec fit_bins(const std::vector<double>& z_values,
                 BinMode mode,
                 int requested_bins,
                 bool allow_overflow = false);

// Half-open interval rule [edge_i, edge_{i+1}); a value exactly on an interior
// edge goes to the higher bin; out-of-range values clamp to the end bins.
// Categorical/binary: exact match against the fitted categories.
int assign(const BinSpec& spec, double z);

std::vector<int> assign_all(const BinSpec& spec, const std::vector<double>& z_values);

}  // namespace crm
