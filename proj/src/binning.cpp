#include "crm/binning.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "crm/error.hpp"

namespace crm {

namespace {

void require_finite(double z) {
    if (!std::isfinite(z)) throw ContractViolation("binning: non-finite z value");
}

BinSpec fit_categorical(const std::vector<double>& z_values, BinMode mode, bool allow_overflow) {
    BinSpec spec;
    spec.mode = mode;
    spec.allow_overflow = allow_overflow;
    for (double z : z_values) {
        require_finite(z);
        if (std::find(spec.categories.begin(), spec.categories.end(), z) == spec.categories.end()) {
            spec.categories.push_back(z);
        }
    }
    if (mode == BinMode::Binary && spec.categories.size() > 2) {
        throw ContractViolation("fit_bins: binary mode saw " +
                                std::to_string(spec.categories.size()) + " distinct values");
    }
    spec.bin_count = static_cast<int>(spec.categories.size()) + (allow_overflow ? 1 : 0);
    return spec;
}

BinSpec fit_quantile(const std::vector<double>& z_values, int m) {
    std::vector<double> sorted = z_values;
    std::sort(sorted.begin(), sorted.end());
    if (sorted.front() == sorted.back()) {
        throw ContractViolation("fit_bins: all z values identical; quantile binning is degenerate");
    }
    BinSpec spec;
    spec.mode = BinMode::Quantile;
    const std::size_t n = sorted.size();
    for (int i = 1; i < m; ++i) {
        const std::size_t k = (static_cast<std::size_t>(i) * n) / static_cast<std::size_t>(m);
        if (k == 0 || k >= n) continue;
        double edge;
        if (sorted[k - 1] != sorted[k]) {
            edge = 0.5 * (sorted[k - 1] + sorted[k]);
        } else {
            // Tie group spans the intended edge: move it to the right end of
            // the tie group so equal values stay in one bin.
            std::size_t e = k;
            while (e + 1 < n && sorted[e + 1] == sorted[k]) ++e;
            if (e + 1 >= n) continue;
            edge = 0.5 * (sorted[e] + sorted[e + 1]);
        }
        if (spec.edges.empty() || edge > spec.edges.back()) {
            spec.edges.push_back(edge);
        }
    }
    spec.bin_count = static_cast<int>(spec.edges.size()) + 1;
    return spec;
}

BinSpec fit_uniform(const std::vector<double>& z_values, int m) {
    const auto [lo_it, hi_it] = std::minmax_element(z_values.begin(), z_values.end());
    const double lo = *lo_it, hi = *hi_it;
    if (lo == hi) {
        throw ContractViolation("fit_bins: all z values identical; uniform-width binning is degenerate");
    }
    BinSpec spec;
    spec.mode = BinMode::UniformWidth;
    const double width = (hi - lo) / static_cast<double>(m);
    for (int i = 1; i < m; ++i) {
        const double edge = lo + width * static_cast<double>(i);
        if (spec.edges.empty() || edge > spec.edges.back()) {
            spec.edges.push_back(edge);
        }
    }
    spec.bin_count = static_cast<int>(spec.edges.size()) + 1;
    return spec;
}

}  // namespace

BinSpec fit_bins(const std::vector<double>& z_values,
                 BinMode mode,
                 int requested_bins,
                 bool allow_overflow) {
    if (z_values.empty()) throw ContractViolation("fit_bins: empty z values");
    for (double z : z_values) require_finite(z);
    switch (mode) {
        case BinMode::Binary:
        case BinMode::Categorical:
            return fit_categorical(z_values, mode, allow_overflow);
        case BinMode::Quantile:
            if (requested_bins < 2) throw ContractViolation("fit_bins: quantile mode needs M >= 2");
            return fit_quantile(z_values, requested_bins);
        case BinMode::UniformWidth:
            if (requested_bins < 2) throw ContractViolation("fit_bins: uniform mode needs M >= 2");
            return fit_uniform(z_values, requested_bins);
    }
    throw ContractViolation("fit_bins: unknown mode");
}

int assign(const BinSpec& spec, double z) {
    require_finite(z);
    if (spec.mode == BinMode::Binary || spec.mode == BinMode::Categorical) {
        for (std::size_t i = 0; i < spec.categories.size(); ++i) {
            if (spec.categories[i] == z) return static_cast<int>(i);
        }
        if (spec.allow_overflow) return static_cast<int>(spec.categories.size());
        throw ContractViolation("assign: unknown category " + std::to_string(z) +
                                " and no overflow bin");
    }
    const auto it = std::upper_bound(spec.edges.begin(), spec.edges.end(), z);
    return static_cast<int>(it - spec.edges.begin());
}

std::vector<int> assign_all(const BinSpec& spec, const std::vector<double>& z_values) {
    std::vector<int> out;
    out.reserve(z_values.size());
    for (double z : z_values) out.push_back(assign(spec, z));
    return out;
}

}  // namespace crm
