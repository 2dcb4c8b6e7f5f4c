#pragma once

#include <vector>

namespace crm {

// Empirical sample of scalar values (rewards or representation coordinates).
using Sample = std::vector<double>;

enum class BandwidthMode { Fixed, MedianHeuristic };
enum class MmdEstimator { Biased, Unbiased };

struct KernelSpec {
    double bandwidth = 1.0;  // sigma_k; used directly when mode == Fixed
    BandwidthMode mode = BandwidthMode::Fixed;
};

// Resolves the kernel bandwidth for a pooled set of values: the fixed sigma,
// or the median of all pairwise absolute differences with a floor of 1e-6.
// The resolved bandwidth is treated as a constant during differentiation.
double resolve_bandwidth(const KernelSpec& spec, const std::vector<double>& pooled);

// exp(-(a-b)^2 / (2 sigma^2)). Requires a resolved (fixed) bandwidth.
double gaussian_kernel(double a, double b, const KernelSpec& spec);

// V-statistic estimator of squared MMD; always >= 0. |x| >= 1, |y| >= 1.
double mmd2_biased(const Sample& x, const Sample& y, const KernelSpec& spec);

// U-statistic estimator; may be slightly negative. |x| >= 2, |y| >= 2.
double mmd2_unbiased(const Sample& x, const Sample& y, const KernelSpec& spec);

struct Mmd2WithGrad {
    double value = 0.0;
    std::vector<double> grad_x;
    std::vector<double> grad_y;
};

Mmd2WithGrad mmd2_biased_grad(const Sample& x, const Sample& y, const KernelSpec& spec);
Mmd2WithGrad mmd2_unbiased_grad(const Sample& x, const Sample& y, const KernelSpec& spec);

// Sum of squared MMD over unordered pairs of usable bins. Bins failing the
// chosen estimator's size precondition (>= 1 biased, >= 2 unbiased) are
// skipped and counted. With fewer than two usable bins the regularizer is
// vacuous: value 0 with the flag set.
struct PairwiseBinMmdResult {
    double value = 0.0;
    bool vacuous = false;
    int usable_bins = 0;
    int skipped_bins = 0;
    double resolved_bandwidth = 0.0;
    std::vector<std::vector<double>> grads;  // per bin, per sample; empty unless requested
};

PairwiseBinMmdResult pairwise_bin_mmd(const std::vector<Sample>& samples_by_bin,
                                      const KernelSpec& spec,
                                      MmdEstimator estimator,
                                      bool with_grad = false);

}  // namespace crm
