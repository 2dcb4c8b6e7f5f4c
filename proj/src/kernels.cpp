#include "crm/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "crm/error.hpp"

namespace crm {

namespace {

constexpr double kBandwidthFloor = 1e-6;

void require_finite(const Sample& s, const char* name) {
    for (double v : s) {
        if (!std::isfinite(v)) {
            throw ContractViolation(std::string("kernels: non-finite value in ") + name);
        }
    }
}

double kernel(double a, double b, double sigma) {
    const double d = a - b;
    return std::exp(-d * d / (2.0 * sigma * sigma));
}

// d/da exp(-(a-b)^2 / (2 sigma^2))
double kernel_d1(double a, double b, double sigma) {
    const double d = a - b;
    return -(d / (sigma * sigma)) * kernel(a, b, sigma);
}

double resolved(const KernelSpec& spec, const Sample& x, const Sample& y) {
    if (spec.mode == BandwidthMode::Fixed) {
        if (!(spec.bandwidth > 0.0)) {
            throw ContractViolation("kernels: fixed bandwidth must be > 0");
        }
        return spec.bandwidth;
    }
    Sample pooled;
    pooled.reserve(x.size() + y.size());
    pooled.insert(pooled.end(), x.begin(), x.end());
    pooled.insert(pooled.end(), y.begin(), y.end());
    return resolve_bandwidth(spec, pooled);
}

}  // namespace

double resolve_bandwidth(const KernelSpec& spec, const std::vector<double>& pooled) {
    if (spec.mode == BandwidthMode::Fixed) {
        if (!(spec.bandwidth > 0.0)) {
            throw ContractViolation("kernels: fixed bandwidth must be > 0");
        }
        return spec.bandwidth;
    }
    require_finite(pooled, "bandwidth pool");
    const std::size_t n = pooled.size();
    if (n < 2) return kBandwidthFloor;
    std::vector<double> diffs;
    diffs.reserve(n * (n - 1) / 2);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            diffs.push_back(std::abs(pooled[i] - pooled[j]));
        }
    }
    std::sort(diffs.begin(), diffs.end());
    const std::size_t m = diffs.size();
    const double median = (m % 2 == 1) ? diffs[m / 2] : 0.5 * (diffs[m / 2 - 1] + diffs[m / 2]);
    return std::max(median, kBandwidthFloor);
}

double gaussian_kernel(double a, double b, const KernelSpec& spec) {
    if (!std::isfinite(a) || !std::isfinite(b)) {
        throw ContractViolation("gaussian_kernel: non-finite input");
    }
    if (!(spec.bandwidth > 0.0)) {
        throw ContractViolation("gaussian_kernel: bandwidth must be resolved and > 0");
    }
    return kernel(a, b, spec.bandwidth);
}

double mmd2_biased(const Sample& x, const Sample& y, const KernelSpec& spec) {
    if (x.empty() || y.empty()) {
        throw ContractViolation("mmd2_biased: samples must be nonempty");
    }
    require_finite(x, "x");
    require_finite(y, "y");
    const double sigma = resolved(spec, x, y);
    const auto m = static_cast<double>(x.size());
    const auto n = static_cast<double>(y.size());
    double xx = 0.0, yy = 0.0, xy = 0.0;
    for (double a : x)
        for (double b : x) xx += kernel(a, b, sigma);
    for (double a : y)
        for (double b : y) yy += kernel(a, b, sigma);
    for (double a : x)
        for (double b : y) xy += kernel(a, b, sigma);
    const double v = xx / (m * m) + yy / (n * n) - 2.0 * xy / (m * n);
    return std::max(v, 0.0);  // clip tiny negative round-off
}

double mmd2_unbiased(const Sample& x, const Sample& y, const KernelSpec& spec) {
    if (x.size() < 2 || y.size() < 2) {
        throw ContractViolation("mmd2_unbiased: samples must have size >= 2");
    }
    require_finite(x, "x");
    require_finite(y, "y");
    const double sigma = resolved(spec, x, y);
    const auto m = static_cast<double>(x.size());
    const auto n = static_cast<double>(y.size());
    double xx = 0.0, yy = 0.0, xy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i)
        for (std::size_t j = 0; j < x.size(); ++j)
            if (i != j) xx += kernel(x[i], x[j], sigma);
    for (std::size_t i = 0; i < y.size(); ++i)
        for (std::size_t j = 0; j < y.size(); ++j)
            if (i != j) yy += kernel(y[i], y[j], sigma);
    for (double a : x)
        for (double b : y) xy += kernel(a, b, sigma);
    return xx / (m * (m - 1.0)) + yy / (n * (n - 1.0)) - 2.0 * xy / (m * n);
}

Mmd2WithGrad mmd2_biased_grad(const Sample& x, const Sample& y, const KernelSpec& spec) {
    Mmd2WithGrad out;
    out.value = mmd2_biased(x, y, spec);
    const double sigma = resolved(spec, x, y);
    const auto m = static_cast<double>(x.size());
    const auto n = static_cast<double>(y.size());
    out.grad_x.assign(x.size(), 0.0);
    out.grad_y.assign(y.size(), 0.0);
    for (std::size_t t = 0; t < x.size(); ++t) {
        double gx = 0.0;
        for (double b : x) gx += kernel_d1(x[t], b, sigma);
        double gxy = 0.0;
        for (double b : y) gxy += kernel_d1(x[t], b, sigma);
        out.grad_x[t] = 2.0 * gx / (m * m) - 2.0 * gxy / (m * n);
    }
    for (std::size_t t = 0; t < y.size(); ++t) {
        double gy = 0.0;
        for (double b : y) gy += kernel_d1(y[t], b, sigma);
        double gyx = 0.0;
        for (double a : x) gyx += kernel_d1(y[t], a, sigma);
        out.grad_y[t] = 2.0 * gy / (n * n) - 2.0 * gyx / (m * n);
    }
    return out;
}

Mmd2WithGrad mmd2_unbiased_grad(const Sample& x, const Sample& y, const KernelSpec& spec) {
    Mmd2WithGrad out;
    out.value = mmd2_unbiased(x, y, spec);
    const double sigma = resolved(spec, x, y);
    const auto m = static_cast<double>(x.size());
    const auto n = static_cast<double>(y.size());
    out.grad_x.assign(x.size(), 0.0);
    out.grad_y.assign(y.size(), 0.0);
    for (std::size_t t = 0; t < x.size(); ++t) {
        double gx = 0.0;
        for (std::size_t j = 0; j < x.size(); ++j)
            if (j != t) gx += kernel_d1(x[t], x[j], sigma);
        double gxy = 0.0;
        for (double b : y) gxy += kernel_d1(x[t], b, sigma);
        out.grad_x[t] = 2.0 * gx / (m * (m - 1.0)) - 2.0 * gxy / (m * n);
    }
    for (std::size_t t = 0; t < y.size(); ++t) {
        double gy = 0.0;
        for (std::size_t j = 0; j < y.size(); ++j)
            if (j != t) gy += kernel_d1(y[t], y[j], sigma);
        double gyx = 0.0;
        for (double a : x) gyx += kernel_d1(y[t], a, sigma);
        out.grad_y[t] = 2.0 * gy / (n * (n - 1.0)) - 2.0 * gyx / (m * n);
    }
    return out;
}

PairwiseBinMmdResult pairwise_bin_mmd(const std::vector<Sample>& samples_by_bin,
                                      const KernelSpec& spec,
                                      MmdEstimator estimator,
                                      bool with_grad) {
    PairwiseBinMmdResult result;
    const std::size_t min_size = estimator == MmdEstimator::Unbiased ? 2 : 1;
    std::vector<std::size_t> usable;
    Sample pooled;
    for (std::size_t b = 0; b < samples_by_bin.size(); ++b) {
        if (samples_by_bin[b].size() >= min_size) {
            usable.push_back(b);
            pooled.insert(pooled.end(), samples_by_bin[b].begin(), samples_by_bin[b].end());
        } else {
            ++result.skipped_bins;
        }
    }
    result.usable_bins = static_cast<int>(usable.size());
    if (with_grad) {
        result.grads.resize(samples_by_bin.size());
        for (std::size_t b = 0; b < samples_by_bin.size(); ++b) {
            result.grads[b].assign(samples_by_bin[b].size(), 0.0);
        }
    }
    if (usable.size() < 2) {
        result.vacuous = true;
        return result;
    }
    // One bandwidth for the whole pair sum, resolved over the pooled usable
    // samples, held constant during differentiation.
    const double sigma = resolve_bandwidth(spec, pooled);
    result.resolved_bandwidth = sigma;
    const KernelSpec fixed{sigma, BandwidthMode::Fixed};
    for (std::size_t pi = 0; pi < usable.size(); ++pi) {
        for (std::size_t qi = pi + 1; qi < usable.size(); ++qi) {
            const Sample& sp = samples_by_bin[usable[pi]];
            const Sample& sq = samples_by_bin[usable[qi]];
            if (with_grad) {
                const Mmd2WithGrad g = estimator == MmdEstimator::Biased
                                           ? mmd2_biased_grad(sp, sq, fixed)
                                           : mmd2_unbiased_grad(sp, sq, fixed);
                result.value += g.value;
                auto& gp = result.grads[usable[pi]];
                auto& gq = result.grads[usable[qi]];
                for (std::size_t i = 0; i < gp.size(); ++i) gp[i] += g.grad_x[i];
                for (std::size_t i = 0; i < gq.size(); ++i) gq[i] += g.grad_y[i];
            } else {
                result.value += estimator == MmdEstimator::Biased ? mmd2_biased(sp, sq, fixed)
                                                                  : mmd2_unbiased(sp, sq, fixed);
            }
        }
    }
    return result;
}

}  // namespace crm
