#pragma once

#include <optional>
#include <string>
#include <vector>

#include "lcurve/series.hpp"

namespace lcurve {

enum class Activation { relu, erf, identity };
enum class KernelKind { nngp, ntk };

// How user-facing variances map onto the effective layer multipliers below.
//   fan_in     : weights scaled by 1/sqrt(fan-in); input layer multiplier sigma_w^2/d,
//                hidden multipliers sigma_w^2, biases sigma_b^2.
//   per_weight : sigma_w^2 is the variance of each weight; input multiplier sigma_w^2,
//                hidden multipliers sigma_w^2 * width, biases sigma_b^2.
//   effective  : values are used as the multipliers directly.
enum class VarianceConvention { fan_in, per_weight, effective };

// Sigma^1(t) = sigma_w[0] t + sigma_b[0];
// Sigma^{l+1} = sigma_w[l] E[phi phi] + sigma_b[l];
// Theta^{l+1} = Sigma^{l+1} + sigma_w[l] E[phi' phi'] Theta^l.
struct NetworkArch {
    int depth = 1;
    Activation activation = Activation::relu;
    std::vector<double> sigma_w;
    std::vector<double> sigma_b;
    KernelKind kind = KernelKind::ntk;

    void validate() const;
};

NetworkArch make_arch(int depth, Activation act, KernelKind kind, const std::vector<double>& sigma_w2,
                      const std::vector<double>& sigma_b2, int d, VarianceConvention conv, double width = 1.0);

struct KernelSeries {
    int d = 2;
    int Q = 0;
    std::vector<double> b;
    std::optional<NetworkArch> provenance;
    // exact K(x,x); equals sum(b) for user-supplied series
    double kxx = 0.0;
    std::vector<std::string> diagnostics;
};

KernelSeries user_series(int d, std::vector<double> b);

struct TrimmedKernel {
    KernelSeries base;
    int r = 0;
    // sum_{q>r} b_q, including the part of the diagonal beyond the stored order
    double sigma_r2 = 0.0;

    double trimmed_diagonal() const;
};

KernelSeries build_kernel_series(const NetworkArch& arch, int d, int Q = 32);

double eval_kernel(const KernelSeries& ks, double t);
double eval_kernel(const TrimmedKernel& tk, double t);

// Closed-form layer composition evaluated pointwise (no truncation).
double eval_exact(const NetworkArch& arch, double t);
double exact_diagonal(const NetworkArch& arch);

TrimmedKernel trim(const KernelSeries& ks, int r);

double discrepancy_estimate(const TrimmedKernel& tk, int N);

// One layer of the dual-kernel map. c is the pre-activation covariance series and q its
// constant diagonal.
struct DualSeries {
    Series value;      // E[phi(u) phi(v)]
    Series derivative; // E[phi'(u) phi'(v)]
};

DualSeries relu_dual(const Series& c, double q);
DualSeries erf_dual(const Series& c, double q);

std::string to_string(Activation a);
std::string to_string(KernelKind k);
std::string to_string(VarianceConvention c);
Activation parse_activation(const std::string& s);
KernelKind parse_kernel_kind(const std::string& s);
VarianceConvention parse_convention(const std::string& s);

} // namespace lcurve
