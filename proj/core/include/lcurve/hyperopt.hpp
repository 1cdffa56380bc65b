#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lcurve/curve.hpp"
#include "lcurve/kernel.hpp"
#include "lcurve/oracle.hpp"

namespace lcurve {

// Architecture with free standard deviations (sigma_w1, sigma_b1, ..., sigma_w{L+1}, sigma_b{L+1}).
struct ArchTemplate {
    int depth = 1;
    Activation activation = Activation::relu;
    KernelKind kind = KernelKind::ntk;
    int d = 10;
    VarianceConvention convention = VarianceConvention::fan_in;
    double width = 1.0;
    int Q = 32;

    int parameters() const { return 2 * (depth + 1); }
    NetworkArch arch(const std::vector<double>& sigma) const;
};

struct HyperBox {
    std::vector<double> lower, upper, reference;

    void validate() const;
    std::vector<double> project(std::vector<double> x) const;
};

// Every std-dev of the reference scaled into [lo, hi] * reference.
HyperBox relative_box(const std::vector<double>& reference, double lo, double hi);

struct HyperEvaluation {
    std::vector<double> sigma;
    double predicted_loss = 0.0;
    double err_ek = 0.0;
    double sigma_r2 = 0.0;
    double c_over_sigma2 = 0.0;
    std::vector<double> lambda;
};

HyperEvaluation predicted_loss(const ArchTemplate& tmpl, const std::vector<double>& sigma, const SpectralTarget& tgt,
                               int N, int r, double sigma2_extra = 0.0);

struct OptimizeOptions {
    int restarts = 8;
    std::uint64_t seed = 1;
    int max_evals = 400; // per start
    double tol = 1e-7;
    int threads = 1;
};

struct OptimizeResult {
    HyperEvaluation best;
    HyperEvaluation reference;
    std::vector<HyperEvaluation> trace;
    int failed_starts = 0;
};

OptimizeResult optimize(const ArchTemplate& tmpl, const HyperBox& box, const SpectralTarget& tgt, int N, int r,
                        const OptimizeOptions& opt = {});

// Generic box-projected Nelder-Mead, exposed for testing.
struct SimplexResult {
    std::vector<double> x;
    double f = 0.0;
    int evals = 0;
};

SimplexResult nelder_mead(const std::function<double(const std::vector<double>&)>& f, std::vector<double> x0,
                          const HyperBox& box, int max_evals, double tol);

struct GprCheck {
    double mean = 0.0;
    double std_error = 0.0;
};

// Noiseless GPR with the untrimmed kernel at sigma.
GprCheck oracle_loss(const ArchTemplate& tmpl, const std::vector<double>& sigma, const SpectralTarget& tgt, int N,
                     const McOptions& opt);

struct RankedEvaluation {
    std::string label;
    HyperEvaluation eval;
    std::optional<GprCheck> gpr;
};

struct RandomSearchOptions {
    int count = 21;
    std::uint64_t seed = 1;
    std::optional<McOptions> oracle;
};

// Ranked best first, by oracle loss when available, else by predicted loss.
std::vector<RankedEvaluation> random_search_baseline(const ArchTemplate& tmpl, const HyperBox& box,
                                                     const SpectralTarget& tgt, int N, int r,
                                                     const RandomSearchOptions& opt);

// Worst / Median / Best rows of a ranked list.
std::vector<RankedEvaluation> summary_rows(const std::vector<RankedEvaluation>& ranked);

} // namespace lcurve
