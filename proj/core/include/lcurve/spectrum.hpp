#pragma once

#include <cstdint>
#include <vector>

#include "lcurve/kernel.hpp"

namespace lcurve {

struct Spectrum {
    int d = 2;
    std::vector<double> lambda; // per-m eigenvalue of degree l
    std::vector<double> deg;
    double sigma2 = 0.0; // observation noise plus sigma_r^2
    double kxx = 0.0;

    int lmax() const { return static_cast<int>(lambda.size()) - 1; }
};

// lmax < 0 selects lmax = r.
Spectrum eigenvalues(const TrimmedKernel& tk, double sigma2_extra, int lmax = -1);

// Untrimmed series: r = Q.
Spectrum eigenvalues(const KernelSeries& ks, double sigma2_extra, int lmax = -1);

// Trace identity and universal bound; throws InvariantViolation.
void check_spectrum(const Spectrum& sp, double trimmed_trace, double rel_tol = 1e-8);

// No-bias two-layer ReLU network: Sigma^1 = s0 t, output multiplier s1.
Spectrum closed_form_2layer(int d, double s0, double s1, KernelKind kind, int lmax);

struct EigenCluster {
    double mean = 0.0;
    int multiplicity = 0;
};

// Dense eigensolve of the Gram matrix K(x_i.x_j)/M, clustered by relative gap.
std::vector<EigenCluster> gram_eigensolve_check(const KernelSeries& ks, int d, int M, std::uint64_t seed,
                                                int max_clusters = 8);

} // namespace lcurve
