#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace lcurve {

struct ZonalAnchor {
    Eigen::VectorXd w;
    int l = 0;
    double alpha = 0.0;
};

// g(x) = sum_a alpha_a deg(l_a) P_{l_a}(w_a . x)
struct ZonalTarget {
    int d = 2;
    std::vector<ZonalAnchor> anchors;
};

// Profile h(t) of a ridge function g(x) = h(w . x).
struct RidgeProfile {
    std::string name; // "abs", "linear", "legendre", "table"
    int degree = 0;   // for "legendre"
    double scale = 1.0;
    std::vector<double> t, h; // for "table": piecewise-linear on sorted t

    double operator()(double t, int d) const;
};

RidgeProfile ridge_profile(const std::string& spec);

struct RidgeTarget {
    int d = 2;
    Eigen::VectorXd w;
    RidgeProfile h;
};

struct SpectralTarget {
    int d = 2;
    std::vector<double> w2;
    double tail2 = 0.0;
    std::variant<std::monostate, ZonalTarget, RidgeTarget> realization;

    double power() const;
    bool has_realization() const { return realization.index() != 0; }
};

SpectralTarget spectral_target(int d, std::vector<double> w2, double tail2 = 0.0);

SpectralTarget make_zonal(int d, const std::vector<double>& w2, std::uint64_t seed);

RidgeTarget make_ridge(int d, const std::string& profile, std::uint64_t seed);

SpectralTarget project_ridge(const RidgeTarget& rt, int lmax, int nodes = 2048);

double eval_target(const SpectralTarget& tgt, const Eigen::Ref<const Eigen::VectorXd>& x);

// Row-wise evaluation on an n x d matrix.
Eigen::VectorXd eval_target_rows(const SpectralTarget& tgt, const Eigen::MatrixXd& x);

} // namespace lcurve
