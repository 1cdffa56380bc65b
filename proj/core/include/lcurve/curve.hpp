#pragma once

#include <vector>

#include "lcurve/spectrum.hpp"
#include "lcurve/target.hpp"

namespace lcurve {

struct CurvePoint {
    double eta = 0.0;
    double err_ek = 0.0;
    double err_sl = 0.0;
    double c_over_sigma2 = 0.0;
    bool trusted = true;
    std::vector<double> per_degree; // r_l including the sub-leading term
};

double c_constant(const Spectrum& sp, double eta);

enum class ResidualOrder { ek, ek_sl };

std::vector<double> predict_mean_residual(const Spectrum& sp, double eta, ResidualOrder order = ResidualOrder::ek_sl);

CurvePoint daee(const Spectrum& sp, const SpectralTarget& tgt, double eta);

// Error floor from modes the spectrum cannot learn.
double unlearnable_floor(const Spectrum& sp, const SpectralTarget& tgt);

std::vector<CurvePoint> learning_curve(const Spectrum& sp, const SpectralTarget& tgt, const std::vector<double>& etas,
                                       double trust_threshold = 0.2);

} // namespace lcurve
