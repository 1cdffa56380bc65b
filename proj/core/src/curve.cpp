#include "lcurve/curve.hpp"

#include <cmath>

#include "lcurve/errors.hpp"

namespace lcurve {

namespace {

void require_noise(const Spectrum& sp, double eta)
{
    if (!(eta > 0.0)) throw ConfigError("learning curve: eta must be > 0");
    if (!(sp.sigma2 > 0.0)) throw ConfigError("learning curve: total noise sigma^2 must be > 0");
}

} // namespace

double c_constant(const Spectrum& sp, double eta)
{
    require_noise(sp, eta);
    double c = 0.0;
    for (std::size_t l = 0; l < sp.lambda.size(); ++l) {
        const double lam = sp.lambda[l];
        if (lam == 0.0) continue;
        c += sp.deg[l] * lam / (1.0 + eta * lam / sp.sigma2);
    }
    return c;
}

std::vector<double> predict_mean_residual(const Spectrum& sp, double eta, ResidualOrder order)
{
    require_noise(sp, eta);
    const double n = sp.sigma2 / eta;
    const double c = order == ResidualOrder::ek_sl ? c_constant(sp, eta) : 0.0;
    std::vector<double> r(sp.lambda.size(), 1.0);
    for (std::size_t l = 0; l < sp.lambda.size(); ++l) {
        const double lam = sp.lambda[l];
        if (lam == 0.0) continue;
        const double den = lam + n;
        r[l] = n / den;
        if (order == ResidualOrder::ek_sl) r[l] += lam * c / eta / (den * den);
    }
    return r;
}

double unlearnable_floor(const Spectrum& sp, const SpectralTarget& tgt)
{
    double f = tgt.tail2;
    for (std::size_t l = 0; l < tgt.w2.size(); ++l)
        if (l >= sp.lambda.size() || sp.lambda[l] == 0.0) f += tgt.w2[l];
    return f;
}

CurvePoint daee(const Spectrum& sp, const SpectralTarget& tgt, double eta)
{
    CurvePoint p;
    p.eta = eta;
    const auto r_ek = predict_mean_residual(sp, eta, ResidualOrder::ek);
    p.per_degree = predict_mean_residual(sp, eta, ResidualOrder::ek_sl);
    p.err_ek = tgt.tail2;
    p.err_sl = tgt.tail2;
    for (std::size_t l = 0; l < tgt.w2.size(); ++l) {
        const double w2 = tgt.w2[l];
        if (l >= sp.lambda.size()) {
            p.err_ek += w2;
            p.err_sl += w2;
            continue;
        }
        p.err_ek += w2 * r_ek[l] * r_ek[l];
        p.err_sl += w2 * p.per_degree[l] * p.per_degree[l];
    }
    p.c_over_sigma2 = c_constant(sp, eta) / sp.sigma2;
    return p;
}

std::vector<CurvePoint> learning_curve(const Spectrum& sp, const SpectralTarget& tgt, const std::vector<double>& etas,
                                       double trust_threshold)
{
    for (std::size_t i = 1; i < etas.size(); ++i)
        if (!(etas[i] > etas[i - 1])) throw ConfigError("learning_curve: eta grid must be strictly increasing");
    std::vector<CurvePoint> out;
    out.reserve(etas.size());
    for (double eta : etas) {
        CurvePoint p = daee(sp, tgt, eta);
        p.trusted = p.c_over_sigma2 <= trust_threshold;
        out.push_back(std::move(p));
    }
    return out;
}

} // namespace lcurve
