#include "lcurve/target.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "lcurve/errors.hpp"
#include "lcurve/specfun.hpp"

namespace lcurve {

double RidgeProfile::operator()(double t, int d) const
{
    if (name == "abs") return scale * std::abs(std::sqrt(static_cast<double>(d)) * t);
    if (name == "linear") return scale * t;
    if (name == "legendre") {
        std::vector<double> p(static_cast<std::size_t>(degree) + 1);
        legendre_all(d, degree, t, p);
        return scale * p.back();
    }
    if (name == "table") {
        if (t <= this->t.front()) return scale * h.front();
        if (t >= this->t.back()) return scale * h.back();
        const auto it = std::upper_bound(this->t.begin(), this->t.end(), t);
        const auto i = static_cast<std::size_t>(it - this->t.begin());
        const double u = (t - this->t[i - 1]) / (this->t[i] - this->t[i - 1]);
        return scale * ((1.0 - u) * h[i - 1] + u * h[i]);
    }
    throw ConfigError("unknown ridge profile '" + name + "'");
}

RidgeProfile ridge_profile(const std::string& spec)
{
    RidgeProfile p;
    if (spec == "abs" || spec == "linear") {
        p.name = spec;
        return p;
    }
    if (spec.rfind("legendre:", 0) == 0) {
        p.name = "legendre";
        p.degree = std::stoi(spec.substr(9));
        if (p.degree < 0) throw ConfigError("legendre profile needs a degree >= 0");
        return p;
    }
    throw ConfigError("unknown ridge profile '" + spec + "'");
}

double SpectralTarget::power() const { return std::accumulate(w2.begin(), w2.end(), 0.0) + tail2; }

SpectralTarget spectral_target(int d, std::vector<double> w2, double tail2)
{
    if (d < 2) throw ConfigError("spectral_target: d must be >= 2");
    for (double v : w2)
        if (!(v >= 0.0) || !std::isfinite(v)) throw ConfigError("spectral_target: weights must be finite and >= 0");
    if (!(tail2 >= 0.0)) throw ConfigError("spectral_target: tail power must be >= 0");
    SpectralTarget t;
    t.d = d;
    t.w2 = std::move(w2);
    t.tail2 = tail2;
    return t;
}

SpectralTarget make_zonal(int d, const std::vector<double>& w2, std::uint64_t seed)
{
    SpectralTarget t = spectral_target(d, w2);
    ZonalTarget z;
    z.d = d;
    const int n = static_cast<int>(w2.size());
    const Eigen::MatrixXd w = sphere_sample(d, std::max(n, 1), seed);
    for (int l = 0; l < n; ++l) {
        if (w2[static_cast<std::size_t>(l)] == 0.0) continue;
        z.anchors.push_back({w.row(l).transpose(), l, std::sqrt(w2[static_cast<std::size_t>(l)] / degeneracy_real(d, l))});
    }
    t.realization = std::move(z);
    return t;
}

RidgeTarget make_ridge(int d, const std::string& profile, std::uint64_t seed)
{
    RidgeTarget rt;
    rt.d = d;
    rt.w = sphere_sample(d, 1, seed).row(0).transpose();
    rt.h = ridge_profile(profile);
    return rt;
}

SpectralTarget project_ridge(const RidgeTarget& rt, int lmax, int nodes)
{
    if (lmax < 0) throw ConfigError("project_ridge: lmax must be >= 0");
    const Quadrature1D q = sphere_quadrature(rt.d, nodes);
    std::vector<double> hl(static_cast<std::size_t>(lmax) + 1, 0.0);
    std::vector<double> p(static_cast<std::size_t>(lmax) + 1);
    double total = 0.0;
    for (std::size_t i = 0; i < q.nodes.size(); ++i) {
        const double t = q.nodes[i];
        const double h = rt.h(t, rt.d);
        legendre_all(rt.d, lmax, t, p);
        for (int l = 0; l <= lmax; ++l) hl[static_cast<std::size_t>(l)] += q.weights[i] * h * p[static_cast<std::size_t>(l)];
        total += q.weights[i] * h * h;
    }
    std::vector<double> w2(hl.size());
    double captured = 0.0;
    for (int l = 0; l <= lmax; ++l) {
        w2[static_cast<std::size_t>(l)] = degeneracy_real(rt.d, l) * hl[static_cast<std::size_t>(l)] * hl[static_cast<std::size_t>(l)];
        captured += w2[static_cast<std::size_t>(l)];
    }
    double tail = total - captured;
    if (tail < -1e-8 * std::max(total, 1.0))
        throw NumericError("project_ridge: negative tail power, quadrature is not resolving the profile");
    tail = std::max(tail, 0.0);
    SpectralTarget t = spectral_target(rt.d, std::move(w2), tail);
    t.realization = rt;
    return t;
}

double eval_target(const SpectralTarget& tgt, const Eigen::Ref<const Eigen::VectorXd>& x)
{
    if (const auto* z = std::get_if<ZonalTarget>(&tgt.realization)) {
        double v = 0.0;
        std::vector<double> p;
        for (const auto& a : z->anchors) {
            p.resize(static_cast<std::size_t>(a.l) + 1);
            legendre_all(z->d, a.l, std::clamp(a.w.dot(x), -1.0, 1.0), p);
            v += a.alpha * degeneracy_real(z->d, a.l) * p.back();
        }
        return v;
    }
    if (const auto* r = std::get_if<RidgeTarget>(&tgt.realization)) {
        return r->h(std::clamp(r->w.dot(x), -1.0, 1.0), r->d);
    }
    throw ConfigError("eval_target: no realization attached");
}

Eigen::VectorXd eval_target_rows(const SpectralTarget& tgt, const Eigen::MatrixXd& x)
{
    Eigen::VectorXd y(x.rows());
    for (Eigen::Index i = 0; i < x.rows(); ++i) y[i] = eval_target(tgt, x.row(i).transpose());
    return y;
}

} // namespace lcurve
