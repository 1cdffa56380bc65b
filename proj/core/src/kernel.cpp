#include "lcurve/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

#include "lcurve/errors.hpp"

namespace lcurve {

namespace {

constexpr double pi = std::numbers::pi;

double kappa0(double rho) { return 1.0 - std::acos(rho) / pi; }
double kappa1(double rho) { return (std::sqrt(std::max(0.0, 1.0 - rho * rho)) + rho * (pi - std::acos(rho))) / pi; }

// Returns delta = s - s(0), and checks the normalized series stays inside [-1, 1].
Series centered(const Series& s, const char* who)
{
    double total = 0.0;
    for (double v : s.coeffs()) total += std::abs(v);
    if (total > 1.0 + 1e-9) {
        std::ostringstream msg;
        msg << who << ": normalized layer series reaches " << total << " > 1 on the sphere";
        throw NumericError(msg.str());
    }
    Series delta = s;
    delta[0] = 0.0;
    return delta;
}

// (1 - (s0 + delta)^2)^{-1/2} as a series in delta
Series inv_sqrt_one_minus_sq(int order, double s0)
{
    Series f(order);
    f[0] = 1.0 - s0 * s0;
    if (order >= 1) f[1] = -2.0 * s0;
    if (order >= 2) f[2] = -1.0;
    return pow(f, -0.5);
}

bool is_zero(const Series& s) { return s.support().empty(); }

} // namespace

void NetworkArch::validate() const
{
    if (depth < 1) throw ConfigError("NetworkArch: depth must be >= 1");
    const auto n = static_cast<std::size_t>(depth) + 1;
    if (sigma_w.size() != n || sigma_b.size() != n)
        throw ConfigError("NetworkArch: sigma_w and sigma_b need depth+1 entries");
    for (double v : sigma_w)
        if (!(v >= 0.0) || !std::isfinite(v)) throw ConfigError("NetworkArch: weight variances must be finite and >= 0");
    for (double v : sigma_b)
        if (!(v >= 0.0) || !std::isfinite(v)) throw ConfigError("NetworkArch: bias variances must be finite and >= 0");
}

NetworkArch make_arch(int depth, Activation act, KernelKind kind, const std::vector<double>& sigma_w2,
                      const std::vector<double>& sigma_b2, int d, VarianceConvention conv, double width)
{
    NetworkArch a;
    a.depth = depth;
    a.activation = act;
    a.kind = kind;
    a.sigma_w = sigma_w2;
    a.sigma_b = sigma_b2;
    a.validate();
    if (d < 2) throw ConfigError("make_arch: d must be >= 2");
    switch (conv) {
    case VarianceConvention::fan_in:
        a.sigma_w[0] /= d;
        break;
    case VarianceConvention::per_weight:
        if (!(width > 0.0)) throw ConfigError("make_arch: per_weight convention needs a positive width");
        for (std::size_t l = 1; l < a.sigma_w.size(); ++l) a.sigma_w[l] *= width;
        break;
    case VarianceConvention::effective:
        break;
    }
    return a;
}

KernelSeries user_series(int d, std::vector<double> b)
{
    if (d < 2) throw ConfigError("user_series: d must be >= 2");
    if (b.empty()) throw ConfigError("user_series: empty coefficient list");
    KernelSeries ks;
    ks.d = d;
    ks.Q = static_cast<int>(b.size()) - 1;
    ks.b = std::move(b);
    ks.kxx = std::accumulate(ks.b.begin(), ks.b.end(), 0.0);
    if (!(ks.kxx > 0.0) || !std::isfinite(ks.kxx)) throw ConfigError("user_series: K(x,x) must be finite and positive");
    for (std::size_t q = 0; q < ks.b.size(); ++q)
        if (ks.b[q] < 0.0) ks.diagnostics.push_back("negative coefficient b_" + std::to_string(q));
    return ks;
}

double TrimmedKernel::trimmed_diagonal() const
{
    return std::accumulate(base.b.begin(), base.b.begin() + r + 1, 0.0);
}

DualSeries relu_dual(const Series& c, double q)
{
    if (!(q > 0.0)) throw NumericError("relu_dual: layer variance must be positive");
    const int order = c.order();
    Series rho = c * (1.0 / q);
    const double rho0 = rho[0];
    Series delta = centered(rho, "relu_dual");
    if (is_zero(delta)) {
        const double r0 = std::clamp(rho0, -1.0, 1.0);
        return {Series::constant(order, 0.5 * q * kappa1(r0)), Series::constant(order, 0.5 * kappa0(r0))};
    }
    if (std::abs(rho0) >= 1.0) throw NumericError("relu_dual: correlation at t=0 is outside (-1, 1)");
    Series h = inv_sqrt_one_minus_sq(order, rho0);
    Series k0 = integrate(h) * (1.0 / pi) + kappa0(rho0);
    Series k1 = integrate(k0) + kappa1(rho0);
    return {compose(k1, delta) * (0.5 * q), compose(k0, delta) * 0.5};
}

DualSeries erf_dual(const Series& c, double q)
{
    if (!(q >= 0.0)) throw NumericError("erf_dual: layer variance must be >= 0");
    const int order = c.order();
    const double scale = 2.0 / (1.0 + 2.0 * q);
    Series s = c * scale;
    const double s0 = s[0];
    Series delta = centered(s, "erf_dual");
    if (is_zero(delta)) {
        return {Series::constant(order, 2.0 / pi * std::asin(s0)),
                Series::constant(order, 2.0 / pi * scale / std::sqrt(1.0 - s0 * s0))};
    }
    Series h = inv_sqrt_one_minus_sq(order, s0);
    Series a = integrate(h) + std::asin(s0);
    return {compose(a, delta) * (2.0 / pi), compose(h, delta) * (2.0 / pi * scale)};
}

namespace {

DualSeries apply_dual(Activation act, const Series& c, double q)
{
    switch (act) {
    case Activation::relu:
        return relu_dual(c, q);
    case Activation::erf:
        return erf_dual(c, q);
    case Activation::identity:
        return {c, Series::constant(c.order(), 1.0)};
    }
    throw ConfigError("unknown activation");
}

struct PointDual {
    double value;
    double derivative;
};

PointDual point_dual(Activation act, double c, double q)
{
    switch (act) {
    case Activation::relu: {
        if (!(q > 0.0)) throw NumericError("relu dual: layer variance must be positive");
        const double rho = std::clamp(c / q, -1.0, 1.0);
        return {0.5 * q * kappa1(rho), 0.5 * kappa0(rho)};
    }
    case Activation::erf: {
        const double a = 1.0 + 2.0 * q;
        return {2.0 / pi * std::asin(std::clamp(2.0 * c / a, -1.0, 1.0)),
                4.0 / pi / std::sqrt(std::max(a * a - 4.0 * c * c, 1e-300))};
    }
    case Activation::identity:
        return {c, 1.0};
    }
    throw ConfigError("unknown activation");
}

} // namespace

KernelSeries build_kernel_series(const NetworkArch& arch, int d, int Q)
{
    arch.validate();
    if (Q < 0) throw ConfigError("build_kernel_series: Q must be >= 0");
    if (d < 2) throw ConfigError("build_kernel_series: d must be >= 2");
    Series sigma(Q);
    sigma[0] = arch.sigma_b[0];
    if (Q >= 1) sigma[1] = arch.sigma_w[0];
    double q = arch.sigma_w[0] + arch.sigma_b[0];
    Series theta = sigma;
    for (int l = 1; l <= arch.depth; ++l) {
        const double sw = arch.sigma_w[static_cast<std::size_t>(l)];
        const double sb = arch.sigma_b[static_cast<std::size_t>(l)];
        DualSeries dual = apply_dual(arch.activation, sigma, q);
        Series next = dual.value * sw + sb;
        if (arch.kind == KernelKind::ntk) theta = next + mul(dual.derivative, theta) * sw;
        sigma = std::move(next);
        q = sw * point_dual(arch.activation, q, q).value + sb;
    }
    KernelSeries ks;
    ks.d = d;
    ks.Q = Q;
    ks.b = arch.kind == KernelKind::ntk ? theta.coeffs() : sigma.coeffs();
    ks.provenance = arch;
    ks.kxx = exact_diagonal(arch);
    if (!(ks.kxx > 0.0) || !std::isfinite(ks.kxx)) throw NumericError("build_kernel_series: K(x,x) not finite and positive");
    for (std::size_t k = 0; k < ks.b.size(); ++k) {
        if (ks.b[k] < -1e-14 * ks.kxx) {
            std::ostringstream msg;
            msg << "negative coefficient b_" << k << " = " << ks.b[k];
            ks.diagnostics.push_back(msg.str());
        }
    }
    return ks;
}

double eval_kernel(const KernelSeries& ks, double t)
{
    double v = 0.0;
    for (auto it = ks.b.rbegin(); it != ks.b.rend(); ++it) v = v * t + *it;
    return v;
}

double eval_kernel(const TrimmedKernel& tk, double t)
{
    double v = 0.0;
    for (int k = tk.r; k >= 0; --k) v = v * t + tk.base.b[static_cast<std::size_t>(k)];
    return v;
}

double eval_exact(const NetworkArch& arch, double t)
{
    double s = arch.sigma_w[0] * t + arch.sigma_b[0];
    double q = arch.sigma_w[0] + arch.sigma_b[0];
    double th = s;
    for (int l = 1; l <= arch.depth; ++l) {
        const double sw = arch.sigma_w[static_cast<std::size_t>(l)];
        const double sb = arch.sigma_b[static_cast<std::size_t>(l)];
        const PointDual pd = point_dual(arch.activation, s, q);
        const double next = sw * pd.value + sb;
        th = next + sw * pd.derivative * th;
        s = next;
        q = sw * point_dual(arch.activation, q, q).value + sb;
    }
    return arch.kind == KernelKind::ntk ? th : s;
}

double exact_diagonal(const NetworkArch& arch) { return eval_exact(arch, 1.0); }

TrimmedKernel trim(const KernelSeries& ks, int r)
{
    if (r < 0 || r > ks.Q) throw ConfigError("trim: r must lie in [0, Q]");
    TrimmedKernel tk;
    tk.base = ks;
    tk.r = r;
    double upper = 0.0;
    for (int k = ks.Q; k > r; --k) upper += ks.b[static_cast<std::size_t>(k)];
    double beyond = 0.0;
    if (ks.provenance) {
        const double all = std::accumulate(ks.b.begin(), ks.b.end(), 0.0);
        beyond = std::max(0.0, ks.kxx - all);
    }
    tk.sigma_r2 = upper + beyond;
    return tk;
}

double discrepancy_estimate(const TrimmedKernel& tk, int N)
{
    if (N < 1) throw ConfigError("discrepancy_estimate: N must be >= 1");
    return std::sqrt(static_cast<double>(N)) * std::pow(static_cast<double>(tk.base.d), -(tk.r + 1) / 2.0) / tk.base.kxx;
}

std::string to_string(Activation a)
{
    switch (a) {
    case Activation::relu:
        return "relu";
    case Activation::erf:
        return "erf";
    case Activation::identity:
        return "identity";
    }
    return "?";
}

std::string to_string(KernelKind k) { return k == KernelKind::ntk ? "ntk" : "nngp"; }

std::string to_string(VarianceConvention c)
{
    switch (c) {
    case VarianceConvention::fan_in:
        return "fan_in";
    case VarianceConvention::per_weight:
        return "per_weight";
    case VarianceConvention::effective:
        return "effective";
    }
    return "?";
}

Activation parse_activation(const std::string& s)
{
    if (s == "relu") return Activation::relu;
    if (s == "erf") return Activation::erf;
    if (s == "identity" || s == "linear") return Activation::identity;
    throw ConfigError("unknown activation '" + s + "'");
}

KernelKind parse_kernel_kind(const std::string& s)
{
    if (s == "ntk") return KernelKind::ntk;
    if (s == "nngp") return KernelKind::nngp;
    throw ConfigError("unknown kernel kind '" + s + "'");
}

VarianceConvention parse_convention(const std::string& s)
{
    if (s == "fan_in") return VarianceConvention::fan_in;
    if (s == "per_weight") return VarianceConvention::per_weight;
    if (s == "effective") return VarianceConvention::effective;
    throw ConfigError("unknown variance convention '" + s + "'");
}

} // namespace lcurve
