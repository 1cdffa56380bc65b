#include "lcurve/specfun.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>

#include <Eigen/Eigenvalues>

#include "lcurve/errors.hpp"

namespace lcurve {

void legendre_all(int d, int lmax, double t, std::span<double> out)
{
    out[0] = 1.0;
    if (lmax == 0) return;
    out[1] = t;
    for (int l = 1; l < lmax; ++l) {
        out[l + 1] = ((2.0 * l + d - 2) * t * out[l] - l * out[l - 1]) / (l + d - 2);
    }
}

double legendre_eval(const LegendreBasis& basis, int l, double t)
{
    if (basis.d < 2) throw ConfigError("legendre_eval: d must be >= 2");
    if (l < 0 || l > basis.lmax) throw ConfigError("legendre_eval: degree " + std::to_string(l) + " outside [0, lmax]");
    if (!(std::abs(t) <= 1.0)) throw std::domain_error("legendre_eval: |t| > 1");
    std::vector<double> p(static_cast<std::size_t>(l) + 1);
    legendre_all(basis.d, l, t, p);
    return p[static_cast<std::size_t>(l)];
}

namespace {

using u128 = unsigned __int128;

// C(n, k) with overflow detection on every step.
u128 checked_binomial(std::int64_t n, std::int64_t k)
{
    if (k < 0 || k > n) return 0;
    if (k > n - k) k = n - k;
    u128 c = 1;
    for (std::int64_t i = 1; i <= k; ++i) {
        u128 num;
        if (__builtin_mul_overflow(c, static_cast<u128>(n - k + i), &num)) {
            throw std::overflow_error("degeneracy: binomial overflow");
        }
        c = num / static_cast<u128>(i);
    }
    return c;
}

} // namespace

std::uint64_t degeneracy(int d, int l)
{
    if (d < 2 || l < 0) throw ConfigError("degeneracy: need d >= 2 and l >= 0");
    if (l == 0) return 1;
    if (l == 1) return static_cast<std::uint64_t>(d);
    // harmonic polynomials of degree l = all homogeneous of degree l minus r^2 * degree l-2
    const u128 a = checked_binomial(l + d - 1, l);
    const u128 b = checked_binomial(l + d - 3, l - 2);
    const u128 v = a - b;
    if (v > static_cast<u128>(UINT64_MAX)) throw std::overflow_error("degeneracy: value exceeds 64 bits");
    return static_cast<std::uint64_t>(v);
}

double log_degeneracy(int d, int l)
{
    if (d < 2 || l < 0) throw ConfigError("log_degeneracy: need d >= 2 and l >= 0");
    if (l == 0) return 0.0;
    if (d == 2) return std::log(2.0);
    return std::log(2.0 * l + d - 2) - std::log(static_cast<double>(l + d - 2)) + std::lgamma(l + d - 1.0) -
           std::lgamma(l + 1.0) - std::lgamma(d - 1.0);
}

double degeneracy_real(int d, int l)
{
    try {
        return static_cast<double>(degeneracy(d, l));
    } catch (const std::overflow_error&) {
        return std::exp(log_degeneracy(d, l));
    }
}

Quadrature1D sphere_quadrature(int d, int n)
{
    if (d < 2) throw ConfigError("sphere_quadrature: d must be >= 2");
    if (n < 1) throw ConfigError("sphere_quadrature: need at least one node");
    Quadrature1D q;
    q.exact_degree = 2 * n - 1;
    q.nodes.resize(static_cast<std::size_t>(n));
    q.weights.resize(static_cast<std::size_t>(n));
    if (n == 1) {
        q.nodes[0] = 0.0;
        q.weights[0] = 1.0;
        return q;
    }
    // Gauss-Gegenbauer via Golub-Welsch: nodes from the Jacobi matrix, weights from the
    // Christoffel function of the orthonormal recurrence.
    const double lam = (d - 2) / 2.0;
    std::vector<double> beta(static_cast<std::size_t>(n));
    beta[0] = 0.0;
    beta[1] = 1.0 / (2.0 * (lam + 1.0));
    for (int k = 2; k < n; ++k) {
        beta[static_cast<std::size_t>(k)] = k * (k + 2.0 * lam - 1.0) / (4.0 * (k + lam) * (k + lam - 1.0));
    }
    Eigen::VectorXd diag = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd sub(n - 1);
    for (int k = 1; k < n; ++k) sub[k - 1] = std::sqrt(beta[static_cast<std::size_t>(k)]);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    es.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw NumericError("sphere_quadrature: tridiagonal eigensolve failed");
    const Eigen::VectorXd& t = es.eigenvalues();

    for (int i = 0; i < n; ++i) {
        // symmetrize: the rule is exactly symmetric about 0
        const double ti = 0.5 * (t[i] - t[n - 1 - i]);
        double pm = 0.0, p = 1.0, s = 1.0;
        bool finite = true;
        for (int k = 1; k < n; ++k) {
            const double bk = std::sqrt(beta[static_cast<std::size_t>(k)]);
            const double bkm = k > 1 ? std::sqrt(beta[static_cast<std::size_t>(k - 1)]) : 0.0;
            const double pn = (ti * p - bkm * pm) / bk;
            pm = p;
            p = pn;
            s += p * p;
            if (!std::isfinite(s)) {
                finite = false;
                break;
            }
        }
        q.nodes[static_cast<std::size_t>(i)] = ti;
        q.weights[static_cast<std::size_t>(i)] = finite ? 1.0 / s : 0.0;
    }
    return q;
}

Eigen::MatrixXd sphere_sample(int d, int n, std::uint64_t seed)
{
    if (d < 2 || n < 0) throw ConfigError("sphere_sample: need d >= 2 and n >= 0");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::MatrixXd x(n, d);
    for (int i = 0; i < n; ++i) {
        double norm2 = 0.0;
        do {
            for (int j = 0; j < d; ++j) x(i, j) = normal(rng);
            norm2 = x.row(i).squaredNorm();
        } while (norm2 == 0.0);
        x.row(i) /= std::sqrt(norm2);
    }
    return x;
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index)
{
    std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

OverlapMoment overlap_moment(int d, int p)
{
    if (d < 2 || p < 0) throw ConfigError("overlap_moment: need d >= 2 and p >= 0");
    OverlapMoment m;
    if (p % 2 == 1) return m;
    // <t^{2k}> = prod_{j<k} (2j+1)/(d+2j)
    double v = 1.0;
    for (int j = 0; j < p / 2; ++j) v *= (2.0 * j + 1.0) / (d + 2.0 * j);
    m.exact = v;
    if (p >= 2 && d > 3) {
        const double n = p, a = d - 3.0;
        const double log_peak = 0.5 * n * std::log(n / (n + a)) + 0.5 * a * std::log(a / (n + a));
        m.saddle = std::sqrt(2.0) * a / (n + a) * std::exp(log_peak);
        if (n < a) m.saddle_printed = std::exp(log_peak) / std::sqrt(1.0 - (n / a) * (n / a));
    }
    return m;
}

} // namespace lcurve
