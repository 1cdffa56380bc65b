#include "lcurve/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "lcurve/errors.hpp"
#include "lcurve/specfun.hpp"

namespace lcurve {

Spectrum eigenvalues(const TrimmedKernel& tk, double sigma2_extra, int lmax)
{
    const KernelSeries& ks = tk.base;
    const int r = tk.r;
    if (lmax < 0) lmax = r;
    if (!(sigma2_extra >= 0.0)) throw ConfigError("eigenvalues: noise must be >= 0");
    const double d = ks.d;
    const double pre = std::lgamma(d / 2.0) - 0.5 * std::log(std::numbers::pi);
    Spectrum sp;
    sp.d = ks.d;
    sp.kxx = ks.kxx;
    sp.sigma2 = sigma2_extra + tk.sigma_r2;
    sp.lambda.assign(static_cast<std::size_t>(lmax) + 1, 0.0);
    sp.deg.resize(static_cast<std::size_t>(lmax) + 1);
    for (int l = 0; l <= lmax; ++l) {
        sp.deg[static_cast<std::size_t>(l)] = degeneracy_real(ks.d, l);
        if (l > r) continue;
        double lam = 0.0;
        for (int s = 0; 2 * s + l <= r; ++s) {
            const int q = 2 * s + l;
            const double bq = ks.b[static_cast<std::size_t>(q)];
            if (bq == 0.0) continue;
            const double lt = pre - l * std::numbers::ln2 + std::lgamma(q + 1.0) - std::lgamma(2.0 * s + 1.0) +
                              std::lgamma(s + 0.5) - std::lgamma(s + l + d / 2.0);
            lam += bq * std::exp(lt);
        }
        if (lam < 0.0) {
            std::ostringstream msg;
            msg << "eigenvalues: negative lambda_" << l << " = " << lam;
            throw NumericError(msg.str());
        }
        sp.lambda[static_cast<std::size_t>(l)] = lam;
    }
    double trace = std::numeric_limits<double>::quiet_NaN();
    if (lmax >= r) trace = tk.trimmed_diagonal();
    check_spectrum(sp, trace);
    return sp;
}

Spectrum eigenvalues(const KernelSeries& ks, double sigma2_extra, int lmax)
{
    return eigenvalues(trim(ks, ks.Q), sigma2_extra, lmax);
}

void check_spectrum(const Spectrum& sp, double trimmed_trace, double rel_tol)
{
    double sum = 0.0;
    for (std::size_t l = 0; l < sp.lambda.size(); ++l) {
        const double lam = sp.lambda[l];
        if (lam < 0.0) throw InvariantViolation("spectrum: negative eigenvalue");
        if (lam > sp.kxx / sp.deg[l] * (1.0 + 1e-12)) {
            std::ostringstream msg;
            msg << "spectrum: lambda_" << l << " = " << lam << " exceeds K(x,x)/deg(l) = " << sp.kxx / sp.deg[l];
            throw InvariantViolation(msg.str());
        }
        sum += sp.deg[l] * lam;
    }
    if (!std::isnan(trimmed_trace) && std::abs(sum - trimmed_trace) > rel_tol * std::abs(trimmed_trace)) {
        std::ostringstream msg;
        msg.precision(17);
        msg << "spectrum: trace identity violated, sum deg*lambda = " << sum << " vs " << trimmed_trace;
        throw InvariantViolation(msg.str());
    }
}

Spectrum closed_form_2layer(int d, double s0, double s1, KernelKind kind, int lmax)
{
    if (d < 2 || lmax < 0) throw ConfigError("closed_form_2layer: need d >= 2 and lmax >= 0");
    const double pi = std::numbers::pi;
    const double dd = d;
    const double amp = s0 * s1;
    Spectrum sp;
    sp.d = d;
    sp.kxx = kind == KernelKind::ntk ? amp : 0.5 * amp;
    sp.lambda.assign(static_cast<std::size_t>(lmax) + 1, 0.0);
    sp.deg.resize(static_cast<std::size_t>(lmax) + 1);
    for (int l = 0; l <= lmax; ++l) {
        sp.deg[static_cast<std::size_t>(l)] = degeneracy_real(d, l);
        double lam = 0.0;
        if (l % 2 == 1) {
            if (l == 1) lam = kind == KernelKind::ntk ? amp / (2.0 * dd) : amp / (4.0 * dd);
        } else if (kind == KernelKind::nngp) {
            const double g = std::lgamma((l - 1) / 2.0) + std::lgamma(dd / 2.0) - std::lgamma((l + dd + 1) / 2.0);
            lam = amp * dd / (16.0 * pi * pi) * std::exp(2.0 * g);
        } else {
            const double k = l / 2;
            const double g = std::lgamma(k - 0.5) + std::lgamma(dd / 2.0) - std::lgamma(k + (dd + 1) / 2.0);
            lam = amp / (2.0 * pi) * (dd * (1 + 2 * k) + (1 - 2 * k) * (1 - 2 * k)) / (8.0 * pi) * std::exp(2.0 * g);
        }
        sp.lambda[static_cast<std::size_t>(l)] = lam;
    }
    return sp;
}

std::vector<EigenCluster> gram_eigensolve_check(const KernelSeries& ks, int d, int M, std::uint64_t seed,
                                                int max_clusters)
{
    if (M < 1 || M > 4000) throw ConfigError("gram_eigensolve_check: M must lie in [1, 4000]");
    const Eigen::MatrixXd x = sphere_sample(d, M, seed);
    const Eigen::MatrixXd t = x * x.transpose();
    Eigen::MatrixXd g(M, M);
    for (int j = 0; j < M; ++j)
        for (int i = j; i < M; ++i) g(i, j) = eval_kernel(ks, std::clamp(t(i, j), -1.0, 1.0)) / M;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    es.compute(g, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw NumericError("gram_eigensolve_check: eigensolve failed");
    std::vector<double> ev(es.eigenvalues().data(), es.eigenvalues().data() + M);
    std::sort(ev.begin(), ev.end(), std::greater<>());

    std::vector<EigenCluster> out;
    std::size_t i = 0;
    while (i < ev.size() && static_cast<int>(out.size()) < max_clusters) {
        const double first = ev[i];
        if (!(first > 0.0)) break;
        std::size_t j = i + 1;
        while (j < ev.size()) {
            const double m = static_cast<double>(j - i + 1);
            const double tol = std::min(0.5, 10.0 * std::sqrt(m / M));
            if ((first - ev[j]) / first > tol) break;
            ++j;
        }
        const double mean = std::accumulate(ev.begin() + static_cast<std::ptrdiff_t>(i),
                                            ev.begin() + static_cast<std::ptrdiff_t>(j), 0.0) /
                            static_cast<double>(j - i);
        out.push_back({mean, static_cast<int>(j - i)});
        i = j;
    }
    return out;
}

} // namespace lcurve
