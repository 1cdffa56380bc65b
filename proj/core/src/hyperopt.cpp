#include "lcurve/hyperopt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "lcurve/errors.hpp"
#include "lcurve/parallel.hpp"
#include "lcurve/spectrum.hpp"

namespace lcurve {

NetworkArch ArchTemplate::arch(const std::vector<double>& sigma) const
{
    if (static_cast<int>(sigma.size()) != parameters())
        throw ConfigError("ArchTemplate: expected " + std::to_string(parameters()) + " standard deviations");
    std::vector<double> w2, b2;
    for (std::size_t i = 0; i < sigma.size(); i += 2) {
        w2.push_back(sigma[i] * sigma[i]);
        b2.push_back(sigma[i + 1] * sigma[i + 1]);
    }
    return make_arch(depth, activation, kind, w2, b2, d, convention, width);
}

void HyperBox::validate() const
{
    if (lower.size() != upper.size() || lower.size() != reference.size() || lower.empty())
        throw ConfigError("HyperBox: lower, upper and reference must have equal nonzero length");
    for (std::size_t i = 0; i < lower.size(); ++i) {
        if (!(lower[i] <= reference[i] && reference[i] <= upper[i]))
            throw ConfigError("HyperBox: reference must lie inside the box");
        if (i % 2 == 0 && !(lower[i] > 0.0)) throw ConfigError("HyperBox: weight std-dev bounds must be > 0");
        if (lower[i] < 0.0) throw ConfigError("HyperBox: bounds must be >= 0");
    }
}

std::vector<double> HyperBox::project(std::vector<double> x) const
{
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::clamp(x[i], lower[i], upper[i]);
    return x;
}

HyperBox relative_box(const std::vector<double>& reference, double lo, double hi)
{
    HyperBox b;
    b.reference = reference;
    for (double v : reference) {
        b.lower.push_back(lo * v);
        b.upper.push_back(hi * v);
    }
    b.validate();
    return b;
}

HyperEvaluation predicted_loss(const ArchTemplate& tmpl, const std::vector<double>& sigma, const SpectralTarget& tgt,
                               int N, int r, double sigma2_extra)
{
    if (N < 1) throw ConfigError("predicted_loss: N must be >= 1");
    if (tgt.d != tmpl.d) throw ConfigError("predicted_loss: target dimension does not match the template");
    const KernelSeries ks = build_kernel_series(tmpl.arch(sigma), tmpl.d, tmpl.Q);
    const TrimmedKernel tk = trim(ks, r);
    const Spectrum sp = eigenvalues(tk, sigma2_extra, r);
    const CurvePoint p = daee(sp, tgt, static_cast<double>(N));
    HyperEvaluation e;
    e.sigma = sigma;
    e.predicted_loss = p.err_sl;
    e.err_ek = p.err_ek;
    e.sigma_r2 = tk.sigma_r2;
    e.c_over_sigma2 = p.c_over_sigma2;
    e.lambda = sp.lambda;
    return e;
}

SimplexResult nelder_mead(const std::function<double(const std::vector<double>&)>& f, std::vector<double> x0,
                          const HyperBox& box, int max_evals, double tol)
{
    const std::size_t n = x0.size();
    SimplexResult res;
    auto eval = [&](const std::vector<double>& x) {
        ++res.evals;
        return f(x);
    };
    std::vector<std::vector<double>> s(n + 1, box.project(x0));
    for (std::size_t i = 0; i < n; ++i) {
        const double step = 0.1 * (box.upper[i] - box.lower[i]);
        s[i + 1][i] = s[0][i] + step <= box.upper[i] ? s[0][i] + step : s[0][i] - step;
        s[i + 1] = box.project(s[i + 1]);
    }
    std::vector<double> fs(n + 1);
    for (std::size_t i = 0; i <= n; ++i) fs[i] = eval(s[i]);

    auto combine = [&](const std::vector<double>& c, const std::vector<double>& x, double a) {
        std::vector<double> y(n);
        for (std::size_t i = 0; i < n; ++i) y[i] = c[i] + a * (x[i] - c[i]);
        return box.project(y);
    };
    while (res.evals < max_evals) {
        std::vector<std::size_t> ord(n + 1);
        std::iota(ord.begin(), ord.end(), std::size_t{0});
        std::sort(ord.begin(), ord.end(), [&](std::size_t a, std::size_t b) { return fs[a] < fs[b]; });
        const std::size_t best = ord.front(), worst = ord.back(), second = ord[n - 1];
        if (std::isfinite(fs[worst]) && std::abs(fs[worst] - fs[best]) <= tol * (std::abs(fs[best]) + tol)) break;
        std::vector<double> c(n, 0.0);
        for (std::size_t k = 0; k <= n; ++k)
            if (k != worst)
                for (std::size_t i = 0; i < n; ++i) c[i] += s[k][i] / static_cast<double>(n);
        const auto xr = combine(c, s[worst], -1.0);
        const double fr = eval(xr);
        if (fr < fs[best]) {
            const auto xe = combine(c, s[worst], -2.0);
            const double fe = eval(xe);
            if (fe < fr) {
                s[worst] = xe;
                fs[worst] = fe;
            } else {
                s[worst] = xr;
                fs[worst] = fr;
            }
            continue;
        }
        if (fr < fs[second]) {
            s[worst] = xr;
            fs[worst] = fr;
            continue;
        }
        const bool outside = fr < fs[worst];
        const auto xc = combine(c, outside ? xr : s[worst], 0.5);
        const double fc = eval(xc);
        if (fc < (outside ? fr : fs[worst])) {
            s[worst] = xc;
            fs[worst] = fc;
            continue;
        }
        for (std::size_t k = 0; k <= n; ++k) {
            if (k == best) continue;
            s[k] = combine(s[best], s[k], 0.5);
            fs[k] = eval(s[k]);
        }
    }
    const auto it = std::min_element(fs.begin(), fs.end());
    res.x = s[static_cast<std::size_t>(it - fs.begin())];
    res.f = *it;
    return res;
}

OptimizeResult optimize(const ArchTemplate& tmpl, const HyperBox& box, const SpectralTarget& tgt, int N, int r,
                        const OptimizeOptions& opt)
{
    box.validate();
    if (opt.restarts < 1) throw ConfigError("optimize: restarts must be >= 1");
    if (static_cast<int>(box.reference.size()) != tmpl.parameters())
        throw ConfigError("optimize: box dimension does not match the template");
    std::vector<std::vector<double>> starts{box.reference};
    std::mt19937_64 rng(opt.seed);
    for (int k = 1; k < opt.restarts; ++k) {
        std::vector<double> x(box.reference.size());
        for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::uniform_real_distribution<double>(box.lower[i], box.upper[i])(rng);
        starts.push_back(std::move(x));
    }
    std::vector<std::vector<HyperEvaluation>> traces(starts.size());
    std::vector<bool> failed(starts.size(), false);
    parallel_for(static_cast<int>(starts.size()), opt.threads, [&](int k) {
        auto& trace = traces[static_cast<std::size_t>(k)];
        auto objective = [&](const std::vector<double>& x) {
            try {
                trace.push_back(predicted_loss(tmpl, x, tgt, N, r));
                return trace.back().predicted_loss;
            } catch (const NumericError&) {
                return std::numeric_limits<double>::infinity();
            }
        };
        if (!std::isfinite(objective(starts[static_cast<std::size_t>(k)]))) {
            failed[static_cast<std::size_t>(k)] = true;
            return;
        }
        nelder_mead(objective, starts[static_cast<std::size_t>(k)], box, opt.max_evals, opt.tol);
    });
    OptimizeResult res;
    for (std::size_t k = 0; k < starts.size(); ++k) {
        if (failed[k]) ++res.failed_starts;
        res.trace.insert(res.trace.end(), traces[k].begin(), traces[k].end());
    }
    if (res.failed_starts == static_cast<int>(starts.size())) throw NumericError("optimize: no start point could be evaluated");
    res.best = *std::min_element(res.trace.begin(), res.trace.end(),
                                 [](const auto& a, const auto& b) { return a.predicted_loss < b.predicted_loss; });
    res.reference = predicted_loss(tmpl, box.reference, tgt, N, r);
    return res;
}

GprCheck oracle_loss(const ArchTemplate& tmpl, const std::vector<double>& sigma, const SpectralTarget& tgt, int N,
                     const McOptions& opt)
{
    const KernelSeries ks = build_kernel_series(tmpl.arch(sigma), tmpl.d, tmpl.Q);
    const ExpectedErrorEstimate e = mc_expected_error(gpr_config(ks, 0.0, true), tgt, N, opt);
    return {e.mean, e.std_error};
}

std::vector<RankedEvaluation> random_search_baseline(const ArchTemplate& tmpl, const HyperBox& box,
                                                     const SpectralTarget& tgt, int N, int r,
                                                     const RandomSearchOptions& opt)
{
    box.validate();
    if (opt.count < 1) throw ConfigError("random_search_baseline: count must be >= 1");
    std::mt19937_64 rng(opt.seed);
    std::vector<RankedEvaluation> out;
    for (int k = 0; k < opt.count; ++k) {
        std::vector<double> x(box.reference.size());
        for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::uniform_real_distribution<double>(box.lower[i], box.upper[i])(rng);
        RankedEvaluation re;
        re.label = "Random " + std::to_string(k + 1);
        re.eval = predicted_loss(tmpl, x, tgt, N, r);
        if (opt.oracle) re.gpr = oracle_loss(tmpl, x, tgt, N, *opt.oracle);
        out.push_back(std::move(re));
    }
    std::stable_sort(out.begin(), out.end(), [](const RankedEvaluation& a, const RankedEvaluation& b) {
        if (a.gpr && b.gpr) return a.gpr->mean < b.gpr->mean;
        return a.eval.predicted_loss < b.eval.predicted_loss;
    });
    return out;
}

std::vector<RankedEvaluation> summary_rows(const std::vector<RankedEvaluation>& ranked)
{
    if (ranked.empty()) return {};
    RankedEvaluation worst = ranked.back(), median = ranked[(ranked.size() - 1) / 2], best = ranked.front();
    worst.label = "Worst (" + worst.label + ")";
    median.label = "Median (" + median.label + ")";
    best.label = "Best (" + best.label + ")";
    return {worst, median, best};
}

} // namespace lcurve
