#include "lcurve/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include "lcurve/errors.hpp"
#include "lcurve/parallel.hpp"
#include "lcurve/specfun.hpp"

namespace lcurve {

GprConfig gpr_config(const KernelSeries& ks, double sigma2, bool exact)
{
    if (!(sigma2 >= 0.0)) throw ConfigError("gpr_config: sigma2 must be >= 0");
    GprConfig cfg;
    cfg.d = ks.d;
    cfg.sigma2 = sigma2;
    cfg.kxx = ks.kxx;
    if (exact && ks.provenance) {
        cfg.kernel = [arch = *ks.provenance](double t) { return eval_exact(arch, t); };
        cfg.kernel_id = "exact";
    } else {
        cfg.kernel = [b = ks.b](double t) {
            double v = 0.0;
            for (auto it = b.rbegin(); it != b.rend(); ++it) v = v * t + *it;
            return v;
        };
        cfg.kernel_id = "series:Q=" + std::to_string(ks.Q);
    }
    return cfg;
}

GprConfig gpr_config(const TrimmedKernel& tk, double sigma2_extra)
{
    if (!(sigma2_extra >= 0.0)) throw ConfigError("gpr_config: sigma2 must be >= 0");
    GprConfig cfg;
    cfg.d = tk.base.d;
    cfg.sigma2 = sigma2_extra + tk.sigma_r2;
    cfg.kxx = tk.base.kxx;
    cfg.kernel = [b = std::vector<double>(tk.base.b.begin(), tk.base.b.begin() + tk.r + 1)](double t) {
        double v = 0.0;
        for (auto it = b.rbegin(); it != b.rend(); ++it) v = v * t + *it;
        return v;
    };
    cfg.kernel_id = "trimmed:r=" + std::to_string(tk.r);
    return cfg;
}

Eigen::MatrixXd gram(const KernelFunction& k, const Eigen::MatrixXd& a, const Eigen::MatrixXd& b)
{
    Eigen::MatrixXd t = a * b.transpose();
    for (Eigen::Index j = 0; j < t.cols(); ++j)
        for (Eigen::Index i = 0; i < t.rows(); ++i) t(i, j) = k(std::clamp(t(i, j), -1.0, 1.0));
    return t;
}

namespace {

struct Factor {
    Eigen::LLT<Eigen::MatrixXd> llt;
    double jitter = 0.0;
};

Factor factorize(Eigen::MatrixXd k, const GprConfig& cfg)
{
    Factor f;
    k.diagonal().array() += cfg.sigma2;
    f.llt.compute(k);
    if (f.llt.info() == Eigen::Success) return f;
    for (double j = cfg.jitter; j <= 1e-6 * (1.0 + 1e-9); j *= 10.0) {
        Eigen::MatrixXd kj = k;
        kj.diagonal().array() += j * cfg.kxx;
        f.llt.compute(kj);
        if (f.llt.info() == Eigen::Success) {
            f.jitter = j * cfg.kxx;
            return f;
        }
    }
    std::ostringstream msg;
    msg << "gpr: Cholesky failed after jitter escalation to 1e-6 * K(x,x); N = " << k.rows()
        << ", min diagonal = " << k.diagonal().minCoeff() << ", noise = " << cfg.sigma2;
    throw NumericError(msg.str());
}

void check_inputs(const GprConfig& cfg, const Eigen::MatrixXd& x)
{
    if (x.cols() != cfg.d) throw ConfigError("gpr: point dimension does not match the kernel dimension");
}

double mean_sq(const Eigen::MatrixXd& m) { return m.size() == 0 ? 0.0 : m.squaredNorm() / static_cast<double>(m.size()); }

ExpectedErrorEstimate summarize(int N, const std::vector<double>& per_draw, int test_points, double jitter)
{
    ExpectedErrorEstimate e;
    e.N = N;
    e.draws = static_cast<int>(per_draw.size());
    e.test_points = test_points;
    e.jitter_max = jitter;
    const double n = static_cast<double>(per_draw.size());
    e.mean = std::accumulate(per_draw.begin(), per_draw.end(), 0.0) / n;
    if (per_draw.size() >= 2) {
        double ss = 0.0;
        for (double v : per_draw) ss += (v - e.mean) * (v - e.mean);
        e.std_error = std::sqrt(ss / (n - 1.0) / n);
    } else {
        e.std_error = std::numeric_limits<double>::quiet_NaN();
    }
    return e;
}

void check_target(const GprConfig& cfg, const SpectralTarget& tgt)
{
    if (!tgt.has_realization()) throw ConfigError("oracle: target needs a pointwise realization");
    if (tgt.d != cfg.d) throw ConfigError("oracle: target dimension does not match the kernel dimension");
}

std::string with_seed(const std::string& what, int draw, std::uint64_t seed)
{
    return what + " (draw " + std::to_string(draw) + ", seed " + std::to_string(seed) + ")";
}

} // namespace

GprPrediction gpr_predict(const GprConfig& cfg, const Eigen::MatrixXd& train_x, const Eigen::MatrixXd& train_y,
                          const Eigen::MatrixXd& test_x)
{
    check_inputs(cfg, train_x);
    check_inputs(cfg, test_x);
    if (train_y.rows() != train_x.rows()) throw ConfigError("gpr_predict: label count does not match point count");
    GprPrediction p;
    if (train_x.rows() == 0) {
        p.mean = Eigen::MatrixXd::Zero(test_x.rows(), train_y.cols());
        return p;
    }
    Factor f = factorize(gram(cfg.kernel, train_x, train_x), cfg);
    p.jitter_applied = f.jitter;
    const Eigen::MatrixXd alpha = f.llt.solve(train_y);
    p.mean = gram(cfg.kernel, test_x, train_x) * alpha;
    return p;
}

ExpectedErrorEstimate mc_expected_error(const GprConfig& cfg, const SpectralTarget& tgt, int N, const McOptions& opt)
{
    check_target(cfg, tgt);
    if (N < 0 || opt.draws < 1 || opt.test_points < 1) throw ConfigError("mc_expected_error: bad N, draws or test_points");
    std::vector<double> err(static_cast<std::size_t>(opt.draws));
    std::vector<double> jit(static_cast<std::size_t>(opt.draws), 0.0);
    parallel_for(opt.draws, opt.threads, [&](int k) {
        const std::uint64_t s = derive_seed(opt.seed, static_cast<std::uint64_t>(k));
        try {
            const Eigen::MatrixXd x = sphere_sample(cfg.d, N, derive_seed(s, 0));
            const Eigen::MatrixXd xt = sphere_sample(cfg.d, opt.test_points, derive_seed(s, 1));
            const Eigen::VectorXd y = eval_target_rows(tgt, x);
            const Eigen::VectorXd yt = eval_target_rows(tgt, xt);
            const GprPrediction p = gpr_predict(cfg, x, y, xt);
            err[static_cast<std::size_t>(k)] = mean_sq(p.mean.col(0) - yt);
            jit[static_cast<std::size_t>(k)] = p.jitter_applied;
        } catch (const NumericError& e) {
            throw NumericError(with_seed(e.what(), k, s));
        }
    });
    return summarize(N, err, opt.test_points, *std::max_element(jit.begin(), jit.end()));
}

std::vector<ExpectedErrorEstimate> mc_learning_curve(const GprConfig& cfg, const SpectralTarget& tgt, int Nmax,
                                                     const McOptions& opt)
{
    check_target(cfg, tgt);
    if (Nmax < 0 || opt.draws < 1 || opt.test_points < 1) throw ConfigError("mc_learning_curve: bad Nmax, draws or test_points");
    const auto n1 = static_cast<std::size_t>(Nmax) + 1;
    std::vector<std::vector<double>> err(static_cast<std::size_t>(opt.draws), std::vector<double>(n1));
    std::vector<double> jit(static_cast<std::size_t>(opt.draws), 0.0);
    parallel_for(opt.draws, opt.threads, [&](int k) {
        const std::uint64_t s = derive_seed(opt.seed, static_cast<std::uint64_t>(k));
        try {
            const Eigen::MatrixXd x = sphere_sample(cfg.d, Nmax, derive_seed(s, 0));
            const Eigen::MatrixXd xt = sphere_sample(cfg.d, opt.test_points, derive_seed(s, 1));
            const Eigen::VectorXd y = eval_target_rows(tgt, x);
            const Eigen::VectorXd yt = eval_target_rows(tgt, xt);
            auto& e = err[static_cast<std::size_t>(k)];
            e[0] = mean_sq(yt);
            if (Nmax == 0) return;
            Factor f = factorize(gram(cfg.kernel, x, x), cfg);
            jit[static_cast<std::size_t>(k)] = f.jitter;
            const auto L = f.llt.matrixL();
            const Eigen::VectorXd z = L.solve(y);
            const Eigen::MatrixXd v = L.solve(gram(cfg.kernel, x, xt));
            // the first n entries of L^{-1} b only involve the leading n x n block
            Eigen::VectorXd resid = yt;
            for (int n = 0; n < Nmax; ++n) {
                resid -= z[n] * v.row(n).transpose();
                e[static_cast<std::size_t>(n) + 1] = resid.squaredNorm() / static_cast<double>(opt.test_points);
            }
        } catch (const NumericError& ex) {
            throw NumericError(with_seed(ex.what(), k, s));
        }
    });
    const double jmax = *std::max_element(jit.begin(), jit.end());
    std::vector<ExpectedErrorEstimate> out;
    out.reserve(n1);
    std::vector<double> col(static_cast<std::size_t>(opt.draws));
    for (std::size_t n = 0; n < n1; ++n) {
        for (std::size_t k = 0; k < col.size(); ++k) col[k] = err[k][n];
        out.push_back(summarize(static_cast<int>(n), col, opt.test_points, jmax));
    }
    return out;
}

double poisson_eta_max(int Nmax) { return Nmax - 5.0 * std::sqrt(static_cast<double>(Nmax)); }

PoissonAverage poisson_average(std::span<const double> a, double eta, bool allow_tail)
{
    if (a.empty()) throw ConfigError("poisson_average: empty sequence");
    if (!(eta >= 0.0)) throw ConfigError("poisson_average: eta must be >= 0");
    const int nmax = static_cast<int>(a.size()) - 1;
    if (!allow_tail && eta > poisson_eta_max(nmax)) {
        std::ostringstream msg;
        msg << "poisson_average: eta = " << eta << " exceeds Nmax - 5 sqrt(Nmax) = " << poisson_eta_max(nmax);
        throw ConfigError(msg.str());
    }
    PoissonAverage p;
    double wsum = 0.0;
    if (eta == 0.0) {
        p.value = a[0];
        return p;
    }
    const double le = std::log(eta);
    for (int n = 0; n <= nmax; ++n) {
        const double w = std::exp(-eta + n * le - std::lgamma(n + 1.0));
        p.value += w * a[static_cast<std::size_t>(n)];
        wsum += w;
    }
    p.tail_weight = std::max(0.0, 1.0 - wsum);
    return p;
}

Dataset load_csv_dataset(const std::string& path, int target_cols)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("load_csv_dataset: cannot open '" + path + "'");
    if (target_cols < 1) throw ConfigError("load_csv_dataset: need at least one target column");
    auto split = [](const std::string& line) {
        std::vector<std::string> out;
        std::string cell;
        std::istringstream ss(line);
        while (std::getline(ss, cell, ',')) out.push_back(cell);
        return out;
    };
    std::string line;
    if (!std::getline(in, line)) throw ConfigError("load_csv_dataset: empty file");
    Dataset ds;
    ds.columns = split(line);
    const int ncol = static_cast<int>(ds.columns.size());
    const int nx = ncol - target_cols;
    if (nx < 2) throw ConfigError("load_csv_dataset: need at least two feature columns");
    std::vector<std::vector<double>> rows;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        auto cells = split(line);
        if (static_cast<int>(cells.size()) != ncol)
            throw ConfigError("load_csv_dataset: line " + std::to_string(lineno) + " has the wrong number of columns");
        std::vector<double> v(static_cast<std::size_t>(ncol));
        for (int j = 0; j < ncol; ++j) {
            try {
                v[static_cast<std::size_t>(j)] = std::stod(cells[static_cast<std::size_t>(j)]);
            } catch (const std::exception&) {
                throw ConfigError("load_csv_dataset: non-numeric cell on line " + std::to_string(lineno));
            }
        }
        rows.push_back(std::move(v));
    }
    const auto n = static_cast<Eigen::Index>(rows.size());
    if (n < 2) throw ConfigError("load_csv_dataset: need at least two rows");
    ds.x.resize(n, nx);
    ds.y.resize(n, target_cols);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (int j = 0; j < nx; ++j) ds.x(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
        for (int j = 0; j < target_cols; ++j) ds.y(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(nx + j)];
    }
    // standardize features, then project rows onto the sphere
    const Eigen::RowVectorXd mu = ds.x.colwise().mean();
    ds.x.rowwise() -= mu;
    for (Eigen::Index j = 0; j < nx; ++j) {
        const double sd = std::sqrt(ds.x.col(j).squaredNorm() / static_cast<double>(n));
        if (sd > 0.0) ds.x.col(j) /= sd;
    }
    for (Eigen::Index i = 0; i < n; ++i) {
        const double norm = ds.x.row(i).norm();
        if (!(norm > 0.0)) throw ConfigError("load_csv_dataset: row " + std::to_string(i + 1) + " is constant");
        ds.x.row(i) /= norm;
    }
    ds.y.rowwise() -= ds.y.colwise().mean();
    return ds;
}

namespace {

struct GapAccumulator {
    std::vector<std::vector<double>> gaps; // [draw][scale]
    std::vector<double> power;
    std::vector<double> jitter;
};

FidelityReport finish(const KernelSeries& base, const std::vector<int>& scales, const GapAccumulator& acc, int N)
{
    FidelityReport rep;
    rep.N = N;
    rep.draws = static_cast<int>(acc.gaps.size());
    rep.target_power = std::accumulate(acc.power.begin(), acc.power.end(), 0.0) / static_cast<double>(acc.power.size());
    rep.jitter_max = *std::max_element(acc.jitter.begin(), acc.jitter.end());
    for (std::size_t s = 0; s < scales.size(); ++s) {
        std::vector<double> col;
        for (const auto& g : acc.gaps) col.push_back(g[s]);
        const ExpectedErrorEstimate e = summarize(N, col, 0, 0.0);
        const TrimmedKernel tk = trim(base, scales[s]);
        FidelityRow row;
        row.r = scales[s];
        row.sigma_r2 = tk.sigma_r2;
        row.gap = e.mean;
        row.gap_std_error = e.std_error;
        row.relative = e.mean / rep.target_power;
        row.discrepancy_estimate = discrepancy_estimate(tk, N);
        rep.rows.push_back(row);
    }
    return rep;
}

void fidelity_draw(const KernelSeries& base, const std::vector<int>& scales, const Eigen::MatrixXd& x,
                   const Eigen::MatrixXd& y, const Eigen::MatrixXd& xt, std::vector<double>& gaps, double& jitter)
{
    const GprPrediction full = gpr_predict(gpr_config(base, 0.0, true), x, y, xt);
    jitter = full.jitter_applied;
    for (std::size_t s = 0; s < scales.size(); ++s) {
        const GprPrediction pr = gpr_predict(gpr_config(trim(base, scales[s])), x, y, xt);
        jitter = std::max(jitter, pr.jitter_applied);
        gaps[s] = mean_sq(pr.mean - full.mean);
    }
}

} // namespace

FidelityReport renorm_fidelity(const KernelSeries& base, const std::vector<int>& scales, const SpectralTarget& tgt,
                               int N, const McOptions& opt)
{
    if (!tgt.has_realization()) throw ConfigError("renorm_fidelity: target needs a realization");
    if (tgt.d != base.d) throw ConfigError("renorm_fidelity: target dimension does not match the kernel");
    if (N < 1 || opt.draws < 1) throw ConfigError("renorm_fidelity: need N >= 1 and draws >= 1");
    GapAccumulator acc;
    acc.gaps.assign(static_cast<std::size_t>(opt.draws), std::vector<double>(scales.size()));
    acc.power.assign(static_cast<std::size_t>(opt.draws), 0.0);
    acc.jitter.assign(static_cast<std::size_t>(opt.draws), 0.0);
    parallel_for(opt.draws, opt.threads, [&](int k) {
        const std::uint64_t s = derive_seed(opt.seed, static_cast<std::uint64_t>(k));
        const Eigen::MatrixXd x = sphere_sample(base.d, N, derive_seed(s, 0));
        const Eigen::MatrixXd xt = sphere_sample(base.d, opt.test_points, derive_seed(s, 1));
        const Eigen::VectorXd y = eval_target_rows(tgt, x);
        acc.power[static_cast<std::size_t>(k)] = mean_sq(eval_target_rows(tgt, xt));
        try {
            fidelity_draw(base, scales, x, y, xt, acc.gaps[static_cast<std::size_t>(k)], acc.jitter[static_cast<std::size_t>(k)]);
        } catch (const NumericError& e) {
            throw NumericError(with_seed(e.what(), k, s));
        }
    });
    return finish(base, scales, acc, N);
}

FidelityReport renorm_fidelity(const KernelSeries& base, const std::vector<int>& scales, const Dataset& data, int N,
                               const McOptions& opt)
{
    if (data.x.cols() != base.d) throw ConfigError("renorm_fidelity: dataset dimension does not match the kernel");
    if (N < 1 || opt.draws < 1) throw ConfigError("renorm_fidelity: need N >= 1 and draws >= 1");
    if (N + opt.test_points > data.x.rows())
        throw ConfigError("renorm_fidelity: N + test_points exceeds the number of rows");
    GapAccumulator acc;
    acc.gaps.assign(static_cast<std::size_t>(opt.draws), std::vector<double>(scales.size()));
    acc.power.assign(static_cast<std::size_t>(opt.draws), 0.0);
    acc.jitter.assign(static_cast<std::size_t>(opt.draws), 0.0);
    parallel_for(opt.draws, opt.threads, [&](int k) {
        const std::uint64_t s = derive_seed(opt.seed, static_cast<std::uint64_t>(k));
        std::vector<Eigen::Index> idx(static_cast<std::size_t>(data.x.rows()));
        std::iota(idx.begin(), idx.end(), Eigen::Index{0});
        std::mt19937_64 rng(s);
        std::shuffle(idx.begin(), idx.end(), rng);
        Eigen::MatrixXd x(N, data.x.cols()), y(N, data.y.cols()), xt(opt.test_points, data.x.cols());
        Eigen::MatrixXd yt(opt.test_points, data.y.cols());
        for (int i = 0; i < N; ++i) {
            x.row(i) = data.x.row(idx[static_cast<std::size_t>(i)]);
            y.row(i) = data.y.row(idx[static_cast<std::size_t>(i)]);
        }
        for (int i = 0; i < opt.test_points; ++i) {
            xt.row(i) = data.x.row(idx[static_cast<std::size_t>(N + i)]);
            yt.row(i) = data.y.row(idx[static_cast<std::size_t>(N + i)]);
        }
        acc.power[static_cast<std::size_t>(k)] = mean_sq(yt);
        try {
            fidelity_draw(base, scales, x, y, xt, acc.gaps[static_cast<std::size_t>(k)], acc.jitter[static_cast<std::size_t>(k)]);
        } catch (const NumericError& e) {
            throw NumericError(with_seed(e.what(), k, s));
        }
    });
    return finish(base, scales, acc, N);
}

OlsResult ols_baseline(const Eigen::MatrixXd& train_x, const Eigen::MatrixXd& train_y, const Eigen::MatrixXd& test_x,
                       const Eigen::MatrixXd& test_y)
{
    if (train_x.cols() != test_x.cols() || train_y.rows() != train_x.rows() || test_y.rows() != test_x.rows())
        throw ConfigError("ols_baseline: inconsistent shapes");
    const Eigen::Index n = train_x.rows(), p = train_x.cols() + 1;
    Eigen::MatrixXd a(n, p);
    a << train_x, Eigen::VectorXd::Ones(n);
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(a);
    const Eigen::MatrixXd coef = cod.solve(train_y);
    Eigen::MatrixXd at(test_x.rows(), p);
    at << test_x, Eigen::VectorXd::Ones(test_x.rows());
    OlsResult r;
    r.mse = mean_sq(at * coef - test_y);
    r.rank = static_cast<int>(cod.rank());
    r.rank_deficient = r.rank < p;
    return r;
}

BoundReport bound_report(const std::vector<double>& eta, const std::vector<double>& measured,
                         const std::vector<double>& predicted, const std::vector<double>& c_grid)
{
    if (eta.size() < 5 || measured.size() != eta.size()) throw ConfigError("bound_report: need >= 5 matching points");
    if (!predicted.empty() && predicted.size() != eta.size()) throw ConfigError("bound_report: prediction length mismatch");
    const double n = static_cast<double>(eta.size());
    auto rms_for = [&](double c) {
        double ss = 0.0;
        for (std::size_t i = 0; i < eta.size(); ++i) {
            const double r = std::log(measured[i]) - std::log(c / std::sqrt(eta[i]));
            ss += r * r;
        }
        return std::sqrt(ss / n);
    };
    BoundReport rep;
    double lc = 0.0;
    for (std::size_t i = 0; i < eta.size(); ++i) {
        if (!(measured[i] > 0.0) || !(eta[i] > 0.0)) throw ConfigError("bound_report: values must be positive");
        lc += std::log(measured[i]) + 0.5 * std::log(eta[i]);
    }
    rep.c_best = std::exp(lc / n);
    rep.fit_residual = rms_for(rep.c_best);
    if (!predicted.empty()) {
        double ss = 0.0;
        for (std::size_t i = 0; i < eta.size(); ++i) {
            const double r = std::log(measured[i]) - std::log(predicted[i]);
            ss += r * r;
        }
        rep.prediction_residual = std::sqrt(ss / n);
    }
    std::vector<double> grid = c_grid;
    if (grid.empty())
        for (int k = -8; k <= 8; ++k) grid.push_back(rep.c_best * std::pow(2.0, k / 4.0));
    for (double c : grid) rep.grid.push_back({c, rms_for(c)});
    return rep;
}

} // namespace lcurve
