#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "lcurve/kernel.hpp"
#include "lcurve/target.hpp"

namespace lcurve {

using KernelFunction = std::function<double(double)>;

struct GprConfig {
    KernelFunction kernel;
    double sigma2 = 0.0;
    int d = 2;
    double jitter = 1e-10; // first escalation step, relative to K(x,x)
    double kxx = 1.0;
    std::string kernel_id;
};

// Untrimmed kernel. With exact = true and an architecture attached, the closed-form
// composition is evaluated instead of the truncated series.
GprConfig gpr_config(const KernelSeries& ks, double sigma2, bool exact = true);

// Renormalized kernel: trimmed series with noise sigma2_extra + sigma_r^2.
GprConfig gpr_config(const TrimmedKernel& tk, double sigma2_extra = 0.0);

Eigen::MatrixXd gram(const KernelFunction& k, const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

struct GprPrediction {
    Eigen::MatrixXd mean;
    double jitter_applied = 0.0;
};

GprPrediction gpr_predict(const GprConfig& cfg, const Eigen::MatrixXd& train_x, const Eigen::MatrixXd& train_y,
                          const Eigen::MatrixXd& test_x);

struct ExpectedErrorEstimate {
    int N = 0;
    double mean = 0.0;
    double std_error = 0.0;
    int draws = 0;
    int test_points = 0;
    double jitter_max = 0.0;
};

struct McOptions {
    int draws = 10;
    int test_points = 2000;
    std::uint64_t seed = 1;
    int threads = 1;
};

ExpectedErrorEstimate mc_expected_error(const GprConfig& cfg, const SpectralTarget& tgt, int N, const McOptions& opt);

// Expected error for every N in [0, Nmax] from nested training sets, one factorization per draw.
std::vector<ExpectedErrorEstimate> mc_learning_curve(const GprConfig& cfg, const SpectralTarget& tgt, int Nmax,
                                                     const McOptions& opt);

struct PoissonAverage {
    double value = 0.0;
    double tail_weight = 0.0;
};

double poisson_eta_max(int Nmax);

PoissonAverage poisson_average(std::span<const double> a, double eta, bool allow_tail = false);

struct Dataset {
    Eigen::MatrixXd x; // rows on the unit sphere
    Eigen::MatrixXd y; // standardized to zero mean
    std::vector<std::string> columns;
};

// Header row, one point per row, the last target_cols columns are targets.
Dataset load_csv_dataset(const std::string& path, int target_cols = 1);

struct FidelityRow {
    int r = 0;
    double sigma_r2 = 0.0;
    double gap = 0.0;
    double gap_std_error = 0.0;
    double relative = 0.0; // gap / target power
    double discrepancy_estimate = 0.0;
};

struct FidelityReport {
    std::vector<FidelityRow> rows;
    double target_power = 0.0;
    double jitter_max = 0.0;
    int N = 0;
    int draws = 0;
};

FidelityReport renorm_fidelity(const KernelSeries& base, const std::vector<int>& scales, const SpectralTarget& tgt,
                               int N, const McOptions& opt);

// Each draw takes N training and opt.test_points held-out rows from a seeded shuffle.
FidelityReport renorm_fidelity(const KernelSeries& base, const std::vector<int>& scales, const Dataset& data, int N,
                               const McOptions& opt);

struct OlsResult {
    double mse = 0.0;
    int rank = 0;
    bool rank_deficient = false;
};

OlsResult ols_baseline(const Eigen::MatrixXd& train_x, const Eigen::MatrixXd& train_y, const Eigen::MatrixXd& test_x,
                       const Eigen::MatrixXd& test_y);

struct BoundRow {
    double c = 0.0;
    double residual = 0.0;
};

struct BoundReport {
    double c_best = 0.0;
    double fit_residual = 0.0;        // RMS log residual of the best c / sqrt(eta)
    double prediction_residual = 0.0; // RMS log residual of the supplied prediction
    std::vector<BoundRow> grid;
};

BoundReport bound_report(const std::vector<double>& eta, const std::vector<double>& measured,
                         const std::vector<double>& predicted, const std::vector<double>& c_grid = {});

} // namespace lcurve
