#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "lcurve/errors.hpp"
#include "lcurve/kernel.hpp"
#include "lcurve/oracle.hpp"
#include "lcurve/specfun.hpp"

using namespace lcurve;

namespace {

KernelSeries reference_kernel(int d)
{
    return build_kernel_series(
        make_arch(3, Activation::relu, KernelKind::ntk, {1, 1, 1, 1}, {1, 1, 1, 1}, d, VarianceConvention::fan_in), d, 32);
}

} // namespace

TEST_SUITE("oracle") {

TEST_CASE("gpr interpolates noiselessly and handles the scalar case")
{
    const int d = 10;
    const auto cfg = gpr_config(reference_kernel(d), 0.0, true);
    const auto x = sphere_sample(d, 60, 1);
    const Eigen::MatrixXd y = Eigen::MatrixXd::Random(60, 2);
    const auto pred = gpr_predict(cfg, x, y, x);
    CHECK((pred.mean - y).cwiseAbs().maxCoeff() <= 1e-8 * y.cwiseAbs().maxCoeff());

    const auto x1 = sphere_sample(d, 1, 2);
    const auto xs = sphere_sample(d, 4, 3);
    Eigen::MatrixXd y1(1, 1);
    y1(0, 0) = 1.7;
    const auto p1 = gpr_predict(cfg, x1, y1, xs);
    for (int i = 0; i < 4; ++i)
        CHECK(p1.mean(i, 0) == doctest::Approx(cfg.kernel(xs.row(i).dot(x1.row(0))) / cfg.kxx * 1.7).epsilon(1e-9));

    const auto loud = gpr_config(reference_kernel(d), 1e12, true);
    CHECK(gpr_predict(loud, x, y, xs).mean.cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("Monte-Carlo expected error: trivial cases and determinism")
{
    const int d = 10;
    const auto cfg = gpr_config(reference_kernel(d), 0.01, true);
    McOptions o;
    o.draws = 3;
    o.test_points = 500;
    const auto zero = mc_expected_error(cfg, make_zonal(d, {0.0, 0.0}, 1), 20, o);
    CHECK(zero.mean == 0.0);
    CHECK(zero.std_error == 0.0);

    const auto tgt = make_zonal(d, {0.0, 0.5, 0.5}, 1);
    o.test_points = 20000;
    const auto n0 = mc_expected_error(cfg, tgt, 0, o);
    CHECK(n0.mean == doctest::Approx(1.0).epsilon(0.05));

    o.test_points = 300;
    const auto a = mc_expected_error(cfg, tgt, 40, o);
    const auto b = mc_expected_error(cfg, tgt, 40, o);
    CHECK(a.mean == b.mean);
    CHECK(a.std_error == b.std_error);
    auto o2 = o;
    o2.threads = 3;
    CHECK(mc_expected_error(cfg, tgt, 40, o2).mean == a.mean);
    const auto curve = mc_learning_curve(cfg, tgt, 40, o2);
    CHECK(curve.size() == 41);
    CHECK(curve[40].mean == doctest::Approx(a.mean).epsilon(1e-9));
    o.draws = 1;
    CHECK(std::isnan(mc_expected_error(cfg, tgt, 10, o).std_error));
}

TEST_CASE("self-averaging at large N")
{
    const int d = 50, N = 500, draws = 8, T = 200;
    const auto cfg = gpr_config(reference_kernel(d), 0.0, true);
    const auto tgt = make_zonal(d, {0.0, 0.5, 0.5}, 5);
    const auto xt = sphere_sample(d, T, 99);
    const Eigen::VectorXd gt = eval_target_rows(tgt, xt);
    Eigen::MatrixXd preds(T, draws);
    for (int k = 0; k < draws; ++k) {
        const auto x = sphere_sample(d, N, derive_seed(7, static_cast<std::uint64_t>(k)));
        preds.col(k) = gpr_predict(cfg, x, eval_target_rows(tgt, x), xt).mean.col(0);
    }
    const Eigen::VectorXd mean = preds.rowwise().mean();
    const double var = (preds.colwise() - mean).array().square().sum() / (T * (draws - 1.0));
    const double bias2 = (mean - gt).array().square().mean() - var / draws;
    CHECK(var <= 0.25 * bias2);
}

TEST_CASE("Poisson averaging")
{
    std::vector<double> c(500, 2.5), n(500);
    for (int i = 0; i < 500; ++i) n[static_cast<std::size_t>(i)] = i;
    CHECK(poisson_average(c, 150.0).value == doctest::Approx(2.5).epsilon(1e-12));
    CHECK(poisson_average(n, 150.0).value == doctest::Approx(150.0).epsilon(1e-12));
    CHECK(poisson_average(n, 150.0).tail_weight < 1e-12);
    CHECK(poisson_eta_max(499) == doctest::Approx(499 - 5 * std::sqrt(499.0)));
    CHECK_THROWS_AS(poisson_average(n, 490.0), ConfigError);
    const auto over = poisson_average(n, 490.0, true);
    CHECK(over.tail_weight > 0.1);
    // linearity and monotonicity
    std::vector<double> mix(500);
    for (std::size_t i = 0; i < 500; ++i) mix[i] = 2 * c[i] + 3 * n[i];
    CHECK(poisson_average(mix, 60.0).value == doctest::Approx(2 * 2.5 + 3 * 60.0).epsilon(1e-12));
    CHECK(poisson_average(n, 61.0).value > poisson_average(n, 60.0).value);
}

TEST_CASE("renormalization gap shrinks with r")
{
    const int d = 20;
    const auto ks = reference_kernel(d);
    McOptions o;
    o.draws = 3;
    o.test_points = 300;
    o.seed = 4;
    const auto rep = renorm_fidelity(ks, {1, 2, 3, 32}, make_zonal(d, {0.0, 0.5, 0.5}, 2), 300, o);
    REQUIRE(rep.rows.size() == 4);
    for (std::size_t i = 1; i < rep.rows.size(); ++i) CHECK(rep.rows[i].gap < rep.rows[i - 1].gap);
    CHECK(rep.rows.back().relative < 1e-6);
    CHECK(rep.target_power > 0.0);
}

TEST_CASE("OLS baseline")
{
    const int d = 10;
    const auto x = sphere_sample(d, 400, 1), xt = sphere_sample(d, 2000, 2);
    const auto lin = make_zonal(d, {0.0, 1.0}, 3);
    const auto a = ols_baseline(x, eval_target_rows(lin, x), xt, eval_target_rows(lin, xt));
    CHECK(a.mse < 1e-20);
    CHECK_FALSE(a.rank_deficient);
    const auto quad = make_zonal(d, {0.0, 0.0, 1.0}, 3);
    const auto b = ols_baseline(x, eval_target_rows(quad, x), xt, eval_target_rows(quad, xt));
    CHECK(b.mse == doctest::Approx(1.0).epsilon(0.2));
    const auto xs = sphere_sample(d, 5, 4);
    CHECK(ols_baseline(xs, eval_target_rows(lin, xs), xt, eval_target_rows(lin, xt)).rank_deficient);
}

TEST_CASE("bound report")
{
    std::vector<double> eta, exact, decay;
    for (double e = 100; e <= 1000; e += 100) {
        eta.push_back(e);
        exact.push_back(0.3 / std::sqrt(e));
        decay.push_back(std::exp(-e / 200));
    }
    const auto a = bound_report(eta, exact, exact);
    CHECK(a.fit_residual < 1e-12);
    CHECK(a.prediction_residual == 0.0);
    CHECK(a.c_best == doctest::Approx(0.3));
    const auto b = bound_report(eta, decay, {}, {0.1, 1.0, 10.0});
    CHECK(b.fit_residual > 0.5);
    CHECK(b.grid.size() == 3);
    for (const auto& row : b.grid) CHECK(row.residual >= b.fit_residual);
    CHECK_THROWS_AS(bound_report({1, 2}, {1, 2}, {}), ConfigError);
}

TEST_CASE("CSV ingestion")
{
    const auto ds = load_csv_dataset(std::string(LCURVE_TEST_DATA) + "/digits.csv", 10);
    CHECK(ds.x.rows() == 1797);
    CHECK(ds.x.cols() == 64);
    CHECK(ds.y.cols() == 10);
    CHECK((ds.x.rowwise().norm().array() - 1.0).abs().maxCoeff() < 1e-12);
    CHECK(ds.y.colwise().mean().cwiseAbs().maxCoeff() < 1e-12);

    const auto path = std::filesystem::temp_directory_path() / "lcurve_bad.csv";
    {
        std::ofstream f(path);
        f << "a,b,y\n1,2,3\n4,x,6\n";
    }
    CHECK_THROWS_AS(load_csv_dataset(path.string(), 1), ConfigError);
    std::filesystem::remove(path);
    CHECK_THROWS_AS(load_csv_dataset("/nonexistent.csv", 1), ConfigError);
}

} // TEST_SUITE
