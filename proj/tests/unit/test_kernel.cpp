#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "lcurve/errors.hpp"
#include "lcurve/kernel.hpp"

using namespace lcurve;

namespace {

constexpr double pi = std::numbers::pi;

double kappa1(double t) { return (std::sqrt(1 - t * t) + t * (pi - std::acos(t))) / pi; }

double tail_bound(const KernelSeries& ks)
{
    double s = 0.0;
    for (double b : ks.b) s += b;
    return ks.kxx - s;
}

} // namespace

TEST_SUITE("kernel") {

TEST_CASE("relu dual of c = t")
{
    const auto du = relu_dual(Series::monomial(64, 1, 1.0), 1.0);
    CHECK(2 * du.value[0] == doctest::Approx(1 / pi).epsilon(1e-14));
    CHECK(2 * du.value[1] == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(2 * du.value[2] == doctest::Approx(1 / (2 * pi)).epsilon(1e-14));
    CHECK(std::abs(du.value[3]) < 1e-15);
    CHECK(2 * du.value[4] == doctest::Approx(1 / (24 * pi)).epsilon(1e-12));
    for (double t : {-0.9, -0.3, 0.0, 0.4, 0.8}) {
        CHECK(2 * du.value.eval(t) == doctest::Approx(kappa1(t)).epsilon(1e-6));
        // kappa0 = 1 - acos(t)/pi
        CHECK(2 * du.derivative.eval(t) == doctest::Approx(1 - std::acos(t) / pi).epsilon(1e-5));
    }
}

TEST_CASE("relu dual around a nonzero constant term")
{
    // c(t) = 0.3 + 0.5 t with diagonal 0.8
    Series c(48);
    c[0] = 0.3;
    c[1] = 0.5;
    const auto du = relu_dual(c, 0.8);
    for (double t : {-0.7, 0.0, 0.6}) {
        const double rho = (0.3 + 0.5 * t) / 0.8;
        CHECK(du.value.eval(t) == doctest::Approx(0.8 / 2 * kappa1(rho)).epsilon(1e-9));
        CHECK(du.derivative.eval(t) == doctest::Approx(0.5 * (1 - std::acos(rho) / pi)).epsilon(1e-9));
    }
    Series wide(8);
    wide[1] = 2.0;
    CHECK_THROWS_AS(relu_dual(wide, 1.0), NumericError);
}

TEST_CASE("erf dual")
{
    const double q = 0.7;
    const auto du = erf_dual(Series::monomial(48, 1, q), q);
    for (double t : {-0.8, 0.2, 0.9}) {
        const double s = 2 * q * t / (1 + 2 * q);
        CHECK(du.value.eval(t) == doctest::Approx(2 / pi * std::asin(s)).epsilon(1e-9));
        CHECK(du.derivative.eval(t) == doctest::Approx(4 / pi / std::sqrt((1 + 2 * q) * (1 + 2 * q) - 4 * q * q * t * t)).epsilon(1e-9));
    }
}

TEST_CASE("identity network gives the affine input layer")
{
    const auto a = make_arch(1, Activation::identity, KernelKind::nngp, {2.0, 1.0}, {0.3, 0.0}, 10, VarianceConvention::effective);
    const auto ks = build_kernel_series(a, 10, 8);
    CHECK(ks.b[0] == doctest::Approx(0.3));
    CHECK(ks.b[1] == doctest::Approx(2.0));
    for (int q = 2; q <= 8; ++q) CHECK(ks.b[static_cast<std::size_t>(q)] == 0.0);
}

TEST_CASE("series vs closed-form composition within the tail bound")
{
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    struct Case {
        int depth;
        Activation act;
        KernelKind kind;
    };
    for (auto c : {Case{3, Activation::relu, KernelKind::ntk}, Case{2, Activation::relu, KernelKind::nngp},
                   Case{2, Activation::erf, KernelKind::nngp}, Case{2, Activation::erf, KernelKind::ntk}}) {
        const std::vector<double> sw(static_cast<std::size_t>(c.depth) + 1, 1.0);
        const auto a = make_arch(c.depth, c.act, c.kind, sw, sw, 50, VarianceConvention::fan_in);
        const auto ks = build_kernel_series(a, 50, 32);
        CHECK(ks.diagnostics.empty());
        for (double b : ks.b) CHECK(b >= 0.0);
        const double bound = tail_bound(ks);
        CHECK(bound >= -1e-12);
        for (int i = 0; i < 64; ++i) {
            const double t = u(rng);
            CHECK(std::abs(eval_kernel(ks, t) - eval_exact(a, t)) <= bound + 1e-12);
        }
        CHECK(eval_exact(a, 1.0) == doctest::Approx(ks.kxx).epsilon(1e-14));
        CHECK(exact_diagonal(a) == doctest::Approx(ks.kxx).epsilon(1e-14));
    }
}

TEST_CASE("eval_kernel basics")
{
    CHECK(eval_kernel(user_series(3, {1.0}), 0.9) == 1.0);
    CHECK(eval_kernel(user_series(3, {0.0, 1.0}), -0.35) == -0.35);
}

TEST_CASE("trim")
{
    const auto ks = user_series(5, {0.5, 0.3, 0.2});
    const auto t0 = trim(ks, 0);
    CHECK(t0.sigma_r2 == doctest::Approx(0.5));
    CHECK(eval_kernel(t0, 0.7) == doctest::Approx(0.5));
    const auto tq = trim(ks, 2);
    CHECK(tq.sigma_r2 == 0.0);
    CHECK(eval_kernel(tq, 0.4) == eval_kernel(ks, 0.4));
    CHECK_THROWS_AS(trim(ks, 3), ConfigError);
    CHECK_THROWS_AS(trim(ks, -1), ConfigError);

    const auto a = make_arch(3, Activation::relu, KernelKind::ntk, {1, 1, 1, 1}, {1, 1, 1, 1}, 50, VarianceConvention::fan_in);
    const auto big = build_kernel_series(a, 50, 32);
    double prev = big.kxx;
    for (int r = 0; r <= 32; ++r) {
        const auto tk = trim(big, r);
        CHECK(tk.sigma_r2 >= 0.0);
        CHECK(tk.sigma_r2 <= prev);
        prev = tk.sigma_r2;
        CHECK(std::abs(tk.trimmed_diagonal() + tk.sigma_r2 - big.kxx) <= 1e-12 * big.kxx);
    }
    CHECK(trim(big, 3).sigma_r2 == doctest::Approx(0.018).epsilon(0.05));
}

TEST_CASE("discrepancy estimate")
{
    const auto a = make_arch(3, Activation::relu, KernelKind::ntk, {1, 1, 1, 1}, {1, 1, 1, 1}, 50, VarianceConvention::fan_in);
    const auto tk = trim(build_kernel_series(a, 50, 32), 3);
    CHECK(discrepancy_estimate(tk, 2000) / discrepancy_estimate(tk, 1000) == doctest::Approx(std::sqrt(2.0)));
    CHECK(discrepancy_estimate(trim(build_kernel_series(a, 50, 32), 30), 1000) < 1e-20);
}

TEST_CASE("variance conventions and validation")
{
    const auto f = make_arch(2, Activation::relu, KernelKind::ntk, {2, 2, 2}, {0.1, 0.1, 0.1}, 50, VarianceConvention::fan_in);
    CHECK(f.sigma_w[0] == doctest::Approx(2.0 / 50));
    CHECK(f.sigma_w[1] == 2.0);
    const auto p = make_arch(2, Activation::relu, KernelKind::ntk, {2, 2, 2}, {0.1, 0.1, 0.1}, 50, VarianceConvention::per_weight, 100);
    CHECK(p.sigma_w[0] == 2.0);
    CHECK(p.sigma_w[1] == 200.0);
    CHECK_THROWS_AS(make_arch(2, Activation::relu, KernelKind::ntk, {1, 1}, {1, 1, 1}, 5, VarianceConvention::effective), ConfigError);
    CHECK_THROWS_AS(make_arch(1, Activation::relu, KernelKind::ntk, {-1, 1}, {1, 1}, 5, VarianceConvention::effective), ConfigError);
    CHECK(parse_activation("erf") == Activation::erf);
    CHECK(to_string(parse_convention("per_weight")) == "per_weight");
    CHECK_THROWS_AS(parse_kernel_kind("gp"), ConfigError);
}

} // TEST_SUITE
