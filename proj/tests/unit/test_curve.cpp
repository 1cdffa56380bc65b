#include <cmath>
#include <random>

#include "doctest.h"
#include "lcurve/curve.hpp"
#include "lcurve/errors.hpp"
#include "lcurve/kernel.hpp"

using namespace lcurve;

namespace {

Spectrum make_spectrum(std::vector<double> lambda, std::vector<double> deg, double sigma2)
{
    Spectrum sp;
    sp.d = 10;
    sp.lambda = std::move(lambda);
    sp.deg = std::move(deg);
    sp.sigma2 = sigma2;
    sp.kxx = 0.0;
    for (std::size_t l = 0; l < sp.lambda.size(); ++l) sp.kxx += sp.deg[l] * sp.lambda[l];
    return sp;
}

// Two-mode rotation-invariant mean prediction written out term by term.
double brute_two_mode(double l1, double g1, double w1, double l2, double g2, double w2, double s2, double eta, bool sl)
{
    const double a = 1.0 / l1 + eta / s2, b = 1.0 / l2 + eta / s2;
    const double C = g1 / a + g2 / b;
    auto resid = [&](double lam) {
        const double shrink = eta * lam / s2 / (1.0 + eta * lam / s2);
        double r = 1.0 - shrink;
        if (sl) r += C * (eta / s2) * (eta / s2) * lam / ((1.0 + eta * lam / s2) * (1.0 + eta * lam / s2)) / eta;
        return r;
    };
    const double r1 = resid(l1), r2 = resid(l2);
    return w1 * r1 * r1 + w2 * r2 * r2;
}

} // namespace

TEST_SUITE("curve") {

TEST_CASE("C constant limits")
{
    const auto one = make_spectrum({0.5}, {1}, 0.1);
    CHECK(c_constant(one, 7.0) == doctest::Approx(1.0 / (1.0 / 0.5 + 7.0 / 0.1)));
    const auto sp = make_spectrum({1.0, 0.1, 0.0}, {1, 5, 9}, 0.2);
    const double eta = 1e9;
    CHECK(c_constant(sp, eta) == doctest::Approx(6 * 0.2 / eta).epsilon(1e-6));
    CHECK_THROWS_AS(c_constant(make_spectrum({1.0}, {1}, 0.0), 5.0), ConfigError);
}

TEST_CASE("per-degree residuals")
{
    const auto sp = make_spectrum({0.01, 0.5, 0.0}, {1, 3, 5}, 1.0);
    const auto ek = predict_mean_residual(sp, 100.0, ResidualOrder::ek);
    CHECK(ek[0] == doctest::Approx(0.5));
    CHECK(ek[2] == 1.0);
    const auto sl = predict_mean_residual(sp, 100.0, ResidualOrder::ek_sl);
    CHECK(sl[0] > ek[0]);
    CHECK(sl[1] > ek[1]);
    CHECK(sl[2] == 1.0);
    const auto sharp = make_spectrum({0.3}, {1}, 1e-12);
    CHECK(predict_mean_residual(sharp, 1e6, ResidualOrder::ek)[0] < 1e-16);
}

TEST_CASE("daee limits, floor and brute-force two-mode check")
{
    const auto sp = make_spectrum({0.2, 0.03}, {1, 4}, 0.05);
    CHECK(daee(sp, spectral_target(10, {0.0, 0.0}), 50.0).err_sl == 0.0);
    const auto tgt = spectral_target(10, {0.4, 0.6, 0.3}, 0.1);
    const auto tiny = daee(sp, tgt, 1e-9);
    CHECK(tiny.err_ek == doctest::Approx(tgt.power()).epsilon(1e-6));
    CHECK(tiny.err_sl == doctest::Approx(tgt.power()).epsilon(1e-6));
    for (double eta : {1.0, 10.0, 100.0, 1000.0}) {
        const auto p = daee(sp, tgt, eta);
        CHECK(p.err_ek >= unlearnable_floor(sp, tgt));
        CHECK(unlearnable_floor(sp, tgt) == doctest::Approx(0.4));
        const double f = 0.3 + 0.1;
        CHECK(p.err_ek == doctest::Approx(f + brute_two_mode(0.2, 1, 0.4, 0.03, 4, 0.6, 0.05, eta, false)).epsilon(1e-12));
        CHECK(p.err_sl == doctest::Approx(f + brute_two_mode(0.2, 1, 0.4, 0.03, 4, 0.6, 0.05, eta, true)).epsilon(1e-12));
        CHECK(p.c_over_sigma2 == doctest::Approx(c_constant(sp, eta) / 0.05));
    }
}

TEST_CASE("single-mode closed form and noise/eta exchange")
{
    const double lam = 0.4, s2 = 0.3, w2 = 0.8;
    const auto sp = make_spectrum({lam}, {1}, s2);
    const auto tgt = spectral_target(3, {w2});
    for (double eta : {0.5, 3.0, 40.0}) {
        const double n = s2 / eta;
        const double C = 1.0 / (1.0 / lam + eta / s2);
        const double r = n / (lam + n) + lam * C / eta / ((lam + n) * (lam + n));
        CHECK(daee(sp, tgt, eta).err_sl == doctest::Approx(w2 * r * r).epsilon(1e-13));
        const auto doubled = make_spectrum({lam}, {1}, 2 * s2);
        CHECK(daee(doubled, tgt, eta).err_ek == doctest::Approx(daee(sp, tgt, eta / 2).err_ek).epsilon(1e-13));
    }
}

TEST_CASE("ordering, monotonicity and scale covariance on random spectra")
{
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int rep = 0; rep < 50; ++rep) {
        std::vector<double> lam, deg, w2;
        for (int l = 0; l < 5; ++l) {
            lam.push_back(u(rng) < 0.2 ? 0.0 : std::pow(10.0, -4 * u(rng)));
            deg.push_back(1 + std::floor(20 * u(rng)));
            w2.push_back(u(rng));
        }
        const auto sp = make_spectrum(lam, deg, 1e-3 + u(rng));
        const auto tgt = spectral_target(10, w2, 0.1 * u(rng));
        double prev = 1e300;
        for (double eta = 1.0; eta < 1e5; eta *= 1.7) {
            const auto p = daee(sp, tgt, eta);
            CHECK(p.err_sl >= p.err_ek);
            CHECK(p.err_ek <= prev * (1 + 1e-14));
            prev = p.err_ek;
            CHECK(p.err_ek >= unlearnable_floor(sp, tgt) * (1 - 1e-14));
            CHECK(p.err_ek <= tgt.power() * (1 + 1e-14));
        }
        auto scaled = sp;
        for (auto& v : scaled.lambda) v *= 7.5;
        scaled.sigma2 *= 7.5;
        const auto a = predict_mean_residual(sp, 30.0), b = predict_mean_residual(scaled, 30.0);
        for (std::size_t l = 0; l < a.size(); ++l) CHECK(b[l] == doctest::Approx(a[l]).epsilon(1e-12));
    }
}

TEST_CASE("learning curve grid and trust flags")
{
    const auto sp = make_spectrum({0.2, 0.03}, {1, 4}, 0.05);
    const auto tgt = spectral_target(10, {0.5, 0.5});
    const auto pts = learning_curve(sp, tgt, {1.0, 10.0, 100.0, 1000.0}, 0.2);
    CHECK(pts.size() == 4);
    for (const auto& p : pts) CHECK(p.trusted == (p.c_over_sigma2 <= 0.2));
    CHECK_FALSE(pts.front().trusted);
    CHECK(pts.back().trusted);
    CHECK_THROWS_AS(learning_curve(sp, tgt, {1.0, 1.0}), ConfigError);
}

TEST_CASE("reference setup: l=1 learned, l=2 partially suppressed at eta=1000")
{
    const auto a = make_arch(3, Activation::relu, KernelKind::ntk, {1, 1, 1, 1}, {1, 1, 1, 1}, 50, VarianceConvention::fan_in);
    const auto tk = trim(build_kernel_series(a, 50, 32), 3);
    const auto sp = eigenvalues(tk, 0.0, 3);
    const auto r = predict_mean_residual(sp, 1000.0, ResidualOrder::ek);
    CHECK(1 - r[1] > 0.97);
    const double learned2 = 1 - r[2];
    CHECK(learned2 > 0.2);
    CHECK(learned2 < 0.4);
}

} // TEST_SUITE
