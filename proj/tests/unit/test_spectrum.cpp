#include <cmath>
#include <limits>
#include <random>

#include "doctest.h"
#include "lcurve/errors.hpp"
#include "lcurve/kernel.hpp"
#include "lcurve/spectrum.hpp"

using namespace lcurve;

TEST_SUITE("spectrum") {

TEST_CASE("constant and linear kernels")
{
    for (int d : {3, 10, 50}) {
        const auto c = eigenvalues(user_series(d, {0.7}), 0.0);
        CHECK(c.lambda.size() == 1);
        CHECK(c.lambda[0] == doctest::Approx(0.7).epsilon(1e-14));
        const auto l = eigenvalues(user_series(d, {0.0, 1.3}), 0.0);
        CHECK(l.lambda[0] == 0.0);
        CHECK(l.lambda[1] == doctest::Approx(1.3 / d).epsilon(1e-14));
    }
}

TEST_CASE("degrees beyond r are exact zeros and noise includes sigma_r^2")
{
    const auto a = make_arch(3, Activation::relu, KernelKind::ntk, {1, 1, 1, 1}, {1, 1, 1, 1}, 50, VarianceConvention::fan_in);
    const auto tk = trim(build_kernel_series(a, 50, 32), 3);
    const auto sp = eigenvalues(tk, 0.01, 6);
    for (int l = 4; l <= 6; ++l) CHECK(sp.lambda[static_cast<std::size_t>(l)] == 0.0);
    CHECK(sp.sigma2 == doctest::Approx(0.01 + tk.sigma_r2));
    double trace = 0.0;
    for (std::size_t l = 0; l < sp.lambda.size(); ++l) {
        trace += sp.deg[l] * sp.lambda[l];
        CHECK(sp.lambda[l] <= sp.kxx / sp.deg[l]);
    }
    CHECK(std::abs(trace - tk.trimmed_diagonal()) < 1e-8 * tk.trimmed_diagonal());
}

TEST_CASE("negative eigenvalues are reported")
{
    CHECK_THROWS_AS(eigenvalues(user_series(3, {1.0, -0.5}), 0.0), NumericError);
}

TEST_CASE("check_spectrum rejects bound and trace violations")
{
    Spectrum sp;
    sp.d = 3;
    sp.kxx = 1.0;
    sp.lambda = {0.5, 0.4};
    sp.deg = {1, 3};
    CHECK_THROWS_AS(check_spectrum(sp, std::numeric_limits<double>::quiet_NaN()), InvariantViolation);
    sp.lambda = {0.5, 0.1};
    CHECK_NOTHROW(check_spectrum(sp, 0.8));
    CHECK_THROWS_AS(check_spectrum(sp, 0.9), InvariantViolation);
}

TEST_CASE("series eigenvalues agree with the two-layer closed forms")
{
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(0.2, 3.0);
    for (int d : {10, 50}) {
        for (auto kind : {KernelKind::nngp, KernelKind::ntk}) {
            for (int rep = 0; rep < 3; ++rep) {
                const double s0 = u(rng), s1 = u(rng);
                const auto a = make_arch(1, Activation::relu, kind, {s0, s1}, {0, 0}, d, VarianceConvention::effective);
                const auto sp = eigenvalues(build_kernel_series(a, d, 1000), 0.0, 6);
                const auto cf = closed_form_2layer(d, s0, s1, kind, 6);
                for (int l = 0; l <= 6; ++l) {
                    const auto i = static_cast<std::size_t>(l);
                    if (l % 2 == 1 && l > 1) {
                        CHECK(cf.lambda[i] == 0.0);
                        CHECK(sp.lambda[i] == 0.0);
                    } else {
                        CHECK(sp.lambda[i] == doctest::Approx(cf.lambda[i]).epsilon(1e-6));
                    }
                }
                if (kind == KernelKind::nngp) CHECK(cf.lambda[1] == doctest::Approx(s0 * s1 / (4.0 * d)));
            }
        }
    }
}

TEST_CASE("eigenvalues fall off like d^-l")
{
    auto spec = [](int d) {
        const auto a = make_arch(2, Activation::relu, KernelKind::ntk, {1, 1, 1}, {0.1, 0.1, 0.1}, d, VarianceConvention::effective);
        return eigenvalues(build_kernel_series(a, d, 32), 0.0, 4);
    };
    const auto a = spec(20), b = spec(40);
    for (int l = 0; l <= 4; ++l) {
        const auto i = static_cast<std::size_t>(l);
        CHECK(b.lambda[i] / a.lambda[i] <= std::pow(2.0, -l) * 1.5);
    }
}

TEST_CASE("Gram eigensolve on trivial kernels")
{
    const auto c = gram_eigensolve_check(user_series(4, {0.8}), 4, 400, 3, 3);
    REQUIRE(!c.empty());
    CHECK(c[0].multiplicity == 1);
    CHECK(c[0].mean == doctest::Approx(0.8).epsilon(1e-10));
    const auto l = gram_eigensolve_check(user_series(10, {0.0, 1.0}), 10, 1000, 5, 2);
    REQUIRE(!l.empty());
    CHECK(l[0].multiplicity == 10);
    CHECK(l[0].mean == doctest::Approx(0.1).epsilon(0.05));
    CHECK_THROWS_AS(gram_eigensolve_check(user_series(10, {1.0}), 10, 5000, 1), ConfigError);
}

} // TEST_SUITE
