#include <cmath>
#include <random>
#include <stdexcept>

#include "doctest.h"
#include "lcurve/series.hpp"

using namespace lcurve;

namespace {

Series random_series(int order, std::mt19937_64& rng, double sparsity = 0.0)
{
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Series s(order);
    for (int k = 0; k <= order; ++k)
        if (u(rng) >= 2 * sparsity - 1) s[static_cast<std::size_t>(k)] = u(rng) / (1 + k);
    return s;
}

} // namespace

TEST_SUITE("series") {

TEST_CASE("mul matches the naive truncated convolution")
{
    std::mt19937_64 rng(5);
    for (double sp : {0.0, 0.7}) {
        const auto a = random_series(20, rng, sp), b = random_series(20, rng);
        const auto c = mul(a, b);
        for (int n = 0; n <= 20; ++n) {
            double s = 0.0;
            for (int k = 0; k <= n; ++k) s += a[static_cast<std::size_t>(k)] * b[static_cast<std::size_t>(n - k)];
            CHECK(c[static_cast<std::size_t>(n)] == doctest::Approx(s).epsilon(1e-13));
        }
    }
    CHECK_THROWS_AS(mul(Series(3), Series(4)), std::invalid_argument);
}

TEST_CASE("compose against pointwise evaluation")
{
    const int Q = 40;
    Series ex(Q);
    double f = 1.0;
    for (int k = 0; k <= Q; ++k) {
        ex[static_cast<std::size_t>(k)] = 1.0 / f;
        f *= k + 1;
    }
    Series inner(Q);
    inner[1] = 0.5;
    inner[2] = -0.25;
    const auto c = compose(ex, inner);
    for (double t : {-0.4, 0.1, 0.3}) CHECK(c.eval(t) == doctest::Approx(std::exp(0.5 * t - 0.25 * t * t)).epsilon(1e-12));
    // monomial inner -> spread coefficients
    const auto m = compose(ex, Series::monomial(Q, 2, 1.0));
    CHECK(m[4] == doctest::Approx(0.5));
    CHECK(m[3] == 0.0);
    Series bad(Q);
    bad[0] = 1.0;
    CHECK_THROWS_AS(compose(ex, bad), std::invalid_argument);
}

TEST_CASE("pow: binomial series and inverse")
{
    const int Q = 30;
    Series f(Q);
    f[0] = 1.0;
    f[1] = -1.0;
    const auto h = pow(f, -0.5);
    double c = 1.0;
    for (int k = 0; k <= Q; ++k) {
        CHECK(h[static_cast<std::size_t>(k)] == doctest::Approx(c).epsilon(1e-12));
        c *= (k + 0.5) / (k + 1);
    }
    std::mt19937_64 rng(9);
    auto g = random_series(Q, rng);
    g[0] = 2.0;
    const auto prod = mul(pow(g, 1.7), pow(g, -1.7));
    CHECK(prod[0] == doctest::Approx(1.0));
    for (int k = 1; k <= Q; ++k) CHECK(std::abs(prod[static_cast<std::size_t>(k)]) < 1e-11);
    CHECK_THROWS_AS(pow(Series::monomial(Q, 1, 1.0), 0.5), std::domain_error);
}

TEST_CASE("integrate and derivative")
{
    std::mt19937_64 rng(2);
    const auto a = random_series(15, rng);
    const auto back = derivative(integrate(a));
    for (int k = 0; k < 15; ++k) CHECK(back[static_cast<std::size_t>(k)] == doctest::Approx(a[static_cast<std::size_t>(k)]));
    CHECK(integrate(a)[0] == 0.0);
    const auto d = derivative(Series::monomial(5, 3, 2.0));
    CHECK(d[2] == 6.0);
    CHECK(d.support().size() == 1);
}

TEST_CASE("arithmetic helpers")
{
    auto a = Series::constant(4, 2.0) + Series::monomial(4, 1, 3.0);
    CHECK(a.eval(2.0) == 8.0);
    a *= 0.5;
    CHECK(a[1] == 1.5);
    const auto b = a - a;
    CHECK(b.support().empty());
    CHECK((a + 1.0)[0] == 2.0);
}

} // TEST_SUITE
