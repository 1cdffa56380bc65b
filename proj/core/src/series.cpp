#include "lcurve/series.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace lcurve {

Series::Series(int order, std::vector<double> coeffs) : c_(std::move(coeffs))
{
    c_.resize(static_cast<std::size_t>(order) + 1, 0.0);
}

Series Series::constant(int order, double v)
{
    Series s(order);
    s.c_[0] = v;
    return s;
}

Series Series::monomial(int order, int power, double coeff)
{
    Series s(order);
    if (power <= order) s.c_[static_cast<std::size_t>(power)] = coeff;
    return s;
}

double Series::eval(double t) const
{
    double v = 0.0;
    for (auto it = c_.rbegin(); it != c_.rend(); ++it) v = v * t + *it;
    return v;
}

std::vector<std::size_t> Series::support() const
{
    std::vector<std::size_t> idx;
    for (std::size_t k = 0; k < c_.size(); ++k)
        if (c_[k] != 0.0) idx.push_back(k);
    return idx;
}

Series& Series::operator+=(const Series& o)
{
    if (o.order() != order()) throw std::invalid_argument("Series: order mismatch");
    for (std::size_t k = 0; k < c_.size(); ++k) c_[k] += o.c_[k];
    return *this;
}

Series& Series::operator-=(const Series& o)
{
    if (o.order() != order()) throw std::invalid_argument("Series: order mismatch");
    for (std::size_t k = 0; k < c_.size(); ++k) c_[k] -= o.c_[k];
    return *this;
}

Series& Series::operator*=(double s)
{
    for (auto& v : c_) v *= s;
    return *this;
}

Series operator+(Series a, const Series& b) { return a += b; }
Series operator-(Series a, const Series& b) { return a -= b; }
Series operator*(Series a, double s) { return a *= s; }
Series operator*(double s, Series a) { return a *= s; }
Series operator+(Series a, double s)
{
    a[0] += s;
    return a;
}

Series mul(const Series& a, const Series& b)
{
    if (a.order() != b.order()) throw std::invalid_argument("mul: order mismatch");
    const int q = a.order();
    auto sa = a.support();
    auto sb = b.support();
    const Series& dense = sa.size() <= sb.size() ? b : a;
    const auto& sparse_idx = sa.size() <= sb.size() ? sa : sb;
    const Series& sparse = sa.size() <= sb.size() ? a : b;
    Series r(q);
    for (std::size_t i : sparse_idx) {
        const double ci = sparse[i];
        for (std::size_t j = 0; i + j <= static_cast<std::size_t>(q); ++j) r[i + j] += ci * dense[j];
    }
    return r;
}

Series compose(const Series& outer, const Series& inner)
{
    if (outer.order() != inner.order()) throw std::invalid_argument("compose: order mismatch");
    if (inner[0] != 0.0) throw std::invalid_argument("compose: inner series must vanish at 0");
    const int q = outer.order();
    auto si = inner.support();
    if (si.empty()) return Series::constant(q, outer[0]);
    if (si.size() == 1) {
        // inner = c t^m: coefficient k of outer lands on t^{k m}
        const std::size_t m = si[0];
        const double c = inner[m];
        Series r(q);
        double ck = 1.0;
        for (std::size_t k = 0; k * m <= static_cast<std::size_t>(q); ++k) {
            r[k * m] = outer[k] * ck;
            ck *= c;
        }
        return r;
    }
    Series r = Series::constant(q, outer[static_cast<std::size_t>(q)]);
    for (int k = q - 1; k >= 0; --k) {
        r = mul(r, inner);
        r[0] += outer[static_cast<std::size_t>(k)];
    }
    return r;
}

Series pow(const Series& f, double e)
{
    const int q = f.order();
    if (f[0] == 0.0) throw std::domain_error("pow: series must have a nonzero constant term");
    if (f[0] < 0.0 && e != std::floor(e)) throw std::domain_error("pow: negative constant term with non-integer power");
    auto sf = f.support();
    Series g(q);
    g[0] = std::pow(f[0], e);
    for (int n = 1; n <= q; ++n) {
        double s = 0.0;
        for (std::size_t k : sf) {
            if (k == 0) continue;
            if (k > static_cast<std::size_t>(n)) break;
            s += ((e + 1.0) * static_cast<double>(k) - n) * f[k] * g[static_cast<std::size_t>(n) - k];
        }
        g[static_cast<std::size_t>(n)] = s / (n * f[0]);
    }
    return g;
}

Series integrate(const Series& f)
{
    const int q = f.order();
    Series r(q);
    for (int k = 0; k < q; ++k) r[static_cast<std::size_t>(k) + 1] = f[static_cast<std::size_t>(k)] / (k + 1.0);
    return r;
}

Series derivative(const Series& f)
{
    const int q = f.order();
    Series r(q);
    for (int k = 1; k <= q; ++k) r[static_cast<std::size_t>(k) - 1] = k * f[static_cast<std::size_t>(k)];
    return r;
}

} // namespace lcurve
