#pragma once

#include <cstddef>
#include <vector>

namespace lcurve {

// Power series c_0 + c_1 t + ... + c_Q t^Q, truncated at a fixed order Q.
class Series {
public:
    Series() = default;
    explicit Series(int order) : c_(static_cast<std::size_t>(order) + 1, 0.0) {}
    Series(int order, std::vector<double> coeffs);

    static Series constant(int order, double v);
    // coeff * t^power
    static Series monomial(int order, int power, double coeff);

    int order() const { return static_cast<int>(c_.size()) - 1; }
    double operator[](std::size_t k) const { return c_[k]; }
    double& operator[](std::size_t k) { return c_[k]; }
    const std::vector<double>& coeffs() const { return c_; }

    double eval(double t) const;
    // indices of nonzero coefficients
    std::vector<std::size_t> support() const;

    Series& operator+=(const Series& o);
    Series& operator-=(const Series& o);
    Series& operator*=(double s);

private:
    std::vector<double> c_;
};

Series operator+(Series a, const Series& b);
Series operator-(Series a, const Series& b);
Series operator*(Series a, double s);
Series operator*(double s, Series a);
Series operator+(Series a, double s);

// Truncated product; cost scales with the sparser operand's support.
Series mul(const Series& a, const Series& b);

// f(g(t)) for g(0) = 0, exact through the common order.
Series compose(const Series& outer, const Series& inner);

// f^e for real e, f(0) != 0 (J.C.P. Miller recurrence).
Series pow(const Series& f, double e);

// antiderivative vanishing at 0
Series integrate(const Series& f);

Series derivative(const Series& f);

} // namespace lcurve
