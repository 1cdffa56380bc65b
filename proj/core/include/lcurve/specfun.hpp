#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace lcurve {

// Gegenbauer polynomials on S^{d-1}, normalized so that P_l(1) = 1.
struct LegendreBasis {
    int d = 3;
    int lmax = 0;
};

double legendre_eval(const LegendreBasis& basis, int l, double t);

// Fills out[0..lmax] with P_0(t)..P_lmax(t). No range checks.
void legendre_all(int d, int lmax, double t, std::span<double> out);

// Exact multiplicity of degree-l harmonics on S^{d-1}; throws std::overflow_error
// when the value does not fit in 64 bits.
std::uint64_t degeneracy(int d, int l);

double log_degeneracy(int d, int l);

// deg(l) as a double; exact whenever the integer path fits.
double degeneracy_real(int d, int l);

// Gauss rule for the normalized measure dmu_1 ~ (1 - t^2)^{(d-3)/2} dt.
struct Quadrature1D {
    std::vector<double> nodes;
    std::vector<double> weights;
    int exact_degree = 0;
};

Quadrature1D sphere_quadrature(int d, int n = 256);

double quadrature_integrate(const Quadrature1D& q, const auto& f)
{
    double s = 0.0;
    for (std::size_t i = 0; i < q.nodes.size(); ++i) s += q.weights[i] * f(q.nodes[i]);
    return s;
}

// n x d matrix of i.i.d. uniform points on S^{d-1}.
Eigen::MatrixXd sphere_sample(int d, int n, std::uint64_t seed);

// Counter-based stream splitting for per-task seeds.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

struct OverlapMoment {
    double exact = 0.0;
    // Laplace approximation with the curvature of the log-integrand at the peak.
    std::optional<double> saddle;
    // The printed closed form [1-(p/(d-3))^2]^{-1/2} (p/(p+d-3))^{p/2} ((d-3)/(p+d-3))^{(d-3)/2}.
    std::optional<double> saddle_printed;
};

// <t^p> for t = x.x' with x, x' uniform on S^{d-1}.
OverlapMoment overlap_moment(int d, int p);

} // namespace lcurve
