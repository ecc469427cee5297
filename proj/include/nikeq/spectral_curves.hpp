#pragma once
#include <array>
#include <complex>
#include <functional>
#include <string>
#include <vector>

#include "nikeq/polynomial.hpp"

namespace nikeq {

using cplx = std::complex<double>;

enum class CurveKind { Bessel, Pastur, QuarticSource, PollaczekPsi };

// H³ + p2(z)H² + p1(z)H + p0(z) = 0 with Laurent-polynomial coefficients.
class AlgebraicCurve {
public:
    AlgebraicCurve(CurveKind kind, double a, double b);
    CurveKind kind() const { return kind_; }
    std::string name() const;
    double a() const { return a_; }
    double b() const { return b_; }

    std::array<cplx, 3> coefficients(cplx z) const;  // {p2, p1, p0}
    std::array<cplx, 3> asymptotic(cplx z) const;    // labeling expansions {H0, H1, H2}
    const std::vector<cplx>& singular_points() const { return singular_; }
    bool is_singular(cplx z) const {
        for (cplx s : singular_) if (s == z) return true;
        return false;
    }
    // Laurent coefficients of p2, p1, p0: exponent -> coefficient, exponents from lowest.
    struct Laurent {
        int low = 0;
        std::vector<cplx> c;
    };
    std::array<Laurent, 3> laurent() const;

    // Branch points, computed once at construction.
    const std::vector<cplx>& branch_point_cache() const { return branch_cache_; }

private:
    CurveKind kind_;
    double a_, b_;
    std::vector<cplx> singular_;
    std::vector<cplx> branch_cache_;
};

AlgebraicCurve builtin_curve(const std::string& kind, double a = 0, double b = 0);
double quartic_a_m(double b);  // lower boundary, b in (-2, -√3]
double quartic_a_M(double b);  // upper boundary, b <= -√3

struct BranchTriple {
    std::array<cplx, 3> H;
};

BranchTriple branch_values(const AlgebraicCurve& c, cplx z);

struct BranchPoint {
    cplx z;
    double double_root_gap;  // min distance between cubic roots at z
    bool from_singular;      // ramified declared singular point
};

struct BranchPointSet {
    std::vector<cplx> points;
    std::vector<BranchPoint> details;
    Polynomial<cplx> discriminant;  // cleared of denominators and of z^k factors
};

BranchPointSet branch_points(const AlgebraicCurve& c);

// Boundary value of all three branches at x from the side `dir` (unit complex
// offset direction, e.g. +i for the upper half plane), Richardson-extrapolated
// from eps ∈ {1e-4, 1e-5, 1e-6}·max(1,|x|).
BranchTriple boundary_values(const AlgebraicCurve& c, cplx x, cplx dir);
// The three raw samples used above (for stability checks).
std::array<BranchTriple, 3> boundary_samples(const AlgebraicCurve& c, cplx x, cplx dir);

struct DensityValue {
    double value = 0;
    bool in_support = false;
    bool clipped = false;
};

// λ₁ density on the real axis (bessel: x in (0, 27/2); pollaczek: line form).
DensityValue density_lambda1(const AlgebraicCurve& c, double x);
// λ₂ density.  bessel: x < 0 on the half-line; pollaczek: x is the imaginary
// coordinate on iℝ.  sigma_density is the constraint density at x.
DensityValue density_lambda2(const AlgebraicCurve& c, const std::function<double(double)>& sigma_density,
                             double x);

cplx pollaczek_uniformization(cplx psi);

// Pollaczek densities pushed to half-line coordinates x = c·ζ².
double pollaczek_halfline_lambda1(double x, double c);
double pollaczek_halfline_lambda2(double x, double c);

// Constraint densities of the curve-consistent half-line problems.
double bessel_sigma_density(double x);                 // √2/(π√|x|)
double pollaczek_line_sigma_density(double y);         // 1 on iℝ

}  // namespace nikeq
