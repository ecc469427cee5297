#pragma once
#include <array>
#include <complex>
#include <vector>

#include "nikeq/polynomial.hpp"
#include "nikeq/precision.hpp"

namespace nikeq {

struct RealRoot {
    Real root;
    Real residual;     // |p(root)|
    int multiplicity;  // > 1 only when the polynomial has a detected common factor with p'
};

enum class MultipleRootPolicy { Flag, Throw };

// Sturm-counted bisection with safeguarded Newton polish.  Roots within a
// few ulps of the interval ends count as inside.
std::vector<RealRoot> isolate_real_roots(const Polynomial<Real>& p, const Real& a, const Real& b,
                                         const PrecisionContext& ctx,
                                         MultipleRootPolicy policy = MultipleRootPolicy::Throw);

// Number of distinct real roots in (a, b].
int count_real_roots(const Polynomial<Real>& p, const Real& a, const Real& b,
                     const PrecisionContext& ctx);

struct CubicRoots {
    std::array<std::complex<double>, 3> roots;
    std::array<int, 3> multiplicity{1, 1, 1};
};

// Roots of x³ + c2 x² + c1 x + c0.
CubicRoots solve_cubic(std::complex<double> c2, std::complex<double> c1, std::complex<double> c0);

}  // namespace nikeq
