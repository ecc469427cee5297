#pragma once
#include <functional>
#include <limits>
#include <vector>

#include "nikeq/precision.hpp"

namespace nikeq {

template <class T>
struct QuadResult {
    T value{};
    T error_bound{};
    int levels = 0;
    long evaluations = 0;
    std::vector<T> level_errors;  // |I_k - I_{k-1}| + truncation, per level k >= 1
};

struct QuadTolerances {
    double abs_tol = 1e-13;
    double rel_tol = 1e-13;
    int max_level = 12;
    int min_level = 3;
    int precision_bits = 53;  // for the roundoff term of the error bound
};

// Double-exponential quadrature (tanh-sinh on finite ranges, exp-sinh on
// half-lines, sinh-sinh on the line).  Infinite endpoints are passed as
// +-infinity.  The integrand only sees interior points; endpoint
// singularities are fine if integrable.
template <class T>
QuadResult<T> integrate_de(const std::function<T(const T&)>& f, const T& a, const T& b,
                           const QuadTolerances& tol);

QuadResult<Real> integrate_adaptive(const std::function<Real(const Real&)>& f, const Real& a,
                                    const Real& b, const PrecisionContext& ctx);

QuadResult<double> integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                                      double abs_tol = 1e-12, double rel_tol = 1e-12);

// A frozen DE rule at a fixed level: ∫ g(x) dens(x) dx ≈ Σ w_i g(x_i).  Nodes
// whose weighted density falls below `cutoff` (relative to the largest) are
// dropped.  `grow` bounds the growth of g so the cutoff accounts for it:
// nodes are kept while w·dens·(1+x)^grow exceeds the cutoff.
struct QuadratureRule {
    std::vector<Real> nodes;
    std::vector<Real> weights;
};

QuadratureRule make_halfline_rule(const std::function<Real(const Real&)>& density, int level,
                                  double grow, const Real& cutoff);

}  // namespace nikeq
