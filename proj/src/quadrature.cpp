#include "nikeq/quadrature.hpp"

#include <cmath>
#include <sstream>

#include "nikeq/errors.hpp"

namespace nikeq {

namespace {

enum class Range { Finite, Right, Left, Line };

template <class T>
bool is_pos_inf(const T& x) { return x > 0 && x == std::numeric_limits<T>::infinity(); }
template <class T>
bool is_neg_inf(const T& x) { return x < 0 && -x == std::numeric_limits<T>::infinity(); }

template <class T>
double to_d(const T& x) { return static_cast<double>(x); }

template <class T>
struct DeMap {
    Range kind;
    T a, b, half_pi;

    // false: the node collapsed onto an endpoint or overflowed.
    bool operator()(const T& t, T& x, T& w) const {
        using std::cosh; using std::exp; using std::sinh; using std::abs;
        const T u = half_pi * sinh(t);
        switch (kind) {
            case Range::Finite: {
                const T E = exp(-2 * abs(u));
                const T d = (b - a) * E / (1 + E);
                if (!(d > 0)) return false;
                x = t >= 0 ? b - d : a + d;
                if (!(x > a) || !(x < b)) return false;
                w = (b - a) * half_pi * cosh(t) * 2 * E / ((1 + E) * (1 + E));
                return true;
            }
            case Range::Right:
            case Range::Left: {
                const T e = exp(u);
                if (is_pos_inf(e) || !(e > 0)) return false;
                x = kind == Range::Right ? a + e : b - e;
                if (kind == Range::Right ? !(x > a) : !(x < b)) return false;
                w = half_pi * cosh(t) * e;
                return true;
            }
            case Range::Line: {
                x = sinh(u);
                w = half_pi * cosh(t) * cosh(u);
                if (is_pos_inf(w) || is_pos_inf(abs(x))) return false;
                return true;
            }
        }
        return false;
    }
};

template <class T>
T eval_checked(const std::function<T(const T&)>& f, const T& x, bool& skip, const T& t) {
    using std::abs;
    T v = f(x);
    skip = false;
    if (v != v) {
        std::ostringstream os;
        os << "integrand returned NaN at x = " << to_d(x);
        throw InputError(os.str());
    }
    if (is_pos_inf(abs(v))) {
        // Rounding can push a node onto an integrable endpoint singularity.
        if (abs(t) > 2) {
            skip = true;
            return T(0);
        }
        std::ostringstream os;
        os << "integrand not finite at interior point x = " << to_d(x);
        throw InputError(os.str());
    }
    return v;
}

}  // namespace

template <class T>
QuadResult<T> integrate_de(const std::function<T(const T&)>& f, const T& a, const T& b,
                           const QuadTolerances& tol) {
    using std::abs; using std::acos; using std::ldexp;
    if (a != a || b != b) throw InputError("integration bounds are NaN");
    if (!(a < b)) throw InputError("integration requires a < b");

    DeMap<T> map{Range::Finite, a, b, acos(T(-1)) / 2};
    if (is_neg_inf(a) && is_pos_inf(b)) map.kind = Range::Line;
    else if (is_pos_inf(b)) map.kind = Range::Right;
    else if (is_neg_inf(a)) map.kind = Range::Left;
    else if (is_pos_inf(a) || is_neg_inf(b)) throw InputError("invalid infinite bound");

    QuadResult<T> res;
    T sum(0), abs_sum(0), peak(0);
    T x, w;

    auto term = [&](const T& t, bool& ok) -> T {
        ok = map(t, x, w);
        if (!ok) return T(0);
        bool skip = false;
        T v = eval_checked(f, x, skip, t);
        ++res.evaluations;
        if (skip) return T(0);
        return w * v;
    };

    // Level 0 fixes the t-range: walk outward until three consecutive terms are
    // negligible against both tolerances.
    const int t_cap = 40;
    T trunc(0);
    int lo = 0, hi = 0;
    {
        bool ok;
        T v0 = term(T(0), ok);
        sum += v0;
        abs_sum += abs(v0);
        peak = abs(v0);
        for (int side : {1, -1}) {
            int quiet = 0;
            T last_small(0);
            int j = 1;
            for (; j <= t_cap; ++j) {
                T v = term(T(side * j), ok);
                if (!ok) break;
                sum += v;
                abs_sum += abs(v);
                if (abs(v) > peak) peak = abs(v);
                T thresh = T(1e-3) * std::min(T(tol.abs_tol), T(tol.rel_tol) * peak);
                if (abs(v) <= thresh) {
                    if (abs(v) > last_small) last_small = abs(v);
                    if (++quiet >= 3) break;
                } else {
                    quiet = 0;
                }
            }
            (side > 0 ? hi : lo) = side * std::min(j, t_cap);
            trunc += last_small;
        }
    }

    T h(1);
    T I_prev = sum;
    const T eps = ldexp(T(1), -tol.precision_bits);
    for (int k = 1; k <= tol.max_level; ++k) {
        h /= 2;
        const long steps = static_cast<long>(hi - lo) << k;
        bool ok;
        for (long m = 1; m < steps; m += 2) {
            T t = T(lo) + h * T(m);
            T v = term(t, ok);
            if (!ok) continue;
            sum += v;
            abs_sum += abs(v);
        }
        T I = h * sum;
        T e = abs(I - I_prev) + trunc * h + eps * h * abs_sum * 16;
        res.level_errors.push_back(e);
        res.levels = k;
        const T target = std::max(T(tol.abs_tol), T(tol.rel_tol) * abs(I));
        if (k >= tol.min_level && e <= target) {
            res.value = I;
            res.error_bound = e;
            return res;
        }
        I_prev = I;
    }
    throw ConvergenceError("quadrature did not converge within " + std::to_string(tol.max_level) +
                               " refinement levels",
                           to_d(I_prev), to_d(res.level_errors.back()));
}

template QuadResult<double> integrate_de<double>(const std::function<double(const double&)>&,
                                                 const double&, const double&, const QuadTolerances&);
template QuadResult<Real> integrate_de<Real>(const std::function<Real(const Real&)>&, const Real&,
                                             const Real&, const QuadTolerances&);

QuadResult<Real> integrate_adaptive(const std::function<Real(const Real&)>& f, const Real& a,
                                    const Real& b, const PrecisionContext& ctx) {
    ctx.validate();
    PrecisionScope scope(ctx);
    QuadTolerances tol;
    tol.abs_tol = ctx.abs_tol;
    tol.rel_tol = ctx.rel_tol;
    tol.precision_bits = ctx.mantissa_bits;
    tol.max_level = 10 + static_cast<int>(std::ceil(std::log2(std::max(1.0, ctx.mantissa_bits / 53.0))));
    Real aa(a), bb(b);
    return integrate_de<Real>(f, aa, bb, tol);
}

QuadResult<double> integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                                      double abs_tol, double rel_tol) {
    QuadTolerances tol;
    tol.abs_tol = abs_tol;
    tol.rel_tol = rel_tol;
    std::function<double(const double&)> g = [&](const double& x) { return f(x); };
    return integrate_de<double>(g, a, b, tol);
}

QuadratureRule make_halfline_rule(const std::function<Real(const Real&)>& density, int level,
                                  double grow, const Real& cutoff) {
    using std::abs;
    const Real half_pi = acos(Real(-1)) / 2;
    const Real h = ldexp(Real(1), -level);
    struct Node { Real x, w, mag; };
    std::vector<Node> left, right;
    Real peak(0);
    auto node = [&](const Real& t, Node& out) -> bool {
        Real u = half_pi * sinh(t);
        Real x = exp(u);
        if (!(x > 0) || is_pos_inf(x)) return false;
        Real w = h * half_pi * cosh(t) * x * density(x);
        if (w != w) throw InputError("density returned NaN");
        out = {x, w, abs(w) * pow(1 + x, Real(grow))};
        return true;
    };
    for (int side : {1, -1}) {
        int quiet = 0;
        for (long j = side > 0 ? 0 : 1;; ++j) {
            Real t = h * Real(side * j);
            if (abs(t) > 40) break;
            Node nd;
            if (!node(t, nd)) break;
            if (nd.mag > peak) peak = nd.mag;
            if (nd.mag < cutoff * peak) {
                if (++quiet >= 4 && j * h > 1) break;
                continue;
            }
            quiet = 0;
            (side > 0 ? right : left).push_back(nd);
        }
    }
    QuadratureRule rule;
    for (auto it = left.rbegin(); it != left.rend(); ++it) {
        rule.nodes.push_back(it->x);
        rule.weights.push_back(it->w);
    }
    for (auto& nd : right) {
        rule.nodes.push_back(nd.x);
        rule.weights.push_back(nd.w);
    }
    return rule;
}

}  // namespace nikeq
