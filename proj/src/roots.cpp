#include <array>
#include "nikeq/roots.hpp"

#include <cmath>
#include <functional>

#include "nikeq/errors.hpp"

namespace nikeq {

namespace {

using RPoly = Polynomial<Real>;

Real max_abs_coef(const RPoly& p) {
    Real m(0);
    for (const auto& c : p.coefficients())
        if (abs(c) > m) m = abs(c);
    return m;
}

// Remainder with coefficients below tau·scale(a) zeroed.
RPoly clean_rem(const RPoly& a, const RPoly& b, const Real& tau) {
    auto r = RPoly::divmod(a, b).second;
    const Real scale = max_abs_coef(a);
    std::vector<Real> c = r.coefficients();
    for (auto& x : c)
        if (abs(x) <= tau * scale) x = 0;
    return RPoly(std::move(c));
}

std::vector<RPoly> sturm_chain(const RPoly& p, const Real& tau) {
    std::vector<RPoly> s{p, p.derivative()};
    while (s.back().degree() > 0) {
        RPoly r = clean_rem(s[s.size() - 2], s.back(), tau);
        if (r.is_zero()) break;
        s.push_back(r.scaled(Real(-1) / max_abs_coef(r)));
    }
    return s;
}

int sign_changes(const std::vector<RPoly>& chain, const Real& x) {
    int changes = 0, prev = 0;
    for (const auto& q : chain) {
        Real v = q(x);
        int s = v > 0 ? 1 : (v < 0 ? -1 : 0);
        if (s == 0) continue;
        if (prev != 0 && s != prev) ++changes;
        prev = s;
    }
    return changes;
}

struct Prepared {
    RPoly scaled;  // p(2^s y) / 2^{s deg}, monic
    RPoly squarefree;
    RPoly gcd;
    std::vector<RPoly> chain;
    int shift = 0;
    Real lo, hi;  // scaled interval, slightly widened
};

Prepared prepare(const RPoly& p, const Real& a, const Real& b, int bits) {
    if (p.is_zero()) throw InputError("root isolation of the zero polynomial");
    if (!(a < b)) throw InputError("root isolation requires a < b");
    Prepared pr;
    RPoly m = p.monic();
    // Fujiwara: |z| ≤ 2 max_i |a_{n−i}|^{1/i} (last term halved).  Much tighter
    // than 1 + max|a_i| when the roots spread over many orders of magnitude.
    Real bound(0);
    const int deg = m.degree();
    for (int i = 1; i <= deg; ++i) {
        Real c = abs(m[deg - i]);
        if (i == deg) c /= 2;
        if (c > 0) bound = std::max(bound, Real(pow(c, Real(1) / i)));
    }
    bound = 2 * bound + ldexp(Real(1), -bits / 2);
    Real R = std::min(std::max(Real(abs(a)), Real(abs(b))), bound);
    pr.shift = R > 1 ? static_cast<int>(std::ceil(static_cast<double>(log2(R)))) : 0;
    const Real two_s = ldexp(Real(1), pr.shift);
    pr.scaled = m.rescaled(two_s);
    const Real tau = ldexp(Real(1), -bits / 2);
    auto chain = sturm_chain(pr.scaled, tau);
    pr.gcd = chain.back().degree() >= 1 ? chain.back() : RPoly({Real(1)});
    if (pr.gcd.degree() >= 1) {
        pr.squarefree = RPoly::divmod(pr.scaled, pr.gcd).first.monic();
        pr.chain = sturm_chain(pr.squarefree, tau);
    } else {
        pr.squarefree = pr.scaled;
        pr.chain = std::move(chain);
    }
    const Real slack = ldexp(Real(1), -(bits - 8));
    pr.lo = a / two_s - slack * std::max(Real(1), Real(abs(a / two_s)));
    pr.hi = b / two_s + slack * std::max(Real(1), Real(abs(b / two_s)));
    return pr;
}

Real polish(const RPoly& q, const RPoly& dq, Real l, Real r, int bits) {
    Real fl = q(l);
    const Real tol = ldexp(Real(1), -(bits - 4));
    Real x = (l + r) / 2;
    for (int it = 0; it < 4 * bits; ++it) {
        Real fx = q(x);
        if (fx == 0) return x;
        if ((fx > 0) == (fl > 0)) {
            l = x;
            fl = fx;
        } else {
            r = x;
        }
        if (r - l <= tol * std::max(Real(1), Real(abs(x)))) return (l + r) / 2;
        Real d = dq(x);
        Real xn = d != 0 ? Real(x - fx / d) : Real((l + r) / 2);
        if (!(xn > l && xn < r)) xn = (l + r) / 2;
        if (abs(xn - x) <= tol * std::max(Real(1), Real(abs(x)))) return xn;
        x = xn;
    }
    return x;
}

int multiplicity_at(const RPoly& p, const Real& y, int bits) {
    const Real thr = ldexp(Real(1), -bits / 3);
    RPoly d = p;
    int m = 0;
    Real fact(1);
    while (m < p.degree()) {
        // scale of d at y
        Real scale(0), ay = std::max(Real(1), Real(abs(y))), pw(1);
        for (const auto& c : d.coefficients()) {
            scale += abs(c) * pw;
            pw *= ay;
        }
        if (abs(d(y)) > thr * scale) break;
        ++m;
        d = d.derivative();
    }
    return std::max(1, m);
}

}  // namespace

int count_real_roots(const Polynomial<Real>& p, const Real& a, const Real& b,
                     const PrecisionContext& ctx) {
    ctx.validate();
    PrecisionScope scope(ctx);
    if (p.degree() < 1) return 0;
    Prepared pr = prepare(p, a, b, ctx.mantissa_bits);
    return sign_changes(pr.chain, pr.lo) - sign_changes(pr.chain, pr.hi);
}

std::vector<RealRoot> isolate_real_roots(const Polynomial<Real>& p, const Real& a, const Real& b,
                                         const PrecisionContext& ctx, MultipleRootPolicy policy) {
    ctx.validate();
    PrecisionScope scope(ctx);
    std::vector<RealRoot> out;
    if (p.is_zero()) throw InputError("root isolation of the zero polynomial");
    if (p.degree() < 1) return out;
    const int bits = ctx.mantissa_bits;
    Prepared pr = prepare(p, a, b, bits);
    const RPoly& q = pr.squarefree;
    const RPoly dq = q.derivative();
    const Real min_width = ldexp(Real(1), -(bits - 6));

    struct Iv { Real l, r; int vl, vr; };
    std::vector<Iv> stack{{pr.lo, pr.hi, sign_changes(pr.chain, pr.lo), sign_changes(pr.chain, pr.hi)}};
    std::vector<Real> roots;
    while (!stack.empty()) {
        Iv iv = stack.back();
        stack.pop_back();
        const int cnt = iv.vl - iv.vr;
        if (cnt <= 0) continue;
        if (cnt == 1 && (q(iv.l) > 0) != (q(iv.r) > 0) && q(iv.l) != 0 && q(iv.r) != 0) {
            roots.push_back(polish(q, dq, iv.l, iv.r, bits));
            continue;
        }
        if (iv.r - iv.l < min_width * std::max(Real(1), Real(abs(iv.l))))
            throw DegeneracyError("real roots closer than working precision can separate");
        Real mid = (iv.l + iv.r) / 2;
        // Avoid splitting exactly on a root.
        for (int k = 1; q(mid) == 0 && k < 8; ++k) mid = iv.l + (iv.r - iv.l) * Real(k + 7) / 15;
        const int vm = sign_changes(pr.chain, mid);
        stack.push_back({mid, iv.r, vm, iv.vr});
        stack.push_back({iv.l, mid, iv.vl, vm});
    }
    std::sort(roots.begin(), roots.end());

    const Real two_s = ldexp(Real(1), pr.shift);
    for (const Real& y : roots) {
        RealRoot rr;
        rr.root = y * two_s;
        rr.residual = abs(p(rr.root));
        rr.multiplicity = 1;
        if (pr.gcd.degree() >= 1) rr.multiplicity = multiplicity_at(pr.scaled, y, bits);
        if (rr.multiplicity > 1 && policy == MultipleRootPolicy::Throw)
            throw DegeneracyError("suspected multiple root near " + to_decimal(rr.root, 20));
        out.push_back(std::move(rr));
    }
    return out;
}

CubicRoots solve_cubic(std::complex<double> c2, std::complex<double> c1, std::complex<double> c0) {
    using C = std::complex<double>;
    auto f = [&](C x) { return ((x + c2) * x + c1) * x + c0; };
    auto df = [&](C x) { return (3.0 * x + 2.0 * c2) * x + c1; };

    const C s = c2 / 3.0;
    const C p = c1 - c2 * c2 / 3.0;
    const C q = 2.0 * c2 * c2 * c2 / 27.0 - c2 * c1 / 3.0 + c0;
    const C disc = std::sqrt(q * q / 4.0 + p * p * p / 27.0);
    C u3 = -q / 2.0 + disc;
    C u3b = -q / 2.0 - disc;
    if (std::abs(u3b) > std::abs(u3)) u3 = u3b;
    CubicRoots out;
    const C w(-0.5, std::sqrt(3.0) / 2.0);
    if (std::abs(u3) == 0.0) {
        out.roots = {-s, -s, -s};
    } else {
        C u = std::pow(u3, 1.0 / 3.0);
        C wk(1.0, 0.0);
        for (int k = 0; k < 3; ++k) {
            C uk = u * wk;
            out.roots[k] = uk - p / (3.0 * uk) - s;
            wk *= w;
        }
    }
    // Cardano loses the small roots when one root dominates: keep the largest
    // and deflate through Vieta, taking whichever sum formula fits better.
    {
        int big = 0;
        for (int k = 1; k < 3; ++k)
            if (std::abs(out.roots[k]) > std::abs(out.roots[big])) big = k;
        C r0 = out.roots[big];
        for (int it = 0; it < 3 && r0 != 0.0; ++it) {
            C d = df(r0);
            if (d == 0.0) break;
            C xn = r0 - f(r0) / d;
            if (!(std::abs(f(xn)) < std::abs(f(r0)))) break;
            r0 = xn;
        }
        if (r0 != 0.0) {
            const C P = -c0 / r0;
            auto pair = [&](C S) {
                C d = std::sqrt(S * S - 4.0 * P);
                C a = std::abs(S + d) >= std::abs(S - d) ? (S + d) / 2.0 : (S - d) / 2.0;
                C b = a == 0.0 ? C(0.0) : P / a;
                return std::array<C, 2>{a, b};
            };
            auto resid = [&](const std::array<C, 2>& r) {
                double m = 0;
                for (C x : r) m = std::max(m, std::abs(f(x)) / (1.0 + std::abs(df(x)) * (1.0 + std::abs(x))));
                return m;
            };
            auto A = pair((c1 - P) / r0), B = pair(-c2 - r0);
            auto best = resid(A) <= resid(B) ? A : B;
            out.roots = {r0, best[0], best[1]};
        }
    }
    // Newton polish, steps capped so two roots cannot merge.
    for (int k = 0; k < 3; ++k) {
        double sep = std::numeric_limits<double>::infinity();
        for (int j = 0; j < 3; ++j)
            if (j != k) sep = std::min(sep, std::abs(out.roots[k] - out.roots[j]));
        C x = out.roots[k];
        for (int it = 0; it < 3; ++it) {
            C d = df(x);
            if (d == 0.0) break;
            C step = f(x) / d;
            if (!(std::abs(step) < 0.25 * sep) && sep > 0) break;
            if (!std::isfinite(step.real()) || !std::isfinite(step.imag())) break;
            C xn = x - step;
            if (std::abs(f(xn)) >= std::abs(f(x))) break;
            x = xn;
        }
        out.roots[k] = x;
    }
    for (int k = 0; k < 3; ++k) {
        int m = 1;
        for (int j = 0; j < 3; ++j)
            if (j != k && std::abs(out.roots[k] - out.roots[j]) <= 1e-6 * (1.0 + std::abs(out.roots[k])))
                ++m;
        out.multiplicity[k] = m;
    }
    return out;
}

}  // namespace nikeq
