#include "nikeq/nikishin_mop.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>

#include <boost/math/special_functions/polygamma.hpp>

#include "nikeq/roots.hpp"

namespace nikeq {

using boost::multiprecision::mpz_int;

namespace {

// Zigzag numbers A(0..count-1) from the Seidel–Entringer triangle: even
// indices are the secant numbers |E_{2k}|, odd ones the tangent numbers.
std::vector<mpz_int> zigzag(int count) {
    std::vector<mpz_int> out;
    std::vector<mpz_int> row{1};
    out.push_back(1);
    for (int n = 1; n < count; ++n) {
        std::vector<mpz_int> next(n + 1);
        next[0] = 0;
        for (int k = 1; k <= n; ++k) next[k] = next[k - 1] + row[n - k];
        row = std::move(next);
        out.push_back(row[n]);
    }
    return out;
}

mpz_int zigzag_at(int i) {
    static std::mutex mu;
    static std::vector<mpz_int> table = zigzag(64);
    std::lock_guard<std::mutex> lock(mu);
    if (i >= static_cast<int>(table.size())) table = zigzag(std::max(i + 1, 2 * static_cast<int>(table.size())));
    return table[i];
}

Real pi_real() { return acos(Real(-1)); }

std::vector<Real> moment_vector(const NikishinSystem& sys, int j, int count, const PrecisionContext& ctx) {
    std::vector<Real> m;
    m.reserve(count);
    for (int nu = 0; nu < count; ++nu) m.push_back(moment(sys, j, nu, ctx));
    return m;
}

Real s2_density(const NikishinSystem& sys, const Real& x) {
    if (sys.sigma2_hat) return sys.sigma2_hat(x) * sys.sigma1_density(x);
    Real s(0);
    for (long k = 0; k < sys.k_max; ++k) {
        MassPoint a = sys.sigma2_atom(k);
        s += a.beta / (x - a.t);
    }
    return s * sys.sigma1_density(x);
}

// Solves A c = b; exact when T is a rational type.
template <class T>
std::vector<T> gauss_solve(std::vector<std::vector<T>> A, std::vector<T> b) {
    using std::abs;
    const std::size_t N = b.size();
    for (std::size_t col = 0; col < N; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < N; ++r)
            if (abs(A[r][col]) > abs(A[piv][col])) piv = r;
        if (A[piv][col] == 0)
            throw DegeneracyError("moment system is singular (column " + std::to_string(col) + ")");
        std::swap(A[piv], A[col]);
        std::swap(b[piv], b[col]);
        for (std::size_t r = col + 1; r < N; ++r) {
            if (A[r][col] == 0) continue;
            T f = A[r][col] / A[col][col];
            for (std::size_t c = col; c < N; ++c) A[r][c] -= f * A[col][c];
            b[r] -= f * b[col];
        }
    }
    std::vector<T> x(N);
    for (std::size_t i = N; i-- > 0;) {
        T s = b[i];
        for (std::size_t c = i + 1; c < N; ++c) s -= A[i][c] * x[c];
        x[i] = s / A[i][i];
    }
    return x;
}

Real root_bound(const Polynomial<Real>& p) {
    Real b(0);
    const int n = p.degree();
    for (int i = 1; i <= n; ++i) {
        Real c = abs(p[n - i] / p.leading());
        if (c > 0) b = std::max(b, Real(pow(c, Real(1) / i)));
    }
    return 2 * b + 1;
}

double scaled_defect(const std::vector<Real>& terms) {
    Real s(0), a(0);
    for (const Real& t : terms) {
        s += t;
        a += abs(t);
    }
    if (a == 0) return 0;
    return static_cast<double>(abs(s) / a);
}

// Illinois variant of regula falsi on a bracket with fa·fb < 0.
Real illinois(const std::function<Real(const Real&)>& f, Real a, Real b, Real fa, Real fb, const Real& tol) {
    int side = 0;
    for (int it = 0; it < 400 && abs(b - a) > tol; ++it) {
        Real c = (a * fb - b * fa) / (fb - fa);
        if (!(c > std::min(a, b) && c < std::max(a, b))) c = (a + b) / 2;
        Real fc = f(c);
        if (fc == 0) return c;
        if ((fc > 0) == (fb > 0)) {
            b = c;
            fb = fc;
            if (side == -1) fa /= 2;
            side = -1;
        } else {
            a = c;
            fa = fc;
            if (side == 1) fb /= 2;
            side = 1;
        }
    }
    return abs(fa) < abs(fb) ? a : b;
}

double rule_grow(int n) { return 3.0 * n + 2; }

// Σ_{k≥K} β_k |t_k|^{-p}.
double atom_power_tail(const NikishinSystem& sys, long K, int p) {
    if (sys.atom_tail) return sys.atom_tail(K, p);
    double s = 0;
    for (long k = K; k < 64 * K; ++k) {
        MassPoint m = sys.sigma2_atom(k);
        s += static_cast<double>(m.beta) * std::pow(-static_cast<double>(m.t), -p);
    }
    return s;
}

// Tail Σ_{k≥K} T_k of a series with T_k ≈ β_k (a u^q + b u^{q+1}), u = 1/|t_k|,
// fitted to the terms k0 and k0 + 1.
double fitted_tail(const NikishinSystem& sys, int q, long k0, const Real& T0, const Real& T1, long K) {
    MassPoint p0 = sys.sigma2_atom(k0), p1 = sys.sigma2_atom(k0 + 1);
    const double u0 = 1 / static_cast<double>(-p0.t), u1 = 1 / static_cast<double>(-p1.t);
    const double y0 = static_cast<double>(T0 / p0.beta) / std::pow(u0, q);
    const double y1 = static_cast<double>(T1 / p1.beta) / std::pow(u1, q);
    const double b = (y0 - y1) / (u0 - u1);
    const double a = y0 - b * u0;
    return a * atom_power_tail(sys, K, q) + b * atom_power_tail(sys, K, q + 1);
}

}  // namespace

void NikishinSystem::validate() const {
    if (!sigma1_density) throw InputError("system: sigma1 density missing");
    if (!sigma2_atom) throw InputError("system: sigma2 atoms missing");
    if (k_max < 2) throw InputError("system: k_max must be >= 2");
    MassPoint prev = sigma2_atom(0);
    if (!(prev.t < 0) || !(prev.beta > 0)) throw InputError("system: atom 0 must have t < 0 and beta > 0");
    for (long k = 1; k < std::min<long>(k_max, 200); ++k) {
        MassPoint a = sigma2_atom(k);
        if (!(a.t < prev.t)) throw InputError("system: atoms must be strictly decreasing (k = " + std::to_string(k) + ")");
        if (!(a.beta > 0)) throw InputError("system: beta must be positive (k = " + std::to_string(k) + ")");
        prev = a;
    }
}

NikishinSystem pollaczek_system() {
    NikishinSystem s;
    s.kind = "pollaczek";
    s.sigma1_density = [](const Real& x) { return 1 / sinh(pi_real() * sqrt(x) / 2); };
    s.sigma2_atom = [](long k) {
        Real o(2 * k + 1);
        return MassPoint{-o * o, 4 / pi_real()};
    };
    // (4/π) Σ 1/(x + (2k+1)²) = tanh(π√x/2)/√x
    s.sigma2_hat = [](const Real& x) {
        Real r = sqrt(x);
        return tanh(pi_real() * r / 2) / r;
    };
    s.exact_moment = [](int j, int nu) {
        return Rational(2 * zigzag_at(j == 1 ? 2 * nu + 1 : 2 * nu));
    };
    s.scaling = [](int n) { return 4.0 * n * n; };
    // Σ_{k≥K} (2k+1)^{-2p} = ψ^{(2p−1)}(K+½) / (4^p (2p−1)!)
    s.atom_tail = [](long K, int p) {
        double f = 1;
        for (int i = 2; i < 2 * p; ++i) f *= i;
        return 4 / M_PI * boost::math::polygamma(2 * p - 1, K + 0.5) / (std::pow(4.0, p) * f);
    };
    s.rho = [](double x) { return std::sqrt(std::abs(x)); };
    s.A = [](double x) { return std::sqrt(std::abs(x)); };
    s.B = [](double n) { return n; };
    s.phi = [](double x) { return M_PI * std::sqrt(x); };
    s.sigma_mass = [](double a, double b) { return std::sqrt(-a) - std::sqrt(-b); };
    return s;
}

Real moment(const NikishinSystem& sys, int j, int nu, const PrecisionContext& ctx) {
    if (j != 1 && j != 2) throw InputError("moment: j must be 1 or 2");
    if (nu < 0) throw InputError("moment: nu must be >= 0");
    PrecisionScope scope(ctx);
    if (sys.exact_moment) return Real(sys.exact_moment(j, nu));
    return moment_quadrature(sys, j, nu, ctx);
}

Real moment_quadrature(const NikishinSystem& sys, int j, int nu, const PrecisionContext& ctx) {
    if (j != 1 && j != 2) throw InputError("moment: j must be 1 or 2");
    PrecisionScope scope(ctx);
    std::function<Real(const Real&)> f = [&](const Real& x) {
        Real d = j == 1 ? sys.sigma1_density(x) : s2_density(sys, x);
        return nu == 0 ? d : pow(x, nu) * d;
    };
    auto r = integrate_adaptive(f, Real(0), Real(std::numeric_limits<double>::infinity()), ctx);
    if (!(r.error_bound <= Real(ctx.abs_tol) + Real(ctx.rel_tol) * abs(r.value)))
        throw ConvergenceError("moment quadrature did not converge (j = " + std::to_string(j) +
                                   ", nu = " + std::to_string(nu) + ")",
                               static_cast<double>(r.value), static_cast<double>(r.error_bound));
    return r.value;
}

Sigma1Rule sigma1_rule(const NikishinSystem& sys, int count, double grow, const PrecisionContext& ctx) {
    PrecisionScope scope(ctx);
    const std::vector<Real> m = moment_vector(sys, 1, count, ctx);
    // Well below the 10^{-bits/8} acceptance level of the orthogonality defects.
    const double target = std::pow(10.0, -ctx.mantissa_bits / 8.0) * std::pow(2.0, -40);
    const Real cutoff = real_pow2_neg(ctx.mantissa_bits + 32);
    Sigma1Rule out;
    for (int level = 4 + static_cast<int>(std::log2(std::max(1, ctx.mantissa_bits / 64))); level <= 12; ++level) {
        QuadratureRule rule = make_halfline_rule(sys.sigma1_density, level, grow, cutoff);
        std::vector<Real> s(count, Real(0));
        for (std::size_t r = 0; r < rule.nodes.size(); ++r) {
            Real p = rule.weights[r];
            for (int nu = 0; nu < count; ++nu, p *= rule.nodes[r]) s[nu] += p;
        }
        double err = 0;
        for (int nu = 0; nu < count; ++nu) err = std::max(err, static_cast<double>(abs(s[nu] - m[nu]) / abs(m[nu])));
        out = {std::move(rule), level, err};
        if (err <= target) {
            // One more level: moments do not see the pole of 1/(z − x).
            out.rule = make_halfline_rule(sys.sigma1_density, level + 1, grow, cutoff);
            out.level = level + 1;
            return out;
        }
    }
    throw ConvergenceError("sigma1 rule: moments not reproduced at level 12", out.moment_error, target);
}

MopPair compute_Pn(const NikishinSystem& sys, int n, const PrecisionContext& ctx) {
    if (n < 1) throw InputError("compute_Pn: n must be >= 1");
    ctx.validate();
    sys.validate();
    PrecisionScope scope(ctx);
    const int N = 2 * n, count = 3 * n;
    MopPair pair;
    pair.n = n;
    pair.precision_used = ctx.mantissa_bits;

    std::vector<Real> c;
    if (sys.exact_moment) {
        std::vector<Rational> m1(count), m2(count);
        for (int i = 0; i < count; ++i) {
            m1[i] = sys.exact_moment(1, i);
            m2[i] = sys.exact_moment(2, i);
        }
        std::vector<std::vector<Rational>> A(N, std::vector<Rational>(N));
        std::vector<Rational> b(N);
        for (int nu = 0; nu < n; ++nu)
            for (int j = 0; j < 2; ++j) {
                const auto& m = j == 0 ? m1 : m2;
                for (int i = 0; i < N; ++i) A[2 * nu + j][i] = m[nu + i];
                b[2 * nu + j] = -m[nu + N];
            }
        pair.exact_coefficients = gauss_solve(std::move(A), std::move(b));
        pair.exact_coefficients.push_back(Rational(1));
        for (const auto& q : pair.exact_coefficients) c.emplace_back(q);
    } else {
        std::vector<Real> m1 = moment_vector(sys, 1, count, ctx), m2 = moment_vector(sys, 2, count, ctx);
        std::vector<std::vector<Real>> A(N, std::vector<Real>(N));
        std::vector<Real> b(N);
        for (int nu = 0; nu < n; ++nu)
            for (int j = 0; j < 2; ++j) {
                const auto& m = j == 0 ? m1 : m2;
                for (int i = 0; i < N; ++i) A[2 * nu + j][i] = m[nu + i];
                b[2 * nu + j] = -m[nu + N];
            }
        c = gauss_solve(A, b);
        // One step of iterative refinement.
        std::vector<Real> r(N);
        for (int i = 0; i < N; ++i) {
            r[i] = b[i];
            for (int k = 0; k < N; ++k) r[i] -= A[i][k] * c[k];
        }
        std::vector<Real> dc = gauss_solve(A, r);
        for (int i = 0; i < N; ++i) c[i] += dc[i];
        c.emplace_back(1);
    }
    pair.Pn = Polynomial<Real>(c);

    // Scaled defects of ∫ xᵛ P_n ds_j.
    double worst = 0;
    for (int j = 1; j <= 2; ++j) {
        std::vector<Real> m = moment_vector(sys, j, count, ctx);
        for (int nu = 0; nu < n; ++nu) {
            std::vector<Real> terms;
            for (int i = 0; i <= N; ++i) terms.push_back(pair.Pn[i] * m[nu + i]);
            worst = std::max(worst, scaled_defect(terms));
        }
    }
    pair.residual = worst;
    const double bound = std::pow(10.0, -ctx.mantissa_bits / 8.0);
    if (worst > bound)
        throw PrecisionError("compute_Pn: orthogonality defect " + to_decimal(worst) + " exceeds " +
                             to_decimal(bound) + " at n = " + std::to_string(n) + "; raise the precision");

    const Real B = root_bound(pair.Pn);
    auto roots = isolate_real_roots(pair.Pn, -B, B, ctx, MultipleRootPolicy::Flag);
    for (const auto& r : roots) {
        if (r.multiplicity != 1) throw ConsistencyError("compute_Pn: multiple zero of P_n");
        if (!(r.root > 0)) throw ConsistencyError("compute_Pn: non-positive zero of P_n");
        pair.zeros_Pn.push_back(r.root);
    }
    if (static_cast<int>(pair.zeros_Pn.size()) != N)
        throw ConsistencyError("compute_Pn: found " + std::to_string(pair.zeros_Pn.size()) + " real zeros, expected " +
                               std::to_string(N));
    std::sort(pair.zeros_Pn.begin(), pair.zeros_Pn.end());
    return pair;
}

SecondKind::SecondKind(const NikishinSystem& sys, const Polynomial<Real>& P, const PrecisionContext& ctx,
                       int reduce)
    : reduce_(reduce) {
    PrecisionScope scope(ctx);
    const int count = std::max(1, P.degree() + reduce + 1);
    Sigma1Rule r = sigma1_rule(sys, count, P.degree() + reduce + 2, ctx);
    init(r.rule, moment_vector(sys, 1, count, ctx), P);
}

SecondKind::SecondKind(const QuadratureRule& rule, const std::vector<Real>& moments, const Polynomial<Real>& P,
                       int reduce)
    : reduce_(reduce) {
    init(rule, moments, P);
}

void SecondKind::init(const QuadratureRule& rule, const std::vector<Real>& m, const Polynomial<Real>& P) {
    if (static_cast<int>(m.size()) < P.degree() + reduce_ + 1 && reduce_ > 0)
        throw InputError("SecondKind: not enough moments for the reduction");
    nodes_ = rule.nodes;
    g_.resize(nodes_.size());
    for (std::size_t r = 0; r < nodes_.size(); ++r) g_[r] = rule.weights[r] * pow(nodes_[r], reduce_) * P(nodes_[r]);
    for (int k = 0; k < reduce_; ++k) {
        Real s(0);
        for (int i = 0; i <= P.degree(); ++i) s += P[i] * m[k + i];
        head_.push_back(s);
    }
}

Real SecondKind::operator()(const Real& z) const {
    if (!(z < 0)) throw DomainError("second-kind function: z must be negative");
    Real s(0);
    for (std::size_t r = 0; r < nodes_.size(); ++r) s += g_[r] / (z - nodes_[r]);
    if (reduce_ == 0) return s;
    Real zr = pow(z, reduce_);
    Real h(0), zk = z;
    for (int k = 0; k < reduce_; ++k, zk *= z) h += head_[k] / zk;
    return h + s / zr;
}

Real second_kind_R(const NikishinSystem& sys, const Polynomial<Real>& P, const Real& z, const PrecisionContext& ctx) {
    PrecisionScope scope(ctx);
    return SecondKind(sys, P, ctx)(z);
}

void compute_Pn2(const NikishinSystem& sys, MopPair& pair, const PrecisionContext& ctx) {
    PrecisionScope scope(ctx);
    const int n = pair.n;
    if (pair.Pn.degree() != 2 * n) throw InputError("compute_Pn2: P_n missing");
    const int count = 4 * n + 1;
    Sigma1Rule sr = sigma1_rule(sys, count, rule_grow(n), ctx);
    pair.rule_level = sr.level;
    const std::vector<Real> m1 = moment_vector(sys, 1, count, ctx);
    SecondKind R(sr.rule, m1, pair.Pn, n);
    std::function<Real(const Real&)> Rf = [&](const Real& z) { return R(z); };

    const Real tol = real_pow2_neg(ctx.mantissa_bits - 16);
    std::vector<Real> roots;
    pair.gaps.clear();
    MassPoint a = sys.sigma2_atom(0);
    Real fa = R(a.t);
    long k = 0;
    for (; k + 1 < sys.k_max && static_cast<int>(roots.size()) < n; ++k) {
        MassPoint b = sys.sigma2_atom(k + 1);
        Real fb = R(b.t);
        if (fa == 0 || fb == 0) throw ConsistencyError("compute_Pn2: R vanishes at a mass point");
        if ((fa > 0) != (fb > 0)) {
            roots.push_back(illinois(Rf, b.t, a.t, fb, fa, tol * abs(b.t)));
            pair.gaps.push_back(k);
        }
        a = b;
        fa = fb;
    }
    if (static_cast<int>(roots.size()) != n)
        throw SearchWindowError("compute_Pn2: found " + std::to_string(roots.size()) + " sign changes of R in " +
                                std::to_string(k) + " gaps, expected " + std::to_string(n));

    // Sampled check of "at most one zero per gap".
    pair.max_changes_per_gap = 0;
    for (long g : pair.gaps) {
        Real hi = sys.sigma2_atom(g).t, lo = sys.sigma2_atom(g + 1).t;
        int changes = 0;
        Real prev = R(hi);
        for (int i = 1; i <= 12; ++i) {
            Real v = R(hi + (lo - hi) * i / 12);
            if ((v > 0) != (prev > 0)) ++changes;
            prev = v;
        }
        pair.max_changes_per_gap = std::max(pair.max_changes_per_gap, changes);
    }

    std::sort(roots.begin(), roots.end());
    pair.zeros_Pn2 = roots;
    pair.Pn2 = Polynomial<Real>::from_roots(roots);

    // ∫ xᵛ P_n/P_{n,2} dσ₁ = 0, ν < 2n.
    std::vector<Real> f(sr.rule.nodes.size());
    for (std::size_t r = 0; r < f.size(); ++r) {
        const Real& x = sr.rule.nodes[r];
        f[r] = sr.rule.weights[r] * pair.Pn(x) / pair.Pn2(x);
    }
    double worst3 = 0;
    std::vector<Real> fx = f;
    for (int nu = 0; nu < 2 * n; ++nu) {
        worst3 = std::max(worst3, scaled_defect(fx));
        for (std::size_t r = 0; r < fx.size(); ++r) fx[r] *= sr.rule.nodes[r];
    }
    pair.residual_3 = worst3;

    // Σ_k β_k t_kᵛ P_{n,2}(t_k)/P_n(t_k) ∫ P_n²/P_{n,2} dσ₁/(x − t_k) = 0, ν < n,
    // summed over k < k_max; the tail beyond is estimated from the last term.
    std::vector<Real> g(f.size());
    for (std::size_t r = 0; r < f.size(); ++r) g[r] = f[r] * pair.Pn(sr.rule.nodes[r]);
    std::vector<std::vector<Real>> terms(n);
    for (long kk = 0; kk < sys.k_max; ++kk) {
        MassPoint at = sys.sigma2_atom(kk);
        Real inner(0);
        for (std::size_t r = 0; r < g.size(); ++r) inner += g[r] / (sr.rule.nodes[r] - at.t);
        Real base = at.beta * pair.Pn2(at.t) / pair.Pn(at.t) * inner;
        Real tv(1);
        for (int nu = 0; nu < n; ++nu, tv *= at.t) terms[nu].push_back(base * tv);
    }
    // Term k ~ |t_k|^{ν−n−1}: add the fitted tail, and report the spread of two
    // fits as the truncation uncertainty.
    double worst4 = 0, tail4 = 0;
    const long K = sys.k_max;
    for (int nu = 0; nu < n; ++nu) {
        const auto& T = terms[nu];
        const int q = n + 1 - nu;
        const double tail = fitted_tail(sys, q, K - 2, T[K - 2], T[K - 1], K);
        const double alt = fitted_tail(sys, q, K - 3, T[K - 3], T[K - 2], K);
        Real sum(0), abs_sum(0);
        for (const Real& t : T) {
            sum += t;
            abs_sum += abs(t);
        }
        worst4 = std::max(worst4, static_cast<double>(abs(sum + Real(tail)) / abs_sum));
        tail4 = std::max(tail4, std::abs(tail - alt) / static_cast<double>(abs_sum));
    }
    pair.residual_4 = worst4;
    pair.residual_4_tail = tail4;
}

RescaledPair rescale_pair(const MopPair& pair, const Real& d_n) {
    if (!(d_n >= 1)) throw InputError("rescale_pair: d_n must be >= 1");
    RescaledPair q;
    q.Qn = pair.Pn.rescaled(d_n);
    if (!pair.Pn2.is_zero()) q.Qn2 = pair.Pn2.rescaled(d_n);
    for (const Real& x : pair.zeros_Pn) q.zeros_Qn.push_back(x / d_n);
    for (const Real& x : pair.zeros_Pn2) q.zeros_Qn2.push_back(x / d_n);
    return q;
}

NormIntegrals norm_integrals(const NikishinSystem& sys, const MopPair& pair, const PrecisionContext& ctx,
                             double rel_tol) {
    if (pair.Pn2.degree() != pair.n) throw InputError("norm_integrals: P_{n,2} missing");
    if (!sys.scaling) throw InputError("norm_integrals: system has no scaling d_n");
    PrecisionScope scope(ctx);
    const int n = pair.n;
    const Real d(sys.scaling(n));
    Sigma1Rule sr = sigma1_rule(sys, 4 * n + 1, rule_grow(n), ctx);
    std::vector<Real> g(sr.rule.nodes.size());
    Real I(0);
    for (std::size_t r = 0; r < g.size(); ++r) {
        const Real& x = sr.rule.nodes[r];
        Real p = pair.Pn(x);
        g[r] = sr.rule.weights[r] * p * p / pair.Pn2(x);
        I += g[r];
    }
    const Real scale = pow(d, -3 * n);
    NormIntegrals out;
    out.N1 = scale * I / d;

    auto term = [&](long k) {
        MassPoint at = sys.sigma2_atom(k);
        Real inner(0);
        for (std::size_t r = 0; r < g.size(); ++r) inner += g[r] / (sr.rule.nodes[r] - at.t);
        Real q = pair.Pn2(at.t);
        return at.beta * q * q / pair.Pn(at.t) * inner;
    };
    // Term k ≈ β_k (a/|t_k| + b/|t_k|²) once |t_k| dominates the zeros.
    auto fit_tail = [&](long k0, const Real& T0, const Real& T1, long K) {
        return fitted_tail(sys, 1, k0, T0, T1, K);
    };
    Real S(0);
    std::vector<Real> T;
    long K = sys.k_max;
    for (long k = 0; k < K; ++k) {
        T.push_back(term(k));
        S += T.back();
    }
    double tail = 0, err = 0;
    for (int attempt = 0;; ++attempt) {
        tail = fit_tail(K - 2, T[K - 2], T[K - 1], K);
        double alt = fit_tail(K - 3, T[K - 3], T[K - 2], K);
        double total = static_cast<double>(S) + tail;
        err = std::abs(tail - alt) / total;
        if (err <= rel_tol) break;
        if (attempt >= 3)
            throw TruncationError("norm_integrals: sigma2 tail estimate " + to_decimal(err) + " exceeds " +
                                  to_decimal(rel_tol));
        for (long k = K; k < 2 * K; ++k) {
            T.push_back(term(k));
            S += T.back();
        }
        K *= 2;
    }
    out.N2 = scale * (S + Real(tail));
    out.tail_2 = tail / static_cast<double>(S + Real(tail));
    if (!(out.N1 > 0) || !(out.N2 > 0)) throw ConsistencyError("norm_integrals: non-positive norm");
    out.log_N1 = static_cast<double>(log(out.N1));
    out.log_N2 = static_cast<double>(log(out.N2));
    return out;
}

std::vector<double> to_doubles(const std::vector<Real>& xs) {
    std::vector<double> out;
    out.reserve(xs.size());
    for (const Real& x : xs) out.push_back(static_cast<double>(x));
    return out;
}

bool zeros_interlace(const std::vector<Real>& lower, const std::vector<Real>& higher) {
    for (std::size_t i = 0; i + 1 < lower.size(); ++i) {
        bool found = false;
        for (const Real& h : higher)
            if (h > lower[i] && h < lower[i + 1]) {
                found = true;
                break;
            }
        if (!found) return false;
    }
    return true;
}

json mop_to_json(const NikishinSystem& sys, const MopPair& pair, const NormIntegrals* norms) {
    auto strings = [](const std::vector<Real>& xs) {
        json a = json::array();
        for (const Real& x : xs) a.push_back(to_decimal(x));
        return a;
    };
    json j;
    j["system"] = sys.kind;
    j["n"] = pair.n;
    j["precision_bits"] = pair.precision_used;
    j["Pn"] = {{"coefficients", strings(pair.Pn.coefficients())}, {"zeros", strings(pair.zeros_Pn)}};
    if (!pair.exact_coefficients.empty()) {
        json e = json::array();
        for (const auto& q : pair.exact_coefficients) e.push_back(q.str());
        j["Pn"]["exact_coefficients"] = e;
    }
    if (!pair.Pn2.is_zero()) {
        j["Pn2"] = {{"coefficients", strings(pair.Pn2.coefficients())},
                    {"zeros", strings(pair.zeros_Pn2)},
                    {"gaps", pair.gaps}};
    }
    j["residuals"] = {{"moment_system", pair.residual},
                      {"varying_sigma1", pair.residual_3},
                      {"varying_sigma2", pair.residual_4},
                      {"varying_sigma2_tail", pair.residual_4_tail},
                      {"max_sign_changes_per_gap", pair.max_changes_per_gap}};
    if (sys.scaling) {
        const double d = sys.scaling(pair.n);
        j["d_n"] = d;
        RescaledPair q = rescale_pair(pair, Real(d));
        j["Qn_zeros"] = real_array(to_doubles(q.zeros_Qn));
        j["Qn2_zeros"] = real_array(to_doubles(q.zeros_Qn2));
    }
    if (norms) {
        j["norms"] = {{"N1", to_decimal(norms->N1, 40)},
                      {"N2", to_decimal(norms->N2, 40)},
                      {"log_N1", norms->log_N1},
                      {"log_N2", norms->log_N2},
                      {"minus_log_N1_over_n", -norms->log_N1 / pair.n},
                      {"minus_log_N2_over_n", -norms->log_N2 / pair.n},
                      {"tail_fraction_N2", norms->tail_2}};
    }
    return j;
}

}  // namespace nikeq
