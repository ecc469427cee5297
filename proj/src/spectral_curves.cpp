#include "nikeq/spectral_curves.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "nikeq/errors.hpp"
#include "nikeq/roots.hpp"

namespace nikeq {

namespace {

const cplx I(0, 1);
constexpr double kFar = 1e3;
constexpr double kBranchExclusion = 1e-6;

using Laurent = AlgebraicCurve::Laurent;

Laurent lmul(const Laurent& a, const Laurent& b) {
    Laurent r;
    r.low = a.low + b.low;
    r.c.assign(a.c.size() + b.c.size() - 1, 0.0);
    for (std::size_t i = 0; i < a.c.size(); ++i)
        for (std::size_t j = 0; j < b.c.size(); ++j) r.c[i + j] += a.c[i] * b.c[j];
    return r;
}

Laurent ladd(const Laurent& a, const Laurent& b, cplx fb = 1.0) {
    Laurent r;
    r.low = std::min(a.low, b.low);
    const int high = std::max(a.low + int(a.c.size()), b.low + int(b.c.size()));
    r.c.assign(high - r.low, 0.0);
    for (std::size_t i = 0; i < a.c.size(); ++i) r.c[a.low - r.low + i] += a.c[i];
    for (std::size_t i = 0; i < b.c.size(); ++i) r.c[b.low - r.low + i] += fb * b.c[i];
    return r;
}

Laurent lscale(const Laurent& a, cplx s) {
    Laurent r = a;
    for (auto& x : r.c) x *= s;
    return r;
}

std::array<cplx, 3> sorted_roots(const std::array<cplx, 3>& p) {
    return solve_cubic(p[0], p[1], p[2]).roots;
}

double min_sep(const std::array<cplx, 3>& r) {
    return std::min({std::abs(r[0] - r[1]), std::abs(r[0] - r[2]), std::abs(r[1] - r[2])});
}

// Permutation of `roots` closest to `ref`.  `slack` is the largest ratio of a
// root's displacement to its distance from the nearest other reference root;
// below 1/2 the matching is unambiguous.
std::array<cplx, 3> match(const std::array<cplx, 3>& ref, const std::array<cplx, 3>& roots, double& slack) {
    static const int perms[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
    double sep[3];
    for (int k = 0; k < 3; ++k)
        sep[k] = std::min(std::abs(ref[k] - ref[(k + 1) % 3]), std::abs(ref[k] - ref[(k + 2) % 3]));
    slack = std::numeric_limits<double>::infinity();
    std::array<cplx, 3> best{};
    for (auto& p : perms) {
        double d = 0;
        for (int k = 0; k < 3; ++k) d = std::max(d, std::abs(roots[p[k]] - ref[k]) / sep[k]);
        if (d < slack) {
            slack = d;
            best = {roots[p[0]], roots[p[1]], roots[p[2]]};
        }
    }
    return best;
}

std::array<cplx, 3> track(const AlgebraicCurve& c, std::array<cplx, 3> cur,
                          const std::function<cplx(double)>& path) {
    double s = 0, ds = 0.02;
    while (s < 1) {
        const double sn = std::min(1.0, s + ds);
        auto r = sorted_roots(c.coefficients(path(sn)));
        double slack;
        auto m = match(cur, r, slack);
        if (slack <= 0.3) {
            cur = m;
            s = sn;
            ds = std::min(0.25, ds * 1.5);
        } else {
            ds *= 0.5;
            if (ds < 1e-16) throw DegeneracyError("branch continuation stalled near a branch point");
        }
    }
    return cur;
}

cplx horner(const std::vector<cplx>& c, cplx z) {
    cplx acc = 0;
    for (std::size_t i = c.size(); i-- > 0;) acc = acc * z + c[i];
    return acc;
}

std::vector<cplx> poly_roots(const std::vector<cplx>& coef) {
    const int n = int(coef.size()) - 1;
    std::vector<cplx> out;
    if (n < 1) return out;
    Eigen::MatrixXcd C = Eigen::MatrixXcd::Zero(n, n);
    for (int i = 1; i < n; ++i) C(i, i - 1) = 1.0;
    for (int i = 0; i < n; ++i) C(i, n - 1) = -coef[i] / coef[n];
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(C, false);
    std::vector<cplx> d(n);
    for (int i = 1; i <= n; ++i) d[i - 1] = coef[i] * double(i);
    for (int i = 0; i < n; ++i) {
        cplx x = es.eigenvalues()(i);
        for (int it = 0; it < 4; ++it) {
            cplx dp = horner(d, x);
            if (std::abs(dp) == 0) break;
            cplx step = horner(coef, x) / dp;
            if (!std::isfinite(std::abs(step))) break;
            x -= step;
        }
        // Clean signed zeros in the components.
        if (std::abs(x.imag()) < 1e-14 * std::max(1.0, std::abs(x))) x = {x.real(), 0.0};
        if (std::abs(x.real()) < 1e-14 * std::max(1.0, std::abs(x))) x = {0.0, x.imag()};
        out.push_back(x);
    }
    return out;
}

Polynomial<cplx> cleared_discriminant(const AlgebraicCurve& c) {
    auto L = c.laurent();
    const Laurent &p2 = L[0], &p1 = L[1], &p0 = L[2];
    Laurent d = lscale(lmul(lmul(p2, p1), p0), 18.0);
    d = ladd(d, lmul(lmul(lmul(p2, p2), p2), p0), -4.0);
    d = ladd(d, lmul(lmul(p2, p2), lmul(p1, p1)));
    d = ladd(d, lmul(lmul(p1, p1), p1), -4.0);
    d = ladd(d, lmul(p0, p0), -27.0);
    double scale = 0;
    for (auto& x : d.c) scale = std::max(scale, std::abs(x));
    std::vector<cplx> co = d.c;
    for (auto& x : co)
        if (std::abs(x) <= 1e-13 * scale) x = 0;
    // Drop z^k factors: z = 0 is either a declared singular point or handled
    // by the ramification test, never a discriminant root.
    std::size_t first = 0;
    while (first < co.size() && co[first] == 0.0) ++first;
    co.erase(co.begin(), co.begin() + first);
    return Polynomial<cplx>(co);
}

// Does continuing the roots once around `s` permute them?
bool ramified(const AlgebraicCurve& c, cplx s, double radius) {
    auto path = [&](double t) { return s + radius * std::exp(I * (2 * M_PI * t)); };
    auto start = sorted_roots(c.coefficients(path(0)));
    auto end = track(c, start, path);
    for (int k = 0; k < 3; ++k)
        if (std::abs(end[k] - start[k]) > 1e-6 * (1 + std::abs(start[k]))) return true;
    return false;
}

BranchPointSet compute_branch_points(const AlgebraicCurve& c) {
    BranchPointSet out;
    out.discriminant = cleared_discriminant(c);
    std::vector<cplx> cand = poly_roots(out.discriminant.coefficients());
    for (cplx z : cand) {
        bool dup = false;
        for (cplx w : out.points) dup |= std::abs(z - w) < 1e-8 * (1 + std::abs(w));
        if (dup) continue;
        BranchPoint bp{z, min_sep(sorted_roots(c.coefficients(z))), false};
        out.points.push_back(z);
        out.details.push_back(bp);
    }
    for (cplx s : c.singular_points()) {
        double r = 0.1;
        for (cplx z : out.points) r = std::min(r, 0.25 * std::abs(z - s));
        if (ramified(c, s, r)) {
            out.points.push_back(s);
            out.details.push_back({s, 0.0, true});
        }
    }
    return out;
}

std::array<cplx, 3> label_far(const AlgebraicCurve& c, cplx F) {
    auto roots = sorted_roots(c.coefficients(F));
    auto asym = c.asymptotic(F);
    double slack;
    auto m = match(asym, roots, slack);
    if (slack > 0.3) throw ConsistencyError("asymptotic labeling ambiguous at the reference point");
    return m;
}

}  // namespace

// -------------------------------------------------------------- AlgebraicCurve

AlgebraicCurve::AlgebraicCurve(CurveKind kind, double a, double b) : kind_(kind), a_(a), b_(b) {
    if (kind == CurveKind::Bessel || kind == CurveKind::PollaczekPsi) singular_ = {0.0};
    branch_cache_ = compute_branch_points(*this).points;
}

std::string AlgebraicCurve::name() const {
    switch (kind_) {
        case CurveKind::Bessel: return "bessel";
        case CurveKind::Pastur: return "pastur";
        case CurveKind::QuarticSource: return "quartic_source";
        case CurveKind::PollaczekPsi: return "pollaczek";
    }
    return "?";
}

std::array<cplx, 3> AlgebraicCurve::coefficients(cplx z) const {
    switch (kind_) {
        case CurveKind::Bessel: return {-2.0, 1.0, -2.0 / z};
        case CurveKind::Pastur: return {-z, 2 - a_ * a_, z * a_ * a_};
        case CurveKind::QuarticSource: return {-(z * z * z + b_ * z), z * z, a_ * a_ * z * z * z};
        case CurveKind::PollaczekPsi: return {(I - z) / z, (I + z) / z, -1.0};
    }
    return {};
}

std::array<AlgebraicCurve::Laurent, 3> AlgebraicCurve::laurent() const {
    switch (kind_) {
        case CurveKind::Bessel: return {Laurent{0, {-2.0}}, Laurent{0, {1.0}}, Laurent{-1, {-2.0}}};
        case CurveKind::Pastur:
            return {Laurent{1, {-1.0}}, Laurent{0, {2 - a_ * a_}}, Laurent{1, {a_ * a_}}};
        case CurveKind::QuarticSource:
            return {Laurent{1, {-b_, 0.0, -1.0}}, Laurent{2, {1.0}}, Laurent{3, {a_ * a_}}};
        case CurveKind::PollaczekPsi: return {Laurent{-1, {I, -1.0}}, Laurent{-1, {I, 1.0}}, Laurent{0, {-1.0}}};
    }
    return {};
}

std::array<cplx, 3> AlgebraicCurve::asymptotic(cplx z) const {
    switch (kind_) {
        case CurveKind::Bessel: {
            cplx r = std::sqrt(2.0) / std::sqrt(z);
            return {2.0 / z, 1.0 - r - 1.0 / z, 1.0 + r - 1.0 / z};
        }
        case CurveKind::Pastur: return {z - 2.0 / z, a_ + 1.0 / z, -a_ + 1.0 / z};
        case CurveKind::QuarticSource: return {z * z * z + b_ * z, a_ + 0.5 / z, -a_ + 0.5 / z};
        case CurveKind::PollaczekPsi: return {1.0 - I / z, I - 0.5 / z, -I + 0.5 / z};
    }
    return {};
}

double quartic_a_m(double b) {
    const double s = b * b - 3;
    if (!(b >= -2 && b <= -std::sqrt(3.0) + 1e-15)) throw InputError("a_m(b) defined for b in [-2, -sqrt(3)]");
    return std::sqrt(std::max(0.0, 6 * b * b * b - 27 * b - 6 * std::pow(std::max(0.0, s), 1.5))) / 9;
}

double quartic_a_M(double b) {
    const double s = b * b - 3;
    if (!(b <= -std::sqrt(3.0) + 1e-15)) throw InputError("a_M(b) defined for b <= -sqrt(3)");
    return std::sqrt(6 * b * b * b - 27 * b + 6 * std::pow(std::max(0.0, s), 1.5)) / 9;
}

AlgebraicCurve builtin_curve(const std::string& kind, double a, double b) {
    if (kind == "bessel") return AlgebraicCurve(CurveKind::Bessel, 0, 0);
    if (kind == "pollaczek" || kind == "pollaczek_psi") return AlgebraicCurve(CurveKind::PollaczekPsi, 0, 0);
    if (kind == "pastur") {
        if (!std::isfinite(a)) throw InputError("pastur: a must be a finite real");
        return AlgebraicCurve(CurveKind::Pastur, a, 0);
    }
    if (kind == "quartic_source" || kind == "quartic") {
        const double r3 = std::sqrt(3.0);
        if (!std::isfinite(a) || !std::isfinite(b)) throw InputError("quartic_source: a, b must be finite");
        if (b > -r3) throw RegionError("b-range", "quartic_source: b must satisfy b <= -sqrt(3)");
        if (a == 0 && b <= -2) return AlgebraicCurve(CurveKind::QuarticSource, a, b);
        if (!(a < quartic_a_M(b)))
            throw RegionError("a_M", "quartic_source: a must lie below a_M(b) = " + std::to_string(quartic_a_M(b)));
        const double lower = b > -2 ? quartic_a_m(b) : 0.0;
        if (!(a > lower))
            throw RegionError(b > -2 ? "a_m" : "a=0",
                              "quartic_source: a must lie above " + std::string(b > -2 ? "a_m(b)" : "0"));
        return AlgebraicCurve(CurveKind::QuarticSource, a, b);
    }
    throw InputError("unknown curve kind '" + kind + "'");
}

// ------------------------------------------------------------ branch values

BranchTriple branch_values(const AlgebraicCurve& c, cplx z) {
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) throw InputError("branch_values: z not finite");
    for (cplx s : c.singular_points())
        if (std::abs(z - s) < 1e-300) throw DomainError("branch_values: z is a singular point of the curve");
    for (cplx bp : c.branch_point_cache())
        if (!c.is_singular(bp) && std::abs(z - bp) < kBranchExclusion) throw DegeneracyError("branch_values: z is within 1e-6 of a branch point");

    // Leave the nearest axis perpendicularly, then run radially out; every
    // built-in cut lies on the axes, so the path stays in one open quadrant.
    const double off = 1 + std::abs(z);
    cplx w1;
    if (std::abs(z.imag()) <= std::abs(z.real())) w1 = z + I * (z.imag() < 0 ? -off : off);
    else w1 = z + (z.real() < 0 ? -off : off);
    const double r1 = std::abs(w1);
    const cplx F = r1 >= kFar ? w1 : w1 * (kFar / r1);
    auto cur = label_far(c, F);
    if (F != w1) {
        const double ratio = r1 / kFar;
        cur = track(c, cur, [&](double s) { return F * std::pow(ratio, s); });
    }
    cur = track(c, cur, [&](double s) { return w1 + s * (z - w1); });
    return {cur};
}

std::array<BranchTriple, 3> boundary_samples(const AlgebraicCurve& c, cplx x, cplx dir) {
    // Offsets shrink with the distance to a pole of the coefficients so the
    // samples never wander across a neighbouring cut.
    double scale = std::max(1.0, std::abs(x));
    for (cplx s : c.singular_points())
        scale = std::min(scale, std::max(1e-6, std::abs(x - s)));
    std::array<BranchTriple, 3> out;
    const double eps[3] = {1e-4, 1e-5, 1e-6};
    for (int k = 0; k < 3; ++k) out[k] = branch_values(c, x + dir * (eps[k] * scale));
    return out;
}

BranchTriple boundary_values(const AlgebraicCurve& c, cplx x, cplx dir) {
    auto s = boundary_samples(c, x, dir);
    BranchTriple r;
    for (int k = 0; k < 3; ++k) r.H[k] = (10.0 * s[2].H[k] - s[1].H[k]) / 9.0;
    return r;
}

BranchPointSet branch_points(const AlgebraicCurve& c) { return compute_branch_points(c); }

// ------------------------------------------------------------------ densities

namespace {
bool near_branch_point(const AlgebraicCurve& c, cplx x) {
    for (cplx bp : c.branch_point_cache())
        if (!c.is_singular(bp) && std::abs(x - bp) < 1e-5 * std::max(1.0, std::abs(bp))) return true;
    return false;
}
}  // namespace

DensityValue density_lambda1(const AlgebraicCurve& c, double x) {
    DensityValue v;
    if (near_branch_point(c, x) || (c.kind() == CurveKind::Bessel && x <= 0)) return v;
    auto B = boundary_values(c, x, I);
    double d = 0;
    switch (c.kind()) {
        case CurveKind::Bessel:
            // H0 ~ +2/z is the Cauchy transform itself, so its imaginary part
            // from above is -π times the density.
            d = -B.H[0].imag() / M_PI;
            break;
        case CurveKind::Pastur:
        case CurveKind::QuarticSource:
            d = B.H[0].imag() / M_PI;
            break;
        case CurveKind::PollaczekPsi:
            // H0 = (2/i) log ψ0, so Im H0 = -2 log|ψ0|.
            d = -2.0 * std::log(std::abs(B.H[0])) / M_PI;
            break;
    }
    v.in_support = d > 1e-12;
    v.value = v.in_support ? d : 0.0;
    if (d < -1e-10) v.clipped = true;
    return v;
}

DensityValue density_lambda2(const AlgebraicCurve& c, const std::function<double(double)>& sigma_density,
                             double x) {
    DensityValue v;
    const double s = sigma_density(x);
    double d = 0;
    switch (c.kind()) {
        case CurveKind::Bessel: {
            if (x >= 0) return v;
            auto B = boundary_values(c, x, I);
            if (x > -100) {
                d = s - B.H[1].imag() / M_PI;
                break;
            }
            // Far out σ' and Im H1/π agree to O(1/|x|).  With H = 1 + u the curve
            // reads u²(1 + u) = 2/z and u = i·r·(1 + u)^{-1/2}, r = √(2/|x|), so
            // λ₂' = (r/π)·Re(1 - (1 + u)^{-1/2}), which has no cancellation.
            const cplx z(x, 0);
            cplx u = B.H[1] - 1.0;
            for (int it = 0; it < 4; ++it) u -= (u * u * (1.0 + u) - 2.0 / z) / (u * (3.0 * u + 2.0));
            const double r = std::sqrt(2.0 / -x);
            cplx q = std::sqrt(1.0 + u);
            if (std::abs(1.0 / q - u / (I * r)) > std::abs(1.0 / q + u / (I * r))) q = -q;
            d = r / M_PI * (u / (q + 1.0) / q).real();
            break;
        }
        case CurveKind::PollaczekPsi: {
            // ζ = 0 is a pole of the coefficients; the density is continuous
            // across it, so read it just off the origin.
            const cplx z(0, x == 0 ? 1e-4 : x);
            if (near_branch_point(c, z)) {
                d = s;
                break;
            }
            auto B = boundary_values(c, z, -1.0);
            double arg = std::arg(B.H[1]);
            if (arg < 0) arg += 2 * M_PI;
            d = 2 * arg / M_PI - s;  // (1/π) Re H1 - σ'
            break;
        }
        default:
            throw InputError("density_lambda2: no constraint formula for curve '" + c.name() + "'");
    }
    v.in_support = d > 1e-12;
    if (d < -1e-8 || d > s + 1e-8) v.clipped = true;
    v.value = std::clamp(d, 0.0, s);
    return v;
}

cplx pollaczek_uniformization(cplx psi) {
    const cplx den = (psi * psi + 1.0) * (psi - 1.0);
    if (std::abs(den) == 0 || !std::isfinite(std::abs(psi)))
        throw DomainError("pollaczek_uniformization: psi is a pole (1 or ±i)");
    return -I * psi * (psi + 1.0) / den;
}

double pollaczek_halfline_lambda1(double x, double c) {
    if (x <= 0) return 0;
    static const AlgebraicCurve curve = builtin_curve("pollaczek");
    const double zeta = std::sqrt(x / c);
    return density_lambda1(curve, zeta).value / std::sqrt(c * x);
}

double pollaczek_halfline_lambda2(double x, double c) {
    if (x >= 0) return 0;
    static const AlgebraicCurve curve = builtin_curve("pollaczek");
    const double y = std::sqrt(-x / c);
    return density_lambda2(curve, pollaczek_line_sigma_density, y).value / std::sqrt(-c * x);
}

double bessel_sigma_density(double x) { return std::sqrt(2.0) / (M_PI * std::sqrt(std::abs(x))); }
double pollaczek_line_sigma_density(double) { return 1.0; }

}  // namespace nikeq
