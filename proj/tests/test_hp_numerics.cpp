#include <cmath>
#include <random>

#include "doctest.h"
#include "nikeq/errors.hpp"
#include "nikeq/quadrature.hpp"
#include "nikeq/roots.hpp"

using namespace nikeq;

TEST_CASE("quadrature: exponential on half-line") {
    auto ctx = PrecisionContext::for_bits(256);
    PrecisionScope s(ctx);
    auto r = integrate_adaptive([](const Real& t) { return Real(exp(-t)); }, Real(0),
                                std::numeric_limits<Real>::infinity(), ctx);
    CHECK(abs(r.value - 1) <= r.error_bound + Real(1e-70));
    CHECK(r.error_bound <= Real(1e-60));
}

TEST_CASE("quadrature: log singularity at the endpoint") {
    auto ctx = PrecisionContext::for_bits(256);
    PrecisionScope s(ctx);
    auto r = integrate_adaptive([](const Real& y) { return Real(-log(y)); }, Real(0), Real(1), ctx);
    CHECK(abs(r.value - 1) < Real(1e-60));
}

TEST_CASE("quadrature: 1/sinh(pi sqrt(x)/2) integrates to 2") {
    auto ctx = PrecisionContext::for_bits(256);
    PrecisionScope s(ctx);
    const Real pi = acos(Real(-1));
    auto r = integrate_adaptive([&](const Real& x) { return Real(1 / sinh(pi * sqrt(x) / 2)); },
                                Real(0), std::numeric_limits<Real>::infinity(), ctx);
    CHECK(abs(r.value - 2) < Real(1e-60));
}

TEST_CASE("quadrature: double version and errors") {
    auto r = integrate_adaptive([](double x) { return std::exp(-x * x); },
                                -std::numeric_limits<double>::infinity(),
                                std::numeric_limits<double>::infinity());
    CHECK(std::abs(r.value - std::sqrt(M_PI)) < 1e-12);
    CHECK_THROWS_AS(integrate_adaptive([](double) { return std::nan(""); }, 0.0, 1.0), InputError);
    CHECK_THROWS_AS(integrate_adaptive([](double x) { return x; }, 1.0, 0.0), InputError);
    // Oscillating without decay: refinement cannot settle.
    QuadTolerances tol;
    tol.max_level = 4;
    std::function<double(const double&)> f = [](const double& x) { return std::sin(40 * x) / (1e-3 + x); };
    CHECK_THROWS_AS(integrate_de<double>(f, 0.0, 50.0, tol), ConvergenceError);
}

TEST_CASE("quadrature: refinement errors shrink level by level") {
    auto ctx = PrecisionContext::for_bits(128);
    PrecisionScope s(ctx);
    const Real pi = acos(Real(-1));
    std::vector<std::function<Real(const Real&)>> fs = {
        [](const Real& t) { return Real(exp(-t)); },
        [&](const Real& x) { return Real(1 / sinh(pi * sqrt(x) / 2)); },
        [](const Real& x) { return Real(1 / (1 + x * x)); },
    };
    for (auto& f : fs) {
        auto r = integrate_adaptive(f, Real(0), std::numeric_limits<Real>::infinity(), ctx);
        for (std::size_t k = 2; k < r.level_errors.size(); ++k)
            CHECK(r.level_errors[k] <= r.level_errors[k - 1]);
    }
}

TEST_CASE("quadrature: more bits never loosen the bound") {
    PrecisionContext lo = PrecisionContext::for_bits(128), hi = PrecisionContext::for_bits(256);
    hi.abs_tol = lo.abs_tol;
    hi.rel_tol = lo.rel_tol;
    PrecisionScope s(hi);
    auto f = [](const Real& y) { return Real(-log(y) * sqrt(y)); };
    auto a = integrate_adaptive(f, Real(0), Real(1), lo);
    auto b = integrate_adaptive(f, Real(0), Real(1), hi);
    CHECK(b.error_bound <= a.error_bound);
    CHECK(abs(a.value - Real(4) / 9) < Real(1e-30));
}

TEST_CASE("roots: quadratic x^2 - 11x + 6") {
    auto ctx = PrecisionContext::for_bits(256);
    PrecisionScope s(ctx);
    Polynomial<Real> p({Real(6), Real(-11), Real(1)});
    auto r = isolate_real_roots(p, Real(0), Real(20), ctx);
    REQUIRE(r.size() == 2);
    const Real s97 = sqrt(Real(97));
    CHECK(abs(r[0].root - (11 - s97) / 2) < Real(1e-70));
    CHECK(abs(r[1].root - (11 + s97) / 2) < Real(1e-70));
    for (auto& x : r) CHECK(x.residual <= Real(ctx.abs_tol) * 11);
}

TEST_CASE("roots: multiple root flagged, strict mode throws") {
    auto ctx = PrecisionContext::for_bits(256);
    PrecisionScope s(ctx);
    Polynomial<Real> p({Real(0), Real(1), Real(-2), Real(1)});
    auto r = isolate_real_roots(p, Real(-1), Real(2), ctx, MultipleRootPolicy::Flag);
    REQUIRE(r.size() == 2);
    CHECK(abs(r[0].root) < Real(1e-60));
    CHECK(r[0].multiplicity == 1);
    CHECK(abs(r[1].root - 1) < Real(1e-60));
    CHECK(r[1].multiplicity == 2);
    CHECK_THROWS_AS(isolate_real_roots(p, Real(-1), Real(2), ctx), DegeneracyError);
}

TEST_CASE("roots: root outside the interval") {
    auto ctx = PrecisionContext::for_bits(128);
    PrecisionScope s(ctx);
    Polynomial<Real> p({Real(-5), Real(1)});
    CHECK(isolate_real_roots(p, Real(0), Real(1), ctx).empty());
}

TEST_CASE("roots: planted integer roots recovered") {
    auto ctx = PrecisionContext::for_bits(256);
    PrecisionScope s(ctx);
    std::mt19937 rng(7);
    for (int trial = 0; trial < 40; ++trial) {
        const int deg = 1 + static_cast<int>(rng() % 12);
        std::vector<int> pool;
        for (int v = -30; v <= 30; ++v) pool.push_back(v);
        std::shuffle(pool.begin(), pool.end(), rng);
        std::vector<Real> planted;
        for (int i = 0; i < deg; ++i) planted.push_back(Real(pool[i]));
        auto p = Polynomial<Real>::from_roots(planted);
        auto r = isolate_real_roots(p, Real(-31), Real(31), ctx);
        std::sort(planted.begin(), planted.end());
        REQUIRE(r.size() == planted.size());
        for (std::size_t i = 0; i < r.size(); ++i) CHECK(abs(r[i].root - planted[i]) <= Real(10 * ctx.abs_tol));
        CHECK(count_real_roots(p, Real(-31), Real(31), ctx) == deg);
    }
}

TEST_CASE("cubic: examples") {
    using C = std::complex<double>;
    auto has = [](const CubicRoots& r, C v, double tol) {
        for (auto& x : r.roots)
            if (std::abs(x - v) < tol) return true;
        return false;
    };
    auto b = solve_cubic(-2.0, 1.0, 0.0);
    CHECK(has(b, 0.0, 1e-12));
    CHECK(has(b, 1.0, 1e-7));
    int doubles = 0;
    for (int k = 0; k < 3; ++k) doubles += b.multiplicity[k] == 2;
    CHECK(doubles == 2);

    auto h = solve_cubic(0.0, 1.0, 0.0);
    CHECK(has(h, 0.0, 1e-14));
    CHECK(has(h, C(0, 1), 1e-14));
    CHECK(has(h, C(0, -1), 1e-14));

    const C I(0, 1);
    const C zeta = -6.0 * I / 5.0;
    auto pz = solve_cubic((I - zeta) / zeta, (I + zeta) / zeta, -1.0);
    CHECK(has(pz, 2.0, 1e-12));
}

TEST_CASE("cubic: Vieta and residuals on random triples") {
    using C = std::complex<double>;
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> U(-3, 3);
    for (int t = 0; t < 1000; ++t) {
        C c2(U(rng), U(rng)), c1(U(rng), U(rng)), c0(U(rng), U(rng));
        auto r = solve_cubic(c2, c1, c0);
        C sum = r.roots[0] + r.roots[1] + r.roots[2];
        C prod = r.roots[0] * r.roots[1] * r.roots[2];
        const double scale = std::abs(r.roots[0]) + std::abs(r.roots[1]) + std::abs(r.roots[2]);
        const double pscale = std::abs(r.roots[0]) * std::abs(r.roots[1]) * std::abs(r.roots[2]);
        CHECK(std::abs(sum + c2) <= 1e-12 * std::max(1.0, scale));
        CHECK(std::abs(prod + c0) <= 1e-12 * std::max(std::abs(c0), pscale));
        for (auto x : r.roots) {
            C v = ((x + c2) * x + c1) * x + c0;
            CHECK(std::abs(v) <= 1e-12 * std::pow(1 + std::abs(x), 3));
        }
    }
}
