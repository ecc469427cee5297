#include <cmath>
#include <map>
#include <random>

#include <boost/math/special_functions/zeta.hpp>

#include "doctest.h"
#include "nikeq/nikishin_mop.hpp"

using namespace nikeq;

namespace {

double factorial(int k) {
    double f = 1;
    for (int i = 2; i <= k; ++i) f *= i;
    return f;
}

// ∫xᵛ ds₁ = 4(2/π)^{2ν+2}(2ν+1)!(1 − 2^{−(2ν+2)})ζ(2ν+2)
double series_m1(int nu) {
    return 4 * std::pow(2 / M_PI, 2 * nu + 2) * factorial(2 * nu + 1) * (1 - std::pow(2.0, -(2 * nu + 2))) *
           boost::math::zeta(2.0 * nu + 2);
}

// Dirichlet beta by direct alternating summation (s ≥ 3 only).
double dirichlet_beta(int s) {
    double b = 0;
    for (int k = 200000; k >= 0; --k) b += (k % 2 ? -1.0 : 1.0) / std::pow(2.0 * k + 1, s);
    return b;
}

// ∫xᵛ ds₂ = 4(2/π)^{2ν+1}(2ν)! β(2ν+1)
double series_m2(int nu) {
    const double beta = nu == 0 ? M_PI / 4 : dirichlet_beta(2 * nu + 1);
    return 4 * std::pow(2 / M_PI, 2 * nu + 1) * factorial(2 * nu) * beta;
}

const PrecisionContext& ctx256() {
    static PrecisionContext c = PrecisionContext::for_bits(256);
    return c;
}

MopPair& pair_at(int n) {
    static std::map<int, MopPair> cache;
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;
    auto sys = pollaczek_system();
    MopPair p = compute_Pn(sys, n, ctx256());
    compute_Pn2(sys, p, ctx256());
    return cache[n] = p;
}

}  // namespace

TEST_CASE("pollaczek moments") {
    auto sys = pollaczek_system();
    PrecisionScope s(ctx256());
    const double m1[] = {2, 4, 32}, m2[] = {2, 2, 10};
    for (int nu = 0; nu < 3; ++nu) {
        CHECK(moment(sys, 1, nu, ctx256()) == Real(m1[nu]));
        CHECK(moment(sys, 2, nu, ctx256()) == Real(m2[nu]));
    }
    for (int nu = 0; nu <= 10; ++nu) {
        CHECK(static_cast<double>(moment(sys, 1, nu, ctx256())) == doctest::Approx(series_m1(nu)).epsilon(1e-13));
        CHECK(static_cast<double>(moment(sys, 2, nu, ctx256())) == doctest::Approx(series_m2(nu)).epsilon(1e-13));
    }
}

TEST_CASE("moment quadrature agrees with the closed forms") {
    auto sys = pollaczek_system();
    auto ctx = PrecisionContext::for_bits(128);
    PrecisionScope s(ctx);
    for (int j = 1; j <= 2; ++j)
        for (int nu = 0; nu <= 10; ++nu) {
            Real q = moment_quadrature(sys, j, nu, ctx), e = moment(sys, j, nu, ctx);
            CHECK(static_cast<double>(abs(q - e) / e) <= ctx.rel_tol * 10);
        }
}

TEST_CASE("P_1 is x^2 - 11x + 6") {
    const MopPair& p = pair_at(1);
    PrecisionScope s(ctx256());
    REQUIRE(p.exact_coefficients.size() == 3);
    CHECK(p.exact_coefficients[0] == Rational(6));
    CHECK(p.exact_coefficients[1] == Rational(-11));
    CHECK(p.exact_coefficients[2] == Rational(1));
    CHECK(abs(p.Pn[0] - 6) <= Real(1e-25));
    CHECK(abs(p.Pn[1] + 11) <= Real(1e-25));
    CHECK(p.Pn.leading() == 1);
    REQUIRE(p.zeros_Pn.size() == 2);
    Real r = sqrt(Real(97));
    CHECK(abs(p.zeros_Pn[0] - (11 - r) / 2) <= Real(1e-60));
    CHECK(abs(p.zeros_Pn[1] - (11 + r) / 2) <= Real(1e-60));
}

TEST_CASE("structure for small n") {
    const double bound = std::pow(10.0, -256 / 8.0);
    for (int n : {1, 2, 3, 4}) {
        const MopPair& p = pair_at(n);
        CAPTURE(n);
        CHECK(p.Pn.degree() == 2 * n);
        CHECK(p.Pn2.degree() == n);
        CHECK(p.residual <= bound);
        CHECK(p.residual_3 <= bound);
        CHECK(p.residual_4 <= 1e-8);
        for (const Real& x : p.zeros_Pn) CHECK(x > 0);
        for (const Real& t : p.zeros_Pn2) CHECK(t < -1);  // inside the hull of the atoms
        for (std::size_t i = 1; i < p.gaps.size(); ++i) CHECK(p.gaps[i] != p.gaps[i - 1]);
        CHECK(p.max_changes_per_gap == 1);
        for (std::size_t i = 0; i < p.zeros_Pn2.size(); ++i) {
            // zeros ascend, gaps were found from the right
            long g = p.gaps[p.gaps.size() - 1 - i];
            Real hi(-(2 * g + 1) * (2 * g + 1)), lo(-(2 * g + 3) * (2 * g + 3));
            CHECK(p.zeros_Pn2[i] > lo);
            CHECK(p.zeros_Pn2[i] < hi);
        }
    }
    CHECK(zeros_interlace(pair_at(1).zeros_Pn, pair_at(2).zeros_Pn));
    CHECK(zeros_interlace(pair_at(2).zeros_Pn, pair_at(3).zeros_Pn));
}

TEST_CASE("second-kind function") {
    auto sys = pollaczek_system();
    PrecisionScope s(ctx256());
    const MopPair& p1 = pair_at(1);

    // Non-orthogonal P = x: z·R(z) → ∫x dσ₁ = 4.
    Polynomial<Real> X({Real(0), Real(1)});
    SecondKind RX(sys, X, ctx256());
    Real z(-1e6);
    CHECK(static_cast<double>(z * RX(z)) == doctest::Approx(4).epsilon(1e-5));

    // P₁ ⟂ 1 in σ₁, so z²R → ∫xP₁dσ₁ = m₃ − 11m₂ + 6m₁ = 544 − 352 + 24.
    SecondKind R1(sys, p1.Pn, ctx256());
    CHECK(static_cast<double>(z * z * R1(z)) == doctest::Approx(216).epsilon(1e-4));
    SecondKind R1r(sys, p1.Pn, ctx256(), 1);
    for (double zz : {-1.5, -30.0, -1e4})
        CHECK(static_cast<double>(abs(R1(Real(zz)) - R1r(Real(zz))) / abs(R1(Real(zz)))) < 1e-40);

    // Linearity.
    Polynomial<Real> Q({Real(3), Real(-2), Real(0), Real(1)});
    SecondKind RQ(sys, Q, ctx256()), RS(sys, p1.Pn + Q, ctx256());
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> u(0, 6);
    for (int i = 0; i < 10; ++i) {
        Real zz(-std::pow(10.0, u(rng)));
        CHECK(static_cast<double>(abs(RS(zz) - R1(zz) - RQ(zz)) / abs(RS(zz))) < 1e-50);
    }

    // Exactly one sign change on ℝ₋ for n = 1, in (−9, −1).
    int changes = 0;
    Real prev = R1(Real(-1e-3));
    for (int i = 1; i <= 400; ++i) {
        Real v = R1(Real(-std::pow(10.0, -3 + 10.0 * i / 400)));
        if ((v > 0) != (prev > 0)) ++changes;
        prev = v;
    }
    CHECK(changes == 1);
    REQUIRE(p1.zeros_Pn2.size() == 1);
    CHECK(p1.gaps == std::vector<long>{0});
    CHECK(abs(R1(p1.zeros_Pn2[0])) <= Real(1e-30) * abs(R1(Real(-5))));
    CHECK(abs(second_kind_R(sys, p1.Pn, Real(-4), ctx256()) - R1(Real(-4))) <= Real(1e-60) * abs(R1(Real(-4))));
    CHECK_THROWS_AS(R1(Real(1)), DomainError);
}

TEST_CASE("rescaling") {
    const MopPair& p1 = pair_at(1);
    PrecisionScope s(ctx256());
    auto q = rescale_pair(p1, Real(4));
    CHECK(q.Qn[2] == 1);
    CHECK(abs(q.Qn[1] + Real(11) / 4) <= Real(1e-70));
    CHECK(abs(q.Qn[0] - Real(6) / 16) <= Real(1e-70));
    for (int i = 0; i < 2; ++i) CHECK(q.zeros_Qn[i] == p1.zeros_Pn[i] / 4);
    auto id = rescale_pair(p1, Real(1));
    for (int i = 0; i <= 2; ++i) CHECK(id.Qn[i] == p1.Pn[i]);
    CHECK_THROWS_AS(rescale_pair(p1, Real(0.5)), InputError);
}

TEST_CASE("norm integrals are positive") {
    auto sys = pollaczek_system();
    for (int n : {1, 2, 4}) {
        NormIntegrals N = norm_integrals(sys, pair_at(n), ctx256());
        PrecisionScope s(ctx256());
        CHECK(N.N1 > 0);
        CHECK(N.N2 > 0);
        CHECK(std::isfinite(N.log_N1));
        CHECK(N.tail_2 > 0);
        CHECK(N.tail_2 < 0.1);
    }
}

TEST_CASE("assumption checks for the pollaczek system") {
    auto sys = pollaczek_system();
    AssumptionReport rep = check_assumptions(sys, {10, 50, 200});
    int seen_i = 0, seen_iv = 0, seen_v = 0;
    double prev_iv = 1e300;
    for (const auto& r : rep.records) {
        CHECK(!r.domain.empty());
        if (r.condition == "(i)") {
            ++seen_i;
            CHECK(r.value >= 4.0 / 3);
            CHECK(r.value <= 4.0);
        } else if (r.condition == "(iv)") {
            ++seen_iv;
            CHECK(r.value < prev_iv);
            prev_iv = r.value;
        } else if (r.condition == "(v)") {
            ++seen_v;
            // (1/n)log(1/sinh(πn√x)) + π√x = −log(1 − e^{−2πn√x})/n + (log 2)/n
            if (r.n == 50) CHECK(r.value <= 0.05);
            CHECK(r.value == doctest::Approx(std::log(2.0) / r.n).epsilon(1e-3));
        } else if (r.condition == "(iii)") {
            CHECK(r.value == doctest::Approx(std::pow(4 / M_PI, 1.0 / r.n) - 1).epsilon(1e-12));
        } else if (r.condition == "cond1") {
            CHECK(r.pass);
        }
    }
    CHECK(seen_i == 3);
    CHECK(seen_iv == 3);
    CHECK(seen_v == 3);
    CHECK(rep.to_json().size() == rep.records.size());
    CHECK_THROWS_AS(check_assumptions(sys, {10}, {0.5, 4}, {-1, 1}), InputError);
}

TEST_CASE("system validation") {
    auto sys = pollaczek_system();
    sys.sigma2_atom = [](long k) { return MassPoint{Real(-1), Real(1)}; };
    CHECK_THROWS_AS(sys.validate(), InputError);
    auto s2 = pollaczek_system();
    CHECK_THROWS_AS(compute_Pn(s2, 0, ctx256()), InputError);
    CHECK_THROWS_AS(moment(s2, 3, 0, ctx256()), InputError);
}

TEST_CASE("quadrature path without closed-form moments") {
    auto sys = pollaczek_system();
    sys.exact_moment = nullptr;
    auto ctx = PrecisionContext::for_bits(160);
    MopPair p = compute_Pn(sys, 1, ctx);
    PrecisionScope s(ctx);
    CHECK(p.exact_coefficients.empty());
    CHECK(abs(p.Pn[0] - 6) <= Real(1e-25));
    CHECK(abs(p.Pn[1] + 11) <= Real(1e-25));
}
