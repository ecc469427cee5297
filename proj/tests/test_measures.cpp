#include <cmath>
#include <random>

#include "doctest.h"
#include "nikeq/errors.hpp"
#include "nikeq/measure_io.hpp"
#include "nikeq/measures.hpp"
#include "nikeq/quadrature.hpp"

using namespace nikeq;

namespace {
// Brute-force ∫_a^b log(1/|x-y|) dy with the singular point split out.
double brute_point(double a, double b, double x) {
    auto f = [x](double y) { return -std::log(std::abs(x - y)); };
    if (x <= a || x >= b) return integrate_adaptive(f, a, b, 1e-13, 1e-13).value;
    return integrate_adaptive(f, a, x, 1e-13, 1e-13).value + integrate_adaptive(f, x, b, 1e-13, 1e-13).value;
}
double brute_pair(double a1, double b1, double a2, double b2) {
    auto g = [&](double x) { return brute_point(a2, b2, x); };
    // Split the outer range at the inner cell's edges, where g has kinks.
    std::vector<double> cuts{a1};
    for (double e : {a2, b2})
        if (e > a1 && e < b1) cuts.push_back(e);
    cuts.push_back(b1);
    double acc = 0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
        acc += integrate_adaptive(g, cuts[i], cuts[i + 1], 1e-10, 1e-10).value;
    return acc;
}
const double kLogMoment01 = std::log(2.0) - 2 + M_PI / 2;
}  // namespace

TEST_CASE("log_potential examples") {
    GridMeasure tiny = GridMeasure::from_edges({-1e-6, 1e-6}, {1.0});
    CHECK(log_potential(tiny, 2.0) == doctest::Approx(-std::log(2.0)).epsilon(1e-11));
    GridMeasure u = GridMeasure::uniform(-1, 1, 7, 1.0);
    CHECK(log_potential(u, 0.0) == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(log_potential(GridMeasure(), 3.0) == 0.0);
}

TEST_CASE("cell kernels agree with brute-force quadrature") {
    struct C { double a1, b1, a2, b2; };
    for (C c : {C{0, 1, 0, 1}, C{0, 1, 1, 3}, C{0, 0.1, 2, 2.3}, C{-5, -4, 10, 10.5}, C{0, 1e-3, -50, -40},
                C{0, 2, 0.5, 0.7}}) {
        const double exact = brute_pair(c.a1, c.b1, c.a2, c.b2) / ((c.b1 - c.a1) * (c.b2 - c.a2));
        CHECK(kernel::cell_cell(c.a1, c.b1, c.a2, c.b2) == doctest::Approx(exact).epsilon(1e-9));
    }
    for (double x : {-3.0, 0.2, 0.5, 1.0, 1.7, 40.0}) {
        CHECK(kernel::cell_point(0, 1, x) == doctest::Approx(brute_point(0, 1, x)).epsilon(1e-11));
    }
    // Far-field series and closed form meet continuously at the switch.
    const double h = 1.0;
    for (double d : {1.6, 1.66, 1.67, 1.7, 3.0}) {
        double a = kernel::cell_cell(0, h, d, d + h);
        CHECK(a == doctest::Approx(brute_pair(0, h, d, d + h)).epsilon(1e-9));
    }
}

TEST_CASE("modified_potential examples and constant offset") {
    GridMeasure tiny = GridMeasure::from_edges({-1e-6, 1e-6}, {1.0});
    CHECK(modified_potential(tiny, 3.0) == doctest::Approx(-std::log(3.0)).epsilon(1e-10));
    // Kernel at x = 0, y = 1
    CHECK(std::log(std::sqrt(2.0) / 1.0) == doctest::Approx(0.5 * std::log(2.0)));
    const double oracle =
        integrate_adaptive([](double y) { return std::log1p(y * y); }, 0.0, 1.0).value;
    CHECK(oracle == doctest::Approx(kLogMoment01).epsilon(1e-13));
    GridMeasure u = GridMeasure::uniform(0, 1, 10, 1.0);
    CHECK(modified_potential(u, 0.0) == doctest::Approx(1 + 0.5 * oracle).epsilon(1e-12));

    std::mt19937 rng(3);
    std::uniform_real_distribution<double> U(-20, 20);
    std::vector<double> m(40);
    for (auto& x : m) x = std::abs(U(rng));
    GridMeasure g = GridMeasure::uniform(-3, 8, 40, 1.0).with_masses(m);
    const double half = 0.5 * log_moment(g);
    for (int k = 0; k < 100; ++k) {
        const double x = U(rng);
        CHECK(modified_potential(g, x) - log_potential(g, x) == doctest::Approx(half).epsilon(1e-12));
    }
}

TEST_CASE("modified kernel is nonnegative") {
    std::mt19937 rng(5);
    std::cauchy_distribution<double> C(0, 3);
    int bad = 0;
    for (int k = 0; k < 10000; ++k) {
        const double x = C(rng), y = C(rng);
        if (x == y) continue;
        const double v = 0.5 * std::log1p(x * x) + 0.5 * std::log1p(y * y) - std::log(std::abs(x - y));
        bad += v < -1e-14;
    }
    CHECK(bad == 0);
}

TEST_CASE("energy forms") {
    GridMeasure u = GridMeasure::uniform(0, 1, 25, 1.0);
    const double oracle = brute_pair(0, 1, 0, 1);
    CHECK(oracle == doctest::Approx(1.5).epsilon(1e-9));
    auto r = energy_forms(u, u);
    CHECK(r.I_self_1 == doctest::Approx(oracle).epsilon(1e-9));
    CHECK(r.log_moment_1 == doctest::Approx(kLogMoment01).epsilon(1e-12));
    CHECK(r.M_mutual >= 0);

    std::mt19937 rng(17);
    std::uniform_real_distribution<double> U(0, 1);
    int worst_ok = 0;
    for (int t = 0; t < 200; ++t) {
        const int n1 = 5 + rng() % 40, n2 = 5 + rng() % 40;
        const double a1 = 10 * U(rng) * 0.5, b1 = a1 + 0.1 + (10 - a1 - 0.1) * U(rng);
        const double a2 = 10 * U(rng) * 0.5, b2 = a2 + 0.1 + (10 - a2 - 0.1) * U(rng);
        std::vector<double> m1(n1), m2(n2);
        for (auto& x : m1) x = U(rng);
        for (auto& x : m2) x = U(rng);
        GridMeasure g1 = GridMeasure::uniform(a1, b1, n1, 1).with_masses(m1);
        GridMeasure g2 = GridMeasure::uniform(a2, b2, n2, 1).with_masses(m2);
        const double s = g1.total_mass() / g2.total_mass();
        for (auto& x : m2) x *= s;
        g2 = g2.with_masses(m2);
        auto e = energy_forms(g1, g2);
        const double diff = e.I_self_1 + e.I_self_2 - 2 * e.I_mutual;
        worst_ok += diff >= -1e-10;
        CHECK(e.M_mutual >= 0);
    }
    CHECK(worst_ok == 200);
}

TEST_CASE("cauchy transform") {
    DiscreteMeasure d0({{0.0, 1.0}});
    auto v = cauchy_transform(d0, {0, 2});
    CHECK(v.real() == doctest::Approx(0));
    CHECK(v.imag() == doctest::Approx(-0.5));
    CHECK_THROWS_AS(cauchy_transform(d0, {0, 0}), DomainError);

    std::vector<Atom> atoms;
    for (long k = 0; k <= 1000000; ++k) atoms.push_back({-double(2 * k + 1) * double(2 * k + 1), 4 / M_PI});
    DiscreteMeasure s2(std::move(atoms));
    CHECK(cauchy_transform(s2, {1, 0}).real() == doctest::Approx(std::tanh(M_PI / 2)).epsilon(1e-6));

    GridMeasure g = GridMeasure::uniform(-2, 3, 30, 1.0);
    CHECK_THROWS_AS(cauchy_transform(g, {0.5, 0}), DomainError);
    double prev = 1e300;
    for (double R : {1e3, 1e4, 1e5}) {
        for (AnyMeasure m : {AnyMeasure(g), AnyMeasure(DiscreteMeasure({{0.3, 0.5}, {-1, 0.5}}))}) {
            std::complex<double> z = std::polar(R, 0.7);
            const double dev = std::abs(z * cauchy_transform(m, z) - 1.0);
            CHECK(dev < prev);
        }
        prev = std::abs(std::polar(R, 0.7) * cauchy_transform(AnyMeasure(g), std::polar(R, 0.7)) - 1.0);
    }
    CHECK(std::abs(std::complex<double>(1e6, 0) * cauchy_transform(g, {1e6, 0}) - 1.0) < 1e-5);
}

TEST_CASE("zero counting") {
    auto z = zero_counting({3, 1}, 2);
    REQUIRE(z.atoms().size() == 2);
    CHECK(z.atoms()[0].loc == 1);
    CHECK(z.atoms()[0].weight == 0.5);
    CHECK_THROWS_AS(zero_counting({}, 0), InputError);
    CHECK_THROWS_AS(zero_counting({1, 1}, 2), InputError);
    const double r = std::sqrt(97.0);
    auto q = zero_counting({(11 - r) / 2, (11 + r) / 2}, 2);
    CHECK(q.atoms()[0].loc == doctest::Approx(0.575571).epsilon(1e-6));
    for (int n = 1; n < 300; ++n) {
        std::vector<double> roots(n);
        for (int i = 0; i < n; ++i) roots[i] = i * 0.37;
        CHECK(zero_counting(roots, n).total_mass() == 1.0);
    }
}

TEST_CASE("cdf distance") {
    GridMeasure u = GridMeasure::uniform(0, 1, 10, 1.0);
    CHECK(cdf_distance(u, u) == 0.0);
    CHECK(cdf_distance(DiscreteMeasure({{0, 1}}), DiscreteMeasure({{1, 1}})) == 1.0);
    CHECK(cdf_distance(u, DiscreteMeasure({{0.5, 1}})) == doctest::Approx(0.5));
    CHECK_THROWS_AS(cdf_distance(u, DiscreteMeasure({{0.5, 2}})), InputError);
    CHECK(cdf_distance(u, DiscreteMeasure({{0.5, 1}}), Interval{0.8, 1.0}) == doctest::Approx(0.2));
}

TEST_CASE("measure JSON round trip") {
    GridMeasure g = GridMeasure::uniform(-2, 1, 5, 0.3);
    auto j = to_json(g, {{"name", "test"}});
    CHECK(j["masses"][0].is_string());
    GridMeasure h = grid_from_json(j);
    for (std::size_t i = 0; i < g.size(); ++i) {
        CHECK(h.masses()[i] == g.masses()[i]);
        CHECK(h.nodes()[i] == g.nodes()[i]);
    }
    DiscreteMeasure d({{1.5, 0.25}, {-2, 0.75}});
    auto dj = to_json(d);
    auto back = std::get<DiscreteMeasure>(measure_from_json(dj));
    CHECK(back.atoms()[0].loc == -2);
    CHECK_THROWS_AS(grid_from_json(json{{"nodes", {1}}}), InputError);
}
