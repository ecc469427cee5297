// One PASS/FAIL line per acceptance criterion.  `acceptance 3 7` runs a subset.
#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>

#include "nikeq/cli.hpp"
#include "nikeq/equilibrium.hpp"
#include "nikeq/nikishin_mop.hpp"
#include "nikeq/quadrature.hpp"
#include "nikeq/report.hpp"
#include "nikeq/spectral_curves.hpp"

using namespace nikeq;
namespace fs = std::filesystem;

namespace {

const double E1SQ = (11 + 5 * std::sqrt(5.0)) / 8;
const double E2SQ = (5 * std::sqrt(5.0) - 11) / 8;

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string num(double v) {
    std::ostringstream o;
    o << std::setprecision(4) << v;
    return o.str();
}

// Collects sub-results; the criterion passes when all of them do.
struct Verdict {
    bool pass = true;
    std::ostringstream detail;
    void add(bool ok, const std::string& what) {
        pass = pass && ok;
        if (detail.tellp() > 0) detail << "; ";
        detail << what << (ok ? "" : " [fail]");
    }
    Outcome done() const { return {pass, detail.str()}; }
};

double elapsed(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double rough(const std::function<double(double)>& f, double a, double b) {
    QuadTolerances t;
    t.abs_tol = t.rel_tol = 1e-7;
    t.max_level = 6;
    try {
        return integrate_de<double>([&](const double& x) { return f(x); }, a, b, t).value;
    } catch (const ConvergenceError& e) {
        return e.last_estimate();
    }
}

double cell_width_at(const std::vector<double>& edges, double x) {
    for (std::size_t i = 0; i + 1 < edges.size(); ++i)
        if (edges[i] <= x && x <= edges[i + 1]) return edges[i + 1] - edges[i];
    return 0;
}

// ---------------------------------------------------------------- shared runs

struct Solved {
    EquilibriumSolution s500, s1000;
    std::function<double(double)> l1, l2;
    double endpoint = 0;
};

std::map<std::string, Solved>& solved() {
    static std::map<std::string, Solved> m;
    return m;
}

const Solved& problem(const std::string& name) {
    auto& m = solved();
    auto it = m.find(name);
    if (it != m.end()) return it->second;
    Solved s;
    if (name == "bessel") {
        auto c = std::make_shared<AlgebraicCurve>(builtin_curve("bessel"));
        s.l1 = [c](double x) { return density_lambda1(*c, x).value; };
        s.l2 = [c](double x) { return density_lambda2(*c, bessel_sigma_density, x).value; };
        s.endpoint = 13.5;
        s.s500 = solve_equilibrium(builtin_problem("bessel", 1, 500), 1e-6, 200);
        s.s1000 = solve_equilibrium(builtin_problem("bessel", 1, 1000), 1e-6, 200);
    } else {
        s.l1 = [](double x) { return pollaczek_halfline_lambda1(x, 1); };
        s.l2 = [](double x) { return pollaczek_halfline_lambda2(x, 1); };
        s.endpoint = E1SQ;
        s.s500 = solve_equilibrium(builtin_problem("pollaczek", 1, 500), 1e-6, 200);
        s.s1000 = solve_equilibrium(builtin_problem("pollaczek", 1, 1000), 1e-6, 200);
    }
    return m.emplace(name, std::move(s)).first->second;
}

// The MOP-consistent equilibrium (coordinate scale 4 = d_n/n²).
const EquilibriumSolution& mop_equilibrium() {
    static const EquilibriumSolution s = solve_equilibrium(builtin_problem("pollaczek", 4, 500), 1e-6, 200);
    return s;
}

struct MopRun {
    MopPair pair;
    NormIntegrals norms;
    RescaledPair scaled;
};

const std::vector<int> kMopN{1, 2, 4, 8, 12, 16};
constexpr int kMopBits = 1024;

std::map<int, MopRun>& mop_runs(double* seconds = nullptr) {
    static std::map<int, MopRun> runs;
    static double total = 0;
    if (runs.empty()) {
        const auto t0 = std::chrono::steady_clock::now();
        const NikishinSystem sys = pollaczek_system();
        const PrecisionContext ctx = PrecisionContext::for_bits(kMopBits);
        PrecisionScope scope(ctx);
        for (int n : kMopN) {
            MopRun r;
            r.pair = compute_Pn(sys, n, ctx);
            compute_Pn2(sys, r.pair, ctx);
            r.norms = norm_integrals(sys, r.pair, ctx);
            r.scaled = rescale_pair(r.pair, Real(sys.scaling(n)));
            runs.emplace(n, std::move(r));
        }
        total = elapsed(t0);
    }
    if (seconds) *seconds = total;
    return runs;
}

// ---------------------------------------------------------------- criteria

Outcome c1() {
    const fs::path dir = fs::temp_directory_path() / "nikeq_acceptance_bp";
    std::ostringstream out, err;
    const auto t0 = std::chrono::steady_clock::now();
    const int status = run_command({"--out", dir.string(), "curve", "branch-points", "pollaczek"}, out, err);
    const double secs = elapsed(t0);
    Verdict v;
    v.add(status == 0, "exit " + std::to_string(status));
    json j = read_json_file(dir / "branch_points.json");
    const double e1 = std::sqrt(E1SQ), e2 = std::sqrt(E2SQ);
    std::vector<cplx> want{{e1, 0}, {-e1, 0}, {0, e2}, {0, -e2}};
    double worst_loc = 0, worst_res = 0;
    for (const auto& p : j.at("points")) worst_res = std::max(worst_res, p.at("discriminant_residual").get<double>());
    for (cplx w : want) {
        double best = INFINITY;
        for (const auto& p : j.at("points"))
            best = std::min(best, std::abs(cplx(p.at("re").get<double>(), p.at("im").get<double>()) - w));
        worst_loc = std::max(worst_loc, best);
    }
    v.add(j.at("points").size() == 4, std::to_string(j.at("points").size()) + " points");
    v.add(worst_loc <= 1e-10, "max distance to ±√((11+5√5)/8), ±i√((5√5−11)/8) = " + num(worst_loc));
    v.add(worst_res <= 1e-10, "discriminant residual " + num(worst_res));
    v.add(out.str().find("1.6650953") != std::string::npos && out.str().find("0.1501416i") != std::string::npos,
          "printed values");
    v.add(out.str().find("discriminant:") != std::string::npos, "printed discriminant");
    v.add(secs < 1, "runtime " + num(secs) + " s");
    fs::remove_all(dir);
    return v.done();
}

Outcome c2() {
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    auto b = builtin_curve("bessel");
    const double mb = rough([&](double x) { return density_lambda1(b, x).value; }, 0.0, 13.5);
    v.add(std::abs(mb - 2) <= 1e-3, "bessel |lambda1| = " + num(mb));
    auto p = builtin_curve("pollaczek");
    const double e1 = std::sqrt(E1SQ), e2 = std::sqrt(E2SQ);
    const double mp = 2 * rough([&](double x) { return density_lambda1(p, x).value; }, 0.0, e1);
    v.add(std::abs(mp - 2) <= 1e-3, "pollaczek |lambda1| = " + num(mp));
    double worst = 0;
    for (int k = 0; k <= 100; ++k) {
        const double y = -e2 + 2 * e2 * (0.0025 + 0.995 * k / 100.0);
        worst = std::max(worst, std::abs(density_lambda2(p, pollaczek_line_sigma_density, y).value - 1));
    }
    v.add(worst <= 1e-6, "max |lambda2' - 1| on (-e2, e2) = " + num(worst));
    const double secs = elapsed(t0);
    v.add(secs < 30, "runtime " + num(secs) + " s");
    return v.done();
}

Outcome c3() {
    Verdict v;
    for (const std::string name : {"bessel", "pollaczek"}) {
        const auto t0 = std::chrono::steady_clock::now();
        const Solved& s = problem(name);
        const double secs = elapsed(t0);
        const double a1 = l1_gap(s.s500.lambda.mu1, s.l1), a2 = l1_gap(s.s500.lambda.mu2, s.l2);
        const double b1 = l1_gap(s.s1000.lambda.mu1, s.l1), b2 = l1_gap(s.s1000.lambda.mu2, s.l2);
        v.add(a1 <= 5e-2 && a2 <= 5e-2, name + " N=500 gaps " + num(a1) + ", " + num(a2));
        v.add(b1 <= 0.7 * a1 && b2 <= 0.7 * a2, "N=1000 gaps " + num(b1) + ", " + num(b2));
        for (const auto* sol : {&s.s500, &s.s1000}) {
            const double w = cell_width_at(sol->problem.plus_edges(), s.endpoint);
            const double hi = sol->supp1.empty() ? 0 : sol->supp1.back().hi;
            v.add(std::abs(hi - s.endpoint) <= 2 * w,
                  "N=" + std::to_string(sol->problem.n_plus) + " endpoint " + num(hi) + " vs " + num(s.endpoint));
        }
        v.add(secs <= 600, "both solves " + num(secs) + " s");
    }
    return v.done();
}

Outcome c4() {
    Verdict v;
    for (const std::string name : {"bessel", "pollaczek"}) {
        const ResidualReport& r = problem(name).s500.residuals;
        const double worst = std::max({r.w1_equality, r.w1_lower, r.w2_upper, r.w2_lower});
        v.add(worst <= 1e-3, name + " max W violation " + num(worst));
        v.add(r.directions >= 100 && r.directional_min >= -1e-3,
              std::to_string(r.directions) + " directions, min " + num(r.directional_min));
    }
    return v.done();
}

Outcome c5() {
    Verdict v;
    for (const std::string name : {"bessel", "pollaczek"}) {
        const EquilibriumSolution& base = problem(name).s500;
        for (double c : {1.0, -2.0, 5.0}) {
            json j = problem_to_json(base.problem);
            j["field"]["shift"] = c;
            const EquilibriumSolution t = solve_equilibrium(problem_from_json(j), 1e-6, 200);
            double dm = 0;
            for (std::size_t i = 0; i < base.lambda.mu1.size(); ++i)
                dm = std::max(dm, std::abs(t.lambda.mu1.masses()[i] - base.lambda.mu1.masses()[i]));
            for (std::size_t i = 0; i < base.lambda.mu2.size(); ++i)
                dm = std::max(dm, std::abs(t.lambda.mu2.masses()[i] - base.lambda.mu2.masses()[i]));
            const double dw = std::abs(t.w1 - base.w1 - c);
            v.add(dm <= 1e-8 && dw <= 1e-8, name + " c=" + num(c) + ": cell diff " + num(dm) + ", |dw1-c| " + num(dw));
        }
    }
    return v.done();
}

Outcome c6() {
    Verdict v;
    const PrecisionContext ctx = PrecisionContext::for_bits(256);
    PrecisionScope scope(ctx);
    const Real tol("1e-25");
    const NikishinSystem sys = pollaczek_system();
    const std::vector<int> want{6, -11, 1};
    auto coeff_err = [&](const MopPair& p) {
        Real e = 0;
        const auto& c = p.Pn.coefficients();
        if (c.size() != 3) return Real(1);
        for (int i = 0; i < 3; ++i) e = std::max(e, Real(abs(c[i] - want[i])));
        return e;
    };
    const Real e_exact = coeff_err(compute_Pn(sys, 1, ctx));
    v.add(e_exact <= tol, "P1 from exact moments, max coeff error " + num(double(e_exact)));
    NikishinSystem q = sys;
    q.exact_moment = nullptr;
    const Real e_quad = coeff_err(compute_Pn(q, 1, ctx));
    v.add(e_quad <= tol, "P1 from quadrature moments, max coeff error " + num(double(e_quad)));
    const int m1[] = {2, 4, 32}, m2[] = {2, 2, 10};
    Real worst = 0;
    for (int nu = 0; nu < 3; ++nu) {
        worst = std::max(worst, Real(abs(moment_quadrature(sys, 1, nu, ctx) - m1[nu])));
        worst = std::max(worst, Real(abs(moment_quadrature(sys, 2, nu, ctx) - m2[nu])));
        worst = std::max(worst, Real(abs(moment(sys, 1, nu, ctx) - m1[nu])));
        worst = std::max(worst, Real(abs(moment(sys, 2, nu, ctx) - m2[nu])));
    }
    v.add(worst <= tol, "moments (2,4,32), (2,2,10): max error " + num(double(worst)));
    return v.done();
}

Outcome c7() {
    double secs = 0;
    auto& runs = mop_runs(&secs);
    Verdict v;
    const double bound = std::pow(10.0, -kMopBits / 8.0);
    for (auto& [n, r] : runs) {
        const MopPair& p = r.pair;
        const std::string tag = "n=" + std::to_string(n) + ": ";
        v.add(p.residual <= bound && p.residual_3 <= bound,
              tag + "defects " + num(p.residual) + ", " + num(p.residual_3) + " (sigma2 side " + num(p.residual_4) +
                  ", reported)");
        bool pos = p.zeros_Pn.size() == static_cast<std::size_t>(p.Pn.degree());
        for (std::size_t k = 0; k < p.zeros_Pn.size(); ++k) {
            pos = pos && p.zeros_Pn[k] > 0;
            if (k) pos = pos && p.zeros_Pn[k] > p.zeros_Pn[k - 1];
        }
        v.add(pos, tag + std::to_string(p.zeros_Pn.size()) + " positive simple zeros");
        bool neg = p.zeros_Pn2.size() == static_cast<std::size_t>(p.Pn2.degree());
        for (const Real& t : p.zeros_Pn2) neg = neg && t < 0;
        std::set<long> gaps(p.gaps.begin(), p.gaps.end());
        neg = neg && gaps.size() == p.gaps.size() && p.gaps.size() == p.zeros_Pn2.size() && p.max_changes_per_gap <= 1;
        v.add(neg, tag + std::to_string(p.zeros_Pn2.size()) + " negative P_n2 zeros, one per gap");
    }
    v.add(secs <= 1800, "total " + num(secs) + " s");
    return v.done();
}

Outcome c8() {
    auto& runs = mop_runs();
    const EquilibriumSolution& eq = mop_equilibrium();
    std::vector<double> half(eq.lambda.mu1.masses());
    for (double& m : half) m /= 2;
    const GridMeasure half1 = eq.lambda.mu1.with_masses(half);
    auto d = [&](int n) {
        const MopRun& r = runs.at(n);
        const double a = cdf_distance(zero_counting(to_doubles(r.scaled.zeros_Qn), 2 * n), half1);
        const double b = cdf_distance(zero_counting(to_doubles(r.scaled.zeros_Qn2), n), eq.lambda.mu2,
                                      Interval{-50, 0});
        return std::pair{a, b};
    };
    auto [a4, b4] = d(4);
    auto [a16, b16] = d(16);
    Verdict v;
    v.add(a16 < a4 && a16 <= 0.12, "lambda1/2: n=4 " + num(a4) + ", n=16 " + num(a16));
    v.add(b16 < b4 && b16 <= 0.15, "lambda2 on [-50,0]: n=4 " + num(b4) + ", n=16 " + num(b16));
    return v.done();
}

Outcome c9() {
    auto& runs = mop_runs();
    const EquilibriumSolution& eq = mop_equilibrium();
    const double w1 = eq.w1, w12 = eq.w1 + eq.w2;
    auto g = [&](int n) {
        const NormIntegrals& r = runs.at(n).norms;
        return std::pair{std::abs(-r.log_N1 / n - w1), std::abs(-r.log_N2 / n - w12)};
    };
    auto [a4, b4] = g(4);
    auto [a16, b16] = g(16);
    Verdict v;
    v.add(a16 < a4 && a16 <= 0.2 * std::abs(w1),
          "N1 vs w1=" + num(w1) + ": n=4 " + num(a4) + ", n=16 " + num(a16));
    v.add(b16 < b4 && b16 <= 0.2 * std::abs(w12),
          "N2 vs w1+w2=" + num(w12) + ": n=4 " + num(b4) + ", n=16 " + num(b16));
    return v.done();
}

Outcome c10() {
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    std::mt19937 rng(2024);
    std::uniform_real_distribution<double> U(0, 1);

    // I(μ − ν) ≥ 0 for equal masses.
    int ok = 0;
    for (int t = 0; t < 200; ++t) {
        const int n1 = 5 + rng() % 40, n2 = 5 + rng() % 40;
        const double a1 = 5 * U(rng), b1 = a1 + 0.1 + 5 * U(rng);
        const double a2 = 5 * U(rng), b2 = a2 + 0.1 + 5 * U(rng);
        std::vector<double> m1(n1), m2(n2);
        for (auto& x : m1) x = U(rng);
        for (auto& x : m2) x = U(rng);
        GridMeasure g1 = GridMeasure::uniform(a1, b1, n1, 1).with_masses(m1);
        GridMeasure g2 = GridMeasure::uniform(a2, b2, n2, 1).with_masses(m2);
        for (auto& x : m2) x *= g1.total_mass() / g2.total_mass();
        g2 = g2.with_masses(m2);
        const auto e = energy_forms(g1, g2);
        ok += e.I_self_1 + e.I_self_2 - 2 * e.I_mutual >= -1e-10;
    }
    v.add(ok == 200, "energy positivity " + std::to_string(ok) + "/200");

    // Cell averages of log(1/|x−y|) + ½log(1+x²) + ½log(1+y²) stay ≥ 0.
    std::cauchy_distribution<double> C(0, 3);
    ok = 0;
    for (int k = 0; k < 10000; ++k) {
        const double a = C(rng), b = C(rng), h1 = 1e-3 + U(rng), h2 = 1e-3 + U(rng);
        const double val = kernel::cell_cell(a, a + h1, b, b + h2) + 0.5 * kernel::cell_log_moment(a, a + h1) +
                           0.5 * kernel::cell_log_moment(b, b + h2);
        ok += val >= -1e-12;
    }
    v.add(ok == 10000, "modified kernel " + std::to_string(ok) + "/10000");

    std::uniform_real_distribution<double> V(-6, 6);
    int curves_ok = 0, curves = 0;
    for (auto c : {builtin_curve("bessel"), builtin_curve("pastur", 1.0), builtin_curve("pollaczek"),
                   builtin_curve("quartic_source", 0.3, -2.5)}) {
        ++curves;
        int n = 0, good = 0;
        while (n < 1000) {
            cplx z(V(rng), V(rng));
            if (std::abs(z.real()) < 1e-3 || std::abs(z.imag()) < 1e-3) continue;
            BranchTriple t;
            try {
                t = branch_values(c, z);
            } catch (const DegeneracyError&) {
                continue;
            }
            ++n;
            auto p = c.coefficients(z);
            auto rel = [](cplx a, cplx b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); };
            good += rel(t.H[0] + t.H[1] + t.H[2], -p[0]) <= 1e-10 &&
                    rel(t.H[0] * t.H[1] + t.H[0] * t.H[2] + t.H[1] * t.H[2], p[1]) <= 1e-10 &&
                    rel(t.H[0] * t.H[1] * t.H[2], -p[2]) <= 1e-10;
        }
        curves_ok += good == 1000;
    }
    v.add(curves_ok == curves, "Vieta on " + std::to_string(curves_ok) + "/" + std::to_string(curves) + " curves");

    const cplx I(0, 1);
    std::uniform_real_distribution<double> W(-4, 4);
    ok = 0;
    for (int k = 0; k < 1000; ++k) {
        const cplx psi(W(rng), W(rng));
        const cplx zeta = pollaczek_uniformization(psi);
        const cplx r = psi * psi * psi + (I - zeta) / zeta * psi * psi + (I + zeta) / zeta * psi - 1.0;
        ok += std::abs(r) <= 1e-10 * std::max(1.0, std::pow(std::abs(psi), 3));
    }
    v.add(ok == 1000, "uniformization " + std::to_string(ok) + "/1000");

    const double r3 = std::sqrt(3.0), q = std::pow(3.0, 0.25) / 3;
    const double qe = std::max({std::abs(quartic_a_m(-2.0)), std::abs(quartic_a_M(-2.0) - 2 * r3 / 9),
                                std::abs(quartic_a_m(-r3) - q), std::abs(quartic_a_M(-r3) - q)});
    v.add(qe <= 1e-10, "quartic region values, max error " + num(qe));
    const double secs = elapsed(t0);
    v.add(secs < 120, "runtime " + num(secs) + " s");
    return v.done();
}

Outcome c11() {
    const AssumptionReport rep = check_assumptions(pollaczek_system(), {10, 50, 200});
    Verdict v;
    for (const auto& r : rep.records) {
        if (r.condition == "(i)") v.add(r.value >= 4.0 / 3, "(i) n=" + std::to_string(r.n) + " ratio " + num(r.value));
        if (r.condition == "(v)" && r.n == 50) v.add(r.value <= 0.05, "(v) n=50 gap " + num(r.value));
        if (r.condition == "(iv)") v.add(r.pass, "(iv) n=" + std::to_string(r.n) + " gap " + num(r.value));
    }
    return v.done();
}

}  // namespace

int main(int argc, char** argv) {
    const std::vector<std::function<Outcome()>> all{c1, c2, c3, c4, c5, c6, c7, c8, c9, c10, c11};
    std::set<int> pick;
    for (int i = 1; i < argc; ++i) pick.insert(std::atoi(argv[i]));
    int failed = 0;
    for (int k = 1; k <= static_cast<int>(all.size()); ++k) {
        if (!pick.empty() && !pick.count(k)) continue;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = all[k - 1]();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failed += !o.pass;
        std::cout << "criterion " << k << ": " << (o.pass ? "PASS" : "FAIL") << "  (" << std::fixed
                  << std::setprecision(1) << elapsed(t0) << " s)  " << std::defaultfloat << o.detail << std::endl;
    }
    return failed ? 1 : 0;
}
