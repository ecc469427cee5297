#include "nikeq/cli.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <iomanip>
#include <limits>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "nikeq/equilibrium.hpp"
#include "nikeq/nikishin_mop.hpp"
#include "nikeq/report.hpp"
#include "nikeq/spectral_curves.hpp"

namespace nikeq {

namespace fs = std::filesystem;

int default_bits() {
    const char* v = std::getenv("EQUILIB_BITS");
    if (!v || !*v) return 256;
    char* end = nullptr;
    long b = std::strtol(v, &end, 10);
    if (*end != '\0' || b < 64 || b > 1 << 16) throw InputError(std::string("EQUILIB_BITS: invalid value '") + v + "'");
    return static_cast<int>(b);
}

namespace {

struct Options {
    std::string out = "nikeq_out";
    int jobs = 0;
    int bits = 0;
    // equilibrium
    std::string spec;
    double tol = 1e-6;
    int max_iter = 200;
    int n_cells = 0;
    double x_max = 0, t_max = 0;
    std::string route = "plain";
    std::uint64_t seed = 1;
    // curves
    std::string kind;
    double a = 0, b = 0;
    std::string range;
    int points = 401;
    // mop / assumptions / compare
    std::string system = "pollaczek";
    std::vector<int> n_list;
    bool no_norms = false;
    std::string plus_compact = "0.5:4", minus_compact = "-4:-0.05";
    std::vector<std::string> conditions;
    std::string mop_dir, eq_dir, run_dir;
    double window_lo = -50;
};

std::pair<double, double> parse_range(const std::string& s, const std::string& what) {
    auto c = s.find(':');
    if (c == std::string::npos) throw InputError(what + ": expected lo:hi, got '" + s + "'");
    try {
        double lo = std::stod(s.substr(0, c)), hi = std::stod(s.substr(c + 1));
        if (!(lo < hi)) throw InputError(what + ": need lo < hi");
        return {lo, hi};
    } catch (const std::logic_error&) {
        throw InputError(what + ": cannot parse '" + s + "'");
    }
}

std::string fmt7(double v) {
    std::ostringstream o;
    o << std::fixed << std::setprecision(7) << v;
    return o.str();
}

NikishinSystem system_named(const std::string& name) {
    if (name == "pollaczek") return pollaczek_system();
    throw InputError("unknown system '" + name + "' (built-in: pollaczek)");
}

// ------------------------------------------------------------ equilibrium

EquilibriumProblem load_problem(const Options& o) {
    EquilibriumProblem p;
    if (o.spec.rfind("builtin:", 0) == 0) {
        std::string rest = o.spec.substr(8);
        double param = 1;
        auto c = rest.find(':');
        if (c != std::string::npos) {
            param = std::stod(rest.substr(c + 1));
            rest = rest.substr(0, c);
        }
        p = builtin_problem(rest, param, o.n_cells > 0 ? o.n_cells : 500);
    } else {
        json j = read_json_file(o.spec);
        p = problem_from_json(j);
        if (o.n_cells > 0) p.n_plus = p.n_minus = o.n_cells;
    }
    if (o.x_max > 0) p.x_max = o.x_max;
    if (o.t_max > 0) p.t_max = o.t_max;
    p.tol = o.tol;
    p.max_iter = o.max_iter;
    p.seed = o.seed;
    p.validate();
    return p;
}

std::string measure_csv(const GridMeasure& mu) {
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < mu.size(); ++i)
        rows.push_back({mu.left(i), mu.right(i), mu.nodes()[i], mu.masses()[i], mu.density(i)});
    return csv_table({"left", "right", "center", "mass", "density"}, rows);
}

void cmd_equilibrium(const Options& o, RunDir& run, json& config, std::ostream& out) {
    EquilibriumProblem p = load_problem(o);
    config["problem"] = problem_to_json(p);
    if (o.route != "plain" && o.route != "modified") throw InputError("--route must be plain or modified");
    EquilibriumSolution s = solve_equilibrium(p, o.tol, o.max_iter,
                                              o.route == "modified" ? KernelRoute::Modified : KernelRoute::Plain);
    json sol;
    sol["header"] = solution_header(s);
    sol["lambda1"] = to_json(s.lambda.mu1, {{"name", "lambda1"}});
    sol["lambda2"] = to_json(s.lambda.mu2, {{"name", "lambda2"}});
    run.write_json("solution.json", sol);
    run.write_text("lambda1.csv", measure_csv(s.lambda.mu1));
    run.write_text("lambda2.csv", measure_csv(s.lambda.mu2));
    const ResidualReport& r = s.residuals;
    run.check("W1 equality on supp lambda1", r.w1_equality <= r.tol, to_decimal(r.w1_equality));
    run.check("W1 >= w1 on the window", r.w1_lower <= r.tol, to_decimal(r.w1_lower));
    run.check("W2 <= w2 on supp lambda2", r.w2_upper <= r.tol, to_decimal(r.w2_upper));
    run.check("W2 >= w2 on supp(sigma - lambda2)", r.w2_lower <= r.tol, to_decimal(r.w2_lower));
    run.check("directional derivatives >= -tol", r.directional_min >= -r.tol, to_decimal(r.directional_min));
    out << "w1 = " << to_decimal(s.w1) << "\nw2 = " << to_decimal(s.w2) << "\n";
    for (const auto& I : s.supp1) out << "supp lambda1: [" << I.lo << ", " << I.hi << "]\n";
    for (const auto& I : s.saturation) out << "saturation: [" << I.lo << ", " << I.hi << "]\n";
    out << "iterations " << s.iterations << ", accepted " << (r.accepted ? "yes" : "no") << "\n";
}

// ------------------------------------------------------------ curves

void cmd_curve_eval(const Options& o, RunDir& run, std::ostream& out) {
    AlgebraicCurve c = builtin_curve(o.kind, o.a, o.b);
    double lo = -3, hi = 3;
    if (c.kind() == CurveKind::Bessel) lo = -20, hi = 20;
    if (!o.range.empty()) std::tie(lo, hi) = parse_range(o.range, "--range");
    if (o.points < 2) throw InputError("--points must be >= 2");
    auto guarded = [](auto f) {
        try {
            return f();
        } catch (const Error&) {
            return std::numeric_limits<double>::quiet_NaN();
        }
    };
    std::vector<std::vector<double>> rows;
    for (int i = 0; i < o.points; ++i) {
        const double x = lo + (hi - lo) * i / (o.points - 1);
        std::vector<double> row{x};
        try {
            BranchTriple t = boundary_values(c, cplx(x, 0), cplx(0, 1));
            for (const cplx& h : t.H) {
                row.push_back(h.real());
                row.push_back(h.imag());
            }
        } catch (const Error&) {
            row.insert(row.end(), 6, std::numeric_limits<double>::quiet_NaN());
        }
        row.push_back(guarded([&] { return density_lambda1(c, x).value; }));
        row.push_back(guarded([&] {
            if (c.kind() == CurveKind::Bessel) return density_lambda2(c, bessel_sigma_density, x).value;
            if (c.kind() == CurveKind::PollaczekPsi) return density_lambda2(c, pollaczek_line_sigma_density, x).value;
            return std::numeric_limits<double>::quiet_NaN();
        }));
        rows.push_back(row);
    }
    run.write_text("curve.csv", csv_table({"x", "H0_re", "H0_im", "H1_re", "H1_im", "H2_re", "H2_im",
                                           "lambda1_density", "lambda2_density"},
                                          rows));
    out << "wrote " << rows.size() << " rows for " << c.name() << " to " << (run.path() / "curve.csv").string() << "\n";
}

void cmd_branch_points(const Options& o, RunDir& run, std::ostream& out) {
    AlgebraicCurve c = builtin_curve(o.kind, o.a, o.b);
    BranchPointSet bp = branch_points(c);
    const auto& d = bp.discriminant.coefficients();
    json pts = json::array();
    double worst = 0;
    out << "branch points of " << c.name() << ":\n";
    for (const auto& p : bp.details) {
        double num = std::abs(bp.discriminant(p.z)), den = 0, az = std::abs(p.z), pw = 1;
        for (const auto& k : d) {
            den += std::abs(k) * pw;
            pw *= az;
        }
        const double res = p.from_singular ? 0 : num / den;
        if (!p.from_singular) worst = std::max(worst, res);
        pts.push_back({{"re", p.z.real()}, {"im", p.z.imag()}, {"discriminant_residual", res},
                       {"from_singular", p.from_singular}});
        std::string s;
        if (std::abs(p.z.imag()) < 1e-14) s = fmt7(p.z.real());
        else if (std::abs(p.z.real()) < 1e-14) s = fmt7(p.z.imag()) + "i";
        else s = fmt7(p.z.real()) + (p.z.imag() < 0 ? " - " : " + ") + fmt7(std::abs(p.z.imag())) + "i";
        out << "  " << s << (p.from_singular ? "  (singular point)" : "") << "\n";
    }
    // Print the discriminant normalized to a unit leading coefficient magnitude.
    json coeffs = json::array();
    std::ostringstream poly;
    const double lead = std::abs(d.back());
    bool first = true;
    for (int i = static_cast<int>(d.size()) - 1; i >= 0; --i) {
        cplx k = d[i] / lead;
        coeffs.push_back({{"re", k.real()}, {"im", k.imag()}});
        if (std::abs(k) < 1e-12) continue;
        double v = std::abs(k.imag()) < 1e-12 ? k.real() : NAN;
        std::ostringstream term;
        if (std::isnan(v)) term << "(" << k.real() << (k.imag() < 0 ? "-" : "+") << std::abs(k.imag()) << "i)";
        else term << (first ? (v < 0 ? "-" : "") : (v < 0 ? " - " : " + ")) << std::abs(v);
        poly << term.str() << (i > 0 ? "·z" + (i > 1 ? std::string("^") + std::to_string(i) : "") : "");
        first = false;
    }
    out << "discriminant: " << poly.str() << "\n";
    out << "max discriminant residual " << worst << "\n";
    run.write_json("branch_points.json", {{"curve", c.name()}, {"points", pts}, {"discriminant_descending", coeffs}});
    run.check("discriminant residual <= 1e-10", worst <= 1e-10, to_decimal(worst));
}

// ------------------------------------------------------------ mop

struct MopResult {
    MopPair pair;
    NormIntegrals norms;
    bool has_norms = false;
    double seconds = 0;
};

void cmd_mop(const Options& o, RunDir& run, json& config, std::ostream& out, int bits) {
    NikishinSystem sys = system_named(o.system);
    if (o.n_list.empty()) throw InputError("--n-list is required");
    for (int n : o.n_list)
        if (n < 1 || n > 64) throw InputError("--n-list entries must be in [1, 64]");
    const PrecisionContext ctx = PrecisionContext::for_bits(bits);
    ctx.validate();
    config["bits"] = bits;
    config["n_list"] = o.n_list;

    // All jobs share one precision: the default precision is process-wide.
    PrecisionScope scope(ctx);
    std::vector<MopResult> res(o.n_list.size());
    std::vector<std::exception_ptr> errs(o.n_list.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i; (i = next++) < o.n_list.size();) {
            try {
                auto t0 = std::chrono::steady_clock::now();
                MopResult r;
                r.pair = compute_Pn(sys, o.n_list[i], ctx);
                compute_Pn2(sys, r.pair, ctx);
                if (!o.no_norms) {
                    r.norms = norm_integrals(sys, r.pair, ctx);
                    r.has_norms = true;
                }
                r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
                res[i] = std::move(r);
            } catch (...) {
                errs[i] = std::current_exception();
            }
        }
    };
    int jobs = o.jobs > 0 ? o.jobs : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    jobs = std::min<int>(jobs, static_cast<int>(o.n_list.size()));
    std::vector<std::thread> pool;
    for (int k = 0; k < jobs; ++k) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    for (auto& e : errs)
        if (e) std::rethrow_exception(e);

    const double bound = std::pow(10.0, -bits / 8.0);
    json summary;
    summary["system"] = sys.kind;
    summary["bits"] = bits;
    summary["runs"] = json::array();
    for (std::size_t i = 0; i < res.size(); ++i) {
        const MopPair& p = res[i].pair;
        const int n = p.n;
        json j = mop_to_json(sys, p, res[i].has_norms ? &res[i].norms : nullptr);
        run.write_json("mop_n" + std::to_string(n) + ".json", j);
        RescaledPair q = rescale_pair(p, Real(sys.scaling(n)));
        std::ostringstream csv;
        csv << "polynomial,index,zero\n" << std::setprecision(17);
        for (std::size_t k = 0; k < q.zeros_Qn.size(); ++k) csv << "Qn," << k << "," << double(q.zeros_Qn[k]) << "\n";
        for (std::size_t k = 0; k < q.zeros_Qn2.size(); ++k) csv << "Qn2," << k << "," << double(q.zeros_Qn2[k]) << "\n";
        run.write_text("rescaled_zeros_n" + std::to_string(n) + ".csv", csv.str());
        summary["runs"].push_back(j);

        const std::string tag = " (n = " + std::to_string(n) + ")";
        run.check("moment-system defect <= 10^(-bits/8)" + tag, p.residual <= bound, to_decimal(p.residual));
        run.check("varying sigma1 defect <= 10^(-bits/8)" + tag, p.residual_3 <= bound, to_decimal(p.residual_3));
        bool neg = true;
        for (const Real& t : p.zeros_Pn2) neg = neg && t < sys.sigma2_atom(0).t;
        run.check("P_n2 zeros inside the atom hull" + tag, neg, "");
        bool distinct = p.max_changes_per_gap == 1;
        for (std::size_t k = 1; k < p.gaps.size(); ++k) distinct = distinct && p.gaps[k] != p.gaps[k - 1];
        run.check("at most one P_n2 zero per gap" + tag, distinct, "max sampled changes " + std::to_string(p.max_changes_per_gap));
        out << "n = " << n << ": defects " << p.residual << " / " << p.residual_3 << " / " << p.residual_4;
        if (res[i].has_norms)
            out << ", -log N1/n = " << -res[i].norms.log_N1 / n << ", -log N2/n = " << -res[i].norms.log_N2 / n;
        out << " (" << std::fixed << std::setprecision(1) << res[i].seconds << " s)" << std::defaultfloat
            << std::setprecision(6) << "\n";
    }
    // Interlacing is reported, not asserted.
    json inter = json::array();
    for (std::size_t i = 0; i + 1 < res.size(); ++i)
        if (res[i + 1].pair.n == res[i].pair.n + 1)
            inter.push_back({{"n", res[i].pair.n},
                             {"interlaces", zeros_interlace(res[i].pair.zeros_Pn, res[i + 1].pair.zeros_Pn)}});
    summary["interlacing"] = inter;
    run.write_json("summary.json", summary);
}

// ------------------------------------------------------------ compare

void cmd_compare(const Options& o, RunDir& run, json& config, std::ostream& out) {
    json sum = read_json_file(fs::path(o.mop_dir) / "summary.json");
    json sol = read_json_file(fs::path(o.eq_dir) / "solution.json");
    config["mop_dir"] = o.mop_dir;
    config["equilibrium_dir"] = o.eq_dir;
    GridMeasure mu1 = grid_from_json(sol.at("lambda1")), mu2 = grid_from_json(sol.at("lambda2"));
    std::vector<double> half(mu1.masses());
    for (double& m : half) m /= 2;
    GridMeasure half1 = mu1.with_masses(half);
    const double w1 = parse_real(sol["header"]["w1"], "w1"), w2 = parse_real(sol["header"]["w2"], "w2");
    const Interval window{o.window_lo, 0};

    json rows = json::array();
    std::vector<std::vector<double>> csv;
    for (const auto& r : sum.at("runs")) {
        const int n = r.at("n").get<int>();
        DiscreteMeasure z1 = zero_counting(parse_real_array(r.at("Qn_zeros"), "Qn_zeros"), 2 * n);
        DiscreteMeasure z2 = zero_counting(parse_real_array(r.at("Qn2_zeros"), "Qn2_zeros"), n);
        const double d1 = cdf_distance(AnyMeasure(z1), AnyMeasure(half1));
        const double d2 = cdf_distance(AnyMeasure(z2), AnyMeasure(mu2), window);
        json row{{"n", n}, {"cdf_lambda1", d1}, {"cdf_lambda2", d2}};
        double e1 = NAN, e2 = NAN;
        if (r.contains("norms")) {
            e1 = std::abs(r["norms"]["minus_log_N1_over_n"].get<double>() - w1);
            e2 = std::abs(r["norms"]["minus_log_N2_over_n"].get<double>() - (w1 + w2));
            row["nth_root_gap_1"] = e1;
            row["nth_root_gap_2"] = e2;
        }
        rows.push_back(row);
        csv.push_back({double(n), d1, d2, e1, e2});
        out << "n = " << n << ": cdf(lambda1/2) " << d1 << ", cdf(lambda2 on [" << o.window_lo << ",0]) " << d2;
        if (!std::isnan(e1)) out << ", |-(1/n)log N1 - w1| " << e1 << ", |-(1/n)log N2 - (w1+w2)| " << e2;
        out << "\n";
    }
    if (rows.size() < 2) throw InputError("compare zeros: need at least two values of n");
    run.write_json("compare.json", {{"w1", w1}, {"w2", w2}, {"window", real_array({window.lo, window.hi})}, {"rows", rows}});
    run.write_text("compare.csv", csv_table({"n", "cdf_lambda1", "cdf_lambda2", "nth_root_gap_1", "nth_root_gap_2"}, csv));
    const json& a = rows.front();
    const json& b = rows.back();
    run.check("cdf distance to lambda1/2 shrinks from smallest to largest n",
              b["cdf_lambda1"].get<double>() < a["cdf_lambda1"].get<double>(),
              to_decimal(a["cdf_lambda1"].get<double>()) + " -> " + to_decimal(b["cdf_lambda1"].get<double>()));
    run.check("cdf distance to lambda2 shrinks from smallest to largest n",
              b["cdf_lambda2"].get<double>() < a["cdf_lambda2"].get<double>(),
              to_decimal(a["cdf_lambda2"].get<double>()) + " -> " + to_decimal(b["cdf_lambda2"].get<double>()));
}

// ------------------------------------------------------------ assumptions

void cmd_assumptions(const Options& o, RunDir& run, json& config, std::ostream& out) {
    NikishinSystem sys = system_named(o.system);
    std::vector<int> ns = o.n_list.empty() ? std::vector<int>{10, 50, 200} : o.n_list;
    auto [pl, ph] = parse_range(o.plus_compact, "--plus-compact");
    auto [ml, mh] = parse_range(o.minus_compact, "--minus-compact");
    config["n_list"] = ns;
    AssumptionReport rep = check_assumptions(sys, ns, {pl, ph}, {ml, mh});
    run.write_json("assumptions.json", rep.to_json());
    const std::vector<std::string> known{"(i)", "(ii)", "(iii)", "(iv)", "(v)", "cond1"};
    std::vector<std::string> want;
    for (const auto& c : o.conditions) {
        std::string k = c.front() == '(' || c == "cond1" ? c : "(" + c + ")";
        if (std::find(known.begin(), known.end(), k) == known.end()) throw InputError("unknown condition '" + c + "'");
        want.push_back(k);
    }
    if (want.empty()) want = known;
    for (const auto& r : rep.records) {
        out << std::left << std::setw(6) << r.condition << " n = " << std::setw(4) << r.n << " value " << std::setw(12)
            << r.value << " bound " << std::setw(12) << r.bound << (r.pass ? " pass" : " FAIL") << "  [" << r.domain
            << "]\n";
        if (std::find(want.begin(), want.end(), r.condition) != want.end())
            run.check(r.condition + " n = " + std::to_string(r.n) + ": " + r.measured, r.pass, to_decimal(r.value));
    }
}

}  // namespace

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    Options o;
    CLI::App app{"nikeq: constrained Nikishin equilibrium workbench"};
    app.require_subcommand(1);
    app.add_option("--out", o.out, "output directory for this run")->capture_default_str();
    app.add_option("--jobs", o.jobs, "worker threads (default: logical CPUs)");
    app.add_option("--bits", o.bits, "working precision in bits (default: EQUILIB_BITS or 256)");

    auto* eq = app.add_subcommand("equilibrium", "equilibrium problems")->require_subcommand(1);
    auto* solve = eq->add_subcommand("solve", "solve a problem spec (JSON path or builtin:kind[:param])");
    solve->add_option("spec", o.spec)->required();
    solve->add_option("--tol", o.tol)->capture_default_str();
    solve->add_option("--max-iter", o.max_iter)->capture_default_str();
    solve->add_option("--cells", o.n_cells, "cells per side");
    solve->add_option("--x-max", o.x_max);
    solve->add_option("--t-max", o.t_max);
    solve->add_option("--route", o.route, "plain | modified")->capture_default_str();
    solve->add_option("--seed", o.seed)->capture_default_str();

    auto* curve = app.add_subcommand("curve", "spectral curves")->require_subcommand(1);
    auto* ceval = curve->add_subcommand("eval", "branches and densities on a real grid");
    ceval->add_option("kind", o.kind)->required();
    ceval->add_option("--a", o.a);
    ceval->add_option("--b", o.b);
    ceval->add_option("--range", o.range, "lo:hi");
    ceval->add_option("--points", o.points)->capture_default_str();
    auto* cbp = curve->add_subcommand("branch-points", "branch points and discriminant");
    cbp->add_option("kind", o.kind)->required();
    cbp->add_option("--a", o.a);
    cbp->add_option("--b", o.b);

    auto* mop = app.add_subcommand("mop", "multiple orthogonal polynomials")->require_subcommand(1);
    auto* mrun = mop->add_subcommand("run", "compute P_n, P_n2 and norms");
    mrun->add_option("system", o.system)->required();
    mrun->add_option("--n-list", o.n_list)->delimiter(',')->required();
    mrun->add_flag("--no-norms", o.no_norms);

    auto* cmp = app.add_subcommand("compare", "compare runs")->require_subcommand(1);
    auto* cz = cmp->add_subcommand("zeros", "rescaled zeros against an equilibrium solution");
    cz->add_option("mop-dir", o.mop_dir)->required();
    cz->add_option("equilibrium-dir", o.eq_dir)->required();
    cz->add_option("--window-lo", o.window_lo)->capture_default_str();

    auto* as = app.add_subcommand("assumptions", "assumption validators")->require_subcommand(1);
    auto* ac = as->add_subcommand("check", "conditions (i)-(v) and the growth condition");
    ac->add_option("system", o.system)->required();
    ac->add_option("--n-list", o.n_list)->delimiter(',');
    ac->add_option("--plus-compact", o.plus_compact)->capture_default_str();
    ac->add_option("--minus-compact", o.minus_compact)->capture_default_str();
    ac->add_option("--conditions", o.conditions, "subset to check, e.g. i,iv,v")->delimiter(',');

    auto* rep = app.add_subcommand("report", "summary table and SVG plots of a run directory");
    rep->add_option("run-dir", o.run_dir)->required();

    try {
        std::vector<std::string> rev(args.rbegin(), args.rend());
        app.parse(rev);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err) == 0 ? 0 : 2;
    }

    const auto t0 = std::chrono::steady_clock::now();
    std::unique_ptr<RunDir> run;
    json config = json::object();
    int status = 0;
    std::string error;
    try {
        config["out"] = o.out;
        run = std::make_unique<RunDir>(*rep ? fs::path(o.run_dir) / "report" : fs::path(o.out));
        if (o.tol < 1e-12 || o.tol > 1e-2) throw InputError("--tol must lie in [1e-12, 1e-2]");
        const int bits = o.bits > 0 ? o.bits : default_bits();
        if (*solve) cmd_equilibrium(o, *run, config, out);
        else if (*ceval) cmd_curve_eval(o, *run, out);
        else if (*cbp) cmd_branch_points(o, *run, out);
        else if (*mrun) cmd_mop(o, *run, config, out, bits);
        else if (*cz) cmd_compare(o, *run, config, out);
        else if (*ac) cmd_assumptions(o, *run, config, out);
        else if (*rep) status = render_report(o.run_dir, *run, out);
        if (!run->all_passed()) {
            status = 1;
            err << "check failed: " << run->first_failure() << "\n";
        }
    } catch (const SolverStalled& e) {
        status = 3;
        error = e.what();
        if (run) {
            run->write_json("best_iterate.json", {{"lambda1", to_json(e.best().mu1)}, {"lambda2", to_json(e.best().mu2)}});
        }
    } catch (const Error& e) {
        status = e.is_input_error() ? 2 : 3;
        error = e.what();
    } catch (const json::exception& e) {
        status = 2;
        error = std::string("malformed JSON: ") + e.what();
    } catch (const std::exception& e) {
        status = 3;
        error = e.what();
    }
    if (!error.empty()) err << "error: " << error << "\n";
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (run) {
        std::string command;
        for (auto* s : app.get_subcommands()) {
            command = s->get_name();
            for (auto* t : s->get_subcommands()) command += " " + t->get_name();
        }
        try {
            run->write_manifest(command, args, config, status, error, secs);
        } catch (const std::exception& e) {
            err << "error: could not write manifest: " << e.what() << "\n";
        }
    }
    return status;
}

}  // namespace nikeq
