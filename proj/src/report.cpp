#include "nikeq/report.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <mpfr.h>
#include <openssl/evp.h>
#include <boost/version.hpp>
#include <Eigen/Core>

#include "nikeq/equilibrium.hpp"
#include "nikeq/errors.hpp"
#include "nikeq/spectral_curves.hpp"

namespace nikeq {

namespace fs = std::filesystem;

std::string sha256_hex(const std::string& bytes) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    if (!ctx || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1 ||
        EVP_DigestUpdate(ctx, bytes.data(), bytes.size()) != 1 || EVP_DigestFinal_ex(ctx, md, &len) != 1) {
        EVP_MD_CTX_free(ctx);
        throw Error("sha256 failed");
    }
    EVP_MD_CTX_free(ctx);
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned i = 0; i < len; ++i) {
        out += hex[md[i] >> 4];
        out += hex[md[i] & 15];
    }
    return out;
}

std::string sha256_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw InputError("cannot read " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return sha256_hex(ss.str());
}

json read_json_file(const fs::path& p) {
    std::ifstream in(p);
    if (!in) throw InputError("cannot open " + p.string());
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw InputError(p.string() + ": " + e.what());
    }
}

std::string csv_table(const std::vector<std::string>& header, const std::vector<std::vector<double>>& rows) {
    std::string s;
    for (std::size_t i = 0; i < header.size(); ++i) s += (i ? "," : "") + header[i];
    s += "\n";
    char buf[40];
    for (const auto& r : rows) {
        for (std::size_t i = 0; i < r.size(); ++i) {
            if (std::isnan(r[i])) std::snprintf(buf, sizeof buf, "nan");
            else std::snprintf(buf, sizeof buf, "%.17g", r[i]);
            s += (i ? "," : "") + std::string(buf);
        }
        s += "\n";
    }
    return s;
}

// ---------------------------------------------------------------- SVG

namespace {

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

std::string esc(const std::string& s) {
    std::string o;
    for (char c : s) {
        if (c == '<') o += "&lt;";
        else if (c == '>') o += "&gt;";
        else if (c == '&') o += "&amp;";
        else o += c;
    }
    return o;
}

double nice_step(double span) {
    double raw = span / 5;
    double p = std::pow(10.0, std::floor(std::log10(raw)));
    for (double m : {1.0, 2.0, 5.0, 10.0})
        if (m * p >= raw) return m * p;
    return 10 * p;
}

}  // namespace

std::string svg_line_plot(const PlotSpec& spec, const std::vector<PlotSeries>& series) {
    const double W = 720, H = 440, L = 70, R = 20, T = 40, B = 55;
    double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
    auto ty = [&](double y) { return spec.logy ? (y > 0 ? std::log10(y) : NAN) : y; };
    for (const auto& s : series)
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            double y = ty(s.y[i]);
            if (!std::isfinite(s.x[i]) || !std::isfinite(y)) continue;
            x0 = std::min(x0, s.x[i]);
            x1 = std::max(x1, s.x[i]);
            y0 = std::min(y0, y);
            y1 = std::max(y1, y);
        }
    if (!(x0 < x1)) { x0 = std::isfinite(x0) ? x0 - 1 : 0; x1 = x0 + 2; }
    if (!(y0 < y1)) { y0 = std::isfinite(y0) ? y0 - 1 : 0; y1 = y0 + 2; }
    const double pad = 0.05 * (y1 - y0);
    y0 -= pad;
    y1 += pad;
    auto px = [&](double x) { return L + (x - x0) / (x1 - x0) * (W - L - R); };
    auto py = [&](double y) { return H - B - (y - y0) / (y1 - y0) * (H - T - B); };

    static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};
    std::ostringstream o;
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    o << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << esc(spec.title) << "</text>\n";
    o << "<rect x=\"" << L << "\" y=\"" << T << "\" width=\"" << W - L - R << "\" height=\"" << H - T - B
      << "\" fill=\"none\" stroke=\"black\"/>\n";
    const double sx = nice_step(x1 - x0), sy = nice_step(y1 - y0);
    for (double v = std::ceil(x0 / sx) * sx; v <= x1 + 1e-9 * sx; v += sx)
        o << "<line x1=\"" << px(v) << "\" x2=\"" << px(v) << "\" y1=\"" << H - B << "\" y2=\"" << H - B + 5
          << "\" stroke=\"black\"/><text x=\"" << px(v) << "\" y=\"" << H - B + 18 << "\" text-anchor=\"middle\">"
          << fmt(std::abs(v) < 1e-12 * sx ? 0 : v) << "</text>\n";
    for (double v = std::ceil(y0 / sy) * sy; v <= y1 + 1e-9 * sy; v += sy)
        o << "<line x1=\"" << L - 5 << "\" x2=\"" << L << "\" y1=\"" << py(v) << "\" y2=\"" << py(v)
          << "\" stroke=\"black\"/><text x=\"" << L - 8 << "\" y=\"" << py(v) + 4 << "\" text-anchor=\"end\">"
          << (spec.logy ? "1e" + fmt(v) : fmt(std::abs(v) < 1e-12 * sy ? 0 : v)) << "</text>\n";
    o << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\">" << esc(spec.xlabel)
      << "</text>\n";
    o << "<text transform=\"translate(16," << (T + H - B) / 2 << ") rotate(-90)\" text-anchor=\"middle\">"
      << esc(spec.ylabel) << "</text>\n";
    for (std::size_t k = 0; k < series.size(); ++k) {
        const auto& s = series[k];
        const char* c = colors[k % 6];
        if (s.markers) {
            for (std::size_t i = 0; i < s.x.size(); ++i) {
                double y = ty(s.y[i]);
                if (std::isfinite(s.x[i]) && std::isfinite(y))
                    o << "<circle cx=\"" << px(s.x[i]) << "\" cy=\"" << py(y) << "\" r=\"3\" fill=\"" << c << "\"/>\n";
            }
        } else {
            o << "<polyline fill=\"none\" stroke=\"" << c << "\" stroke-width=\"1.5\" points=\"";
            for (std::size_t i = 0; i < s.x.size(); ++i) {
                double y = ty(s.y[i]);
                if (std::isfinite(s.x[i]) && std::isfinite(y)) o << px(s.x[i]) << "," << py(y) << " ";
            }
            o << "\"/>\n";
        }
        o << "<rect x=\"" << W - R - 170 << "\" y=\"" << T + 10 + 18 * k << "\" width=\"12\" height=\"12\" fill=\"" << c
          << "\"/><text x=\"" << W - R - 152 << "\" y=\"" << T + 20 + 18 * k << "\">" << esc(s.label) << "</text>\n";
    }
    o << "</svg>\n";
    return o.str();
}

// ---------------------------------------------------------------- run dirs

RunDir::RunDir(fs::path dir) : dir_(std::move(dir)) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) throw InputError("cannot create output directory " + dir_.string() + ": " + ec.message());
}

void RunDir::write_text(const std::string& name, const std::string& content) {
    fs::path p = dir_ / name;
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    std::ofstream f(p, std::ios::binary);
    if (!f) throw InputError("cannot write " + p.string());
    f << content;
    f.close();
    for (auto& e : files_)
        if (e.first == name) {
            e.second = sha256_hex(content);
            return;
        }
    files_.emplace_back(name, sha256_hex(content));
}

void RunDir::write_json(const std::string& name, const json& j) { write_text(name, j.dump(2) + "\n"); }

void RunDir::check(const std::string& name, bool pass, const std::string& detail) {
    checks_.push_back({{"name", name}, {"pass", pass}, {"detail", detail}});
}

bool RunDir::all_passed() const {
    for (const auto& c : checks_)
        if (!c["pass"].get<bool>()) return false;
    return true;
}

std::string RunDir::first_failure() const {
    for (const auto& c : checks_)
        if (!c["pass"].get<bool>()) return c["name"].get<std::string>() + " (" + c["detail"].get<std::string>() + ")";
    return "";
}

void RunDir::write_manifest(const std::string& command, const std::vector<std::string>& argv, const json& config,
                            int exit_status, const std::string& error, double wall_seconds) {
    json m;
    m["command"] = command;
    m["argv"] = argv;
    m["config"] = config;
    m["versions"] = {{"nikeq", "0.1.0"},
                     {"mpfr", MPFR_VERSION_STRING},
                     {"boost", BOOST_LIB_VERSION},
                     {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                   std::to_string(EIGEN_MINOR_VERSION)}};
    m["wall_time_s"] = wall_seconds;
    json files = json::array();
    for (const auto& [name, digest] : files_) files.push_back({{"path", name}, {"sha256", digest}});
    m["files"] = files;
    m["checks"] = checks_;
    m["all_checks_passed"] = all_passed();
    m["exit_status"] = exit_status;
    if (!error.empty()) m["error"] = error;
    std::ofstream f(dir_ / "manifest.json");
    f << m.dump(2) << "\n";
}

// ---------------------------------------------------------------- report

namespace {

struct Oracle {
    std::function<double(double)> lambda1, lambda2;
    std::string name;
};

bool oracle_for(const json& problem, Oracle& o) {
    const json& f = problem.at("field");
    const std::string kind = f.value("kind", "");
    const double shift = f.value("shift", 0.0);
    (void)shift;  // shifts leave the measures unchanged
    if (kind == "bessel" && problem.at("constraint").value("kind", "") == "bessel") {
        auto c = std::make_shared<AlgebraicCurve>(builtin_curve("bessel"));
        o.lambda1 = [c](double x) { return density_lambda1(*c, x).value; };
        o.lambda2 = [c](double x) { return density_lambda2(*c, bessel_sigma_density, x).value; };
        o.name = "bessel curve";
        return true;
    }
    if (kind == "pollaczek" && problem.at("constraint").value("kind", "") == "pollaczek") {
        const double c = f.value("scale", 1.0);
        if (problem.at("constraint").value("scale", 1.0) != c) return false;
        o.lambda1 = [c](double x) { return pollaczek_halfline_lambda1(x, c); };
        o.lambda2 = [c](double x) { return pollaczek_halfline_lambda2(x, c); };
        o.name = "pollaczek curve (scale " + fmt(c) + ")";
        return true;
    }
    return false;
}

double safe(const std::function<double(double)>& f, double x) {
    try {
        return f(x);
    } catch (const Error&) {
        return NAN;
    }
}

void report_equilibrium(const fs::path& run, RunDir& out, std::ostringstream& md) {
    json sol = read_json_file(run / "solution.json");
    GridMeasure mu1 = grid_from_json(sol.at("lambda1")), mu2 = grid_from_json(sol.at("lambda2"));
    const json& hdr = sol.at("header");
    md << "## Equilibrium\n\n| quantity | value |\n|---|---|\n";
    for (const char* k : {"w1", "w2", "iterations", "functional_value", "kkt_residual"})
        md << "| " << k << " | " << (hdr.at(k).is_string() ? hdr.at(k).get<std::string>() : hdr.at(k).dump()) << " |\n";
    for (auto& [k, v] : hdr.at("residuals").items())
        md << "| residual " << k << " | " << (v.is_string() ? v.get<std::string>() : v.dump()) << " |\n";
    md << "\n";

    Oracle orc;
    const bool have = oracle_for(hdr.at("problem"), orc);
    auto density_series = [&](const GridMeasure& mu, double lo, double hi, const std::string& label) {
        PlotSeries s{label, {}, {}};
        for (std::size_t i = 0; i < mu.size(); ++i)
            if (mu.nodes()[i] >= lo && mu.nodes()[i] <= hi) {
                s.x.push_back(mu.nodes()[i]);
                s.y.push_back(mu.density(i));
            }
        return s;
    };
    std::vector<PlotSeries> p1{density_series(mu1, 0, mu1.right(mu1.size() - 1), "solver lambda1")};
    std::vector<PlotSeries> p2{density_series(mu2, -50, 0, "solver lambda2")};
    if (have) {
        const std::function<double(double)> f1 = orc.lambda1, f2 = orc.lambda2;
        std::vector<std::vector<double>> r1, r2;
        PlotSeries o1{orc.name, {}, {}}, o2{orc.name, {}, {}};
        for (std::size_t i = 0; i < mu1.size(); ++i) {
            double x = mu1.nodes()[i], v = safe(f1, x);
            r1.push_back({x, mu1.density(i), v});
            o1.x.push_back(x);
            o1.y.push_back(v);
        }
        for (std::size_t i = 0; i < mu2.size(); ++i) {
            double x = mu2.nodes()[i], v = safe(f2, x);
            r2.push_back({x, mu2.density(i), v});
            if (x >= -50) {
                o2.x.push_back(x);
                o2.y.push_back(v);
            }
        }
        out.write_text("density_compare_lambda1.csv", csv_table({"x", "solver_density", "curve_density"}, r1));
        out.write_text("density_compare_lambda2.csv", csv_table({"x", "solver_density", "curve_density"}, r2));
        p1.push_back(o1);
        p2.push_back(o2);
        const double g1 = l1_gap(mu1, [&](double x) { return safe(f1, x); });
        const double g2 = l1_gap(mu2, [&](double x) { return safe(f2, x); });
        out.check("oracle L1 gap lambda1 <= 0.05", g1 <= 0.05, fmt(g1));
        out.check("oracle L1 gap lambda2 <= 0.05", g2 <= 0.05, fmt(g2));
        md << "Oracle: " << orc.name << "; L1 gaps lambda1 = " << fmt(g1) << ", lambda2 = " << fmt(g2) << ".\n\n";
    } else {
        md << "No curve oracle for this problem.\n\n";
    }
    out.write_text("lambda1_density.svg", svg_line_plot({"lambda1 density", "x", "density"}, p1));
    out.write_text("lambda2_density.svg", svg_line_plot({"lambda2 density on [-50, 0]", "x", "density"}, p2));
    md << "![lambda1](lambda1_density.svg)\n![lambda2](lambda2_density.svg)\n\n";
}

void report_mop(const fs::path& run, RunDir& out, std::ostringstream& md) {
    json sum = read_json_file(run / "summary.json");
    md << "## Multiple orthogonal polynomials\n\n| n | residual | varying sigma1 | varying sigma2 | -log N1 / n | -log N2 / n |\n"
          "|---|---|---|---|---|---|\n";
    PlotSeries a{"-(1/n) log N1", {}, {}, true}, b{"-(1/n) log N2", {}, {}, true};
    for (const auto& r : sum.at("runs")) {
        const json& res = r.at("residuals");
        md << "| " << r.at("n") << " | " << fmt(res.at("moment_system").get<double>()) << " | "
           << fmt(res.at("varying_sigma1").get<double>()) << " | " << fmt(res.at("varying_sigma2").get<double>())
           << " | ";
        if (r.contains("norms")) {
            double n = r.at("n").get<double>();
            double v1 = r["norms"]["minus_log_N1_over_n"].get<double>(), v2 = r["norms"]["minus_log_N2_over_n"].get<double>();
            md << fmt(v1) << " | " << fmt(v2) << " |\n";
            a.x.push_back(n);
            a.y.push_back(v1);
            b.x.push_back(n);
            b.y.push_back(v2);
        } else {
            md << "- | - |\n";
        }
    }
    md << "\n";
    if (!a.x.empty()) {
        out.write_text("nth_root_norms.svg", svg_line_plot({"nth-root norms", "n", "value"}, {a, b}));
        md << "![norms](nth_root_norms.svg)\n\n";
    }
}

void report_compare(const fs::path& run, RunDir& out, std::ostringstream& md) {
    json c = read_json_file(run / "compare.json");
    PlotSeries d1{"dist(nu_Qn, lambda1/2)", {}, {}, true}, d2{"dist(nu_Qn2, lambda2) on [-50,0]", {}, {}, true};
    md << "## Zero distributions\n\n| n | CDF distance lambda1/2 | CDF distance lambda2 |\n|---|---|---|\n";
    for (const auto& r : c.at("rows")) {
        double n = r.at("n").get<double>();
        d1.x.push_back(n);
        d1.y.push_back(r.at("cdf_lambda1").get<double>());
        d2.x.push_back(n);
        d2.y.push_back(r.at("cdf_lambda2").get<double>());
        md << "| " << n << " | " << fmt(d1.y.back()) << " | " << fmt(d2.y.back()) << " |\n";
    }
    md << "\n";
    out.write_text("cdf_distances.svg", svg_line_plot({"CDF distances", "n", "distance"}, {d1, d2}));
    md << "![cdf](cdf_distances.svg)\n\n";
}

}  // namespace

int render_report(const fs::path& run_dir, RunDir& out, std::ostream& log) {
    json man = read_json_file(run_dir / "manifest.json");
    const std::string cmd = man.value("command", "");
    std::ostringstream md;
    md << "# Run report: `" << cmd << "`\n\n";
    md << "Exit status " << man.value("exit_status", -1) << ", wall time " << fmt(man.value("wall_time_s", 0.0))
       << " s.\n\n";
    if (man.contains("error")) md << "Error: " << man["error"].get<std::string>() << "\n\n";
    md << "| check | pass | detail |\n|---|---|---|\n";
    for (const auto& c : man.value("checks", json::array()))
        md << "| " << c["name"].get<std::string>() << " | " << (c["pass"].get<bool>() ? "yes" : "**no**") << " | "
           << c["detail"].get<std::string>() << " |\n";
    md << "\n";
    if (cmd == "equilibrium solve") report_equilibrium(run_dir, out, md);
    else if (cmd == "mop run") report_mop(run_dir, out, md);
    else if (cmd == "compare zeros") report_compare(run_dir, out, md);
    md << "## Files\n\n";
    for (const auto& f : man.value("files", json::array()))
        md << "- `" << f["path"].get<std::string>() << "` sha256 " << f["sha256"].get<std::string>() << "\n";
    out.write_text("summary.md", md.str());
    log << "report written to " << out.path().string() << "\n";
    return out.all_passed() ? 0 : 1;
}

}  // namespace nikeq
