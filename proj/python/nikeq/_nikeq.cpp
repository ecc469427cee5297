#include <pybind11/complex.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "nikeq/cli.hpp"
#include "nikeq/equilibrium.hpp"
#include "nikeq/nikishin_mop.hpp"
#include "nikeq/spectral_curves.hpp"

namespace py = pybind11;
using namespace nikeq;

namespace {

// Structured results cross the boundary as JSON text; the package decodes them.
std::string solve(const std::string& spec, double param, int cells, double tol, int max_iter, bool modified) {
    EquilibriumProblem p;
    if (!spec.empty() && spec.front() == '{') {
        p = problem_from_json(json::parse(spec));
        if (cells > 0) p.n_plus = p.n_minus = cells;
    } else {
        p = builtin_problem(spec, param, cells > 0 ? cells : 500);
    }
    EquilibriumSolution s;
    {
        py::gil_scoped_release nogil;
        s = solve_equilibrium(p, tol, max_iter, modified ? KernelRoute::Modified : KernelRoute::Plain);
    }
    json j;
    j["header"] = solution_header(s);
    j["lambda1"] = to_json(s.lambda.mu1);
    j["lambda2"] = to_json(s.lambda.mu2);
    return j.dump();
}

std::string mop(int n, int bits, bool norms) {
    const NikishinSystem sys = pollaczek_system();
    const PrecisionContext ctx = PrecisionContext::for_bits(bits);
    ctx.validate();
    py::gil_scoped_release nogil;
    PrecisionScope scope(ctx);
    MopPair p = compute_Pn(sys, n, ctx);
    compute_Pn2(sys, p, ctx);
    if (!norms) return mop_to_json(sys, p, nullptr).dump();
    NormIntegrals N = norm_integrals(sys, p, ctx);
    return mop_to_json(sys, p, &N).dump();
}

std::string assumptions(const std::vector<int>& n_list, std::pair<double, double> plus, std::pair<double, double> minus) {
    return check_assumptions(pollaczek_system(), n_list, {plus.first, plus.second}, {minus.first, minus.second})
        .to_json()
        .dump();
}

py::tuple run(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    int status;
    {
        py::gil_scoped_release nogil;
        status = run_command(args, out, err);
    }
    return py::make_tuple(status, out.str(), err.str());
}

}  // namespace

PYBIND11_MODULE(_nikeq, m) {
    m.doc() = "Constrained Nikishin equilibrium workbench (native core)";

    // Translators run newest first, so the subclass is registered last.
    auto& base = py::register_exception<Error>(m, "Error");
    py::register_exception<InputError>(m, "InputError", base.ptr());

    m.def("branch_points", [](const std::string& kind, double a, double b) { return branch_points(builtin_curve(kind, a, b)).points; },
          py::arg("kind"), py::arg("a") = 0.0, py::arg("b") = 0.0);
    m.def("branch_values", [](const std::string& kind, cplx z, double a, double b) {
        auto t = branch_values(builtin_curve(kind, a, b), z);
        return std::vector<cplx>(t.H.begin(), t.H.end());
    }, py::arg("kind"), py::arg("z"), py::arg("a") = 0.0, py::arg("b") = 0.0);
    m.def("density_lambda1", [](const std::string& kind, double x, double a, double b) {
        return density_lambda1(builtin_curve(kind, a, b), x).value;
    }, py::arg("kind"), py::arg("x"), py::arg("a") = 0.0, py::arg("b") = 0.0);
    m.def("pollaczek_halfline_density", [](double x, double scale) {
        return x >= 0 ? pollaczek_halfline_lambda1(x, scale) : pollaczek_halfline_lambda2(x, scale);
    }, py::arg("x"), py::arg("scale") = 1.0);
    m.def("_solve", &solve, py::arg("spec"), py::arg("param") = 1.0, py::arg("cells") = 0, py::arg("tol") = 1e-6,
          py::arg("max_iter") = 200, py::arg("modified") = false);
    m.def("_mop", &mop, py::arg("n"), py::arg("bits") = 256, py::arg("norms") = true);
    m.def("_assumptions", &assumptions, py::arg("n_list"), py::arg("plus_compact") = std::pair{0.5, 4.0},
          py::arg("minus_compact") = std::pair{-4.0, -0.05});
    m.def("cdf_distance_zeros", [](const std::vector<double>& zeros, int degree, const std::vector<double>& other) {
        return cdf_distance(zero_counting(zeros, degree), zero_counting(other, static_cast<int>(other.size())));
    });
    m.def("run_command", &run, py::arg("args"), "Runs the CLI in-process; returns (status, stdout, stderr).");
    m.def("default_bits", &default_bits);
}
