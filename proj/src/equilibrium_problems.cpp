#include <algorithm>
#include <cmath>
#include <memory>

#include "nikeq/equilibrium.hpp"
#include "nikeq/precision.hpp"
#include "nikeq/spectral_curves.hpp"

namespace nikeq {

namespace {

double get(const json& spec, const char* key, double dflt) {
    if (!spec.contains(key)) return dflt;
    return parse_real(spec.at(key), key);
}

double positive(const json& spec, const char* key, double dflt, const std::string& who) {
    const double v = get(spec, key, dflt);
    if (!(v > 0) || !std::isfinite(v)) throw InputError(who + ": '" + key + "' must be positive");
    return v;
}

// Piecewise-linear table with exact running integrals.
struct Table {
    std::vector<double> x, y, cum;

    Table(const json& spec, const char* ykey, const std::string& who) {
        if (!spec.contains("x") || !spec.contains(ykey))
            throw InputError(who + ": custom_table needs 'x' and '" + std::string(ykey) + "'");
        x = parse_real_array(spec.at("x"), "x");
        y = parse_real_array(spec.at(ykey), ykey);
        if (x.size() != y.size() || x.size() < 2) throw InputError(who + ": table arrays must match, length >= 2");
        for (std::size_t i = 1; i < x.size(); ++i)
            if (!(x[i] > x[i - 1])) throw InputError(who + ": table abscissae must increase");
        for (double v : y)
            if (!std::isfinite(v)) throw InputError(who + ": table values must be finite");
        cum.assign(x.size(), 0.0);
        for (std::size_t i = 1; i < x.size(); ++i) cum[i] = cum[i - 1] + 0.5 * (y[i] + y[i - 1]) * (x[i] - x[i - 1]);
    }

    std::size_t seg(double t) const {
        if (t < x.front() || t > x.back())
            throw DomainError("custom_table: " + to_decimal(t) + " outside the tabulated range");
        auto it = std::upper_bound(x.begin(), x.end(), t);
        return std::min<std::size_t>(std::max<std::ptrdiff_t>(it - x.begin(), 1) - 1, x.size() - 2);
    }
    double operator()(double t) const {
        const std::size_t i = seg(t);
        const double s = (t - x[i]) / (x[i + 1] - x[i]);
        return y[i] + s * (y[i + 1] - y[i]);
    }
    double integral(double t) const {  // ∫_{x0}^t
        const std::size_t i = seg(t);
        return cum[i] + 0.5 * ((*this)(t) + y[i]) * (t - x[i]);
    }
};

// σ = k dx/√|x| on ℝ₋.
Constraint inv_sqrt(const std::string& kind, json params, double k) {
    Constraint c;
    c.kind = kind;
    c.params = std::move(params);
    c.density = [k](double x) { return x < 0 ? k / std::sqrt(-x) : 0.0; };
    c.mass = [k](double a, double b) {
        const double ra = std::sqrt(std::max(0.0, -a)), rb = std::sqrt(std::max(0.0, -b));
        return ra + rb == 0 ? 0.0 : 2 * k * (b - a) / (ra + rb);
    };
    return c;
}

double pastur_endpoint(double a) {
    auto bp = branch_points(builtin_curve("pastur", a));
    double r = 0;
    for (cplx z : bp.points)
        if (std::abs(z.imag()) < 1e-9 * (1 + std::abs(z))) r = std::max(r, z.real());
    return r * r;
}

const double kPollaczekEndpoint = (11 + 5 * std::sqrt(5.0)) / 8;

}  // namespace

ExternalField make_field(const json& spec) {
    if (!spec.is_object() || !spec.contains("kind")) throw InputError("field: expected an object with 'kind'");
    const std::string kind = spec.at("kind").get<std::string>();
    ExternalField f;
    f.kind = kind;
    f.params = spec;
    if (kind == "bessel") {
        const double r = 2 * std::sqrt(2.0);
        f.value = [r](double x) { return x - r * std::sqrt(x); };
        f.primitive = [r](double x) { return 0.5 * x * x - (2.0 / 3.0) * r * x * std::sqrt(x); };
        f.endpoint_hint = 13.5;
    } else if (kind == "pollaczek") {
        const double c = positive(spec, "scale", 1, "field");
        const double k = 2 * M_PI / std::sqrt(c);
        f.value = [k](double x) { return k * std::sqrt(x); };
        f.primitive = [k](double x) { return (2.0 / 3.0) * k * x * std::sqrt(x); };
        f.endpoint_hint = c * kPollaczekEndpoint;
    } else if (kind == "hermite_mapped") {
        const double a = positive(spec, "a", 1, "field");
        const double c = positive(spec, "scale", 1, "field");
        const double r = 2 * a / std::sqrt(c);
        f.value = [r, c](double x) { return x / c - r * std::sqrt(x); };
        f.primitive = [r, c](double x) { return 0.5 * x * x / c - (2.0 / 3.0) * r * x * std::sqrt(x); };
        f.endpoint_hint = c * pastur_endpoint(a);
    } else if (kind == "custom_table") {
        auto t = std::make_shared<Table>(spec, "phi", "field");
        f.value = [t](double x) { return (*t)(x); };
        f.primitive = [t](double x) { return t->integral(x); };
        f.endpoint_hint = get(spec, "endpoint_hint", 5);
    } else {
        throw InputError("field: unknown kind '" + kind + "'");
    }
    if (spec.contains("shift")) {
        const double s = parse_real(spec.at("shift"), "shift");
        auto v = f.value, P = f.primitive;
        f.value = [v, s](double x) { return v(x) + s; };
        f.primitive = [P, s](double x) { return P(x) + s * x; };
    }
    return f;
}

Constraint make_constraint(const json& spec) {
    if (!spec.is_object() || !spec.contains("kind")) throw InputError("constraint: expected an object with 'kind'");
    const std::string kind = spec.at("kind").get<std::string>();
    if (kind == "bessel") return inv_sqrt(kind, spec, std::sqrt(2.0) / M_PI);
    if (kind == "pollaczek") return inv_sqrt(kind, spec, 1 / std::sqrt(positive(spec, "scale", 1, "constraint")));
    if (kind == "hermite_mapped") {
        const double a = positive(spec, "a", 1, "constraint");
        return inv_sqrt(kind, spec, a / (M_PI * std::sqrt(positive(spec, "scale", 1, "constraint"))));
    }
    if (kind == "inv_sqrt") return inv_sqrt(kind, spec, positive(spec, "k", 1, "constraint"));
    if (kind == "custom_table") {
        auto t = std::make_shared<Table>(spec, "density", "constraint");
        for (double v : t->y)
            if (v < 0) throw InputError("constraint: density must be nonnegative");
        Constraint c;
        c.kind = kind;
        c.params = spec;
        c.density = [t](double x) { return (*t)(x); };
        c.mass = [t](double a, double b) { return t->integral(b) - t->integral(a); };
        return c;
    }
    throw InputError("constraint: unknown kind '" + kind + "'");
}

std::vector<double> EquilibriumProblem::plus_edges() const {
    // e_i = X (i/N)^q: cells shrink like N^{-q} at the hard edge 0.
    std::vector<double> e(n_plus + 1);
    for (int i = 0; i <= n_plus; ++i) e[i] = x_max * std::pow(double(i) / n_plus, plus_power);
    e.back() = x_max;
    return e;
}

std::vector<double> EquilibriumProblem::minus_edges() const {
    // e_j = -g·((1 + T/g)^{t} - 1) with t = (k/N)^q: geometric far out,
    // power-graded at 0.  Listed from -T up to 0.
    std::vector<double> e(n_minus + 1);
    const double g = grading_scale, L = std::log1p(t_max / g);
    for (int j = 0; j <= n_minus; ++j) {
        const int k = n_minus - j;
        e[j] = -g * std::expm1(L * std::pow(double(k) / n_minus, minus_power));
    }
    e.front() = -t_max;
    e.back() = 0;
    return e;
}

GridMeasure EquilibriumProblem::sigma() const {
    const auto e = minus_edges();
    std::vector<double> m(n_minus);
    for (int i = 0; i < n_minus; ++i) m[i] = constraint.mass(e[i], e[i + 1]);
    return GridMeasure::from_edges(e, std::move(m), window_minus());
}

void EquilibriumProblem::validate() const {
    if (!field.value || !field.primitive) throw InputError("problem: field is not set");
    if (!constraint.density || !constraint.mass) throw InputError("problem: constraint is not set");
    if (!(mass_1 > 0) || !(mass_2 > 0)) throw InputError("problem: masses must be positive");
    if (!(x_max > 0) || !(t_max > 0) || !std::isfinite(x_max) || !std::isfinite(t_max))
        throw InputError("problem: windows must be positive and finite");
    if (!(grading_scale > 0)) throw InputError("problem: grading_scale must be positive");
    if (!(plus_power >= 1) || !(minus_power >= 1)) throw InputError("problem: grid powers must be >= 1");
    if (n_plus < 4 || n_minus < 4) throw InputError("problem: need at least 4 cells per side");
    if (!(tol > 0) || max_iter < 1) throw InputError("problem: tol > 0 and max_iter >= 1 required");
    for (int i = 0; i <= 8; ++i) {
        const double v = field.value(x_max * i / 8);
        if (!std::isfinite(v)) throw InputError("problem: field is not finite on the window");
    }
    const double total = constraint.mass(-t_max, 0);
    if (!(total > mass_2))
        throw InputError("problem: constraint mass " + to_decimal(total) + " on the window does not exceed mass_2");
}

EquilibriumProblem problem_from_json(const json& j) {
    if (!j.is_object()) throw InputError("problem: expected a JSON object");
    if (!j.contains("field") || !j.contains("constraint")) throw InputError("problem: needs 'field' and 'constraint'");
    EquilibriumProblem p;
    p.field = make_field(j.at("field"));
    p.constraint = make_constraint(j.at("constraint"));
    p.x_max = std::max(20.0, 4 * p.field.endpoint_hint);
    if (j.contains("masses")) {
        const auto m = parse_real_array(j.at("masses"), "masses");
        if (m.size() != 2) throw InputError("problem: 'masses' needs two entries");
        p.mass_1 = m[0];
        p.mass_2 = m[1];
    }
    if (j.contains("windows")) {
        const json& w = j.at("windows");
        p.x_max = get(w, "x_max", p.x_max);
        p.t_max = get(w, "t_max", p.t_max);
        p.grading_scale = get(w, "grading_scale", p.grading_scale);
        p.plus_power = get(w, "plus_power", p.plus_power);
        p.minus_power = get(w, "minus_power", p.minus_power);
    }
    if (j.contains("grid")) {
        const json& g = j.at("grid");
        if (g.contains("n")) p.n_plus = p.n_minus = g.at("n").get<int>();
        if (g.contains("n_plus")) p.n_plus = g.at("n_plus").get<int>();
        if (g.contains("n_minus")) p.n_minus = g.at("n_minus").get<int>();
    }
    p.tol = get(j, "tol", p.tol);
    if (j.contains("max_iter")) p.max_iter = j.at("max_iter").get<int>();
    if (j.contains("seed")) p.seed = j.at("seed").get<std::uint64_t>();
    p.validate();
    return p;
}

json problem_to_json(const EquilibriumProblem& p) {
    json j;
    j["field"] = p.field.params;
    j["constraint"] = p.constraint.params;
    j["masses"] = real_array({p.mass_1, p.mass_2});
    j["windows"] = {{"x_max", to_decimal(p.x_max)}, {"t_max", to_decimal(p.t_max)},
                    {"grading_scale", to_decimal(p.grading_scale)},
                    {"plus_power", to_decimal(p.plus_power)}, {"minus_power", to_decimal(p.minus_power)}};
    j["grid"] = {{"n_plus", p.n_plus}, {"n_minus", p.n_minus}};
    j["tol"] = to_decimal(p.tol);
    j["max_iter"] = p.max_iter;
    j["seed"] = p.seed;
    return j;
}

EquilibriumProblem builtin_problem(const std::string& kind, double param, int n) {
    json j;
    if (kind == "bessel") {
        j["field"] = {{"kind", "bessel"}};
        j["constraint"] = {{"kind", "bessel"}};
    } else if (kind == "pollaczek") {
        j["field"] = {{"kind", "pollaczek"}, {"scale", param}};
        j["constraint"] = {{"kind", "pollaczek"}, {"scale", param}};
    } else if (kind == "hermite_mapped") {
        j["field"] = {{"kind", "hermite_mapped"}, {"a", param}};
        j["constraint"] = {{"kind", "hermite_mapped"}, {"a", param}};
    } else {
        throw InputError("unknown built-in problem '" + kind + "'");
    }
    j["grid"] = {{"n_plus", n}, {"n_minus", n}};
    return problem_from_json(j);
}

HalfLineData map_line_to_halfline(std::function<double(double)> field_tilde,
                                  std::function<double(double)> constraint_tilde, double scale) {
    if (!(scale > 0)) throw InputError("map_line_to_halfline: scale must be positive");
    for (double x : {0.01, 0.3, 1.0, 2.5, 7.0, 30.0}) {
        const double a = field_tilde(x), b = field_tilde(-x);
        if (std::abs(a - b) > 1e-12 * std::max(1.0, std::abs(a))) throw InputError("map_line_to_halfline: field is not even");
        const double c = constraint_tilde(x), d = constraint_tilde(-x);
        if (std::abs(c - d) > 1e-12 * std::max(1.0, std::abs(c)))
            throw InputError("map_line_to_halfline: constraint is not symmetric");
    }
    HalfLineData h;
    h.field = [field_tilde, scale](double y) { return 2 * field_tilde(std::sqrt(y / scale)); };
    // Both imaginary half-axes fold onto ℝ₋: c(s)|dz| ↦ c(√(|x|/c)) dx/√(c|x|).
    h.constraint_density = [constraint_tilde, scale](double x) {
        if (x >= 0) return 0.0;
        return constraint_tilde(std::sqrt(-x / scale)) / std::sqrt(-scale * x);
    };
    return h;
}

}  // namespace nikeq
