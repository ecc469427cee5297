#pragma once
#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "nikeq/errors.hpp"
#include "nikeq/measure_io.hpp"
#include "nikeq/measures.hpp"

namespace nikeq {

// φ on ℝ₊.  `primitive` is any antiderivative; cell averages of φ come from it.
struct ExternalField {
    std::string kind;
    json params = json::object();
    std::function<double(double)> value;
    std::function<double(double)> primitive;
    double endpoint_hint = 5;  // rough right end of supp λ₁, sizes the default window
};

// σ on ℝ₋ with a continuous density.  `mass(a, b)` = σ([a, b]).
struct Constraint {
    std::string kind;
    json params = json::object();
    std::function<double(double)> density;
    std::function<double(double, double)> mass;
};

// Specs look like {"kind": "bessel"} or {"kind": "pollaczek", "scale": 4}.
// Every field kind also takes an additive "shift".
ExternalField make_field(const json& spec);
Constraint make_constraint(const json& spec);

struct EquilibriumProblem {
    ExternalField field;
    Constraint constraint;
    double mass_1 = 2, mass_2 = 1;
    double x_max = 20;
    double t_max = 1e10;
    double grading_scale = 1e-3;  // minus-side cells grow geometrically past this
    double plus_power = 2;        // grid grading toward 0 on each side; 1 = none
    double minus_power = 2;
    int n_plus = 500, n_minus = 500;
    double tol = 1e-6;
    int max_iter = 200;
    std::uint64_t seed = 1;

    Interval window_plus() const { return {0, x_max}; }
    Interval window_minus() const { return {-t_max, 0}; }
    std::vector<double> plus_edges() const;
    std::vector<double> minus_edges() const;
    GridMeasure sigma() const;  // constraint cell masses on the minus grid
    double growth_margin() const { return field.value(x_max) - 4 * std::log(x_max); }
    void validate() const;  // structural checks; the growth check is the solver's
};

// {"field": {...}, "constraint": {...},
//  "windows": {"x_max", "t_max", "grading_scale", "plus_power", "minus_power"},
//  "grid": {"n_plus", "n_minus"}, "tol", "max_iter", "seed"}.  Missing windows
// default to x_max = max(20, 4·endpoint_hint).
EquilibriumProblem problem_from_json(const json& j);
json problem_to_json(const EquilibriumProblem& p);

// Built-ins: "bessel", "pollaczek" (param = scale), "hermite_mapped" (param = a).
EquilibriumProblem builtin_problem(const std::string& kind, double param = 1, int n = 500);

struct VectorMeasure {
    GridMeasure mu1, mu2;
};

struct FunctionalForms {
    double plain = 0;     // J_φ
    double modified = 0;  // 𝒥_{φ*} with the log(1+x²)-regularized kernel
};

// Throws ConstraintViolation for wrong masses or μ₂ > σ, and ConsistencyError
// if the two forms disagree beyond 1e-8 relative.
double evaluate_functional(const EquilibriumProblem& p, const VectorMeasure& v);
FunctionalForms functional_forms(const EquilibriumProblem& p, const VectorMeasure& v);

struct ResidualReport {
    // Violations, all ≥ 0: |W₁ − w₁| on supp λ₁, (w₁ − W₁)₊ on the plus window,
    // (W₂ − w₂)₊ on supp λ₂, (w₂ − W₂)₊ on supp(σ − λ₂).  W is cell-averaged.
    double w1_equality = 0, w1_lower = 0, w2_upper = 0, w2_lower = 0;
    double directional_min = 0;  // over random admissible directions
    int directions = 0;
    double w1 = 0, w2 = 0;
    double pointwise_w1_equality = 0;  // same as w1_equality at cell centres, diagnostic only
    double tol = 0;
    bool accepted = false;
};

struct EquilibriumSolution {
    EquilibriumProblem problem;
    VectorMeasure lambda;
    double w1 = 0, w2 = 0, gamma1 = 0, gamma2 = 0;
    std::vector<Interval> supp1, supp2, saturation;
    ResidualReport residuals;
    int iterations = 0;
    double functional_value = 0;
    std::vector<double> history;  // J after each accepted step
    double kkt_residual = 0;
    double edge_mass_1 = 0;  // λ₁ mass in the last 5% of the plus window
    double tail_mass_2 = 0;  // λ₂ mass in the last decade of the minus window
    bool modified_route = false;
};

class SolverStalled : public ConvergenceError {
public:
    SolverStalled(const std::string& msg, double J, double residual, VectorMeasure best)
        : ConvergenceError(msg, J, residual), best_(std::move(best)) {}
    const VectorMeasure& best() const { return best_; }
private:
    VectorMeasure best_;
};

enum class KernelRoute { Plain, Modified };
enum class Side { Plus, Minus };

EquilibriumSolution solve_equilibrium(const EquilibriumProblem& p, double tol, int max_iter,
                                      KernelRoute route = KernelRoute::Plain);

// Pointwise W₁ (plus) or W₂ (minus).
double effective_fields(const EquilibriumSolution& s, double x, Side side);
double effective_field(const EquilibriumProblem& p, const VectorMeasure& v, double x, Side side);

ResidualReport variational_report(const EquilibriumProblem& p, const VectorMeasure& v);
// ∫W₁ d(ν₁ − λ₁) + ∫W₂ d(ν₂ − λ₂) for measures on the problem grids.
double directional_derivative(const EquilibriumProblem& p, const VectorMeasure& lambda, const VectorMeasure& nu);

// (w₁, w₂) = (γ₁ − C₁, γ₂ − C₂).
std::pair<double, double> convert_constants(const VectorMeasure& lambda, double gamma1, double gamma2);

// Folds an even problem on ℝ (constraint on iℝ) onto the half-lines by x = c·ζ².
// The field doubles because the symmetric energy halves under the fold.
struct HalfLineData {
    std::function<double(double)> field;
    std::function<double(double)> constraint_density;
};
HalfLineData map_line_to_halfline(std::function<double(double)> field_tilde,
                                  std::function<double(double)> constraint_tilde, double scale = 1);

// Σ |cell mass − ∫_cell ρ| — the L¹ gap between a grid measure and a density.
double l1_gap(const GridMeasure& mu, const std::function<double(double)>& density);

json solution_header(const EquilibriumSolution& s);

}  // namespace nikeq
