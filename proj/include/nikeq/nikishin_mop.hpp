#pragma once
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <boost/multiprecision/gmp.hpp>

#include "nikeq/measure_io.hpp"
#include "nikeq/polynomial.hpp"
#include "nikeq/precision.hpp"
#include "nikeq/quadrature.hpp"

namespace nikeq {

using Rational = boost::multiprecision::mpq_rational;

struct MassPoint {
    Real t;
    Real beta;
};

// (s₁, s₂) = 𝒩(σ₁, σ₂): σ₁ = σ₁'(x)dx on ℝ₊, σ₂ = Σ_k β_k δ_{t_k} on ℝ₋ with
// t_k decreasing to −∞, and ds₂ = σ̂₂ dσ₁.  Atoms are indexed from k = 0.
struct NikishinSystem {
    std::string kind = "custom";
    std::function<Real(const Real&)> sigma1_density;
    std::function<MassPoint(long k)> sigma2_atom;
    // Optional closed forms.  Without sigma2_hat the Cauchy transform is summed
    // over the first k_max atoms.
    std::function<Real(const Real&)> sigma2_hat;
    std::function<Rational(int j, int nu)> exact_moment;
    std::function<double(int n)> scaling;  // d_n
    // Σ_{k≥K} β_k |t_k|^{-p}, for the tail of the σ₂ sums.
    std::function<double(long K, int p)> atom_tail;
    long k_max = 1000;

    // Limit data for the assumption checks (all optional).
    std::function<double(double)> rho, A, B, phi;
    std::function<double(double, double)> sigma_mass;  // σ([a, b]), a ≤ b ≤ 0

    void validate() const;
};

// σ₁' = 1/sinh(π√x/2), σ₂ = (4/π)Σ_{k≥0} δ_{−(2k+1)²}, d_n = 4n².  Moments are the
// integers m_ν(s₁) = 2·T_{2ν+1} (tangent numbers) and m_ν(s₂) = 2·|E_{2ν}|.
NikishinSystem pollaczek_system();

// ∫ x^ν ds_j: the exact value when the system has one, else quadrature.
Real moment(const NikishinSystem& sys, int j, int nu, const PrecisionContext& ctx);
Real moment_quadrature(const NikishinSystem& sys, int j, int nu, const PrecisionContext& ctx);

struct MopPair {
    int n = 0;
    Polynomial<Real> Pn, Pn2;
    std::vector<Real> zeros_Pn, zeros_Pn2;
    std::vector<Rational> exact_coefficients;  // of P_n, when the moments are exact
    int precision_used = 0;
    double residual = 0;       // scaled defect of ∫xᵛ P_n ds_j = 0
    double residual_3 = 0;     // of ∫xᵛ P_n/P_{n,2} dσ₁ = 0, ν < 2n
    double residual_4 = 0;     // of the σ₂-side relation, ν < n, with a fitted tail
    double residual_4_tail = 0;  // uncertainty of that tail
    std::vector<long> gaps;    // k with a P_{n,2} zero in (t_{k+1}, t_k)
    int max_changes_per_gap = 0;  // sampled sign changes of R in the occupied gaps
    int rule_level = 0;
};

MopPair compute_Pn(const NikishinSystem& sys, int n, const PrecisionContext& ctx);

// R(z) = ∫ P(x)/(z − x) dσ₁(x), z < 0.  The evaluator caches a quadrature
// rule for σ₁ and the moments; P(z)S(z) minus an exact polynomial part.
class SecondKind {
public:
    // `reduce` = r uses 1/(z−x) = Σ_{k<r} xᵏ/z^{k+1} + (x/z)^r/(z−x), which
    // avoids cancellation at large |z| when P is orthogonal to xᵏ, k < r.
    SecondKind(const NikishinSystem& sys, const Polynomial<Real>& P, const PrecisionContext& ctx,
               int reduce = 0);
    SecondKind(const QuadratureRule& rule, const std::vector<Real>& moments, const Polynomial<Real>& P,
               int reduce = 0);
    Real operator()(const Real& z) const;
private:
    void init(const QuadratureRule& rule, const std::vector<Real>& moments, const Polynomial<Real>& P);
    int reduce_ = 0;
    std::vector<Real> nodes_, g_;   // g_r = w_r x_r^r P(x_r)
    std::vector<Real> head_;        // ∫ xᵏ P dσ₁, k < reduce
};

// A frozen rule for σ₁, refined until it reproduces the first `count`
// moments of σ₁ to 10^{-bits/8}·2^{-40}, then one level more; `grow` as in
// make_halfline_rule.
struct Sigma1Rule {
    QuadratureRule rule;
    int level = 0;
    double moment_error = 0;
};
Sigma1Rule sigma1_rule(const NikishinSystem& sys, int count, double grow, const PrecisionContext& ctx);
Real second_kind_R(const NikishinSystem& sys, const Polynomial<Real>& P, const Real& z,
                   const PrecisionContext& ctx);

// Fills Pn2/zeros_Pn2/gaps and the varying-orthogonality residuals.
void compute_Pn2(const NikishinSystem& sys, MopPair& pair, const PrecisionContext& ctx);

struct RescaledPair {
    Polynomial<Real> Qn, Qn2;
    std::vector<Real> zeros_Qn, zeros_Qn2;
};
RescaledPair rescale_pair(const MopPair& pair, const Real& d_n);

struct NormIntegrals {
    Real N1, N2;
    double log_N1 = 0, log_N2 = 0;
    double tail_2 = 0;  // added tail of the σ₂ sum, relative to N2
};
NormIntegrals norm_integrals(const NikishinSystem& sys, const MopPair& pair, const PrecisionContext& ctx,
                             double rel_tol = 1e-6);

struct ConditionRecord {
    std::string condition;
    std::string measured;  // what was measured
    std::string domain;    // grid / compact used
    int n = 0;
    double value = 0, bound = 0, margin = 0;
    bool pass = false;
};
struct AssumptionReport {
    std::vector<ConditionRecord> records;
    json to_json() const;
};
AssumptionReport check_assumptions(const NikishinSystem& sys, const std::vector<int>& n_list,
                                   Interval plus_compact = {0.5, 4}, Interval minus_compact = {-4, -0.05});

// Everything `mop run` persists for one n.
json mop_to_json(const NikishinSystem& sys, const MopPair& pair, const NormIntegrals* norms);

std::vector<double> to_doubles(const std::vector<Real>& xs);

// Between any two consecutive zeros of `lower` lies a zero of `higher`.
bool zeros_interlace(const std::vector<Real>& lower, const std::vector<Real>& higher);

}  // namespace nikeq
