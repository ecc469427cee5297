#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <tuple>

#include <Eigen/LU>

#include "nikeq/equilibrium.hpp"
#include "nikeq/precision.hpp"
#include "nikeq/quadrature.hpp"

namespace nikeq {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kSupportRel = 1e-10;  // supp: mass > 1e-10·total; saturation: gap < 1e-10·σ-cell

double cell_average(const ExternalField& f, double a, double b) { return (f.primitive(b) - f.primitive(a)) / (b - a); }

std::vector<double> field_averages(const ExternalField& f, const GridMeasure& mu) {
    std::vector<double> out(mu.size());
    for (std::size_t i = 0; i < mu.size(); ++i) out[i] = cell_average(f, mu.left(i), mu.right(i));
    return out;
}

// Euclidean projection of y onto {0 <= x <= u, Σx = M}.  Sweeps the sorted
// breakpoints of τ ↦ Σ clamp(y_i − τ, 0, u_i).
void project_block(const double* y, const double* u, int n, double M, double* out) {
    struct Ev {
        double t;
        int d;
    };
    std::vector<Ev> ev;
    ev.reserve(2 * n);
    for (int i = 0; i < n; ++i) {
        ev.push_back({y[i], +1});
        if (std::isfinite(u[i])) ev.push_back({y[i] - u[i], -1});
    }
    std::sort(ev.begin(), ev.end(), [](const Ev& a, const Ev& b) { return a.t > b.t; });
    double S = 0, prev = ev.empty() ? 0 : ev.front().t, tau = prev;
    int k = 0;
    bool found = false;
    for (const Ev& e : ev) {
        const double Se = S + k * (prev - e.t);
        if (Se >= M && k > 0) {
            tau = prev - (M - S) / k;
            found = true;
            break;
        }
        S = Se;
        prev = e.t;
        k += e.d;
    }
    if (!found) {
        double cap = 0;
        for (int i = 0; i < n; ++i) cap += u[i];
        if (k <= 0 && cap < M * (1 - 1e-12)) throw ConsistencyError("projection: box cannot hold the requested mass");
        tau = k > 0 ? prev - (M - S) / k : prev;
    }
    // The sweep accumulates S across breakpoints of very different sizes; if
    // that drifted, bisect on the exact sum.
    auto mass_at = [&](double t) {
        double m = 0;
        for (int i = 0; i < n; ++i) m += std::clamp(y[i] - t, 0.0, u[i]);
        return m;
    };
    if (std::abs(mass_at(tau) - M) > 1e-12 * M && !ev.empty()) {
        double lo = ev.back().t, hi = ev.front().t;
        for (int it = 0; it < 200 && hi - lo > 0; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (mid == lo || mid == hi) break;
            (mass_at(mid) > M ? lo : hi) = mid;
        }
        tau = std::abs(mass_at(lo) - M) < std::abs(mass_at(hi) - M) ? lo : hi;
    }
    double sum = 0;
    for (int i = 0; i < n; ++i) {
        out[i] = std::clamp(y[i] - tau, 0.0, u[i]);
        sum += out[i];
    }
    // Put the rounding residue on the variable with the most room.
    double diff = M - sum;
    for (int pass = 0; pass < 3 && diff != 0; ++pass) {
        int best = -1;
        double room = 0;
        for (int i = 0; i < n; ++i) {
            const double r = diff > 0 ? u[i] - out[i] : out[i];
            if (r > room) {
                room = r;
                best = i;
            }
        }
        if (best < 0) break;
        const double step = diff > 0 ? std::min(diff, room) : std::max(diff, -room);
        out[best] += step;
        diff -= step;
    }
}

struct Discretization {
    const EquilibriumProblem* p = nullptr;
    GridMeasure plus, minus;  // zero masses; geometry only
    int n1 = 0, n2 = 0;
    Eigen::MatrixXd Q;
    Eigen::VectorXd f, upper, ell;
    double M[2] = {0, 0};

    int n() const { return n1 + n2; }
    int block(int i) const { return i < n1 ? 0 : 1; }

    void project(const Eigen::VectorXd& y, Eigen::VectorXd& x) const {
        x.resize(n());
        project_block(y.data(), upper.data(), n1, M[0], x.data());
        project_block(y.data() + n1, upper.data() + n1, n2, M[1], x.data() + n1);
    }
    double J(const Eigen::VectorXd& x) const { return x.dot(Q * x) + 2 * f.dot(x); }
    Eigen::VectorXd G(const Eigen::VectorXd& x) const { return Q * x + f; }
};

Discretization discretize(const EquilibriumProblem& p, KernelRoute route) {
    Discretization d;
    d.p = &p;
    d.plus = GridMeasure::from_edges(p.plus_edges(), std::vector<double>(p.n_plus, 0.0), p.window_plus());
    const GridMeasure sig = p.sigma();
    d.minus = sig.with_masses(std::vector<double>(p.n_minus, 0.0));
    d.n1 = p.n_plus;
    d.n2 = p.n_minus;
    d.M[0] = p.mass_1;
    d.M[1] = p.mass_2;
    const Eigen::MatrixXd K11 = interaction_matrix(d.plus, d.plus);
    const Eigen::MatrixXd K22 = interaction_matrix(d.minus, d.minus);
    const Eigen::MatrixXd K12 = interaction_matrix(d.plus, d.minus);
    const int n = d.n();
    d.Q.resize(n, n);
    d.Q.topLeftCorner(d.n1, d.n1) = 2 * K11;
    d.Q.topRightCorner(d.n1, d.n2) = -K12;
    d.Q.bottomLeftCorner(d.n2, d.n1) = -K12.transpose();
    d.Q.bottomRightCorner(d.n2, d.n2) = 2 * K22;
    d.f = Eigen::VectorXd::Zero(n);
    const auto phi = field_averages(p.field, d.plus);
    for (int i = 0; i < d.n1; ++i) d.f(i) = phi[i];
    d.upper.resize(n);
    for (int i = 0; i < d.n1; ++i) d.upper(i) = kInf;
    for (int i = 0; i < d.n2; ++i) d.upper(d.n1 + i) = sig.masses()[i];
    d.ell.resize(n);
    d.ell.head(d.n1) = cell_log_moments(d.plus);
    d.ell.tail(d.n2) = cell_log_moments(d.minus);
    if (route == KernelRoute::Modified) {
        // 𝒦(x, y) = K + ½ℓ(x) + ½ℓ(y), field φ* = φ − (3/2)ℓ.
        const double coef[2][2] = {{2, -1}, {-1, 2}};
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) d.Q(i, j) += coef[d.block(i)][d.block(j)] * 0.5 * (d.ell(i) + d.ell(j));
        d.f.head(d.n1) -= 1.5 * d.ell.head(d.n1);
    }
    return d;
}

// Status of each variable at a point: on support / at zero / saturated.
struct Kkt {
    double w[2] = {0, 0};
    double residual = 0;
};

bool on_support(const Discretization& d, const Eigen::VectorXd& x, int i) {
    return x(i) > kSupportRel * d.M[d.block(i)];
}
bool saturated(const Discretization& d, const Eigen::VectorXd& x, int i) {
    return std::isfinite(d.upper(i)) && d.upper(i) - x(i) < kSupportRel * d.upper(i);
}

// Constants from the averages of W over supp λ₁ and the contact set; the
// residual is the largest violation of the variational conditions.
Kkt kkt(const Discretization& d, const Eigen::VectorXd& x, const Eigen::VectorXd& G) {
    Kkt k;
    for (int b = 0; b < 2; ++b) {
        const int lo = b == 0 ? 0 : d.n1, hi = b == 0 ? d.n1 : d.n();
        double num = 0, den = 0, floor_ = -kInf, ceil_ = kInf;
        for (int i = lo; i < hi; ++i) {
            const bool s = on_support(d, x, i), sat = saturated(d, x, i);
            if (s && !sat) {
                num += x(i) * G(i);
                den += x(i);
            }
            if (sat) floor_ = std::max(floor_, G(i));  // need G <= w there
            if (!s) ceil_ = std::min(ceil_, G(i));     // need G >= w there
        }
        if (den > 0) k.w[b] = num / den;
        else if (std::isfinite(floor_) && std::isfinite(ceil_)) k.w[b] = 0.5 * (floor_ + ceil_);
        else k.w[b] = std::isfinite(floor_) ? floor_ : ceil_;
        for (int i = lo; i < hi; ++i) {
            const bool s = on_support(d, x, i), sat = saturated(d, x, i);
            double v = 0;
            if (s && !sat) v = std::abs(G(i) - k.w[b]);
            else if (sat) v = std::max(0.0, G(i) - k.w[b]);
            else v = std::max(0.0, k.w[b] - G(i));
            k.residual = std::max(k.residual, v);
        }
    }
    return k;
}

Eigen::VectorXd initial_point(const Discretization& d) {
    const EquilibriumProblem& p = *d.p;
    Eigen::VectorXd y = Eigen::VectorXd::Zero(d.n());
    const double a1 = std::min(4.0, p.x_max);
    for (int i = 0; i < d.n1; ++i) {
        const double ov = std::max(0.0, std::min(d.plus.right(i), a1) - d.plus.left(i));
        y(i) = p.mass_1 * ov / a1;
    }
    const double a2 = std::min(4.0, p.t_max);
    for (int i = 0; i < d.n2; ++i) {
        const double ov = std::max(0.0, d.minus.right(i) - std::max(d.minus.left(i), -a2));
        y(d.n1 + i) = std::min(p.mass_2 * ov / a2, d.upper(d.n1 + i));
    }
    Eigen::VectorXd x;
    d.project(y, x);
    return x;
}

VectorMeasure to_measures(const Discretization& d, const Eigen::VectorXd& x) {
    std::vector<double> m1(x.data(), x.data() + d.n1), m2(x.data() + d.n1, x.data() + d.n());
    return {d.plus.with_masses(std::move(m1)), d.minus.with_masses(std::move(m2))};
}

std::vector<Interval> merge_cells(const GridMeasure& g, const std::vector<char>& in) {
    std::vector<Interval> out;
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (!in[i]) continue;
        if (!out.empty() && std::abs(out.back().hi - g.left(i)) <= 1e-12 * (1 + std::abs(g.left(i))))
            out.back().hi = g.right(i);
        else
            out.push_back({g.left(i), g.right(i)});
    }
    return out;
}

bool same_grid(const GridMeasure& a, const GridMeasure& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (std::abs(a.left(i) - b.left(i)) > 1e-12 * (1 + std::abs(a.left(i))) ||
            std::abs(a.right(i) - b.right(i)) > 1e-12 * (1 + std::abs(a.right(i))))
            return false;
    return true;
}

Eigen::VectorXd stack(const Discretization& d, const VectorMeasure& v) {
    if (!same_grid(v.mu1, d.plus) || !same_grid(v.mu2, d.minus))
        throw InputError("measures do not live on the problem grids");
    Eigen::VectorXd x(d.n());
    for (int i = 0; i < d.n1; ++i) x(i) = v.mu1.masses()[i];
    for (int i = 0; i < d.n2; ++i) x(d.n1 + i) = v.mu2.masses()[i];
    return x;
}

void check_admissible(const EquilibriumProblem& p, const VectorMeasure& v) {
    std::string bad;
    auto mass_ok = [](double have, double want) { return std::abs(have - want) <= 1e-10 * std::max(1.0, want); };
    if (!mass_ok(v.mu1.total_mass(), p.mass_1)) bad += " |mu1| = " + to_decimal(v.mu1.total_mass()) + ";";
    if (!mass_ok(v.mu2.total_mass(), p.mass_2)) bad += " |mu2| = " + to_decimal(v.mu2.total_mass()) + ";";
    int listed = 0, over = 0;
    for (std::size_t i = 0; i < v.mu2.size(); ++i) {
        if (v.mu2.right(i) > 1e-14) throw ConstraintViolation("mu2 must live on the negative half-line");
        const double cap = p.constraint.mass(v.mu2.left(i), v.mu2.right(i));
        if (v.mu2.masses()[i] > cap * (1 + 1e-12) + 1e-300) {
            ++over;
            if (listed++ < 10) bad += " cell " + std::to_string(i) + " [" + to_decimal(v.mu2.left(i)) + ", " +
                                      to_decimal(v.mu2.right(i)) + "] exceeds sigma;";
        }
    }
    if (over > 10) bad += " ... " + std::to_string(over) + " cells in all;";
    for (std::size_t i = 0; i < v.mu1.size(); ++i)
        if (v.mu1.left(i) < -1e-14) throw ConstraintViolation("mu1 must live on the positive half-line");
    if (!bad.empty()) throw ConstraintViolation("inadmissible measures:" + bad);
}

// Cell averages of (W₁, W₂) for measures on the problem grids.
Eigen::VectorXd cell_fields(const Discretization& d, const Eigen::VectorXd& x) { return d.G(x); }

}  // namespace

// ---------------------------------------------------------------- functional

FunctionalForms functional_forms(const EquilibriumProblem& p, const VectorMeasure& v) {
    check_admissible(p, v);
    const EnergyReport e = energy_forms(v.mu1, v.mu2);
    const auto phi = field_averages(p.field, v.mu1);
    double fld = 0;
    for (std::size_t i = 0; i < v.mu1.size(); ++i) fld += v.mu1.masses()[i] * phi[i];
    FunctionalForms out;
    out.plain = 2 * (e.I_self_1 - e.I_mutual + e.I_self_2 + fld);
    // φ* = φ − (3/2)log(1+x²) for masses (2, 1); in general the kernel shift
    // leaves (2|μ₁| − |μ₂|)L₁ + (2|μ₂| − |μ₁|)L₂ to remove.
    const double m1 = v.mu1.total_mass(), m2 = v.mu2.total_mass();
    out.modified = 2 * (e.M_self_1 - e.M_mutual + e.M_self_2 + fld) -
                   (2 * m1 - m2) * e.log_moment_1 - (2 * m2 - m1) * e.log_moment_2;
    return out;
}

double evaluate_functional(const EquilibriumProblem& p, const VectorMeasure& v) {
    const FunctionalForms f = functional_forms(p, v);
    if (std::abs(f.plain - f.modified) > 1e-8 * std::max(1.0, std::abs(f.plain)))
        throw ConsistencyError("plain and modified functionals disagree: " + to_decimal(f.plain) + " vs " +
                               to_decimal(f.modified));
    return f.plain;
}

// ------------------------------------------------------------------- solver

namespace {

struct NewtonState {
    Eigen::VectorXd x;
    double J = 0;
};

// One projected-Newton step on the ε-active set; false if no decrease was found.
bool newton_step(const Discretization& d, NewtonState& s, const Kkt& k, double eps) {
    const int n = d.n();
    const Eigen::VectorXd G = d.G(s.x);
    std::vector<int> F;
    Eigen::VectorXd dir = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < n; ++i) {
        const int b = d.block(i);
        const double scale = std::isfinite(d.upper(i)) ? d.upper(i) : d.M[b] / d.n1;
        const double g = G(i) - k.w[b];
        if (s.x(i) <= eps * scale && g > 0) dir(i) = -s.x(i);
        else if (std::isfinite(d.upper(i)) && d.upper(i) - s.x(i) <= eps * scale && g < 0) dir(i) = d.upper(i) - s.x(i);
        else F.push_back(i);
    }
    int nb[2] = {0, 0};
    for (int i : F) ++nb[d.block(i)];
    int rows[2] = {-1, -1}, m = 0;
    for (int b = 0; b < 2; ++b)
        if (nb[b] > 0) rows[b] = m++;
    const int nf = int(F.size());
    if (nf > 0) {
        Eigen::MatrixXd A = Eigen::MatrixXd::Zero(nf + m, nf + m);
        Eigen::VectorXd rhs(nf + m);
        Eigen::VectorXd QdA = d.Q * dir;
        for (int a = 0; a < nf; ++a) {
            for (int c = 0; c < nf; ++c) A(a, c) = d.Q(F[a], F[c]);
            const int r = rows[d.block(F[a])];
            A(a, nf + r) = 1;
            A(nf + r, a) = 1;
            rhs(a) = -(G(F[a]) + QdA(F[a]));
        }
        double moved[2] = {0, 0};
        for (int i = 0; i < n; ++i) moved[d.block(i)] += dir(i);
        for (int b = 0; b < 2; ++b)
            if (rows[b] >= 0) rhs(nf + rows[b]) = -moved[b];
        const Eigen::VectorXd sol = A.partialPivLu().solve(rhs);
        for (int a = 0; a < nf; ++a) dir(F[a]) = sol(a);
    }
    // Armijo along the projection arc.
    Eigen::VectorXd xt;
    double alpha = 1;
    for (int t = 0; t < 40; ++t, alpha *= 0.5) {
        d.project(s.x + alpha * dir, xt);
        const double Jt = d.J(xt);
        if (Jt <= s.J + 1e-4 * 2 * G.dot(xt - s.x)) {
            if (!(Jt < s.J) && (xt - s.x).lpNorm<Eigen::Infinity>() == 0) return false;
            s.x = xt;
            s.J = Jt;
            return true;
        }
    }
    return false;
}

// Projected gradient with a Barzilai–Borwein step and backtracking.
bool gradient_step(const Discretization& d, NewtonState& s, double& step) {
    const Eigen::VectorXd G = d.G(s.x);
    Eigen::VectorXd xt;
    for (int t = 0; t < 60; ++t, step *= 0.5) {
        d.project(s.x - step * G, xt);
        const double Jt = d.J(xt);
        if (Jt <= s.J + 1e-4 * 2 * G.dot(xt - s.x) && Jt < s.J) {
            const Eigen::VectorXd dx = xt - s.x, dg = d.G(xt) - G;
            const double sy = dx.dot(dg);
            step = sy > 0 ? dx.squaredNorm() / sy : step * 2;
            s.x = xt;
            s.J = Jt;
            return true;
        }
    }
    return false;
}

}  // namespace

EquilibriumSolution solve_equilibrium(const EquilibriumProblem& p, double tol, int max_iter, KernelRoute route) {
    p.validate();
    if (!(tol > 0) || max_iter < 1) throw InputError("solve_equilibrium: tol > 0 and max_iter >= 1 required");
    if (!(p.growth_margin() > 0))
        throw InputError("solve_equilibrium: growth check fails, phi(X_max) - 4 log X_max = " +
                         to_decimal(p.growth_margin()) + "; widen the plus window");
    if (route == KernelRoute::Modified && (p.mass_1 != 2 || p.mass_2 != 1))
        throw InputError("solve_equilibrium: the modified-kernel route assumes masses (2, 1)");
    const Discretization d = discretize(p, route);

    NewtonState s;
    s.x = initial_point(d);
    s.J = d.J(s.x);
    EquilibriumSolution out;
    out.problem = p;
    out.modified_route = route == KernelRoute::Modified;
    out.history.push_back(s.J);

    // Drive the discrete KKT residual well below tol; the certificate below
    // decides acceptance.
    const double target = std::min(tol * 1e-3, 1e-10);
    double step = 1e-3;
    Kkt k = kkt(d, s.x, d.G(s.x));
    int it = 0, stalls = 0;
    for (; it < max_iter && k.residual > target; ++it) {
        const double eps = std::min(1e-2, std::max(k.residual, 1e-12));
        bool ok = newton_step(d, s, k, eps);
        if (!ok) ok = gradient_step(d, s, step);
        if (!ok) {
            if (++stalls > 2) break;  // no representable decrease left
        } else {
            stalls = 0;
            out.history.push_back(s.J);
        }
        k = kkt(d, s.x, d.G(s.x));
    }
    out.iterations = it;
    out.kkt_residual = k.residual;
    out.lambda = to_measures(d, s.x);

    if (k.residual > tol)
        throw SolverStalled("solve_equilibrium: residual " + to_decimal(k.residual) + " above tol after " +
                                std::to_string(it) + " iterations",
                            s.J, k.residual, out.lambda);

    const Eigen::VectorXd G = d.G(s.x);
    const auto [C1, C2] = [&] {
        auto w = convert_constants(out.lambda, 0, 0);
        return std::pair<double, double>{-w.first, -w.second};
    }();
    if (route == KernelRoute::Modified) {
        out.gamma1 = k.w[0];
        out.gamma2 = k.w[1];
        std::tie(out.w1, out.w2) = convert_constants(out.lambda, out.gamma1, out.gamma2);
    } else {
        out.w1 = k.w[0];
        out.w2 = k.w[1];
        out.gamma1 = out.w1 + C1;
        out.gamma2 = out.w2 + C2;
    }
    // In the modified route G carries the constants; shift back for the edge test.
    const double shift[2] = {k.w[0] - out.w1, k.w[1] - out.w2};

    std::vector<char> in1(d.n1), in2(d.n2), sat(d.n2);
    for (int i = 0; i < d.n1; ++i)
        in1[i] = on_support(d, s.x, i) ||
                 (std::abs(G(i) - shift[0] - out.w1) < tol / 10 &&
                  ((i > 0 && on_support(d, s.x, i - 1)) || (i + 1 < d.n1 && on_support(d, s.x, i + 1))));
    for (int i = 0; i < d.n2; ++i) {
        const int j = d.n1 + i;
        in2[i] = on_support(d, s.x, j) ||
                 (std::abs(G(j) - shift[1] - out.w2) < tol / 10 &&
                  ((i > 0 && on_support(d, s.x, j - 1)) || (i + 1 < d.n2 && on_support(d, s.x, j + 1))));
        sat[i] = saturated(d, s.x, j);
    }
    out.supp1 = merge_cells(d.plus, in1);
    out.supp2 = merge_cells(d.minus, in2);
    out.saturation = merge_cells(d.minus, sat);
    out.functional_value = route == KernelRoute::Plain ? s.J : evaluate_functional(p, out.lambda);

    for (int i = 0; i < d.n1; ++i)
        if (d.plus.left(i) >= 0.95 * p.x_max) out.edge_mass_1 += s.x(i);
    for (int i = 0; i < d.n2; ++i)
        if (d.minus.right(i) <= -0.1 * p.t_max) out.tail_mass_2 += s.x(d.n1 + i);
    if (out.edge_mass_1 > 1e-8 * p.mass_1)
        throw WindowError("solve_equilibrium: lambda_1 carries " + to_decimal(out.edge_mass_1) +
                          " near X_max; enlarge the plus window");

    out.residuals = variational_report(p, out.lambda);
    out.residuals.tol = tol;
    out.residuals.accepted = out.residuals.w1_equality <= tol && out.residuals.w1_lower <= tol &&
                             out.residuals.w2_upper <= tol && out.residuals.w2_lower <= tol &&
                             out.residuals.directional_min >= -tol;
    return out;
}

// ----------------------------------------------------------------- reports

double effective_field(const EquilibriumProblem& p, const VectorMeasure& v, double x, Side side) {
    if (side == Side::Plus) {
        if (!(x >= 0 && x <= p.x_max)) throw DomainError("effective_fields: x outside the plus window");
        return 2 * log_potential(v.mu1, x) - log_potential(v.mu2, x) + p.field.value(x);
    }
    if (!(x <= 0 && x >= -p.t_max)) throw DomainError("effective_fields: x outside the minus window");
    return 2 * log_potential(v.mu2, x) - log_potential(v.mu1, x);
}

double effective_fields(const EquilibriumSolution& s, double x, Side side) {
    return effective_field(s.problem, s.lambda, x, side);
}

double directional_derivative(const EquilibriumProblem& p, const VectorMeasure& lambda, const VectorMeasure& nu) {
    const Discretization d = discretize(p, KernelRoute::Plain);
    const Eigen::VectorXd x = stack(d, lambda), y = stack(d, nu);
    return cell_fields(d, x).dot(y - x);
}

ResidualReport variational_report(const EquilibriumProblem& p, const VectorMeasure& v) {
    check_admissible(p, v);
    const Discretization d = discretize(p, KernelRoute::Plain);
    const Eigen::VectorXd x = stack(d, v);
    const Eigen::VectorXd G = cell_fields(d, x);
    const Kkt k = kkt(d, x, G);
    ResidualReport r;
    r.w1 = k.w[0];
    r.w2 = k.w[1];
    r.tol = p.tol;
    for (int i = 0; i < d.n(); ++i) {
        const bool s = on_support(d, x, i), sat = saturated(d, x, i);
        if (i < d.n1) {
            if (s) r.w1_equality = std::max(r.w1_equality, std::abs(G(i) - r.w1));
            r.w1_lower = std::max(r.w1_lower, r.w1 - G(i));
        } else {
            if (s) r.w2_upper = std::max(r.w2_upper, G(i) - r.w2);
            if (!sat) r.w2_lower = std::max(r.w2_lower, r.w2 - G(i));
        }
    }
    r.w1_lower = std::max(0.0, r.w1_lower);
    r.w2_upper = std::max(0.0, r.w2_upper);
    r.w2_lower = std::max(0.0, r.w2_lower);
    for (int i = 0; i < d.n1; ++i)
        if (on_support(d, x, i))
            r.pointwise_w1_equality =
                std::max(r.pointwise_w1_equality, std::abs(effective_field(p, v, d.plus.nodes()[i], Side::Plus) - r.w1));

    // Random admissible competitors ν⃗ (seeded): broad, local and transport moves.
    std::mt19937_64 rng(p.seed);
    std::uniform_real_distribution<double> U(0, 1);
    Eigen::VectorXd y(d.n()), nu;
    r.directional_min = kInf;
    const double avg1 = p.mass_1 / d.n1;
    for (int t = 0; t < 100; ++t) {
        const int kind = t % 3;
        if (kind == 0) {
            double a = U(rng) * p.x_max, b = U(rng) * p.x_max;
            if (a > b) std::swap(a, b);
            for (int i = 0; i < d.n1; ++i) y(i) = (d.plus.right(i) > a && d.plus.left(i) < b) ? U(rng) : 0.0;
            if (y.head(d.n1).sum() == 0) y(int(U(rng) * (d.n1 - 1))) = 1;
            y.head(d.n1) *= p.mass_1 / y.head(d.n1).sum();
            for (int i = 0; i < d.n2; ++i) y(d.n1 + i) = d.upper(d.n1 + i) * U(rng);
        } else if (kind == 1) {
            const double eta = std::pow(10.0, -1 - 3 * U(rng));
            for (int i = 0; i < d.n(); ++i) {
                const double sc = i < d.n1 ? avg1 : d.upper(i);
                y(i) = x(i) + eta * sc * (2 * U(rng) - 1);
            }
        } else {
            y = x;
            const double frac = 0.05 * U(rng);
            const int to = int(U(rng) * (d.n1 - 1));
            y.head(d.n1) *= 1 - frac;
            y(to) += frac * p.mass_1;
            for (int i = 0; i < d.n2; ++i) y(d.n1 + i) += 0.05 * d.upper(d.n1 + i) * (2 * U(rng) - 1);
        }
        d.project(y, nu);
        r.directional_min = std::min(r.directional_min, G.dot(nu - x));
        ++r.directions;
    }
    r.accepted = r.w1_equality <= r.tol && r.w1_lower <= r.tol && r.w2_upper <= r.tol && r.w2_lower <= r.tol &&
                 r.directional_min >= -r.tol;
    return r;
}

std::pair<double, double> convert_constants(const VectorMeasure& lambda, double gamma1, double gamma2) {
    const double L1 = log_moment(lambda.mu1), L2 = log_moment(lambda.mu2);
    const double C1 = L1 - 0.5 * L2, C2 = L2 - 0.5 * L1;
    return {gamma1 - C1, gamma2 - C2};
}

double l1_gap(const GridMeasure& mu, const std::function<double(double)>& density) {
    QuadTolerances t;
    t.abs_tol = 1e-10;
    t.rel_tol = 1e-8;
    t.max_level = 6;
    t.min_level = 2;
    double gap = 0;
    for (std::size_t i = 0; i < mu.size(); ++i) {
        double cell;
        try {
            cell = integrate_de<double>([&](const double& x) { return density(x); }, mu.left(i), mu.right(i), t).value;
        } catch (const ConvergenceError& e) {
            cell = e.last_estimate();
        }
        gap += std::abs(mu.masses()[i] - cell);
    }
    return gap;
}

json solution_header(const EquilibriumSolution& s) {
    auto intervals = [](const std::vector<Interval>& v) {
        json a = json::array();
        for (const auto& I : v) a.push_back(real_array({I.lo, I.hi}));
        return a;
    };
    json j;
    j["w1"] = to_decimal(s.w1);
    j["w2"] = to_decimal(s.w2);
    j["gamma1"] = to_decimal(s.gamma1);
    j["gamma2"] = to_decimal(s.gamma2);
    j["supports"] = {{"supp1", intervals(s.supp1)}, {"supp2", intervals(s.supp2)},
                     {"saturation", intervals(s.saturation)}};
    const ResidualReport& r = s.residuals;
    j["residuals"] = {{"w1_equality", to_decimal(r.w1_equality)},
                      {"w1_lower", to_decimal(r.w1_lower)},
                      {"w2_upper", to_decimal(r.w2_upper)},
                      {"w2_lower", to_decimal(r.w2_lower)},
                      {"directional_min", to_decimal(r.directional_min)},
                      {"directions", r.directions},
                      {"pointwise_w1_equality", to_decimal(r.pointwise_w1_equality)},
                      {"tol", to_decimal(r.tol)},
                      {"accepted", r.accepted}};
    j["iterations"] = s.iterations;
    j["functional_value"] = to_decimal(s.functional_value);
    j["kkt_residual"] = to_decimal(s.kkt_residual);
    j["diagnostics"] = {{"edge_mass_1", to_decimal(s.edge_mass_1)},
                        {"tail_mass_2", to_decimal(s.tail_mass_2)},
                        {"growth_margin", to_decimal(s.problem.growth_margin())},
                        {"route", s.modified_route ? "modified" : "plain"}};
    j["problem"] = problem_to_json(s.problem);
    return j;
}

}  // namespace nikeq
