#include "nikeq/measures.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "nikeq/errors.hpp"

namespace nikeq {

// ---------------------------------------------------------------- GridMeasure

GridMeasure::GridMeasure(std::vector<double> nodes, std::vector<double> widths,
                         std::vector<double> masses, std::optional<Interval> window)
    : nodes_(std::move(nodes)), widths_(std::move(widths)), masses_(std::move(masses)) {
    if (nodes_.size() != widths_.size() || nodes_.size() != masses_.size())
        throw InputError("grid measure: nodes, cell_widths and masses differ in length");
    left_.resize(nodes_.size());
    right_.resize(nodes_.size());
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        left_[i] = nodes_[i] - widths_[i] / 2;
        right_[i] = nodes_[i] + widths_[i] / 2;
    }
    finish(window);
}

GridMeasure GridMeasure::from_edges(const std::vector<double>& edges, std::vector<double> masses,
                                    std::optional<Interval> window) {
    if (edges.size() != masses.size() + 1) throw InputError("grid measure: need one more edge than cells");
    GridMeasure g;
    const std::size_t n = masses.size();
    g.nodes_.resize(n);
    g.widths_.resize(n);
    g.left_.assign(edges.begin(), edges.end() - 1);
    g.right_.assign(edges.begin() + 1, edges.end());
    for (std::size_t i = 0; i < n; ++i) {
        g.nodes_[i] = 0.5 * (edges[i] + edges[i + 1]);
        g.widths_[i] = edges[i + 1] - edges[i];
    }
    g.masses_ = std::move(masses);
    g.finish(window);
    return g;
}

GridMeasure GridMeasure::uniform(double a, double b, int cells, double mass) {
    if (cells < 1 || !(a < b)) throw InputError("uniform grid measure: bad arguments");
    std::vector<double> edges(cells + 1);
    for (int i = 0; i <= cells; ++i) edges[i] = a + (b - a) * i / cells;
    edges.back() = b;
    std::vector<double> m(cells, mass / cells);
    return from_edges(edges, std::move(m));
}

void GridMeasure::finish(std::optional<Interval> window) {
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        if (!std::isfinite(nodes_[i]) || !(widths_[i] > 0) || !std::isfinite(widths_[i]))
            throw InputError("grid measure: cell " + std::to_string(i) + " has a non-positive width");
        if (!(masses_[i] >= 0) || !std::isfinite(masses_[i]))
            throw InputError("grid measure: negative or non-finite mass in cell " + std::to_string(i));
        if (i > 0) {
            if (!(nodes_[i] > nodes_[i - 1]))
                throw InputError("grid measure: nodes not strictly ascending at " + std::to_string(i));
            const double slack = 1e-12 * std::max({1.0, std::abs(left_[i]), std::abs(right_[i - 1])});
            if (left_[i] < right_[i - 1] - slack)
                throw InputError("grid measure: cells " + std::to_string(i - 1) + " and " + std::to_string(i) +
                                 " overlap");
        }
    }
    // Compensated sum keeps total_mass = Σ masses to 1e-14 relative.
    double s = 0, c = 0;
    for (double m : masses_) {
        double y = m - c, t = s + y;
        c = (t - s) - y;
        s = t;
    }
    total_ = s;
    if (window) {
        window_ = *window;
        if (!nodes_.empty() && (left_.front() < window_.lo - 1e-12 * std::max(1.0, std::abs(window_.lo)) ||
                                right_.back() > window_.hi + 1e-12 * std::max(1.0, std::abs(window_.hi))))
            throw InputError("grid measure: cells extend beyond the declared window");
    } else if (!nodes_.empty()) {
        window_ = {left_.front(), right_.back()};
    }
}

std::vector<double> GridMeasure::edges() const {
    std::vector<double> e;
    if (empty()) return e;
    e.push_back(left_[0]);
    for (std::size_t i = 0; i < size(); ++i) e.push_back(right_[i]);
    return e;
}

GridMeasure GridMeasure::with_masses(std::vector<double> masses) const {
    if (masses.size() != size()) throw InputError("with_masses: size mismatch");
    GridMeasure g = *this;
    g.masses_ = std::move(masses);
    g.finish(window_);
    return g;
}

double GridMeasure::cdf(double x) const {
    double acc = 0;
    for (std::size_t i = 0; i < size(); ++i) {
        if (x >= right_[i]) {
            acc += masses_[i];
        } else {
            if (x > left_[i]) acc += masses_[i] * (x - left_[i]) / widths_[i];
            break;
        }
    }
    return acc;
}

// ------------------------------------------------------------ DiscreteMeasure

DiscreteMeasure::DiscreteMeasure(std::vector<Atom> atoms, std::optional<double> exact_total)
    : atoms_(std::move(atoms)) {
    std::sort(atoms_.begin(), atoms_.end(), [](const Atom& a, const Atom& b) { return a.loc < b.loc; });
    for (std::size_t i = 0; i < atoms_.size(); ++i) {
        if (!std::isfinite(atoms_[i].loc) || !(atoms_[i].weight > 0) || !std::isfinite(atoms_[i].weight))
            throw InputError("discrete measure: atoms need finite locations and positive weights");
        if (i > 0 && atoms_[i].loc == atoms_[i - 1].loc)
            throw InputError("discrete measure: duplicate atom location " + std::to_string(atoms_[i].loc));
    }
    double s = 0;
    for (auto& a : atoms_) s += a.weight;
    total_ = s;
    if (exact_total) {
        if (std::abs(s - *exact_total) > 1e-12 * std::max(1.0, *exact_total))
            throw InputError("discrete measure: weights do not sum to the declared total");
        total_ = *exact_total;
    }
}

double DiscreteMeasure::cdf(double x, bool left_limit) const {
    double acc = 0;
    for (auto& a : atoms_) {
        if (left_limit ? a.loc < x : a.loc <= x) acc += a.weight;
        else break;
    }
    return acc;
}

// -------------------------------------------------------------------- kernels

namespace kernel {
namespace {
double F(double s) { return s == 0 ? 0.0 : s * std::log(std::abs(s)) - s; }
double G(double s) { return s == 0 ? 0.0 : 0.5 * s * s * std::log(std::abs(s)) - 0.75 * s * s; }

// E[u^{2k}] for u uniform on [-h/2, h/2]
double even_moment(double h, int k) { return std::pow(0.5 * h, 2 * k) / (2 * k + 1); }

std::complex<double> clog1p(std::complex<double> w) {
    if (std::abs(w) < 1e-3) {
        std::complex<double> acc = 0, p = w;
        for (int k = 1; k <= 8; ++k) {
            acc += (k % 2 ? 1.0 : -1.0) * p / double(k);
            p *= w;
        }
        return acc;
    }
    return std::log(1.0 + w);
}
}  // namespace

double cell_point(double a, double b, double x) {
    const double h = b - a, d = x - 0.5 * (a + b);
    if (d != 0 && h <= 0.6 * std::abs(d)) {
        const double r2 = (0.5 * h / d) * (0.5 * h / d);
        double acc = 0, p = 1;
        for (int k = 1; k <= 40; ++k) {
            p *= r2;
            const double t = p / ((2 * k + 1) * (2.0 * k));
            acc += t;
            if (t < 1e-18 * std::abs(acc) + 1e-300) break;
        }
        return -(std::log(std::abs(d)) - acc);
    }
    return -(F(x - a) - F(x - b)) / h;
}

double cell_cell(double a1, double b1, double a2, double b2) {
    const double h1 = b1 - a1, h2 = b2 - a2;
    const double d = 0.5 * (a1 + b1) - 0.5 * (a2 + b2);
    if (d != 0 && (h1 + h2) <= 0.6 * std::abs(d)) {
        double acc = 0;
        for (int k = 1; k <= 30; ++k) {
            double m = 0, binom = 1;  // C(2k, 2j)
            for (int j = 0; j <= k; ++j) {
                m += binom * even_moment(h1, j) * even_moment(h2, k - j);
                binom *= double(2 * k - 2 * j) * (2 * k - 2 * j - 1) / ((2 * j + 1) * (2.0 * j + 2));
            }
            const double t = m / (2 * k * std::pow(d, 2 * k));
            acc += t;
            if (t < 1e-18 * std::abs(acc) + 1e-300) break;
        }
        return -(std::log(std::abs(d)) - acc);
    }
    const double tot = G(b1 - a2) - G(a1 - a2) - G(b1 - b2) + G(a1 - b2);
    return -tot / (h1 * h2);
}

double cell_log_moment(double a, double b) {
    const double h = b - a, c = 0.5 * (a + b);
    if (h < 1e-2 * std::max(1.0, std::abs(c))) {
        // 4-point Gauss-Legendre; the integrand is smooth on such cells.
        static const double xg[2] = {0.3399810435848563, 0.8611363115940526};
        static const double wg[2] = {0.6521451548625461, 0.3478548451374538};
        double acc = 0;
        for (int i = 0; i < 2; ++i)
            for (int s : {-1, 1}) {
                const double y = c + s * 0.5 * h * xg[i];
                acc += wg[i] * std::log1p(y * y);
            }
        return 0.5 * acc;
    }
    auto L = [](double y) { return y * std::log1p(y * y) - 2 * y + 2 * std::atan(y); };
    return (L(b) - L(a)) / h;
}

std::complex<double> cell_cauchy(double a, double b, std::complex<double> z) {
    return clog1p((b - a) / (z - b)) / (b - a);
}
}  // namespace kernel

// ----------------------------------------------------------------- potentials

Eigen::MatrixXd interaction_matrix(const GridMeasure& a, const GridMeasure& b) {
    Eigen::MatrixXd K(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j)
            K(i, j) = kernel::cell_cell(a.left(i), a.right(i), b.left(j), b.right(j));
    return K;
}

Eigen::VectorXd cell_log_moments(const GridMeasure& mu) {
    Eigen::VectorXd l(mu.size());
    for (std::size_t i = 0; i < mu.size(); ++i) l(i) = kernel::cell_log_moment(mu.left(i), mu.right(i));
    return l;
}

double log_potential(const GridMeasure& mu, double x) {
    if (!std::isfinite(x)) throw InputError("log_potential: x must be finite");
    double acc = 0;
    for (std::size_t i = 0; i < mu.size(); ++i)
        if (mu.masses()[i] != 0) acc += mu.masses()[i] * kernel::cell_point(mu.left(i), mu.right(i), x);
    return acc;
}

double log_moment(const GridMeasure& mu) {
    double acc = 0;
    for (std::size_t i = 0; i < mu.size(); ++i)
        if (mu.masses()[i] != 0) acc += mu.masses()[i] * kernel::cell_log_moment(mu.left(i), mu.right(i));
    return acc;
}

double modified_potential(const GridMeasure& mu, double x) {
    return log_potential(mu, x) + 0.5 * log_moment(mu);
}

double energy(const GridMeasure& a, const GridMeasure& b) {
    double acc = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double mi = a.masses()[i];
        if (mi == 0) continue;
        double row = 0;
        for (std::size_t j = 0; j < b.size(); ++j) {
            const double mj = b.masses()[j];
            if (mj == 0) continue;
            row += mj * kernel::cell_cell(a.left(i), a.right(i), b.left(j), b.right(j));
        }
        acc += mi * row;
    }
    return acc;
}

EnergyReport energy_forms(const GridMeasure& mu1, const GridMeasure& mu2) {
    EnergyReport r;
    r.I_self_1 = energy(mu1, mu1);
    r.I_self_2 = energy(mu2, mu2);
    r.I_mutual = energy(mu1, mu2);
    r.log_moment_1 = log_moment(mu1);
    r.log_moment_2 = log_moment(mu2);
    const double m1 = mu1.total_mass(), m2 = mu2.total_mass();
    r.M_self_1 = r.I_self_1 + m1 * r.log_moment_1;
    r.M_self_2 = r.I_self_2 + m2 * r.log_moment_2;
    r.M_mutual = r.I_mutual + 0.5 * m2 * r.log_moment_1 + 0.5 * m1 * r.log_moment_2;
    return r;
}

// ------------------------------------------------------------ Cauchy transform

std::complex<double> cauchy_transform(const GridMeasure& mu, std::complex<double> z) {
    std::complex<double> acc = 0;
    for (std::size_t i = 0; i < mu.size(); ++i) {
        const double m = mu.masses()[i];
        if (m == 0) continue;
        if (z.imag() == 0 && z.real() >= mu.left(i) && z.real() <= mu.right(i)) {
            std::ostringstream os;
            os << "cauchy_transform: z = " << z.real() << " lies in the support";
            throw DomainError(os.str());
        }
        acc += m * kernel::cell_cauchy(mu.left(i), mu.right(i), z);
    }
    return acc;
}

std::complex<double> cauchy_transform(const DiscreteMeasure& mu, std::complex<double> z) {
    std::complex<double> acc = 0;
    for (auto& a : mu.atoms()) {
        if (z == std::complex<double>(a.loc, 0)) throw DomainError("cauchy_transform: z coincides with an atom");
        acc += a.weight / (z - a.loc);
    }
    return acc;
}

std::complex<double> cauchy_transform(const AnyMeasure& mu, std::complex<double> z) {
    return std::visit([&](const auto& m) { return cauchy_transform(m, z); }, mu);
}

DiscreteMeasure zero_counting(const std::vector<double>& roots, int degree) {
    if (degree <= 0) throw InputError("zero_counting: degree must be positive");
    if (static_cast<int>(roots.size()) != degree)
        throw InputError("zero_counting: expected " + std::to_string(degree) + " roots, got " +
                         std::to_string(roots.size()));
    std::vector<Atom> atoms;
    for (double r : roots) atoms.push_back({r, 1.0 / degree});
    return DiscreteMeasure(std::move(atoms), 1.0);
}

// ------------------------------------------------------------- CDF distance

namespace {
struct CdfView {
    const AnyMeasure& m;
    double at(double x, bool left) const {
        if (auto g = std::get_if<GridMeasure>(&m)) return g->cdf(x);
        return std::get<DiscreteMeasure>(m).cdf(x, left);
    }
    double total() const { return std::visit([](const auto& v) { return v.total_mass(); }, m); }
    void breakpoints(std::vector<double>& out) const {
        if (auto g = std::get_if<GridMeasure>(&m)) {
            for (std::size_t i = 0; i < g->size(); ++i) {
                out.push_back(g->left(i));
                out.push_back(g->right(i));
            }
        } else {
            for (auto& a : std::get<DiscreteMeasure>(m).atoms()) out.push_back(a.loc);
        }
    }
};
}  // namespace

double cdf_distance(const AnyMeasure& a, const AnyMeasure& b, std::optional<Interval> window) {
    CdfView A{a}, B{b};
    const double ma = A.total(), mb = B.total();
    if (std::abs(ma - mb) > 1e-8 * std::max({1.0, ma, mb}))
        throw InputError("cdf_distance: total masses differ (" + std::to_string(ma) + " vs " + std::to_string(mb) + ")");
    std::vector<double> xs;
    A.breakpoints(xs);
    B.breakpoints(xs);
    if (window) {
        xs.push_back(window->lo);
        xs.push_back(window->hi);
    }
    double best = 0;
    for (double x : xs) {
        if (window && !window->contains(x)) continue;
        best = std::max(best, std::abs(A.at(x, false) - B.at(x, false)));
        if (!window || x > window->lo) best = std::max(best, std::abs(A.at(x, true) - B.at(x, true)));
    }
    return best;
}

}  // namespace nikeq
