#pragma once
#include <complex>
#include <optional>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace nikeq {

struct Interval {
    double lo = 0, hi = 0;
    double length() const { return hi - lo; }
    bool contains(double x) const { return x >= lo && x <= hi; }
};

// Piecewise-uniform measure: mass m_i spread evenly over cell i.
class GridMeasure {
public:
    GridMeasure() = default;
    GridMeasure(std::vector<double> nodes, std::vector<double> widths, std::vector<double> masses,
                std::optional<Interval> window = std::nullopt);
    static GridMeasure from_edges(const std::vector<double>& edges, std::vector<double> masses,
                                  std::optional<Interval> window = std::nullopt);
    static GridMeasure uniform(double a, double b, int cells, double mass);

    std::size_t size() const { return nodes_.size(); }
    bool empty() const { return nodes_.empty(); }
    const std::vector<double>& nodes() const { return nodes_; }
    const std::vector<double>& widths() const { return widths_; }
    const std::vector<double>& masses() const { return masses_; }
    double left(std::size_t i) const { return left_[i]; }
    double right(std::size_t i) const { return right_[i]; }
    std::vector<double> edges() const;  // requires contiguous cells
    double density(std::size_t i) const { return masses_[i] / widths_[i]; }
    double total_mass() const { return total_; }
    const Interval& window() const { return window_; }

    GridMeasure with_masses(std::vector<double> masses) const;
    double cdf(double x) const;  // μ((-∞, x])

private:
    void finish(std::optional<Interval> window);
    std::vector<double> nodes_, widths_, masses_, left_, right_;
    double total_ = 0;
    Interval window_;
};

struct Atom {
    double loc;
    double weight;
};

class DiscreteMeasure {
public:
    DiscreteMeasure() = default;
    // `exact_total` pins the stored total (e.g. 1 for zero-counting measures)
    // after checking it against the summed weights.
    explicit DiscreteMeasure(std::vector<Atom> atoms, std::optional<double> exact_total = std::nullopt);
    const std::vector<Atom>& atoms() const { return atoms_; }
    double total_mass() const { return total_; }
    double cdf(double x, bool left_limit = false) const;

private:
    std::vector<Atom> atoms_;
    double total_ = 0;
};

using AnyMeasure = std::variant<GridMeasure, DiscreteMeasure>;

struct EnergyReport {
    double I_self_1 = 0, I_self_2 = 0, I_mutual = 0;
    double M_self_1 = 0, M_self_2 = 0, M_mutual = 0;
    double log_moment_1 = 0, log_moment_2 = 0;
};

// Cell kernels.  All averages are over uniform densities.
namespace kernel {
// (1/h) ∫_a^b log(1/|x-y|) dy
double cell_point(double a, double b, double x);
// (1/(h1 h2)) ∫∫ log(1/|x-y|) over [a1,b1]×[a2,b2]
double cell_cell(double a1, double b1, double a2, double b2);
// (1/h) ∫_a^b log(1+y²) dy
double cell_log_moment(double a, double b);
// (1/h) ∫_a^b dy/(z-y)
std::complex<double> cell_cauchy(double a, double b, std::complex<double> z);
}  // namespace kernel

// K_ij = cell_cell(cell i of a, cell j of b)
Eigen::MatrixXd interaction_matrix(const GridMeasure& a, const GridMeasure& b);
Eigen::VectorXd cell_log_moments(const GridMeasure& mu);

double log_potential(const GridMeasure& mu, double x);
double modified_potential(const GridMeasure& mu, double x);
double log_moment(const GridMeasure& mu);
double energy(const GridMeasure& a, const GridMeasure& b);  // I(a, b)
EnergyReport energy_forms(const GridMeasure& mu1, const GridMeasure& mu2);

std::complex<double> cauchy_transform(const GridMeasure& mu, std::complex<double> z);
std::complex<double> cauchy_transform(const DiscreteMeasure& mu, std::complex<double> z);
std::complex<double> cauchy_transform(const AnyMeasure& mu, std::complex<double> z);

DiscreteMeasure zero_counting(const std::vector<double>& roots, int degree);

// Kolmogorov distance sup_x |F_a(x) - F_b(x)|; with a window the supremum is
// taken over x in the window only (CDFs are not renormalized).
double cdf_distance(const AnyMeasure& a, const AnyMeasure& b,
                    std::optional<Interval> window = std::nullopt);

}  // namespace nikeq
