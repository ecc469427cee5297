#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "nikeq/nikishin_mop.hpp"

namespace nikeq {

namespace {

std::string interval_str(Interval I) {
    std::ostringstream o;
    o << "[" << I.lo << ", " << I.hi << "]";
    return o.str();
}

// ξ_{k,n} = t_k/d_n for all k with ξ ≥ lo (ascending in k, so descending in value).
std::vector<double> scaled_atoms(const NikishinSystem& sys, int n, double lo, std::vector<double>* betas = nullptr) {
    const double d = sys.scaling(n);
    std::vector<double> xi;
    for (long k = 0;; ++k) {
        MassPoint a = sys.sigma2_atom(k);
        double x = static_cast<double>(a.t) / d;
        if (x < lo) break;
        xi.push_back(x);
        if (betas) betas->push_back(static_cast<double>(a.beta));
    }
    return xi;
}

// sup |(1/n)#{ξ ∈ [a, x]} − σ([a, x])| over x ∈ [a, b]; attained at atoms
// (both one-sided limits) or at b.
double atom_cdf_gap(const std::vector<double>& xi_desc, int n, Interval K,
                    const std::function<double(double, double)>& mass) {
    std::vector<double> xs;
    for (double x : xi_desc)
        if (x >= K.lo && x <= K.hi) xs.push_back(x);
    std::sort(xs.begin(), xs.end());
    double gap = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        double s = mass(K.lo, xs[i]);
        gap = std::max(gap, std::abs(double(i) / n - s));
        gap = std::max(gap, std::abs(double(i + 1) / n - s));
    }
    gap = std::max(gap, std::abs(double(xs.size()) / n - mass(K.lo, K.hi)));
    return gap;
}

}  // namespace

json AssumptionReport::to_json() const {
    json a = json::array();
    for (const auto& r : records) {
        json j;
        j["condition"] = r.condition;
        j["measured"] = r.measured;
        j["domain"] = r.domain;
        j["n"] = r.n;
        j["value"] = r.value;
        if (std::isfinite(r.bound)) j["bound"] = r.bound;
        else j["bound"] = nullptr;
        j["margin"] = std::isfinite(r.margin) ? json(r.margin) : json(nullptr);
        j["pass"] = r.pass;
        a.push_back(j);
    }
    return a;
}

AssumptionReport check_assumptions(const NikishinSystem& sys, const std::vector<int>& n_list, Interval plus_compact,
                                   Interval minus_compact) {
    sys.validate();
    if (!sys.scaling) throw InputError("assumptions: system has no scaling d_n");
    if (!(minus_compact.lo < minus_compact.hi) || !(minus_compact.hi < 0))
        throw InputError("assumptions: minus compact must be [a, b] with a < b < 0");
    if (!(plus_compact.lo > 0) || !(plus_compact.lo < plus_compact.hi))
        throw InputError("assumptions: plus compact must be [a, b] with 0 < a < b");
    for (int n : n_list)
        if (n < 1) throw InputError("assumptions: n must be >= 1");
    PrecisionScope scope(128);
    AssumptionReport rep;
    const double inf = std::numeric_limits<double>::infinity();
    const std::string mdom = interval_str(minus_compact), pdom = interval_str(plus_compact);
    double prev3 = inf, prev4 = inf, prev5 = inf;

    for (int n : n_list) {
        std::vector<double> beta;
        std::vector<double> xi = scaled_atoms(sys, n, minus_compact.lo, &beta);
        // One atom beyond the compact closes the last spacing.
        const double d = sys.scaling(n);
        const double xi_next = static_cast<double>(sys.sigma2_atom(static_cast<long>(xi.size())).t) / d;

        if (sys.rho) {
            double worst = inf;
            for (std::size_t k = 0; k < xi.size(); ++k) {
                if (xi[k] > minus_compact.hi) continue;
                double next = k + 1 < xi.size() ? xi[k + 1] : xi_next;
                worst = std::min(worst, std::abs(next - xi[k]) * n / sys.rho(xi[k]));
            }
            rep.records.push_back({"(i)", "min_k |xi_{k+1,n} - xi_{k,n}| n / rho(xi_{k,n})", mdom, n, worst, 1.0,
                                   worst - 1, worst > 1});
        }
        if (sys.A && sys.B) {
            // The count is a step function of x: check at every atom and at the compact ends.
            double worst = 0;
            std::vector<double> probe{minus_compact.lo, minus_compact.hi};
            for (double x : xi)
                if (x >= minus_compact.lo && x <= minus_compact.hi) probe.push_back(x);
            for (double x : probe) {
                long cnt = std::count_if(xi.begin(), xi.end(), [&](double v) { return v >= x; });
                worst = std::max(worst, cnt / (sys.A(x) * sys.B(n)));
            }
            rep.records.push_back({"(ii)", "max_x #{k: xi_{k,n} in [x,0]} / (A(x) B(n))", mdom, n, worst, 1.0,
                                   1 - worst, worst <= 1});
        }
        {
            double inf_beta = inf;
            for (double b : beta) inf_beta = std::min(inf_beta, b);
            double v = std::abs(std::pow(inf_beta, 1.0 / n) - 1);
            rep.records.push_back({"(iii)", "|(inf beta_k over xi_{k,n} in [a,0])^{1/n} - 1|, a = " +
                                                std::to_string(minus_compact.lo),
                                   mdom, n, v, prev3, prev3 - v, v < prev3});
            prev3 = v;
        }
        if (sys.sigma_mass) {
            double v = atom_cdf_gap(xi, n, minus_compact, sys.sigma_mass);
            rep.records.push_back({"(iv)", "sup_x |(1/n)#{xi_{k,n} in [a,x]} - sigma([a,x])|", mdom, n, v, prev4,
                                   prev4 - v, v < prev4});
            prev4 = v;
        }
        if (sys.phi) {
            double worst = 0;
            const int M = 200;
            for (int i = 0; i <= M; ++i) {
                double x = plus_compact.lo + plus_compact.length() * i / M;
                Real l = log(sys.sigma1_density(Real(d) * Real(x)));
                worst = std::max(worst, std::abs(static_cast<double>(l) / n + sys.phi(x)));
            }
            rep.records.push_back({"(v)", "sup_x |(1/n) log sigma1'(d_n x) + phi(x)|", pdom, n, worst, prev5,
                                   prev5 - worst, worst < prev5});
            prev5 = worst;
        }
    }
    if (sys.phi) {
        // φ(x) − 4 log x must grow without bound: sample it at increasing x.
        std::vector<double> xs{1e2, 1e4, 1e6, 1e8};
        double prev = -inf;
        bool increasing = true;
        for (double x : xs) {
            double v = sys.phi(x) - 4 * std::log(x);
            increasing = increasing && v > prev;
            prev = v;
        }
        rep.records.push_back({"cond1", "phi(x) - 4 log x at x = 1e8 (increasing over 1e2..1e8)",
                               "x in {1e2, 1e4, 1e6, 1e8}", 0, prev, 0, prev, increasing && prev > 0});
    }
    return rep;
}

}  // namespace nikeq
