#pragma once
#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include "nikeq/errors.hpp"

namespace nikeq {

// Coefficients lowest degree first.  The zero polynomial is represented by
// an empty coefficient list and has degree -1.
template <class T>
class Polynomial {
public:
    Polynomial() = default;
    explicit Polynomial(std::vector<T> c) : c_(std::move(c)) { trim(); }

    static Polynomial from_roots(const std::vector<T>& roots) {
        std::vector<T> c{T(1)};
        for (const T& r : roots) {
            std::vector<T> next(c.size() + 1, T(0));
            for (std::size_t i = 0; i < c.size(); ++i) {
                next[i + 1] += c[i];
                next[i] -= r * c[i];
            }
            c = std::move(next);
        }
        return Polynomial(std::move(c));
    }

    int degree() const { return static_cast<int>(c_.size()) - 1; }
    bool is_zero() const { return c_.empty(); }
    const std::vector<T>& coefficients() const { return c_; }
    const T& operator[](std::size_t i) const { return c_[i]; }
    const T& leading() const { return c_.back(); }

    template <class U>
    U operator()(const U& x) const {
        U acc(0);
        for (std::size_t i = c_.size(); i-- > 0;) acc = acc * x + U(c_[i]);
        return acc;
    }

    Polynomial derivative() const {
        if (c_.size() <= 1) return {};
        std::vector<T> d(c_.size() - 1);
        for (std::size_t i = 1; i < c_.size(); ++i) d[i - 1] = c_[i] * T(static_cast<long>(i));
        return Polynomial(std::move(d));
    }

    Polynomial monic() const {
        if (is_zero()) throw InputError("monic(): zero polynomial");
        std::vector<T> c = c_;
        T lead = c.back();
        for (auto& x : c) x /= lead;
        c.back() = T(1);
        return Polynomial(std::move(c));
    }

    // p(s·x) / s^deg, monic preserved.
    Polynomial rescaled(const T& s) const {
        std::vector<T> c = c_;
        const int n = degree();
        T f(1);
        for (int i = n; i-- > 0;) {
            f /= s;
            c[i] *= f;
        }
        return Polynomial(std::move(c));
    }

    friend Polynomial operator+(const Polynomial& a, const Polynomial& b) {
        std::vector<T> c(std::max(a.c_.size(), b.c_.size()), T(0));
        for (std::size_t i = 0; i < a.c_.size(); ++i) c[i] += a.c_[i];
        for (std::size_t i = 0; i < b.c_.size(); ++i) c[i] += b.c_[i];
        return Polynomial(std::move(c));
    }
    friend Polynomial operator-(const Polynomial& a, const Polynomial& b) {
        std::vector<T> c(std::max(a.c_.size(), b.c_.size()), T(0));
        for (std::size_t i = 0; i < a.c_.size(); ++i) c[i] += a.c_[i];
        for (std::size_t i = 0; i < b.c_.size(); ++i) c[i] -= b.c_[i];
        return Polynomial(std::move(c));
    }
    friend Polynomial operator*(const Polynomial& a, const Polynomial& b) {
        if (a.is_zero() || b.is_zero()) return {};
        std::vector<T> c(a.c_.size() + b.c_.size() - 1, T(0));
        for (std::size_t i = 0; i < a.c_.size(); ++i)
            for (std::size_t j = 0; j < b.c_.size(); ++j) c[i + j] += a.c_[i] * b.c_[j];
        return Polynomial(std::move(c));
    }
    Polynomial scaled(const T& s) const {
        std::vector<T> c = c_;
        for (auto& x : c) x *= s;
        return Polynomial(std::move(c));
    }

    // Plain long division.
    static std::pair<Polynomial, Polynomial> divmod(const Polynomial& a, const Polynomial& b) {
        if (b.is_zero()) throw InputError("polynomial division by zero");
        if (a.degree() < b.degree()) return {Polynomial(), a};
        std::vector<T> r = a.c_;
        std::vector<T> q(a.c_.size() - b.c_.size() + 1, T(0));
        const int db = b.degree();
        for (int k = a.degree() - db; k >= 0; --k) {
            T f = r[k + db] / b.leading();
            q[k] = f;
            for (int j = 0; j <= db; ++j) r[k + j] -= f * b.c_[j];
            r[k + db] = T(0);
        }
        r.resize(db);
        return {Polynomial(std::move(q)), Polynomial(std::move(r))};
    }

private:
    void trim() {
        while (!c_.empty() && c_.back() == T(0)) c_.pop_back();
    }
    std::vector<T> c_;
};

}  // namespace nikeq
