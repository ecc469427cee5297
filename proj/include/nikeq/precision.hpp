#pragma once
#include <boost/multiprecision/mpfr.hpp>
#include <string>

namespace nikeq {

using Real = boost::multiprecision::number<boost::multiprecision::mpfr_float_backend<0>,
                                          boost::multiprecision::et_off>;

struct PrecisionContext {
    int mantissa_bits = 256;
    double abs_tol = 1e-60;
    double rel_tol = 1e-60;

    // Tolerances scaled to the precision: 2^{-(bits - guard)}.
    static PrecisionContext for_bits(int bits, int guard_bits = 24);
    void validate() const;
    int digits10() const;
};

// Boost 1.74 keeps the default mpfr precision in a process-wide variable, so
// the scope is global: every Real created while it is alive gets `bits`.
// Concurrent jobs must agree on the precision.
class PrecisionScope {
public:
    explicit PrecisionScope(int bits);
    explicit PrecisionScope(const PrecisionContext& ctx) : PrecisionScope(ctx.mantissa_bits) {}
    ~PrecisionScope();
    PrecisionScope(const PrecisionScope&) = delete;
    PrecisionScope& operator=(const PrecisionScope&) = delete;
private:
    unsigned saved_;
};

Real real_from_string(const std::string& s);
std::string to_decimal(const Real& x, int digits = 0);  // 0: all significant digits
std::string to_decimal(double x);                       // round-trip %.17g

// 2^{-bits} as a double (may underflow to 0 for very large bits).
double pow2_neg(int bits);
Real real_pow2_neg(int bits);

}  // namespace nikeq
