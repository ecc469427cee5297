#include "nikeq/precision.hpp"

#include <cmath>
#include <cstdio>

#include "nikeq/errors.hpp"

namespace nikeq {

namespace {
unsigned digits_for_bits(int bits) {
    return static_cast<unsigned>(std::ceil(bits * 0.30102999566398120)) + 1;
}
}  // namespace

PrecisionContext PrecisionContext::for_bits(int bits, int guard_bits) {
    PrecisionContext c;
    c.mantissa_bits = bits;
    const int e = std::max(16, bits - guard_bits);
    c.abs_tol = std::ldexp(1.0, -std::min(e, 1000));
    c.rel_tol = c.abs_tol;
    return c;
}

void PrecisionContext::validate() const {
    if (mantissa_bits < 64) throw InputError("mantissa_bits must be >= 64");
    if (!(abs_tol > 0) || !(rel_tol > 0)) throw InputError("tolerances must be positive");
    // Below 2^{-bits} the tolerance cannot be met at this precision.
    const double floor = std::ldexp(1.0, -std::min(mantissa_bits, 1070));
    if (abs_tol < floor || rel_tol < floor)
        throw InputError("tolerance not representable at " + std::to_string(mantissa_bits) + " bits");
}

int PrecisionContext::digits10() const { return static_cast<int>(digits_for_bits(mantissa_bits)); }

PrecisionScope::PrecisionScope(int bits) : saved_(Real::default_precision()) {
    Real::default_precision(digits_for_bits(bits));
}

PrecisionScope::~PrecisionScope() { Real::default_precision(saved_); }

Real real_from_string(const std::string& s) {
    try {
        return Real(s);
    } catch (const std::exception&) {
        throw InputError("not a decimal number: '" + s + "'");
    }
}

std::string to_decimal(const Real& x, int digits) {
    return x.str(digits, std::ios_base::scientific);
}

std::string to_decimal(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

double pow2_neg(int bits) { return std::ldexp(1.0, -bits); }

Real real_pow2_neg(int bits) {
    Real r(1);
    return ldexp(r, -bits);
}

}  // namespace nikeq
