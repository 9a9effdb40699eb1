#pragma once

#include <bit>
#include <cstdint>

#include <mpfr.h>

namespace slfv::oracle {

// e^{-v} + v − 1 at 256 bits, rounded once to double.
inline double g_mpfr(double v) {
    mpfr_t x, e;
    mpfr_init2(x, 256);
    mpfr_init2(e, 256);
    mpfr_set_d(x, -v, MPFR_RNDN);
    mpfr_exp(e, x, MPFR_RNDN);
    mpfr_sub(e, e, x, MPFR_RNDN);
    mpfr_sub_ui(e, e, 1, MPFR_RNDN);
    const double out = mpfr_get_d(e, MPFR_RNDN);
    mpfr_clear(x);
    mpfr_clear(e);
    return out;
}

inline std::int64_t ulp_distance(double a, double b) {
    const auto ia = std::bit_cast<std::int64_t>(a);
    const auto ib = std::bit_cast<std::int64_t>(b);
    return ia > ib ? ia - ib : ib - ia;
}

} // namespace slfv::oracle
