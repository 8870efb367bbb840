#pragma once

#include "quadrica/numbers.hpp"

#include <mpfr.h>

#include <string>

namespace quadrica {

// High-precision floating value with explicit precision; all operations
// round to nearest. Binary operations widen to the larger operand precision.
class Real {
public:
    explicit Real(mpfr_prec_t prec = 256) { mpfr_init2(v_, prec); mpfr_set_zero(v_, 1); }
    Real(const Real& o) { mpfr_init2(v_, mpfr_get_prec(o.v_)); mpfr_set(v_, o.v_, MPFR_RNDN); }
    Real(Real&& o) noexcept { mpfr_init2(v_, mpfr_get_prec(o.v_)); mpfr_swap(v_, o.v_); }
    Real& operator=(const Real& o) {
        if (this != &o) {
            mpfr_set_prec(v_, mpfr_get_prec(o.v_));
            mpfr_set(v_, o.v_, MPFR_RNDN);
        }
        return *this;
    }
    Real& operator=(Real&& o) noexcept {
        if (this != &o) mpfr_swap(v_, o.v_);
        return *this;
    }
    ~Real() { mpfr_clear(v_); }

    static Real of(double x, mpfr_prec_t prec) {
        Real r(prec);
        mpfr_set_d(r.v_, x, MPFR_RNDN);
        return r;
    }
    static Real of(const Int& x, mpfr_prec_t prec) {
        Real r(prec);
        mpfr_set_z(r.v_, x.get_mpz_t(), MPFR_RNDN);
        return r;
    }
    static Real of(const Rat& x, mpfr_prec_t prec) {
        Real r(prec);
        mpfr_set_q(r.v_, x.get_mpq_t(), MPFR_RNDN);
        return r;
    }
    static Real pos_infinity(mpfr_prec_t prec) {
        Real r(prec);
        mpfr_set_inf(r.v_, 1);
        return r;
    }
    static Real pi(mpfr_prec_t prec) {
        Real r(prec);
        mpfr_const_pi(r.v_, MPFR_RNDN);
        return r;
    }

    mpfr_prec_t prec() const { return mpfr_get_prec(v_); }
    bool is_inf() const { return mpfr_inf_p(v_) != 0; }
    bool is_nan() const { return mpfr_nan_p(v_) != 0; }
    int sign() const { return mpfr_sgn(v_); }
    double to_double() const { return mpfr_get_d(v_, MPFR_RNDN); }

    // deterministic decimal rendering with the given significant digits
    std::string str(int digits = 40) const;

    friend Real operator+(const Real& a, const Real& b) { return bin(a, b, mpfr_add); }
    friend Real operator-(const Real& a, const Real& b) { return bin(a, b, mpfr_sub); }
    friend Real operator*(const Real& a, const Real& b) { return bin(a, b, mpfr_mul); }
    friend Real operator/(const Real& a, const Real& b) { return bin(a, b, mpfr_div); }
    Real operator-() const {
        Real r(prec());
        mpfr_neg(r.v_, v_, MPFR_RNDN);
        return r;
    }

    friend bool operator<(const Real& a, const Real& b) { return mpfr_cmp(a.v_, b.v_) < 0; }
    friend bool operator>(const Real& a, const Real& b) { return mpfr_cmp(a.v_, b.v_) > 0; }
    friend bool operator<=(const Real& a, const Real& b) { return mpfr_cmp(a.v_, b.v_) <= 0; }
    friend bool operator>=(const Real& a, const Real& b) { return mpfr_cmp(a.v_, b.v_) >= 0; }
    friend bool operator==(const Real& a, const Real& b) { return mpfr_equal_p(a.v_, b.v_) != 0; }

    friend Real abs(const Real& a) { return un(a, mpfr_abs); }
    friend Real sqrt(const Real& a) { return un(a, mpfr_sqrt); }
    friend Real log(const Real& a) { return un(a, mpfr_log); }
    friend Real exp(const Real& a) { return un(a, mpfr_exp); }
    friend Real cosh(const Real& a) { return un(a, mpfr_cosh); }
    friend Real sinh(const Real& a) { return un(a, mpfr_sinh); }
    friend Real acosh(const Real& a) { return un(a, mpfr_acosh); }
    friend Real asinh(const Real& a) { return un(a, mpfr_asinh); }
    friend Real acos(const Real& a) { return un(a, mpfr_acos); }

    const mpfr_t& raw() const { return v_; }

private:
    using BinOp = int (*)(mpfr_ptr, mpfr_srcptr, mpfr_srcptr, mpfr_rnd_t);
    using UnOp = int (*)(mpfr_ptr, mpfr_srcptr, mpfr_rnd_t);
    static Real bin(const Real& a, const Real& b, BinOp op) {
        Real r(std::max(a.prec(), b.prec()));
        op(r.v_, a.v_, b.v_, MPFR_RNDN);
        return r;
    }
    static Real un(const Real& a, UnOp op) {
        Real r(a.prec());
        op(r.v_, a.v_, MPFR_RNDN);
        return r;
    }
    mpfr_t v_;
};

} // namespace quadrica
