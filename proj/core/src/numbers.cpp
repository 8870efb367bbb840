#include "quadrica/numbers.hpp"
#include "quadrica/error.hpp"

#include <algorithm>
#include <map>

namespace quadrica {

namespace {

// Largest bound for which the base set below is a proven deterministic test
// (Sorenson & Webster). Far beyond any desk-scale input here.
const Int kDeterministicBound("3317044064679887385961981");
const int kBases[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41};

bool miller_rabin_witness(const Int& n, const Int& base, const Int& d, unsigned long r) {
    Int a = base % n;
    if (a == 0) return false; // base divides n; no information against n
    Int x;
    mpz_powm(x.get_mpz_t(), a.get_mpz_t(), d.get_mpz_t(), n.get_mpz_t());
    if (x == 1 || x == n - 1) return false;
    for (unsigned long i = 0; i + 1 < r; ++i) {
        mpz_powm_ui(x.get_mpz_t(), x.get_mpz_t(), 2, n.get_mpz_t());
        if (x == n - 1) return false;
    }
    return true; // composite witness found
}

Int pollard_rho(const Int& n) {
    // Brent's cycle variant; n must be odd composite, not a prime power issue
    // is handled by the caller's recursion.
    if (n % 2 == 0) return 2;
    gmp_randclass rng(gmp_randinit_mt);
    rng.seed(0xB5297A4DUL);
    while (true) {
        Int y = rng.get_z_range(n - 3) + 2;
        Int c = rng.get_z_range(n - 2) + 1;
        Int m = 128, g = 1, r = 1, q = 1, x, ys;
        while (g == 1) {
            x = y;
            for (Int i = 0; i < r; ++i) y = (y * y + c) % n;
            Int k = 0;
            while (k < r && g == 1) {
                ys = y;
                Int lim = std::min(m, Int(r - k));
                for (Int i = 0; i < lim; ++i) {
                    y = (y * y + c) % n;
                    q = q * ((x > y) ? x - y : y - x) % n;
                }
                mpz_gcd(g.get_mpz_t(), q.get_mpz_t(), n.get_mpz_t());
                k += m;
            }
            r *= 2;
        }
        if (g == n) {
            g = 1;
            while (g == 1) {
                ys = (ys * ys + c) % n;
                Int d = (x > ys) ? x - ys : ys - x;
                mpz_gcd(g.get_mpz_t(), d.get_mpz_t(), n.get_mpz_t());
            }
        }
        if (g != n) return g;
    }
}

void factor_rec(const Int& n, std::map<Int, int>& out) {
    if (n == 1) return;
    if (is_prime(n)) {
        out[n] += 1;
        return;
    }
    Int d = pollard_rho(n);
    factor_rec(d, out);
    factor_rec(n / d, out);
}

} // namespace

bool is_prime(const Int& n) {
    if (n < 2) return false;
    for (int b : kBases) {
        if (n == b) return true;
        if (n % b == 0) return false;
    }
    if (n >= kDeterministicBound)
        throw invalid_input("primality certification not supported beyond 3.317e24: " + n.get_str());
    Int d = n - 1;
    unsigned long r = mpz_scan1(d.get_mpz_t(), 0);
    mpz_tdiv_q_2exp(d.get_mpz_t(), d.get_mpz_t(), r);
    for (int b : kBases)
        if (miller_rabin_witness(n, b, d, r)) return false;
    return true;
}

bool is_odd_prime(const Int& n) { return n != 2 && is_prime(n); }

int legendre_symbol(const Int& a, const Int& p) {
    if (!is_odd_prime(p))
        throw invalid_place("legendre symbol needs an odd prime modulus, got " + p.get_str());
    return mpz_legendre(a.get_mpz_t(), p.get_mpz_t());
}

Int crt_pair(const Int& r1, const Int& m1, const Int& r2, const Int& m2) {
    if (m1 < 1 || m2 < 1) throw invalid_input("crt moduli must be positive");
    Int g, s, t;
    mpz_gcdext(g.get_mpz_t(), s.get_mpz_t(), t.get_mpz_t(), m1.get_mpz_t(), m2.get_mpz_t());
    if (g != 1)
        throw invalid_input("crt moduli not coprime: gcd(" + m1.get_str() + "," + m2.get_str() +
                            ") = " + g.get_str());
    Int m = m1 * m2;
    // n = r1 + m1 * s * (r2 - r1) mod m, with s the inverse of m1 mod m2.
    Int n = (r1 + m1 * (s * (r2 - r1) % m2)) % m;
    if (n < 0) n += m;
    return n;
}

int valuation(const Int& n, const Int& p, Int* unit) {
    if (n == 0) throw invalid_input("valuation of zero");
    Int u;
    unsigned long v = mpz_remove(u.get_mpz_t(), n.get_mpz_t(), p.get_mpz_t());
    if (unit) *unit = u;
    return static_cast<int>(v);
}

std::vector<std::pair<Int, int>> factorize(const Int& n) {
    if (n == 0) throw invalid_input("factorize(0)");
    Int m = abs(n);
    std::map<Int, int> acc;
    for (int p : {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47}) {
        while (m % p == 0) {
            acc[p] += 1;
            m /= p;
        }
    }
    // trial division up to 10^4 keeps Pollard's rho for the rare large factor
    for (Int p = 53; p * p <= m && p < 10000; p += 2) {
        while (m % p == 0) {
            acc[p] += 1;
            m /= p;
        }
    }
    if (m > 1) factor_rec(m, acc);
    return {acc.begin(), acc.end()};
}

Int squarefree_part(const Int& n) {
    if (n == 0) throw invalid_input("squarefree part of zero");
    Int r = (n < 0) ? -1 : 1;
    for (const auto& [p, e] : factorize(n))
        if (e % 2) r *= p;
    return r;
}

std::vector<Int> odd_prime_divisors(const Int& n) {
    std::vector<Int> out;
    for (const auto& [p, e] : factorize(n))
        if (p != 2) out.push_back(p);
    return out;
}

} // namespace quadrica
