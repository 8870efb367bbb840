#pragma once

#include <gmpxx.h>

#include <utility>
#include <vector>

namespace quadrica {

using Int = mpz_class;
using Rat = mpq_class;

// Deterministic primality. Miller-Rabin with the 13-base set proven exact
// for n < 3317044064679887385961981; larger inputs are rejected rather than
// answered probabilistically.
bool is_prime(const Int& n);
bool is_odd_prime(const Int& n);

// Legendre symbol (a|p): 0 if p | a, +1 for nonzero residues, -1 otherwise.
// Throws invalid-place unless p is an odd prime.
int legendre_symbol(const Int& a, const Int& p);

// Unique n with n = r1 (mod m1), n = r2 (mod m2), 0 <= n < m1*m2.
// Throws invalid-input when gcd(m1, m2) != 1 or a modulus is < 1.
Int crt_pair(const Int& r1, const Int& m1, const Int& r2, const Int& m2);

// p-adic valuation; sets *unit to n / p^v when requested. n must be nonzero.
int valuation(const Int& n, const Int& p, Int* unit = nullptr);

// Factorization as (prime, exponent) pairs, primes ascending. |n| >= 1.
std::vector<std::pair<Int, int>> factorize(const Int& n);

// Signed squarefree part: the representative of n modulo nonzero squares.
Int squarefree_part(const Int& n);

// Distinct odd prime divisors of |n|, ascending (2 excluded).
std::vector<Int> odd_prime_divisors(const Int& n);

} // namespace quadrica
