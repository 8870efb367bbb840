#include "quadrica/numbers.hpp"
#include "quadrica/error.hpp"

#include <doctest.h>

using namespace quadrica;

TEST_CASE("deterministic primality") {
    CHECK(is_prime(2));
    CHECK(is_prime(3));
    CHECK(is_prime(97));
    CHECK(is_prime(Int("67")));
    CHECK(is_prime(Int("2251")));
    CHECK_FALSE(is_prime(1));
    CHECK_FALSE(is_prime(0));
    CHECK_FALSE(is_prime(-7));
    CHECK_FALSE(is_prime(Int("3215031751"))); // strong pseudoprime to bases 2,3,5,7
    CHECK(is_prime(Int("2305843009213693951"))); // 2^61 - 1
    CHECK_FALSE(is_prime(Int("2305843009213693953")));
    // beyond the certified range (odd, coprime to the base set)
    CHECK_THROWS_AS(is_prime(Int("10000000000000000000000007")), Error);
}

TEST_CASE("legendre symbol basics") {
    CHECK(legendre_symbol(1, 7) == 1);
    CHECK(legendre_symbol(4, 7) == 1);
    CHECK(legendre_symbol(2, 5) == -1); // squares mod 5 are {1,4}
    CHECK(legendre_symbol(10, 5) == 0);
    CHECK_THROWS_AS(legendre_symbol(3, 8), Error);
    CHECK_THROWS_AS(legendre_symbol(3, 2), Error);
    CHECK_THROWS_AS(legendre_symbol(3, 15), Error);

    // multiplicativity over a few values
    for (long a = -6; a <= 6; ++a)
        for (long b = -6; b <= 6; ++b) {
            if (a == 0 || b == 0) continue;
            CHECK(legendre_symbol(Int(a) * Int(b), 11) ==
                  legendre_symbol(a, 11) * legendre_symbol(b, 11));
        }

    // quadratic reciprocity over small odd prime pairs
    auto eps = [](long p) { return (p - 1) / 2 % 2; };
    long primes[] = {3, 5, 7, 11, 13, 17, 19, 23};
    for (long p : primes)
        for (long r : primes) {
            if (p == r) continue;
            int lhs = legendre_symbol(p, r) * legendre_symbol(r, p);
            int rhs = (eps(p) * eps(r)) % 2 ? -1 : 1;
            CHECK(lhs == rhs);
        }
}

TEST_CASE("crt_pair") {
    CHECK(crt_pair(7, 33, 3, 8) == 139);
    CHECK(crt_pair(1, 3, 1, 8) == 1);
    CHECK(crt_pair(0, 5, 0, 7) == 0);
    CHECK_THROWS_AS(crt_pair(1, 6, 1, 8), Error);
    // uniqueness contract on a few random pairs
    for (long r1 = 0; r1 < 5; ++r1)
        for (long r2 = 0; r2 < 7; ++r2) {
            Int n = crt_pair(r1, 5, r2, 7);
            CHECK(n >= 0);
            CHECK(n < 35);
            CHECK(n % 5 == r1);
            CHECK(n % 7 == r2);
        }
}

TEST_CASE("factorization and squarefree part") {
    auto f = factorize(Int(360));
    REQUIRE(f.size() == 3);
    CHECK(f[0] == std::pair<Int, int>{2, 3});
    CHECK(f[1] == std::pair<Int, int>{3, 2});
    CHECK(f[2] == std::pair<Int, int>{5, 1});
    CHECK(squarefree_part(16) == 1);
    CHECK(squarefree_part(-16) == -1);
    CHECK(squarefree_part(Int(-735)) == -15); // -3*5*7^2
    CHECK(squarefree_part(1) == 1);
    // a larger semiprime exercises the rho path
    CHECK(squarefree_part(Int("1000003") * Int("1000033") * 4) == Int("1000003") * Int("1000033"));
    CHECK(valuation(Int(48), 2) == 4);
    Int unit;
    CHECK(valuation(Int(-48), 2, &unit) == 4);
    CHECK(unit == -3);
}
