#pragma once

#include "quadrica/numbers.hpp"

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace quadrica {

// Integral diagonal quadratic form <a_1,...,a_n>. Coefficients are nonzero.
struct DiagonalForm {
    std::vector<Int> coeffs;

    DiagonalForm() = default;
    explicit DiagonalForm(std::vector<Int> c);

    int rank() const { return static_cast<int>(coeffs.size()); }
    std::pair<int, int> signature() const; // (positives, negatives)
    Int coeff_product() const;
    DiagonalForm without_index(int i) const;

    bool operator==(const DiagonalForm&) const = default;
    std::string str() const; // "<-1,1,1,35,5>"
};

// A place of Q: an odd prime, the prime 2, or infinity.
struct Place {
    enum class Kind { OddPrime, Two, Infinity };
    Kind kind = Kind::Infinity;
    Int p; // set for finite places (2 for Kind::Two)

    static Place odd_prime(const Int& p); // verifies primality
    static Place two();
    static Place infinity();
    static Place finite(const Int& p); // dispatches on p == 2
    static Place parse(const std::string& s); // "2", "7", "inf"/"infinity"

    bool is_finite() const { return kind != Kind::Infinity; }
    bool operator==(const Place&) const;
    bool operator<(const Place&) const; // inf last, finite ascending
    std::string str() const;
};

// Hilbert symbol (a,b)_v in {-1,+1}; a, b nonzero.
int hilbert_symbol(const Int& a, const Int& b, const Place& v);

// Hasse invariant c_v(q) = prod_{i<j} (a_i, a_j)_v.
int hasse_invariant(const DiagonalForm& q, const Place& v);

// Signed squarefree class representative of prod a_i.
Int discriminant(const DiagonalForm& q);

std::pair<int, int> signature(const DiagonalForm& q);

// Places where invariants can be nontrivial: 2, odd p | prod a_i, infinity.
std::vector<Place> invariant_support(const DiagonalForm& q);

struct EquivalenceReport {
    bool equivalent = false;
    bool signatures_equal = false;
    bool discriminants_equal = false;
    bool hasse_equal = false;
    std::pair<int, int> signature_lhs, signature_rhs;
    Int discriminant_lhs, discriminant_rhs;
    // place -> (c_v(lhs), c_v(rhs)) over the union support set
    std::vector<std::pair<Place, std::pair<int, int>>> hasse_by_place;
};

// Exact rational equivalence via signature, discriminant class and Hasse
// invariants over the sufficient finite support set. Throws on rank mismatch.
EquivalenceReport rationally_equivalent(const DiagonalForm& q1, const DiagonalForm& q2);

// Local isotropy over Q_v, rank-stratified. Requires rank >= 2.
bool is_isotropic_local(const DiagonalForm& q, const Place& v);

struct IsotropyReport {
    bool isotropic = false;
    std::optional<std::vector<Int>> witness;  // primitive, q(witness) = 0
    std::optional<Place> obstruction;         // a locally anisotropic place
};

// Hasse-Minkowski local-global verdict; small-vector witness search for
// isotropic forms of rank <= 5 (bound per coordinate).
IsotropyReport is_isotropic_global(const DiagonalForm& q, const Int& witness_bound = 1000);

// First primitive integer zero in graded-lex scan order (shells by max-norm,
// within a shell lexicographic with coordinate order 0 < 1 < -1 < 2 < ...).
std::optional<std::vector<Int>> find_isotropic_vector(const DiagonalForm& q, const Int& bound);

// Reading of the side condition tying a to the prime factors of S. The
// product-formula machinery needs MinusAOverP; the other two readings are
// selectable for comparison.
enum class LegendreCondition { MinusAOverP, AOverP, POverA };

std::string legendre_condition_name(LegendreCondition c);
LegendreCondition parse_legendre_condition(const std::string& s);

struct MontesinosParams {
    Int S;
    Int a;
    std::vector<Int> factors; // prime factorization of S (ascending)
    int case_tag = 0;         // S mod 4 as +1 / -1
};

struct ConditionCheck {
    std::string name;
    bool ok = false;
    std::string detail;
};

struct MontesinosReport {
    MontesinosParams params;
    std::vector<ConditionCheck> conditions;
    bool valid = false;
    DiagonalForm form; // set when valid
    Int discriminant_raw;    // squarefree class of prod a_i (class of -S)
    Int discriminant_stated; // S, the other sign convention; both reported
};

// Validates every side condition; never throws on invalid input.
MontesinosReport validate_montesinos(const Int& S, const Int& a,
                                     LegendreCondition cond = LegendreCondition::MinusAOverP);

// As validate_montesinos, but throws a validation error naming the first
// failed condition.
MontesinosReport montesinos_form(const Int& S, const Int& a,
                                 LegendreCondition cond = LegendreCondition::MinusAOverP);

// Closed-form classification of c_v for the parametric family, keyed on
// (v; S mod 4; a mod 4). Matches the pairwise product for every valid pair.
int montesinos_hasse_closed_form(const Int& S, const Int& a, const Place& v);

struct ReplacementResult {
    Int a_prime;
    Int residue; // the scanned progression: a' = residue (mod modulus)
    Int modulus;
    long candidates_scanned = 0;
};

// Least prime a' = crt(a mod S, 3 mod 8) (mod 8S) by ascending scan.
// Preconditions: S = -1 mod 4, a = 7 mod 8, (S, a) valid.
ReplacementResult replacement_prime(const Int& S, const Int& a,
                                    LegendreCondition cond = LegendreCondition::MinusAOverP,
                                    long scan_cap = 10000000);

struct SubformSelection {
    DiagonalForm q;            // the form actually carrying f (q' when replaced)
    DiagonalForm f;            // isotropic signature-(3,1) subform
    std::vector<int> indices;  // where f sits inside q
    std::vector<Int> witness;  // q(witness)=0 within f's coordinates
    bool used_replacement = false;
    std::optional<Int> a_prime;
    std::optional<EquivalenceReport> equivalence; // q vs q' when replaced
    std::string case_name;
};

// Selects the isotropic signature-(3,1) diagonal subform of a parametric
// form, invoking replacement_prime in the a = 7 (mod 8) case.
SubformSelection select_isotropic_subform(const DiagonalForm& q,
                                          LegendreCondition cond = LegendreCondition::MinusAOverP,
                                          const Int& witness_bound = 1000,
                                          long scan_cap = 10000000);

// Recovers (S, a) from the shape <-1,1,1,aS,a> / <1,1,1,aS,-a>.
std::pair<Int, Int> montesinos_parameters_of(const DiagonalForm& q);

struct ChainStep {
    DiagonalForm form;
    int deleted_index_in_parent = -1;   // index removed from the previous form
    std::vector<int> indices_in_root;   // coordinates of this form inside q
    bool verified_isotropic = false;
    std::optional<std::vector<Int>> witness;
};

struct SubformChain {
    DiagonalForm root;
    std::vector<ChainStep> steps; // ranks n, n-1, ..., 4
    bool complete = false;        // rank-4 tail isotropic
    std::string failure;          // chain-tail message when incomplete
};

// Descending subform chain for signature (n,1), n >= 4: one positive
// coefficient deleted per step down to rank 4; rank >= 5 steps verified
// isotropic, the rank-4 tail chosen isotropic when any deletion allows it.
SubformChain subform_chain(const DiagonalForm& q, const Int& witness_bound = 1000);

} // namespace quadrica
