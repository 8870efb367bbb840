#include "quadrica/qforms.hpp"
#include "quadrica/error.hpp"

#include <algorithm>
#include <sstream>

namespace quadrica {

namespace {

// epsilon(u) = (u-1)/2 mod 2 for odd u
int eps2(const Int& u) {
    Int m = u % 4;
    if (m < 0) m += 4;
    return m == 1 ? 0 : 1;
}

// omega(u) = (u^2-1)/8 mod 2 for odd u
int omega2(const Int& u) {
    Int m = u % 8;
    if (m < 0) m += 8;
    return (m == 1 || m == 7) ? 0 : 1;
}

bool is_square_local(const Int& x, const Place& v) {
    if (x == 0) throw invalid_input("square class of zero");
    if (v.kind == Place::Kind::Infinity) return x > 0;
    Int u;
    int val = valuation(x, v.p, &u);
    if (val % 2) return false;
    if (v.kind == Place::Kind::Two) {
        Int m = u % 8;
        if (m < 0) m += 8;
        return m == 1;
    }
    return mpz_legendre(u.get_mpz_t(), v.p.get_mpz_t()) == 1;
}

} // namespace

DiagonalForm::DiagonalForm(std::vector<Int> c) : coeffs(std::move(c)) {
    for (const Int& a : coeffs)
        if (a == 0) throw invalid_input("diagonal form coefficients must be nonzero");
}

std::pair<int, int> DiagonalForm::signature() const {
    int pos = 0, neg = 0;
    for (const Int& a : coeffs)
        (a > 0 ? pos : neg)++;
    return {pos, neg};
}

Int DiagonalForm::coeff_product() const {
    Int p = 1;
    for (const Int& a : coeffs) p *= a;
    return p;
}

DiagonalForm DiagonalForm::without_index(int i) const {
    if (i < 0 || i >= rank()) throw invalid_input("without_index out of range");
    std::vector<Int> c;
    c.reserve(coeffs.size() - 1);
    for (int j = 0; j < rank(); ++j)
        if (j != i) c.push_back(coeffs[j]);
    return DiagonalForm(std::move(c));
}

std::string DiagonalForm::str() const {
    std::ostringstream os;
    os << "<";
    for (size_t i = 0; i < coeffs.size(); ++i) {
        if (i) os << ",";
        os << coeffs[i].get_str();
    }
    os << ">";
    return os.str();
}

Place Place::odd_prime(const Int& p) {
    if (!is_odd_prime(p)) throw invalid_place("not an odd prime: " + p.get_str());
    return Place{Kind::OddPrime, p};
}

Place Place::two() { return Place{Kind::Two, 2}; }
Place Place::infinity() { return Place{Kind::Infinity, 0}; }

Place Place::finite(const Int& p) {
    if (p == 2) return two();
    return odd_prime(p);
}

Place Place::parse(const std::string& s) {
    if (s == "inf" || s == "infinity" || s == "oo") return infinity();
    return finite(Int(s));
}

bool Place::operator==(const Place& o) const {
    if (kind != o.kind) return false;
    return kind == Kind::Infinity || p == o.p;
}

bool Place::operator<(const Place& o) const {
    if (kind == Kind::Infinity) return false;
    if (o.kind == Kind::Infinity) return true;
    return p < o.p;
}

std::string Place::str() const {
    return kind == Kind::Infinity ? "inf" : p.get_str();
}

int hilbert_symbol(const Int& a, const Int& b, const Place& v) {
    if (a == 0 || b == 0) throw invalid_input("hilbert symbol of zero");
    if (v.kind == Place::Kind::Infinity)
        return (a < 0 && b < 0) ? -1 : 1;
    Int u, w;
    int alpha = valuation(a, v.p, &u);
    int beta = valuation(b, v.p, &w);
    if (v.kind == Place::Kind::Two) {
        int e = eps2(u) * eps2(w) + alpha * omega2(w) + beta * omega2(u);
        return (e % 2) ? -1 : 1;
    }
    int s = ((alpha * beta * eps2(v.p)) % 2) ? -1 : 1;
    if (beta % 2) s *= mpz_legendre(u.get_mpz_t(), v.p.get_mpz_t());
    if (alpha % 2) s *= mpz_legendre(w.get_mpz_t(), v.p.get_mpz_t());
    return s;
}

int hasse_invariant(const DiagonalForm& q, const Place& v) {
    int c = 1;
    const int n = q.rank();
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            c *= hilbert_symbol(q.coeffs[i], q.coeffs[j], v);
    return c;
}

Int discriminant(const DiagonalForm& q) { return squarefree_part(q.coeff_product()); }

std::pair<int, int> signature(const DiagonalForm& q) { return q.signature(); }

std::vector<Place> invariant_support(const DiagonalForm& q) {
    std::vector<Place> out;
    out.push_back(Place::two());
    for (const Int& p : odd_prime_divisors(q.coeff_product()))
        out.push_back(Place::odd_prime(p));
    out.push_back(Place::infinity());
    return out;
}

EquivalenceReport rationally_equivalent(const DiagonalForm& q1, const DiagonalForm& q2) {
    if (q1.rank() != q2.rank())
        throw dimension_error("rank mismatch: " + std::to_string(q1.rank()) + " vs " +
                              std::to_string(q2.rank()));
    EquivalenceReport r;
    r.signature_lhs = q1.signature();
    r.signature_rhs = q2.signature();
    r.signatures_equal = r.signature_lhs == r.signature_rhs;
    r.discriminant_lhs = discriminant(q1);
    r.discriminant_rhs = discriminant(q2);
    r.discriminants_equal = r.discriminant_lhs == r.discriminant_rhs;

    std::vector<Place> support = invariant_support(q1);
    for (const Place& v : invariant_support(q2))
        if (std::find(support.begin(), support.end(), v) == support.end())
            support.push_back(v);
    std::sort(support.begin(), support.end());

    r.hasse_equal = true;
    for (const Place& v : support) {
        int c1 = hasse_invariant(q1, v);
        int c2 = hasse_invariant(q2, v);
        r.hasse_by_place.push_back({v, {c1, c2}});
        if (c1 != c2) r.hasse_equal = false;
    }
    r.equivalent = r.signatures_equal && r.discriminants_equal && r.hasse_equal;
    return r;
}

bool is_isotropic_local(const DiagonalForm& q, const Place& v) {
    const int n = q.rank();
    if (n < 2) throw rank_error("local isotropy needs rank >= 2");
    auto [pos, neg] = q.signature();
    if (v.kind == Place::Kind::Infinity) return pos > 0 && neg > 0;
    const auto& a = q.coeffs;
    switch (n) {
    case 2:
        return is_square_local(-a[0] * a[1], v);
    case 3:
        return hilbert_symbol(-a[0] * a[2], -a[1] * a[2], v) == 1;
    case 4: {
        // anisotropic exactly when the discriminant class is trivial and the
        // Hasse invariant matches the quaternionic value -(-1,-1)_v
        Int d = a[0] * a[1] * a[2] * a[3];
        if (!is_square_local(d, v)) return true;
        int c = hasse_invariant(q, v);
        int quat = -hilbert_symbol(-1, -1, v);
        return c != quat;
    }
    default:
        return true; // rank >= 5 over a p-adic field
    }
}

std::optional<std::vector<Int>> find_isotropic_vector(const DiagonalForm& q, const Int& bound) {
    if (bound < 1) throw invalid_input("witness bound must be >= 1");
    const int n = q.rank();
    auto [pos, neg] = q.signature();
    if (pos == 0 || neg == 0) return std::nullopt; // definite
    if (bound > 100000000) throw invalid_input("witness bound too large");
    const long B = bound.get_si();

    // per-coordinate value order within shell m: 1, -1, 2, -2, ..., m, -m, 0
    auto nth_value = [](long k, long shell) -> long {
        if (k == 2 * shell) return 0;
        return (k % 2 == 0) ? k / 2 + 1 : -(k / 2 + 1);
    };

    std::vector<Int> x(n);
    // Enumerate prefixes of the first n-1 coordinates shell by shell in the
    // order above and solve for the last coordinate exactly.
    std::optional<std::vector<Int>> found;
    for (long shell = 1; shell <= B && !found; ++shell) {
        std::vector<long> idx(n - 1, 0);
        while (true) {
            long maxPrefix = 0;
            Int partial = 0;
            for (int i = 0; i < n - 1; ++i) {
                long vi = nth_value(idx[i], shell);
                maxPrefix = std::max(maxPrefix, std::labs(vi));
                x[i] = vi;
                partial += q.coeffs[i] * vi * vi;
            }
            {
                // need a_n * t^2 = -partial with |t| <= shell
                Int rhs = -partial;
                bool emitted = false;
                if (rhs == 0) {
                    x[n - 1] = 0;
                    if (maxPrefix == shell) emitted = true; // keeps the norm in this shell
                } else if (rhs % q.coeffs[n - 1] == 0) {
                    Int t2 = rhs / q.coeffs[n - 1];
                    if (t2 > 0 && mpz_perfect_square_p(t2.get_mpz_t())) {
                        Int t;
                        mpz_sqrt(t.get_mpz_t(), t2.get_mpz_t());
                        if (t <= shell && std::max(maxPrefix, t.get_si()) == shell) {
                            x[n - 1] = t; // +t precedes -t in value order
                            emitted = true;
                        }
                    }
                }
                if (emitted) {
                    Int g = 0;
                    for (const Int& c : x) mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), c.get_mpz_t());
                    if (g == 1) {
                        found = x;
                        break;
                    }
                }
            }
            // advance odometer (lex over the per-coordinate value order)
            int i = n - 2;
            for (; i >= 0; --i) {
                if (idx[i] + 1 <= 2 * shell) {
                    idx[i]++;
                    break;
                }
                idx[i] = 0;
            }
            if (i < 0) break;
        }
    }
    return found;
}

IsotropyReport is_isotropic_global(const DiagonalForm& q, const Int& witness_bound) {
    const int n = q.rank();
    if (n < 2) throw rank_error("global isotropy needs rank >= 2");
    IsotropyReport rep;
    if (n == 2) {
        rep.isotropic = squarefree_part(-q.coeffs[0] * q.coeffs[1]) == 1;
        if (rep.isotropic) {
            rep.witness = find_isotropic_vector(q, witness_bound);
        } else {
            // pick a concrete obstructing place
            for (const Place& v : invariant_support(q)) {
                if (!is_isotropic_local(q, v)) {
                    rep.obstruction = v;
                    break;
                }
            }
            if (!rep.obstruction) {
                // obstruction lies outside the support set: find the least odd
                // prime where -a0*a1 is a non-residue
                Int m = -q.coeffs[0] * q.coeffs[1];
                for (Int p = 3;; p += 2) {
                    if (!is_prime(p)) continue;
                    if (m % p != 0 && mpz_legendre(m.get_mpz_t(), p.get_mpz_t()) == -1) {
                        rep.obstruction = Place::odd_prime(p);
                        break;
                    }
                }
            }
        }
        return rep;
    }
    for (const Place& v : invariant_support(q)) {
        if (!is_isotropic_local(q, v)) {
            rep.isotropic = false;
            rep.obstruction = v;
            return rep;
        }
    }
    rep.isotropic = true;
    if (n <= 5) rep.witness = find_isotropic_vector(q, witness_bound);
    return rep;
}

std::string legendre_condition_name(LegendreCondition c) {
    switch (c) {
    case LegendreCondition::MinusAOverP: return "minus-a-over-p";
    case LegendreCondition::AOverP: return "a-over-p";
    case LegendreCondition::POverA: return "p-over-a";
    }
    return "?";
}

LegendreCondition parse_legendre_condition(const std::string& s) {
    if (s == "minus-a-over-p") return LegendreCondition::MinusAOverP;
    if (s == "a-over-p") return LegendreCondition::AOverP;
    if (s == "p-over-a") return LegendreCondition::POverA;
    throw invalid_input("unknown legendre condition: " + s);
}

namespace {

bool legendre_condition_holds(const Int& a, const Int& p, LegendreCondition cond) {
    switch (cond) {
    case LegendreCondition::MinusAOverP: return legendre_symbol(-a, p) == -1;
    case LegendreCondition::AOverP: return legendre_symbol(a, p) == -1;
    case LegendreCondition::POverA: return legendre_symbol(p, a) == -1;
    }
    return false;
}

} // namespace

MontesinosReport validate_montesinos(const Int& S, const Int& a, LegendreCondition cond) {
    MontesinosReport rep;
    rep.params.S = S;
    rep.params.a = a;

    auto check = [&rep](const std::string& name, bool ok, const std::string& detail) {
        rep.conditions.push_back({name, ok, detail});
        return ok;
    };

    bool shape_ok = check("S-positive-odd", S >= 3 && S % 2 == 1, "S = " + S.get_str());
    if (shape_ok) {
        bool sqfree = true;
        for (const auto& [p, e] : factorize(S)) {
            rep.params.factors.push_back(p);
            if (e != 1) sqfree = false;
        }
        shape_ok = check("S-squarefree", sqfree, "S = " + S.get_str());
    } else {
        check("S-squarefree", false, "skipped");
    }
    {
        Int m = S % 4;
        rep.params.case_tag = (m == 1) ? 1 : -1;
    }
    bool a_ok = check("a-odd-prime", a >= 3 && a % 2 == 1 && is_prime(a), "a = " + a.get_str());
    check("a-coprime-S", shape_ok && a_ok && S % a != 0, "");

    bool leg_ok = shape_ok && a_ok;
    std::string leg_detail;
    if (leg_ok) {
        for (const Int& p : rep.params.factors) {
            if (!legendre_condition_holds(a, p, cond)) {
                leg_ok = false;
                leg_detail = "fails at p = " + p.get_str();
                break;
            }
        }
    } else {
        leg_ok = false;
        leg_detail = "skipped";
    }
    check("legendre-condition(" + legendre_condition_name(cond) + ")", leg_ok, leg_detail);

    bool cong_ok = false;
    if (shape_ok && a_ok) {
        int n = static_cast<int>(rep.params.factors.size());
        Int am = a % 4;
        int need = (rep.params.case_tag == 1) ? ((n % 2 == 0) ? 1 : 3) : ((n % 2 == 0) ? 3 : 1);
        cong_ok = (am == need);
        check("a-congruence-mod-4", cong_ok,
              "n = " + std::to_string(n) + ", need a = " + std::to_string(need) + " (mod 4)");
    } else {
        check("a-congruence-mod-4", false, "skipped");
    }

    rep.valid = true;
    for (const auto& c : rep.conditions) rep.valid = rep.valid && c.ok;
    if (rep.valid) {
        if (rep.params.case_tag == 1)
            rep.form = DiagonalForm({-1, 1, 1, a * S, a});
        else
            rep.form = DiagonalForm({1, 1, 1, a * S, -a});
        rep.discriminant_raw = discriminant(rep.form);
        rep.discriminant_stated = S;
    }
    return rep;
}

MontesinosReport montesinos_form(const Int& S, const Int& a, LegendreCondition cond) {
    MontesinosReport rep = validate_montesinos(S, a, cond);
    if (!rep.valid) {
        for (const auto& c : rep.conditions)
            if (!c.ok)
                throw validation_error("condition failed: " + c.name +
                                       (c.detail.empty() ? "" : " (" + c.detail + ")"));
    }
    return rep;
}

int montesinos_hasse_closed_form(const Int& S, const Int& a, const Place& v) {
    if (v.kind == Place::Kind::Infinity) return 1;
    bool s1 = (S % 4 == 1);
    bool a1 = (a % 4 == 1);
    if (v.kind == Place::Kind::Two) {
        if (s1) return a1 ? 1 : -1;
        return a1 ? -1 : 1;
    }
    if (v.p == a) return 1;
    if (S % v.p == 0) return -1;
    return 1;
}

ReplacementResult replacement_prime(const Int& S, const Int& a, LegendreCondition cond,
                                    long scan_cap) {
    if (S % 4 != 3) throw validation_error("replacement needs S = -1 (mod 4), got S = " + S.get_str());
    if (a % 8 != 7) throw validation_error("replacement needs a = 7 (mod 8), got a = " + a.get_str());
    MontesinosReport rep = validate_montesinos(S, a, cond);
    if (!rep.valid)
        throw validation_error("replacement needs a valid (S, a) pair");

    ReplacementResult out;
    out.modulus = 8 * S;
    out.residue = crt_pair(a % S, S, 3, 8);
    Int cand = out.residue;
    if (cand < 2) cand += out.modulus;
    for (long i = 0; i < scan_cap; ++i) {
        out.candidates_scanned = i + 1;
        if (is_prime(cand)) {
            out.a_prime = cand;
            // posted conditions, re-verified rather than assumed
            if (cand % 8 != 3) throw invariant_error("replacement prime not 3 mod 8");
            for (const Int& p : rep.params.factors)
                if (!legendre_condition_holds(cand, p, cond))
                    throw invariant_error("replacement prime loses the residue condition at p = " +
                                          p.get_str());
            return out;
        }
        cand += out.modulus;
    }
    throw search_exhausted("no prime found in " + std::to_string(scan_cap) +
                           " candidates of the progression " + out.residue.get_str() + " mod " +
                           out.modulus.get_str());
}

std::pair<Int, Int> montesinos_parameters_of(const DiagonalForm& q) {
    if (q.rank() != 5) throw validation_error("parametric form must have rank 5");
    const auto& c = q.coeffs;
    if (c[0] == -1 && c[1] == 1 && c[2] == 1 && c[4] >= 3) {
        Int a = c[4];
        if (c[3] % a == 0) {
            Int S = c[3] / a;
            if (S % 4 == 1) return {S, a};
        }
    }
    if (c[0] == 1 && c[1] == 1 && c[2] == 1 && c[4] <= -3) {
        Int a = -c[4];
        if (c[3] % a == 0) {
            Int S = c[3] / a;
            if (S % 4 == 3) return {S, a};
        }
    }
    throw validation_error("form does not have the parametric shape: " + q.str());
}

SubformSelection select_isotropic_subform(const DiagonalForm& q, LegendreCondition cond,
                                          const Int& witness_bound, long scan_cap) {
    auto [S, a] = montesinos_parameters_of(q);
    MontesinosReport rep = montesinos_form(S, a, cond);
    if (!(rep.form == q))
        throw validation_error("form does not match its recovered parameters");

    SubformSelection sel;
    sel.indices = {0, 1, 2, 4};
    if (S % 4 == 1) {
        sel.q = q;
        sel.f = DiagonalForm({-1, 1, 1, a});
        sel.witness = {1, 1, 0, 0};
        sel.case_name = "S=1mod4";
    } else if (a % 8 != 7) {
        sel.q = q;
        sel.f = DiagonalForm({1, 1, 1, -a});
        Int b = witness_bound;
        Int s;
        mpz_sqrt(s.get_mpz_t(), a.get_mpz_t());
        if (s + 1 > b) b = s + 1;
        auto w = find_isotropic_vector(sel.f, b);
        if (!w) throw invariant_error("three-square witness not found for a = " + a.get_str());
        sel.witness = *w;
        sel.case_name = "S=-1mod4,a!=7mod8";
    } else {
        ReplacementResult r = replacement_prime(S, a, cond, scan_cap);
        sel.used_replacement = true;
        sel.a_prime = r.a_prime;
        MontesinosReport rep2 = montesinos_form(S, r.a_prime, cond);
        sel.q = rep2.form;
        sel.f = DiagonalForm({1, 1, 1, -r.a_prime});
        Int b = witness_bound;
        Int s;
        mpz_sqrt(s.get_mpz_t(), r.a_prime.get_mpz_t());
        if (s + 1 > b) b = s + 1;
        auto w = find_isotropic_vector(sel.f, b);
        if (!w) throw invariant_error("three-square witness not found for a' = " + r.a_prime.get_str());
        sel.witness = *w;
        sel.equivalence = rationally_equivalent(q, sel.q);
        if (!sel.equivalence->equivalent)
            throw invariant_error("replacement produced an inequivalent form");
        sel.case_name = "S=-1mod4,a=7mod8,replaced";
    }
    // the witness zeroes the subform exactly
    Int val = 0;
    for (size_t i = 0; i < sel.witness.size(); ++i)
        val += sel.f.coeffs[i] * sel.witness[i] * sel.witness[i];
    if (val != 0) throw invariant_error("subform witness is not a zero");
    return sel;
}

SubformChain subform_chain(const DiagonalForm& q, const Int& witness_bound) {
    auto [pos, neg] = q.signature();
    if (neg != 1 || pos < 4)
        throw precondition_error("chain needs signature (n,1) with n >= 4, got (" +
                                 std::to_string(pos) + "," + std::to_string(neg) + ")");
    SubformChain chain;
    chain.root = q;
    DiagonalForm cur = q;
    std::vector<int> root_indices(q.rank());
    for (int i = 0; i < q.rank(); ++i) root_indices[i] = i;

    while (cur.rank() > 5) {
        // delete the lowest-index positive coefficient
        int del = -1;
        for (int i = 0; i < cur.rank(); ++i)
            if (cur.coeffs[i] > 0) { del = i; break; }
        ChainStep step;
        step.deleted_index_in_parent = del;
        step.form = cur.without_index(del);
        std::vector<int> idx;
        for (int i = 0; i < cur.rank(); ++i)
            if (i != del) idx.push_back(root_indices[i]);
        root_indices = idx;
        step.indices_in_root = idx;
        IsotropyReport iso = is_isotropic_global(step.form, witness_bound);
        step.verified_isotropic = iso.isotropic;
        step.witness = iso.witness;
        if (!iso.isotropic)
            throw invariant_error("indefinite rank >= 5 subform reported anisotropic at " +
                                  (iso.obstruction ? iso.obstruction->str() : std::string("?")));
        chain.steps.push_back(std::move(step));
        cur = chain.steps.back().form;
    }

    // rank-5 -> rank-4 tail: scan positive-coefficient deletions in index order
    bool tail_found = false;
    for (int i = 0; i < cur.rank() && !tail_found; ++i) {
        if (cur.coeffs[i] <= 0) continue;
        DiagonalForm cand = cur.without_index(i);
        IsotropyReport iso = is_isotropic_global(cand, witness_bound);
        if (iso.isotropic) {
            ChainStep step;
            step.deleted_index_in_parent = i;
            step.form = cand;
            std::vector<int> idx;
            for (int j = 0; j < cur.rank(); ++j)
                if (j != i) idx.push_back(root_indices[j]);
            step.indices_in_root = idx;
            step.verified_isotropic = true;
            step.witness = iso.witness;
            chain.steps.push_back(std::move(step));
            tail_found = true;
        }
    }
    chain.complete = tail_found;
    if (!tail_found)
        chain.failure = "no isotropic rank-4 subform among positive-coefficient deletions of " +
                        cur.str();
    return chain;
}

} // namespace quadrica
