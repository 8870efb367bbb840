#include "quadrica/grouppres.hpp"
#include "quadrica/pipeline.hpp"
#include "quadrica/error.hpp"
#include "support/oracles.hpp"

#include <doctest.h>

using namespace quadrica;
using oracles::Rng;

namespace {

Word w_base(std::initializer_list<int> letters) {
    return make_word({BaseSyllable{std::vector<int>(letters)}});
}

Word random_word(Rng& rng, const GroupConfig& cfg, int max_syllables) {
    std::vector<Syllable> syl;
    int count = static_cast<int>(rng.pick(0, max_syllables));
    for (int i = 0; i < count; ++i) {
        if (rng.pick(0, 1) == 0) {
            BaseSyllable b;
            int len = static_cast<int>(rng.pick(0, 3));
            for (int j = 0; j < len; ++j) {
                int g = static_cast<int>(rng.pick(1, static_cast<long>(cfg.base_generators.size())));
                b.letters.push_back(rng.pick(0, 1) ? g : -g);
            }
            syl.push_back(b);
        } else {
            StableSyllable s;
            s.cusp = static_cast<int>(rng.pick(0, static_cast<long>(cfg.cusps.size()) - 1));
            s.power = Int(rng.pick(-3, 3));
            syl.push_back(s);
        }
    }
    return make_word(std::move(syl));
}

} // namespace

TEST_CASE("word structure") {
    GroupConfig cfg = make_toy_config(2);
    validate_config(cfg);

    // canonicalization: alternation, free cancellation, stable merging
    Word w = make_word({BaseSyllable{{1}}, BaseSyllable{{-1, 2}}, StableSyllable{0, 2},
                        StableSyllable{0, -2}, BaseSyllable{{-2}}});
    CHECK(w.syllables.empty()); // g (g^-1 h) t^2 t^-2 h^-1 = 1

    Word t3 = make_word({StableSyllable{0, 3}});
    CHECK(syllable_length(t3) == 3); // epsilon t^3 epsilon
    CHECK(base_syllable_count(t3) == 2);
    CHECK(syllable_length(w_base({1})) == 1);
    CHECK(syllable_length(Word{}) == 0);
    Word m1tm2 = make_word({BaseSyllable{{1}}, StableSyllable{0, 1}, BaseSyllable{{2}}});
    CHECK(syllable_length(m1tm2) == 3);

    // inverse and concatenation round-trip
    Rng rng(31);
    for (int t = 0; t < 40; ++t) {
        Word a = random_word(rng, cfg, 5);
        CHECK(word_concat(a, word_inverse(a)).syllables.size() <= a.syllables.size() + 1);
        CHECK(evaluate(word_concat(a, word_inverse(a)), cfg).is_identity());
    }
}

TEST_CASE("evaluate is a homomorphism") {
    GroupConfig cfg = make_toy_config(2);
    CHECK(evaluate(Word{}, cfg).is_identity());
    Word t2 = make_word({StableSyllable{1, 2}});
    CHECK(evaluate(t2, cfg) == matrix_power(cfg.stable_letters[1], 2));
    Rng rng(77);
    for (int t = 0; t < 30; ++t) {
        Word a = random_word(rng, cfg, 4), b = random_word(rng, cfg, 4);
        CHECK(evaluate(word_concat(a, b), cfg) == evaluate(a, cfg) * evaluate(b, cfg));
    }
}

TEST_CASE("britton reduction: pinned rewrites") {
    GroupConfig cfg = make_toy_config(2);
    // t_0 c t_0^-1 c^-1 for a cusp-0 generator c = A (letter 1)
    Word comm = make_word({StableSyllable{0, 1}, BaseSyllable{{1}}, StableSyllable{0, -1},
                           BaseSyllable{{-1}}});
    CHECK(britton_reduce(comm, cfg).syllables.empty());

    // t_0^2 c t_0^-2 -> c
    Word conj = make_word({StableSyllable{0, 2}, BaseSyllable{{1}}, StableSyllable{0, -2}});
    Word r = britton_reduce(conj, cfg);
    CHECK(r == w_base({1}));

    // m t_1^3 with m not in P_1 stays fixed
    Word fixed = make_word({BaseSyllable{{1}}, StableSyllable{1, 3}});
    CHECK(britton_reduce(fixed, cfg) == fixed);

    // mixed-cusp pattern is not reducible
    Word mixed = make_word({StableSyllable{0, 1}, BaseSyllable{{1}}, StableSyllable{1, -1}});
    CHECK(britton_reduce(mixed, cfg) == mixed);
}

TEST_CASE("britton reduction: idempotent and evaluation-preserving") {
    GroupConfig cfg = make_toy_config(2);
    Rng rng(2024);
    for (int t = 0; t < 300; ++t) {
        Word w = random_word(rng, cfg, 7);
        Word r = britton_reduce(w, cfg);
        CHECK(britton_reduce(r, cfg) == r);
        CHECK(evaluate(r, cfg) == evaluate(w, cfg));
        CHECK(syllable_length(r) <= syllable_length(w));
    }
}

TEST_CASE("identity criterion") {
    GroupConfig cfg = make_toy_config(2);
    CHECK(is_identity(Word{}, cfg).is_identity);
    CHECK_FALSE(is_identity(make_word({StableSyllable{0, 3}}), cfg).is_identity);
    IdentityVerdict v = is_identity(w_base({1}), cfg);
    CHECK_FALSE(v.is_identity);
    CHECK(v.reason == "l=1, m1!=1");
    CHECK(is_identity(w_base({1, -1}), cfg).is_identity);
    // commutator relation witnesses the HNN structure
    Word comm = make_word({StableSyllable{0, 1}, BaseSyllable{{2}}, StableSyllable{0, -1},
                           BaseSyllable{{-2}}});
    CHECK(is_identity(comm, cfg).is_identity);
}

TEST_CASE("enumeration matches the hand count at (3,1,1)") {
    GroupConfig cfg = make_toy_config(2);
    long seen = 0;
    long by_ell[4] = {0, 0, 0, 0};
    enumerate_reduced_words(cfg, SweepBounds{3, 1, 1}, [&](const Word& w, const QMatrix& m) {
        CHECK(britton_reduce(w, cfg) == w); // emitted words are reduced
        CHECK(evaluate(w, cfg) == m);       // matrices arrive correct
        by_ell[base_syllable_count(w)]++;
        ++seen;
        return true;
    });
    // hand count: empty word; 8 one-letter base words; for l = 2 the stable
    // syllable has 2 cusps x {+1,-1} and the single base letter sits in one of
    // the two base slots or nowhere: (1 + 8 + 8) * 4 = 68
    CHECK(by_ell[0] == 1);
    CHECK(by_ell[1] == 8);
    CHECK(by_ell[2] == 68);
    CHECK(seen == 77);
}

TEST_CASE("enumeration: reducedness constraint skips cusp interiors") {
    GroupConfig cfg = make_toy_config(2);
    // at (5,1,1) the l = 3 words with r_1 = r_2 must have an interior base
    // letter outside the flanked cusp subgroup
    long same_cusp = 0, violations = 0;
    enumerate_reduced_words(cfg, SweepBounds{5, 1, 1}, [&](const Word& w, const QMatrix&) {
        if (base_syllable_count(w) != 3) return true;
        const auto& s1 = std::get<StableSyllable>(w.syllables[1]);
        const auto& s2 = std::get<StableSyllable>(w.syllables[3]);
        if (s1.cusp != s2.cusp) return true;
        ++same_cusp;
        const auto& mid = std::get<BaseSyllable>(w.syllables[2]);
        QMatrix m = evaluate_base(mid, cfg);
        if (cusp_membership(m, cfg.cusps[s1.cusp], cfg.q)) ++violations;
        return true;
    });
    CHECK(same_cusp > 0);
    CHECK(violations == 0);
}

TEST_CASE("folded presentation") {
    GroupConfig cfg1 = make_toy_config(1);
    Presentation p1 = folded_presentation(cfg1);
    CHECK(p1.generators.size() == 3); // A, B, t0
    CHECK(p1.relations.size() == 2);  // [t0, A], [t0, B]

    GroupConfig cfg3 = make_toy_config(3);
    Presentation p3 = folded_presentation(cfg3);
    CHECK(p3.generators.size() == 9);
    CHECK(p3.relations.size() == 6);

    // relations evaluate to the identity
    for (const auto& rel : p3.relations) {
        std::vector<Syllable> syl;
        for (int l : rel) {
            int idx = std::abs(l);
            if (idx <= 6)
                syl.push_back(BaseSyllable{{l}});
            else
                syl.push_back(StableSyllable{idx - 7, Int(l > 0 ? 1 : -1)});
        }
        CHECK(evaluate(make_word(std::move(syl)), cfg3).is_identity());
    }
}

TEST_CASE("double presentation") {
    GroupConfig cfg1 = make_toy_config(1);
    Presentation d1 = double_presentation(cfg1);
    CHECK(d1.kind == Presentation::Kind::Double);
    CHECK(d1.generators.size() == 4);           // A, B, A', B'
    CHECK(d1.relations.size() == 2);            // c0 c0'^-1 only
    CHECK(d1.spanning_tree == "t0");

    GroupConfig cfg2 = make_toy_config(2);
    Presentation d2 = double_presentation(cfg2);
    CHECK(d2.generators.size() == 9);           // 4 + 4 + t1
    CHECK(d2.relations.size() == 4);            // sum of cusp generator counts

    GroupConfig cfg3 = make_toy_config(3);
    CHECK(double_presentation(cfg3).relations.size() == 6);
}

TEST_CASE("double-to-folded injection kills every relator") {
    for (int cusps = 1; cusps <= 3; ++cusps) {
        GroupConfig cfg = make_toy_config(cusps);
        for (const DMWord& rel : dm_relators(cfg)) {
            Word img = dm_to_fm(rel, cfg);
            CHECK(britton_reduce(img, cfg).syllables.empty());
            CHECK(evaluate(img, cfg).is_identity());
        }
    }
}

TEST_CASE("double-to-folded injection: first copy and multiplicativity") {
    GroupConfig cfg = make_toy_config(2);
    // first-copy generators map to themselves
    DMWord first{{BaseSyllable{{1}}}};
    CHECK(dm_to_fm(first, cfg) == w_base({1}));
    // second copy: conjugation by t0
    DMWord second{{BaseSyllable{{5}}}}; // A' (m = 4)
    Word img = dm_to_fm(second, cfg);
    Word expect = make_word({StableSyllable{0, -1}, BaseSyllable{{1}}, StableSyllable{0, 1}});
    CHECK(img == expect);

    // multiplicative up to reduction on random double words
    Rng rng(909);
    auto random_dm = [&](int syllables) {
        std::vector<Syllable> syl;
        for (int i = 0; i < syllables; ++i) {
            if (rng.pick(0, 1) == 0) {
                int g = static_cast<int>(rng.pick(1, 8));
                syl.push_back(BaseSyllable{{rng.pick(0, 1) ? g : -g}});
            } else {
                syl.push_back(StableSyllable{1, Int(rng.pick(-2, 2))});
            }
        }
        return DMWord{syl};
    };
    for (int t = 0; t < 40; ++t) {
        DMWord a = random_dm(static_cast<int>(rng.pick(0, 3)));
        DMWord b = random_dm(static_cast<int>(rng.pick(0, 3)));
        DMWord ab;
        ab.syllables = a.syllables;
        ab.syllables.insert(ab.syllables.end(), b.syllables.begin(), b.syllables.end());
        Word lhs = britton_reduce(dm_to_fm(ab, cfg), cfg);
        Word rhs = britton_reduce(word_concat(dm_to_fm(a, cfg), dm_to_fm(b, cfg)), cfg);
        CHECK(evaluate(lhs, cfg) == evaluate(rhs, cfg));
    }
}

TEST_CASE("config invariant violations surface") {
    GroupConfig cfg = make_toy_config(2);
    GroupConfig broken = cfg;
    broken.stable_letters[0] = broken.stable_letters[1]; // wrong fixed point
    CHECK_THROWS_AS(validate_config(broken), Error);
    GroupConfig broken2 = cfg;
    broken2.cusps[0].point[0] = 2; // not isotropic
    CHECK_THROWS_AS(validate_config(broken2), Error);
}
