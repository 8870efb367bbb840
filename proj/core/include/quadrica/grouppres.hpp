#pragma once

#include "quadrica/lattice.hpp"

#include <functional>
#include <string>
#include <variant>
#include <vector>

namespace quadrica {

// Base syllable: a freely-reduced string of signed generator letters.
// Letter encoding: +k means generator k-1, -k its inverse (k >= 1).
struct BaseSyllable {
    std::vector<int> letters;
    bool operator==(const BaseSyllable&) const = default;
};

struct StableSyllable {
    int cusp = 0;
    Int power; // nonzero
    bool operator==(const StableSyllable&) const = default;
};

using Syllable = std::variant<BaseSyllable, StableSyllable>;

// Alternating word m_1 t_{r_1}^{k_1} m_2 ... m_l. Structurally: odd-length
// syllable list starting and ending with a base syllable (possibly empty),
// or the empty list for the identity.
struct Word {
    std::vector<Syllable> syllables;
    bool operator==(const Word&) const = default;
};

// Normalizes an arbitrary syllable list into the structural form: merges
// adjacent base syllables (with free cancellation), merges adjacent stable
// syllables of equal cusp, drops zero powers and the all-empty word.
Word make_word(std::vector<Syllable> syllables);

Word word_inverse(const Word& w);
Word word_concat(const Word& a, const Word& b);

// 2l-1 for l base syllables; 0 for the empty word.
int syllable_length(const Word& w);
int base_syllable_count(const Word& w); // l

struct SweepBounds {
    int L = 5; // max syllable length (odd), 0 = empty word only
    int E = 3; // max |stable exponent|
    int B = 3; // max total base letters per word
};

struct GroupConfig {
    DiagonalForm q;
    std::vector<int> subform_indices;          // coordinates spanning H_G
    std::vector<std::string> generator_names;  // parallel to base_generators
    std::vector<QMatrix> base_generators;
    std::vector<CuspData> cusps;
    std::vector<QMatrix> stable_letters;       // one per cusp
    double D = 6.0;
    long precision_bits = 256;
    SweepBounds sweep;
    std::string name;
};

// Checks every config invariant; throws invariant-error with the violation.
void validate_config(const GroupConfig& cfg);

QMatrix evaluate_base(const BaseSyllable& m, const GroupConfig& cfg);

// Exact product of generator images in syllable order.
QMatrix evaluate(const Word& w, const GroupConfig& cfg);

// Britton reduction: repeatedly rewrites t_r^k c t_r^{k'} with c in P_r to
// t_r^{k+k'} c, restarting after each rewrite. Idempotent and
// evaluation-preserving.
Word britton_reduce(const Word& w, const GroupConfig& cfg);

struct IdentityVerdict {
    bool is_identity = false;
    std::string reason;
};

// Normal-form criterion cross-checked against the exact matrix image; a
// disagreement throws faithfulness-violation carrying the word.
IdentityVerdict is_identity(const Word& w, const GroupConfig& cfg);

std::string word_str(const Word& w, const GroupConfig& cfg);

// Deterministic graded-lex enumeration of Britton-reduced words within
// (L, E, B); visit receives each word and its exact matrix image and returns
// false to stop early. Returns the number of words visited.
long enumerate_reduced_words(const GroupConfig& cfg, const SweepBounds& bounds,
                             const std::function<bool(const Word&, const QMatrix&)>& visit);

// Presentations over a named alphabet; relation words use the same signed
// 1-based letter encoding into `generators`.
struct Presentation {
    enum class Kind { Double, Folded };
    Kind kind = Kind::Folded;
    std::vector<std::string> generators;
    std::vector<std::vector<int>> relations;
    std::string spanning_tree;
};

// <base gens, t_0..t_{n-1} | [t_i, c_i]> with one stable letter per cusp.
Presentation folded_presentation(const GroupConfig& cfg);

// Two copies of the base generators, stable letters t_1..t_{n-1}, relators
// c_0 c_0'^{-1} and t_i c_i t_i^{-1} c_i'^{-1}.
Presentation double_presentation(const GroupConfig& cfg);

// Word over the double's alphabet: base letters index the two copies
// (copy 0: generators 0..m-1, copy 1: m..2m-1), stable cusps 1..n-1.
struct DMWord {
    std::vector<Syllable> syllables;
};

// Rewriting m -> m, m' -> t_0^{-1} m t_0, t_i -> t_0^{-1} t_i realizing the
// spanning-tree change; output is a word over the folded config's alphabet.
Word dm_to_fm(const DMWord& w, const GroupConfig& cfg);

// The double's relators as DMWords (for the injection tests).
std::vector<DMWord> dm_relators(const GroupConfig& cfg);

} // namespace quadrica
