#include "quadrica/grouppres.hpp"
#include "quadrica/error.hpp"

#include <algorithm>
#include <map>
#include <sstream>

namespace quadrica {

namespace {

void append_cancelling(std::vector<int>& acc, int letter) {
    if (!acc.empty() && acc.back() == -letter)
        acc.pop_back();
    else
        acc.push_back(letter);
}

} // namespace

Word make_word(std::vector<Syllable> syllables) {
    std::vector<Syllable> out;
    auto push_base = [&out](const BaseSyllable& b) {
        if (!out.empty() && std::holds_alternative<BaseSyllable>(out.back())) {
            auto& top = std::get<BaseSyllable>(out.back());
            for (int l : b.letters) append_cancelling(top.letters, l);
        } else {
            BaseSyllable copy;
            for (int l : b.letters) append_cancelling(copy.letters, l);
            out.push_back(copy);
        }
    };
    std::function<void(const StableSyllable&)> push_stable = [&](const StableSyllable& s) {
        if (s.power == 0) return;
        // a trailing empty base between same-cusp stables cancels freely
        if (!out.empty() && std::holds_alternative<BaseSyllable>(out.back()) &&
            std::get<BaseSyllable>(out.back()).letters.empty() && out.size() >= 2 &&
            std::get<StableSyllable>(out[out.size() - 2]).cusp == s.cusp) {
            out.pop_back();
        }
        if (out.empty() || std::holds_alternative<StableSyllable>(out.back())) {
            if (!out.empty() && std::get<StableSyllable>(out.back()).cusp == s.cusp) {
                auto& top = std::get<StableSyllable>(out.back());
                top.power += s.power;
                if (top.power == 0) {
                    out.pop_back();
                    // merge the bases around the vanished stable syllable
                    if (!out.empty() && std::holds_alternative<BaseSyllable>(out.back())) {
                        BaseSyllable b = std::get<BaseSyllable>(out.back());
                        out.pop_back();
                        push_base(b);
                    }
                }
                return;
            }
            push_base(BaseSyllable{});
        }
        out.push_back(s);
    };
    for (auto& s : syllables) {
        if (std::holds_alternative<BaseSyllable>(s))
            push_base(std::get<BaseSyllable>(s));
        else
            push_stable(std::get<StableSyllable>(s));
    }
    if (!out.empty() && std::holds_alternative<StableSyllable>(out.back()))
        out.push_back(BaseSyllable{});
    if (out.size() == 1 && std::get<BaseSyllable>(out[0]).letters.empty())
        out.clear();
    return Word{std::move(out)};
}

Word word_inverse(const Word& w) {
    std::vector<Syllable> rev;
    for (auto it = w.syllables.rbegin(); it != w.syllables.rend(); ++it) {
        if (std::holds_alternative<BaseSyllable>(*it)) {
            const auto& b = std::get<BaseSyllable>(*it);
            BaseSyllable inv;
            for (auto lit = b.letters.rbegin(); lit != b.letters.rend(); ++lit)
                inv.letters.push_back(-*lit);
            rev.push_back(inv);
        } else {
            const auto& s = std::get<StableSyllable>(*it);
            rev.push_back(StableSyllable{s.cusp, -s.power});
        }
    }
    return make_word(std::move(rev));
}

Word word_concat(const Word& a, const Word& b) {
    std::vector<Syllable> all = a.syllables;
    all.insert(all.end(), b.syllables.begin(), b.syllables.end());
    return make_word(std::move(all));
}

int syllable_length(const Word& w) { return static_cast<int>(w.syllables.size()); }

int base_syllable_count(const Word& w) {
    return (static_cast<int>(w.syllables.size()) + 1) / 2;
}

void validate_config(const GroupConfig& cfg) {
    const int n = cfg.q.rank();
    if (cfg.subform_indices.empty())
        throw invariant_error("config needs subform indices");
    std::vector<bool> seen(n, false);
    for (int i : cfg.subform_indices) {
        if (i < 0 || i >= n || seen[i]) throw invariant_error("bad subform index");
        seen[i] = true;
    }
    if (cfg.generator_names.size() != cfg.base_generators.size())
        throw invariant_error("generator names/matrices mismatch");
    if (cfg.stable_letters.size() != cfg.cusps.size())
        throw invariant_error("one stable letter per cusp required");

    for (size_t g = 0; g < cfg.base_generators.size(); ++g) {
        const QMatrix& m = cfg.base_generators[g];
        if (!preserves_form(m, cfg.q))
            throw invariant_error("base generator " + cfg.generator_names[g] +
                                  " does not preserve the form");
        // preserves the subspace spanned by the subform coordinates
        for (int j : cfg.subform_indices) {
            QVector e(n, Rat(0));
            e[j] = 1;
            QVector img = m.apply(e);
            for (int i = 0; i < n; ++i)
                if (!seen[i] && img[i] != 0)
                    throw invariant_error("base generator " + cfg.generator_names[g] +
                                          " leaves the subform subspace");
        }
    }
    for (size_t c = 0; c < cfg.cusps.size(); ++c) {
        const CuspData& cusp = cfg.cusps[c];
        if (cusp.index != static_cast<int>(c)) throw invariant_error("cusp index out of order");
        validate_cusp(cusp, cfg.q);
        for (int i = 0; i < n; ++i)
            if (!seen[i] && cusp.point[i] != 0)
                throw invariant_error("cusp point must lie in the subform subspace");
        // cusp generators must be named base generators (presentations need
        // them in the alphabet)
        if (cusp.generator_names.size() != cusp.generators.size())
            throw invariant_error("cusp generator names/matrices mismatch");
        for (size_t k = 0; k < cusp.generators.size(); ++k) {
            auto it = std::find(cfg.generator_names.begin(), cfg.generator_names.end(),
                                cusp.generator_names[k]);
            if (it == cfg.generator_names.end())
                throw invariant_error("cusp generator " + cusp.generator_names[k] +
                                      " is not a named base generator");
            if (!(cfg.base_generators[it - cfg.generator_names.begin()] == cusp.generators[k]))
                throw invariant_error("cusp generator " + cusp.generator_names[k] +
                                      " differs from the base generator of the same name");
        }
        const QMatrix& t = cfg.stable_letters[c];
        if (!preserves_form(t, cfg.q))
            throw invariant_error("stable letter does not preserve the form");
        if (!is_unipotent(t)) throw invariant_error("stable letter is not unipotent");
        if (t.apply(cusp.point) != cusp.point)
            throw invariant_error("stable letter does not fix its cusp point");
        for (const QMatrix& g : cusp.generators)
            if (!(t * g == g * t))
                throw invariant_error("stable letter does not commute with cusp " +
                                      std::to_string(c) + " generators");
    }
}

QMatrix evaluate_base(const BaseSyllable& m, const GroupConfig& cfg) {
    QMatrix acc = QMatrix::identity(cfg.q.rank());
    for (int l : m.letters) {
        int idx = std::abs(l) - 1;
        if (idx < 0 || idx >= static_cast<int>(cfg.base_generators.size()))
            throw invalid_input("base letter out of range: " + std::to_string(l));
        acc = acc * (l > 0 ? cfg.base_generators[idx] : cfg.base_generators[idx].inverse());
    }
    return acc;
}

QMatrix evaluate(const Word& w, const GroupConfig& cfg) {
    QMatrix acc = QMatrix::identity(cfg.q.rank());
    for (const auto& s : w.syllables) {
        if (std::holds_alternative<BaseSyllable>(s)) {
            acc = acc * evaluate_base(std::get<BaseSyllable>(s), cfg);
        } else {
            const auto& st = std::get<StableSyllable>(s);
            if (st.cusp < 0 || st.cusp >= static_cast<int>(cfg.stable_letters.size()))
                throw invalid_input("stable cusp index out of range");
            acc = acc * matrix_power(cfg.stable_letters[st.cusp], st.power);
        }
    }
    return acc;
}

Word britton_reduce(const Word& w_in, const GroupConfig& cfg) {
    Word w = make_word(w_in.syllables);
    bool changed = true;
    while (changed) {
        changed = false;
        // stable syllables sit at odd positions
        for (size_t i = 1; i + 2 < w.syllables.size(); i += 2) {
            const auto& s1 = std::get<StableSyllable>(w.syllables[i]);
            const auto& mid = std::get<BaseSyllable>(w.syllables[i + 1]);
            const auto& s2 = std::get<StableSyllable>(w.syllables[i + 2]);
            if (s1.cusp != s2.cusp) continue;
            QMatrix m = evaluate_base(mid, cfg);
            if (!cusp_membership_unchecked(m, cfg.cusps[s1.cusp], cfg.q)) continue;
            // t^k c t^k' -> t^{k+k'} c
            std::vector<Syllable> next(w.syllables.begin(), w.syllables.begin() + i);
            next.push_back(StableSyllable{s1.cusp, s1.power + s2.power});
            next.push_back(mid);
            next.insert(next.end(), w.syllables.begin() + i + 3, w.syllables.end());
            w = make_word(std::move(next));
            changed = true;
            break;
        }
    }
    return w;
}

std::string word_str(const Word& w, const GroupConfig& cfg) {
    if (w.syllables.empty()) return "1";
    std::ostringstream os;
    bool first = true;
    for (const auto& s : w.syllables) {
        if (std::holds_alternative<BaseSyllable>(s)) {
            for (int l : std::get<BaseSyllable>(s).letters) {
                if (!first) os << " ";
                first = false;
                int idx = std::abs(l) - 1;
                os << (idx < static_cast<int>(cfg.generator_names.size())
                           ? cfg.generator_names[idx]
                           : "g" + std::to_string(idx));
                if (l < 0) os << "^-1";
            }
        } else {
            const auto& st = std::get<StableSyllable>(s);
            if (!first) os << " ";
            first = false;
            os << "t" << st.cusp;
            if (st.power != 1) os << "^" << st.power.get_str();
        }
    }
    if (first) return "1";
    return os.str();
}

IdentityVerdict is_identity(const Word& w, const GroupConfig& cfg) {
    QMatrix image = evaluate(w, cfg);
    Word r = britton_reduce(w, cfg);
    IdentityVerdict v;
    if (r.syllables.empty()) {
        v.is_identity = true;
        v.reason = "reduces to the empty word";
        if (!image.is_identity())
            throw faithfulness_violation("empty reduction with nontrivial image: " +
                                         word_str(w, cfg));
        return v;
    }
    if (r.syllables.size() > 1) {
        const auto& st = std::get<StableSyllable>(r.syllables[1]);
        v.is_identity = false;
        v.reason = "reduced form retains a stable letter t" + std::to_string(st.cusp) +
                   "^" + st.power.get_str();
        if (image.is_identity())
            throw faithfulness_violation("reduced word with stable letters has identity image: " +
                                         word_str(w, cfg));
        return v;
    }
    // single base syllable; equality in the base group is exact matrix equality
    bool trivial = image.is_identity();
    v.is_identity = trivial;
    v.reason = trivial ? "l=1, m1=1" : "l=1, m1!=1";
    return v;
}

namespace {

// letter order +1 < -1 < +2 < -2 < ...
int nth_letter(int k, int num_gens) {
    int g = k / 2 + 1;
    (void)num_gens;
    return (k % 2 == 0) ? g : -g;
}

// stable power order +1 < -1 < +2 < -2 < ... < +E < -E
Int nth_power(int k) {
    int mag = k / 2 + 1;
    return (k % 2 == 0) ? Int(mag) : Int(-mag);
}

struct Enumerator {
    const GroupConfig& cfg;
    SweepBounds bounds;
    const std::function<bool(const Word&, const QMatrix&)>& visit;
    long visited = 0;
    bool stopped = false;
    int num_gens;
    int num_cusps;
    std::vector<QMatrix> gen_mats;                 // 2*num_gens: +g then -g
    std::vector<std::vector<QMatrix>> stable_pows; // [cusp][power-order-index]
    std::map<std::pair<std::vector<int>, int>, bool> member_cache;

    Enumerator(const GroupConfig& c, const SweepBounds& b,
               const std::function<bool(const Word&, const QMatrix&)>& v)
        : cfg(c), bounds(b), visit(v) {
        num_gens = static_cast<int>(cfg.base_generators.size());
        num_cusps = static_cast<int>(cfg.cusps.size());
        for (int g = 0; g < num_gens; ++g) {
            gen_mats.push_back(cfg.base_generators[g]);
            gen_mats.push_back(cfg.base_generators[g].inverse());
        }
        stable_pows.resize(num_cusps);
        for (int c2 = 0; c2 < num_cusps; ++c2)
            for (int k = 0; k < 2 * bounds.E; ++k)
                stable_pows[c2].push_back(matrix_power(cfg.stable_letters[c2], nth_power(k)));
    }

    const QMatrix& letter_matrix(int letter) const {
        int idx = (std::abs(letter) - 1) * 2 + (letter > 0 ? 0 : 1);
        return gen_mats[idx];
    }

    bool in_cusp(const std::vector<int>& letters, int cusp, const QMatrix& own) {
        auto key = std::make_pair(letters, cusp);
        auto it = member_cache.find(key);
        if (it != member_cache.end()) return it->second;
        bool r = cusp_membership_unchecked(own, cfg.cusps[cusp], cfg.q).has_value();
        member_cache.emplace(std::move(key), r);
        return r;
    }

    void emit(const std::vector<Syllable>& syls, const QMatrix& m) {
        if (stopped) return;
        ++visited;
        if (!visit(make_word(syls), m)) stopped = true;
    }

    // enumerate freely-reduced base strings of length exactly `len`; `own`
    // is the string's matrix built from the identity
    void base_strings(int len, int depth, std::vector<int>& letters, const QMatrix& own,
                      const std::function<void(const std::vector<int>&, const QMatrix&)>& next) {
        if (stopped) return;
        if (depth == len) {
            next(letters, own);
            return;
        }
        for (int k = 0; k < 2 * num_gens && !stopped; ++k) {
            int l = nth_letter(k, num_gens);
            if (!letters.empty() && letters.back() == -l) continue;
            letters.push_back(l);
            base_strings(len, depth + 1, letters, own * letter_matrix(l), next);
            letters.pop_back();
        }
    }

    // positions alternate: base syllables 0..ell-1 with stables between.
    // prev_* describe the base syllable at pos-1.
    void word_tail(int ell, int pos, int budget, std::vector<Syllable>& syls,
                   const QMatrix& prefix, int prev_cusp,
                   const std::vector<int>& prev_base_letters, const QMatrix& prev_base_own) {
        if (stopped) return;
        if (pos == ell) {
            emit(syls, prefix);
            return;
        }
        // choose the stable syllable between base pos-1 and base pos
        for (int c = 0; c < num_cusps && !stopped; ++c) {
            // reducedness: an interior base syllable flanked by equal cusp
            // indices must lie outside that cusp subgroup
            if (pos >= 2 && c == prev_cusp && in_cusp(prev_base_letters, c, prev_base_own))
                continue;
            for (int k = 0; k < 2 * bounds.E && !stopped; ++k) {
                syls.push_back(StableSyllable{c, nth_power(k)});
                const QMatrix after_stable = prefix * stable_pows[c][k];
                for (int len = 0; len <= budget && !stopped; ++len) {
                    std::vector<int> letters;
                    base_strings(len, 0, letters, QMatrix::identity(cfg.q.rank()),
                                 [&](const std::vector<int>& ls, const QMatrix& own) {
                                     syls.push_back(BaseSyllable{ls});
                                     word_tail(ell, pos + 1, budget - len, syls,
                                               after_stable * own, c, ls, own);
                                     syls.pop_back();
                                 });
                }
                syls.pop_back();
            }
        }
    }

    void run() {
        const QMatrix id = QMatrix::identity(cfg.q.rank());
        // empty word
        emit({}, id);
        if (bounds.L < 1 || stopped) return;
        // l = 1: single nonempty base syllable
        for (int len = 1; len <= bounds.B && !stopped; ++len) {
            std::vector<int> letters;
            base_strings(len, 0, letters, id,
                         [&](const std::vector<int>& ls, const QMatrix& m) {
                             std::vector<Syllable> syls{BaseSyllable{ls}};
                             emit(syls, m);
                         });
        }
        // l >= 2
        for (int ell = 2; 2 * ell - 1 <= bounds.L && !stopped; ++ell) {
            if (num_cusps == 0) break;
            for (int len = 0; len <= bounds.B && !stopped; ++len) {
                std::vector<int> letters;
                base_strings(len, 0, letters, id,
                             [&](const std::vector<int>& ls, const QMatrix& m) {
                                 std::vector<Syllable> syls{BaseSyllable{ls}};
                                 word_tail(ell, 1, bounds.B - len, syls, m, -1, ls, m);
                                 syls.pop_back();
                             });
            }
        }
    }
};

} // namespace

long enumerate_reduced_words(const GroupConfig& cfg, const SweepBounds& bounds,
                             const std::function<bool(const Word&, const QMatrix&)>& visit) {
    if (bounds.L != 0 && bounds.L % 2 == 0)
        throw precondition_error("syllable-length bound must be odd or 0");
    if (bounds.E < 0 || bounds.B < 0) throw precondition_error("negative sweep bound");
    Enumerator e(cfg, bounds, visit);
    e.run();
    return e.visited;
}

namespace {

int base_letter_index(const GroupConfig& cfg, const std::string& name) {
    auto it = std::find(cfg.generator_names.begin(), cfg.generator_names.end(), name);
    if (it == cfg.generator_names.end())
        throw invariant_error("cusp generator not in alphabet: " + name);
    return static_cast<int>(it - cfg.generator_names.begin());
}

} // namespace

Presentation folded_presentation(const GroupConfig& cfg) {
    validate_config(cfg);
    Presentation p;
    p.kind = Presentation::Kind::Folded;
    p.generators = cfg.generator_names;
    const int m = static_cast<int>(cfg.generator_names.size());
    for (size_t i = 0; i < cfg.cusps.size(); ++i)
        p.generators.push_back("t" + std::to_string(i));
    for (size_t i = 0; i < cfg.cusps.size(); ++i) {
        int t = m + static_cast<int>(i) + 1; // 1-based letter
        for (const std::string& name : cfg.cusps[i].generator_names) {
            int c = base_letter_index(cfg, name) + 1;
            p.relations.push_back({t, c, -t, -c});
        }
    }
    p.spanning_tree = "(vertex)";
    return p;
}

Presentation double_presentation(const GroupConfig& cfg) {
    validate_config(cfg);
    if (cfg.cusps.empty()) throw precondition_error("double needs at least one cusp");
    Presentation p;
    p.kind = Presentation::Kind::Double;
    const int m = static_cast<int>(cfg.generator_names.size());
    p.generators = cfg.generator_names;
    for (const std::string& g : cfg.generator_names) p.generators.push_back(g + "'");
    for (size_t i = 1; i < cfg.cusps.size(); ++i)
        p.generators.push_back("t" + std::to_string(i));
    for (size_t i = 0; i < cfg.cusps.size(); ++i) {
        for (const std::string& name : cfg.cusps[i].generator_names) {
            int c = base_letter_index(cfg, name) + 1;
            int cp = m + c;
            if (i == 0) {
                p.relations.push_back({c, -cp});
            } else {
                int t = 2 * m + static_cast<int>(i); // t_i at position 2m + i (1-based)
                p.relations.push_back({t, c, -t, -cp});
            }
        }
    }
    p.spanning_tree = "t0";
    return p;
}

std::vector<DMWord> dm_relators(const GroupConfig& cfg) {
    std::vector<DMWord> out;
    const int m = static_cast<int>(cfg.generator_names.size());
    for (size_t i = 0; i < cfg.cusps.size(); ++i) {
        for (const std::string& name : cfg.cusps[i].generator_names) {
            int c = base_letter_index(cfg, name) + 1;
            int cp = m + c;
            DMWord w;
            if (i == 0) {
                w.syllables.push_back(BaseSyllable{{c, -cp}});
            } else {
                w.syllables.push_back(BaseSyllable{});
                w.syllables.push_back(StableSyllable{static_cast<int>(i), 1});
                w.syllables.push_back(BaseSyllable{{c}});
                w.syllables.push_back(StableSyllable{static_cast<int>(i), -1});
                w.syllables.push_back(BaseSyllable{{-cp}});
            }
            out.push_back(std::move(w));
        }
    }
    return out;
}

Word dm_to_fm(const DMWord& w, const GroupConfig& cfg) {
    const int m = static_cast<int>(cfg.base_generators.size());
    std::vector<Syllable> acc;
    auto emit_base_letter = [&acc, m](int v) {
        int a = std::abs(v);
        if (a <= m) {
            acc.push_back(BaseSyllable{{v}});
        } else {
            int g = (v > 0) ? (a - m) : -(a - m);
            acc.push_back(StableSyllable{0, -1});
            acc.push_back(BaseSyllable{{g}});
            acc.push_back(StableSyllable{0, 1});
        }
    };
    for (const auto& s : w.syllables) {
        if (std::holds_alternative<BaseSyllable>(s)) {
            const auto& b = std::get<BaseSyllable>(s);
            for (int v : b.letters) {
                if (v == 0 || std::abs(v) > 2 * m)
                    throw invalid_input("double-word base letter out of range");
                emit_base_letter(v);
            }
        } else {
            const auto& st = std::get<StableSyllable>(s);
            if (st.cusp < 1 || st.cusp >= static_cast<int>(cfg.cusps.size()))
                throw invalid_input("double-word stable letter out of range");
            Int k = st.power;
            // t_i -> t_0^{-1} t_i, letter by letter
            if (k > 0) {
                for (Int j = 0; j < k; ++j) {
                    acc.push_back(StableSyllable{0, -1});
                    acc.push_back(StableSyllable{st.cusp, 1});
                }
            } else {
                for (Int j = 0; j < -k; ++j) {
                    acc.push_back(StableSyllable{st.cusp, -1});
                    acc.push_back(StableSyllable{0, 1});
                }
            }
        }
    }
    return make_word(std::move(acc));
}

} // namespace quadrica
