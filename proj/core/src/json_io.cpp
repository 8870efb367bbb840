#include "quadrica/json_io.hpp"
#include "quadrica/error.hpp"

#include <fstream>
#include <sstream>

namespace quadrica {

std::string rat_to_string(const Rat& r) {
    if (r.get_den() == 1) return r.get_num().get_str();
    return r.get_num().get_str() + "/" + r.get_den().get_str();
}

Rat rat_from_string(const std::string& s) {
    auto slash = s.find('/');
    try {
        if (slash == std::string::npos) {
            // accept plain decimals like "0.5" for convenience
            auto dot = s.find('.');
            if (dot == std::string::npos) return Rat(Int(s));
            std::string whole = s.substr(0, dot), frac = s.substr(dot + 1);
            Int den = 1;
            for (size_t i = 0; i < frac.size(); ++i) den *= 10;
            bool neg = !whole.empty() && whole[0] == '-';
            Int w = whole.empty() || whole == "-" ? Int(0) : Int(whole);
            Int num = abs(w) * den + Int(frac.empty() ? "0" : frac);
            Rat r(num, den);
            r.canonicalize();
            return neg ? Rat(-r) : r;
        }
        Rat r(Int(s.substr(0, slash)), Int(s.substr(slash + 1)));
        r.canonicalize();
        return r;
    } catch (const std::invalid_argument&) {
        throw invalid_input("cannot parse rational: " + s);
    }
}

ojson to_ojson(const Int& n) { return n.get_str(); }

ojson to_ojson(const DiagonalForm& q) {
    ojson j = ojson::array();
    for (const Int& c : q.coeffs) j.push_back(c.get_str());
    return j;
}

ojson to_ojson(const QMatrix& m) {
    ojson rows = ojson::array();
    for (int i = 0; i < m.dim(); ++i) {
        ojson row = ojson::array();
        for (int j = 0; j < m.dim(); ++j) row.push_back(rat_to_string(m.at(i, j)));
        rows.push_back(row);
    }
    return rows;
}

ojson to_ojson(const QVector& v) {
    ojson j = ojson::array();
    for (const Rat& x : v) j.push_back(rat_to_string(x));
    return j;
}

ojson to_ojson(const Word& w) {
    ojson j = ojson::array();
    for (const auto& s : w.syllables) {
        if (std::holds_alternative<BaseSyllable>(s)) {
            ojson letters = ojson::array();
            for (int l : std::get<BaseSyllable>(s).letters) letters.push_back(l);
            j.push_back({{"kind", "base"}, {"letters", letters}});
        } else {
            const auto& st = std::get<StableSyllable>(s);
            j.push_back({{"kind", "stable"}, {"cusp", st.cusp}, {"power", st.power.get_str()}});
        }
    }
    return j;
}

ojson to_ojson(const Place& v) { return v.str(); }

ojson to_ojson(const EquivalenceReport& r) {
    ojson j = ojson::object();
    j["equivalent"] = r.equivalent;
    j["signaturesEqual"] = r.signatures_equal;
    j["signatureLhs"] = {r.signature_lhs.first, r.signature_lhs.second};
    j["signatureRhs"] = {r.signature_rhs.first, r.signature_rhs.second};
    j["discriminantsEqual"] = r.discriminants_equal;
    j["discriminantLhs"] = r.discriminant_lhs.get_str();
    j["discriminantRhs"] = r.discriminant_rhs.get_str();
    j["hasseEqual"] = r.hasse_equal;
    ojson by_place = ojson::array();
    for (const auto& [place, pair] : r.hasse_by_place)
        by_place.push_back({{"place", place.str()}, {"lhs", pair.first}, {"rhs", pair.second}});
    j["hasseByPlace"] = by_place;
    return j;
}

ojson to_ojson(const IsotropyReport& r) {
    ojson j = ojson::object();
    j["isotropic"] = r.isotropic;
    if (r.witness) {
        ojson w = ojson::array();
        for (const Int& x : *r.witness) w.push_back(x.get_str());
        j["witness"] = w;
    } else {
        j["witness"] = nullptr;
    }
    j["obstruction"] = r.obstruction ? ojson(r.obstruction->str()) : ojson(nullptr);
    return j;
}

ojson to_ojson(const MontesinosReport& r) {
    ojson j = ojson::object();
    j["S"] = r.params.S.get_str();
    j["a"] = r.params.a.get_str();
    ojson fs = ojson::array();
    for (const Int& p : r.params.factors) fs.push_back(p.get_str());
    j["factorsOfS"] = fs;
    j["caseTag"] = r.params.case_tag;
    ojson conds = ojson::array();
    for (const auto& c : r.conditions)
        conds.push_back({{"name", c.name}, {"ok", c.ok}, {"detail", c.detail}});
    j["conditions"] = conds;
    j["valid"] = r.valid;
    if (r.valid) {
        j["form"] = to_ojson(r.form);
        j["discriminant"] = r.discriminant_raw.get_str();
        j["discriminantPaperStated"] = r.discriminant_stated.get_str();
    }
    return j;
}

ojson to_ojson(const ReplacementResult& r) {
    return {{"aPrime", r.a_prime.get_str()},
            {"residue", r.residue.get_str()},
            {"modulus", r.modulus.get_str()},
            {"candidatesScanned", r.candidates_scanned}};
}

ojson to_ojson(const SubformSelection& r) {
    ojson j = ojson::object();
    j["case"] = r.case_name;
    j["q"] = to_ojson(r.q);
    j["f"] = to_ojson(r.f);
    j["indices"] = r.indices;
    ojson w = ojson::array();
    for (const Int& x : r.witness) w.push_back(x.get_str());
    j["witness"] = w;
    j["usedReplacement"] = r.used_replacement;
    if (r.a_prime) j["aPrime"] = r.a_prime->get_str();
    if (r.equivalence) j["equivalence"] = to_ojson(*r.equivalence);
    return j;
}

ojson to_ojson(const SubformChain& r) {
    ojson j = ojson::object();
    j["root"] = to_ojson(r.root);
    ojson steps = ojson::array();
    for (const auto& s : r.steps) {
        ojson sj = ojson::object();
        sj["form"] = to_ojson(s.form);
        sj["deletedIndexInParent"] = s.deleted_index_in_parent;
        sj["indicesInRoot"] = s.indices_in_root;
        sj["verifiedIsotropic"] = s.verified_isotropic;
        if (s.witness) {
            ojson w = ojson::array();
            for (const Int& x : *s.witness) w.push_back(x.get_str());
            sj["witness"] = w;
        }
        steps.push_back(sj);
    }
    j["steps"] = steps;
    j["complete"] = r.complete;
    if (!r.complete) j["failure"] = r.failure;
    return j;
}

ojson to_ojson(const CuspData& c) {
    ojson j = ojson::object();
    j["index"] = c.index;
    j["point"] = to_ojson(c.point);
    ojson gens = ojson::array();
    for (const std::string& n : c.generator_names) gens.push_back(n);
    j["generators"] = gens;
    return j;
}

ojson to_ojson(const GroupConfig& cfg) {
    ojson j = ojson::object();
    if (!cfg.name.empty()) j["name"] = cfg.name;
    j["form"] = to_ojson(cfg.q);
    j["subformIndices"] = cfg.subform_indices;
    ojson gens = ojson::array();
    for (size_t i = 0; i < cfg.base_generators.size(); ++i)
        gens.push_back({{"name", cfg.generator_names[i]},
                        {"matrix", to_ojson(cfg.base_generators[i])}});
    j["baseGenerators"] = gens;
    ojson cusps = ojson::array();
    for (const CuspData& c : cfg.cusps) cusps.push_back(to_ojson(c));
    j["cusps"] = cusps;
    ojson stables = ojson::array();
    for (const QMatrix& t : cfg.stable_letters) stables.push_back(to_ojson(t));
    j["stableLetters"] = stables;
    j["D"] = cfg.D;
    j["precisionBits"] = cfg.precision_bits;
    j["sweep"] = {{"L", cfg.sweep.L}, {"E", cfg.sweep.E}, {"B", cfg.sweep.B}};
    return j;
}

ojson to_ojson(const Presentation& p) {
    ojson j = ojson::object();
    j["kind"] = (p.kind == Presentation::Kind::Folded) ? "folded" : "double";
    j["generators"] = p.generators;
    ojson rels = ojson::array();
    for (const auto& r : p.relations) rels.push_back(r);
    j["relations"] = rels;
    j["spanningTree"] = p.spanning_tree;
    return j;
}

ojson to_ojson(const ChainAssignment& a) {
    ojson j = ojson::object();
    j["n"] = a.n;
    j["N"] = a.N;
    ojson t = ojson::array();
    for (const auto& e : a.table)
        t.push_back({{"i", e.i},
                     {"requestedK", e.requested_k},
                     {"usedK", e.used_k},
                     {"clamped", e.clamped},
                     {"label", e.label}});
    j["table"] = t;
    j["anyClamped"] = a.any_clamped;
    return j;
}

ojson to_ojson(const DensityReport& r) {
    ojson j = ojson::object();
    ojson vecs = ojson::array();
    for (const QVector& v : r.invariant_vectors) vecs.push_back(to_ojson(v));
    j["hyperplaneInvariantVectors"] = vecs;
    j["containsCornerBlock"] = r.contains_corner_block;
    j["generatorCount"] = r.generator_count;
    j["patternsExamined"] = r.patterns_examined;
    j["patternsPruned"] = r.patterns_pruned;
    j["degenerate"] = r.degenerate;
    return j;
}

ojson to_ojson(const SweepReport& r) {
    ojson j = ojson::object();
    j["bounds"] = {{"L", r.bounds.L}, {"E", r.bounds.E}, {"B", r.bounds.B}};
    j["D"] = r.D;
    j["precisionBits"] = r.precision_bits;
    j["horoballLevel"] = rat_to_string(r.level);
    ojson powers = ojson::array();
    for (size_t i = 0; i < r.powers.size(); ++i)
        powers.push_back({{"cusp", i},
                          {"power", r.powers[i].get_str()},
                          {"displacement", r.power_displacements[i]}});
    j["powers"] = powers;
    j["words"] = r.words;
    ojson by_ell = ojson::object();
    for (const auto& [ell, count] : r.by_ell) by_ell[std::to_string(ell)] = count;
    j["bySyllableCount"] = by_ell;
    j["certificates"] = r.certificates;
    j["failures"] = r.failures;
    if (!r.min_angle_margin.empty()) j["minAngleMargin"] = r.min_angle_margin;
    if (!r.min_length_margin.empty()) j["minLengthMargin"] = r.min_length_margin;
    if (r.runtime_ms >= 0) j["runtimeMs"] = r.runtime_ms;
    return j;
}

ojson to_ojson(const PipelineOptions& o) {
    return {{"D", o.D},
            {"precisionBits", o.precision_bits},
            {"sweep", {{"L", o.sweep.L}, {"E", o.sweep.E}, {"B", o.sweep.B}}},
            {"witnessBound", o.witness_bound.get_str()},
            {"scanCap", o.scan_cap},
            {"legendreCondition", legendre_condition_name(o.legendre)},
            {"runSweep", o.run_sweep}};
}

ojson to_ojson(const Certificate& c) {
    ojson j = ojson::object();
    j["D"] = c.D;
    j["l"] = c.ell;
    j["segmentCount"] = c.segment_count;
    j["segmentCountExpected"] = 2 * c.ell - 1;
    j["countOk"] = c.count_ok;
    j["lengthsOk"] = c.lengths_ok;
    j["anglesOk"] = c.angles_ok;
    j["orthogonalityOk"] = c.orthogonality_ok;
    j["pass"] = c.pass;
    ojson items = ojson::array();
    for (const auto& it : c.items)
        items.push_back({{"what", it.what}, {"pass", it.pass}, {"margin", it.margin.str(25)}});
    j["items"] = items;
    j["minAngleMargin"] = c.min_angle_margin.str(25);
    j["minLengthMargin"] = c.min_length_margin.str(25);
    if (!c.failure.empty()) j["failure"] = c.failure;
    return j;
}

ojson to_ojson(const BrokenGeodesic& bg, int real_digits) {
    ojson j = ojson::object();
    j["l"] = bg.ell;
    j["basepoint"] = to_ojson(bg.basepoint);
    j["endpoint"] = to_ojson(bg.endpoint);
    ojson centers = ojson::array();
    for (const QVector& c : bg.centers) centers.push_back(to_ojson(c));
    j["centers"] = centers;
    ojson levels = ojson::array();
    for (const Rat& s : bg.ball_levels) levels.push_back(rat_to_string(s));
    j["ballLevels"] = levels;
    ojson segs = ojson::array();
    for (const auto& s : bg.segments) {
        ojson sj = ojson::object();
        sj["kind"] = (s.kind == GeoSegment::Kind::Ray)
                         ? "ray"
                         : (s.kind == GeoSegment::Kind::Chord ? "chord" : "connector");
        sj["a"] = to_ojson(s.a);
        sj["b"] = to_ojson(s.b);
        if (s.a_ideal) sj["aIdeal"] = true;
        if (s.b_ideal) sj["bIdeal"] = true;
        if (s.carrier_prefix > 0) sj["carrierPrefix"] = s.carrier_prefix;
        if (s.ball > 0) sj["ball"] = s.ball;
        sj["length"] = s.length.str(real_digits);
        segs.push_back(sj);
    }
    j["segments"] = segs;
    ojson joints = ojson::array();
    for (const auto& jt : bg.joints)
        joints.push_back({{"point", to_ojson(jt.point)},
                          {"angle", jt.angle.str(real_digits)},
                          {"cosSign", jt.cos_num > 0 ? 1 : (jt.cos_num < 0 ? -1 : 0)}});
    j["joints"] = joints;
    j["designatedJoint"] = bg.designated_joint;
    j["designatedOrthogonality"] = bg.designated_orthogonality.str(real_digits);
    return j;
}

DiagonalForm form_from_json(const ojson& j) {
    std::vector<Int> coeffs;
    for (const auto& c : j) {
        if (c.is_string())
            coeffs.push_back(Int(c.get<std::string>()));
        else
            coeffs.push_back(Int(c.get<long>()));
    }
    return DiagonalForm(std::move(coeffs));
}

DiagonalForm form_from_coeff_list(const std::string& csv) {
    std::vector<Int> coeffs;
    std::stringstream ss(csv);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (tok.empty()) continue;
        coeffs.push_back(Int(tok));
    }
    if (coeffs.empty()) throw invalid_input("empty coefficient list");
    return DiagonalForm(std::move(coeffs));
}

QMatrix matrix_from_json(const ojson& j) {
    int n = static_cast<int>(j.size());
    QMatrix m(n);
    for (int i = 0; i < n; ++i) {
        if (static_cast<int>(j[i].size()) != n) throw invalid_input("matrix rows must be square");
        for (int k = 0; k < n; ++k) {
            const auto& e = j[i][k];
            m.at(i, k) = e.is_string() ? rat_from_string(e.get<std::string>())
                                       : Rat(Int(std::to_string(e.get<long>())));
        }
    }
    return m;
}

QVector qvector_from_json(const ojson& j) {
    QVector v;
    for (const auto& e : j)
        v.push_back(e.is_string() ? rat_from_string(e.get<std::string>())
                                  : Rat(Int(std::to_string(e.get<long>()))));
    return v;
}

Word word_from_json(const ojson& j) {
    std::vector<Syllable> syl;
    for (const auto& s : j) {
        std::string kind = s.at("kind").get<std::string>();
        if (kind == "base") {
            BaseSyllable b;
            for (const auto& l : s.at("letters")) b.letters.push_back(l.get<int>());
            syl.push_back(b);
        } else if (kind == "stable") {
            StableSyllable st;
            st.cusp = s.at("cusp").get<int>();
            const auto& p = s.at("power");
            st.power = p.is_string() ? Int(p.get<std::string>()) : Int(p.get<long>());
            syl.push_back(st);
        } else {
            throw invalid_input("unknown syllable kind: " + kind);
        }
    }
    return make_word(std::move(syl));
}

GroupConfig config_from_json(const ojson& j) {
    GroupConfig cfg;
    if (j.contains("name")) cfg.name = j["name"].get<std::string>();
    cfg.q = form_from_json(j.at("form"));
    for (const auto& i : j.at("subformIndices")) cfg.subform_indices.push_back(i.get<int>());
    for (const auto& g : j.at("baseGenerators")) {
        cfg.generator_names.push_back(g.at("name").get<std::string>());
        cfg.base_generators.push_back(matrix_from_json(g.at("matrix")));
    }
    for (const auto& c : j.at("cusps")) {
        CuspData cusp;
        cusp.index = c.at("index").get<int>();
        cusp.point = qvector_from_json(c.at("point"));
        for (const auto& g : c.at("generators")) {
            if (g.is_string()) {
                std::string name = g.get<std::string>();
                auto it = std::find(cfg.generator_names.begin(), cfg.generator_names.end(), name);
                if (it == cfg.generator_names.end())
                    throw invalid_input("cusp generator name not found: " + name);
                cusp.generator_names.push_back(name);
                cusp.generators.push_back(cfg.base_generators[it - cfg.generator_names.begin()]);
            } else {
                cusp.generator_names.push_back("g" + std::to_string(cusp.generators.size()));
                cusp.generators.push_back(matrix_from_json(g));
            }
        }
        cfg.cusps.push_back(std::move(cusp));
    }
    for (const auto& t : j.at("stableLetters")) cfg.stable_letters.push_back(matrix_from_json(t));
    if (j.contains("D")) cfg.D = j["D"].get<double>();
    if (j.contains("precisionBits")) cfg.precision_bits = j["precisionBits"].get<long>();
    if (j.contains("sweep")) {
        cfg.sweep.L = j["sweep"].value("L", 5);
        cfg.sweep.E = j["sweep"].value("E", 3);
        cfg.sweep.B = j["sweep"].value("B", 3);
    }
    return cfg;
}

ojson load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw invalid_input("cannot open file: " + path);
    ojson j;
    in >> j;
    return j;
}

void save_json_file(const std::string& path, const ojson& j) {
    std::ofstream out(path);
    if (!out) throw invalid_input("cannot open file for writing: " + path);
    out << j.dump(2) << "\n";
}

} // namespace quadrica
