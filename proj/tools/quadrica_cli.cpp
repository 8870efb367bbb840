// Command-line front end: quadratic form invariants, parametric family
// construction, exact matrix checks, word reduction, ping-pong certificates
// and the end-to-end pipeline.

#include "quadrica/json_io.hpp"
#include "quadrica/error.hpp"

#include <CLI11.hpp>

#include <iostream>

using namespace quadrica;

namespace {

void emit(const ojson& j, const std::string& out_path) {
    if (out_path.empty())
        std::cout << j.dump(2) << "\n";
    else
        save_json_file(out_path, j);
}

ojson invariants_json(const DiagonalForm& q) {
    ojson j = ojson::object();
    j["coeffs"] = to_ojson(q);
    j["rank"] = q.rank();
    auto [pos, neg] = q.signature();
    j["signature"] = {pos, neg};
    j["discriminant"] = discriminant(q).get_str();
    ojson hasse = ojson::object();
    for (const Place& v : invariant_support(q)) hasse[v.str()] = hasse_invariant(q, v);
    j["hasse"] = hasse;
    return j;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"exact quadratic-form lattices, folded-double words and ping-pong certificates"};
    app.require_subcommand(1);
    app.fallthrough(); // allow --out and friends after the subcommand
    std::string out_path;
    app.add_option("--out", out_path, "write JSON output to this file instead of stdout");

    std::string legendre_name = "minus-a-over-p";

    // ---- form ----
    auto* form = app.add_subcommand("form", "diagonal quadratic form invariants");
    form->require_subcommand(1);
    std::string coeffs, lhs, rhs;
    Int bound = 1000;
    {
        auto* inv = form->add_subcommand("invariants", "rank, signature, discriminant, Hasse");
        inv->add_option("--coeffs", coeffs, "comma-separated coefficients")->required();
        inv->callback([&] { emit(invariants_json(form_from_coeff_list(coeffs)), out_path); });

        auto* equiv = form->add_subcommand("equiv", "rational equivalence report");
        equiv->add_option("--lhs", lhs, "comma-separated coefficients")->required();
        equiv->add_option("--rhs", rhs, "comma-separated coefficients")->required();
        equiv->callback([&] {
            emit(to_ojson(rationally_equivalent(form_from_coeff_list(lhs), form_from_coeff_list(rhs))),
                 out_path);
        });

        auto* iso = form->add_subcommand("isotropic", "global isotropy with witness search");
        iso->add_option("--coeffs", coeffs)->required();
        iso->add_option("--bound", bound, "witness search bound per coordinate");
        iso->callback([&] {
            emit(to_ojson(is_isotropic_global(form_from_coeff_list(coeffs), bound)), out_path);
        });
    }

    // ---- montesinos ----
    std::string S_str, a_str;
    {
        auto* m = app.add_subcommand("montesinos", "parametric family form with validation report");
        m->add_option("--S", S_str)->required();
        m->add_option("--a", a_str)->required();
        m->add_option("--legendre", legendre_name,
                      "side-condition reading: minus-a-over-p | a-over-p | p-over-a");
        m->callback([&] {
            emit(to_ojson(validate_montesinos(Int(S_str), Int(a_str),
                                              parse_legendre_condition(legendre_name))),
                 out_path);
        });
    }

    // ---- prime-replace ----
    {
        auto* r = app.add_subcommand("prime-replace", "replacement prime for the a = 7 (mod 8) case");
        r->add_option("--S", S_str)->required();
        r->add_option("--a", a_str)->required();
        r->add_option("--legendre", legendre_name);
        long cap = 10000000;
        r->add_option("--scan-cap", cap, "candidate cap for the progression scan");
        r->callback([&] {
            emit(to_ojson(replacement_prime(Int(S_str), Int(a_str),
                                            parse_legendre_condition(legendre_name), cap)),
                 out_path);
        });
    }

    // ---- subchain ----
    {
        auto* s = app.add_subcommand("subchain", "descending isotropic subform chain");
        s->add_option("--coeffs", coeffs)->required();
        s->add_option("--bound", bound);
        s->callback(
            [&] { emit(to_ojson(subform_chain(form_from_coeff_list(coeffs), bound)), out_path); });
    }

    // ---- matrix ----
    std::string file_path, u_str, v_str, form_str;
    {
        auto* m = app.add_subcommand("matrix", "exact rational matrices against a form");
        m->require_subcommand(1);
        auto* check = m->add_subcommand("check", "does the matrix preserve the form?");
        check->add_option("--form", form_str, "comma-separated coefficients")->required();
        check->add_option("--file", file_path, "JSON matrix file")->required();
        check->callback([&] {
            DiagonalForm q = form_from_coeff_list(form_str);
            QMatrix g = matrix_from_json(load_json_file(file_path));
            ojson j = ojson::object();
            j["preservesForm"] = preserves_form(g, q);
            j["unipotent"] = is_unipotent(g);
            j["soPlus"] = preserves_form(g, q) && is_so_plus(g, q);
            emit(j, out_path);
        });

        auto* eich = m->add_subcommand("eichler", "transvection from an isotropic u and v with b(u,v)=0");
        eich->add_option("--form", form_str)->required();
        eich->add_option("--u", u_str, "comma-separated rational vector")->required();
        eich->add_option("--v", v_str, "comma-separated rational vector")->required();
        eich->callback([&] {
            DiagonalForm q = form_from_coeff_list(form_str);
            auto parse_vec = [](const std::string& s) {
                QVector v;
                std::stringstream ss(s);
                std::string tok;
                while (std::getline(ss, tok, ',')) v.push_back(rat_from_string(tok));
                return v;
            };
            emit(to_ojson(eichler_transvection(q, parse_vec(u_str), parse_vec(v_str))), out_path);
        });

        auto* corner = m->add_subcommand("corner", "block embedding g -> g (+) [1]");
        corner->add_option("--file", file_path)->required();
        corner->callback(
            [&] { emit(to_ojson(corner_embed(matrix_from_json(load_json_file(file_path)))), out_path); });
    }

    // ---- word ----
    std::string config_path, word_path;
    {
        auto* w = app.add_subcommand("word", "alternating words over a group config");
        w->require_subcommand(1);
        auto add_common = [&](CLI::App* sub) {
            sub->add_option("--config", config_path, "group config JSON")->required();
            sub->add_option("--word", word_path, "word JSON")->required();
        };
        auto* red = w->add_subcommand("reduce", "normal-form reduction");
        add_common(red);
        red->callback([&] {
            GroupConfig cfg = config_from_json(load_json_file(config_path));
            Word word = word_from_json(load_json_file(word_path));
            emit(to_ojson(britton_reduce(word, cfg)), out_path);
        });
        auto* ident = w->add_subcommand("identity", "normal-form identity criterion");
        add_common(ident);
        ident->callback([&] {
            GroupConfig cfg = config_from_json(load_json_file(config_path));
            Word word = word_from_json(load_json_file(word_path));
            IdentityVerdict v = is_identity(word, cfg);
            emit({{"isIdentity", v.is_identity}, {"reason", v.reason}}, out_path);
        });
        auto* sweep = w->add_subcommand("sweep", "exhaustive reduced-word faithfulness sweep");
        sweep->add_option("--config", config_path)->required();
        int L = 5, E = 3, B = 3;
        double D = 6.0;
        long prec = 256;
        bool timing = false;
        sweep->add_option("--L", L, "max syllable length (odd)");
        sweep->add_option("--E", E, "max stable exponent");
        sweep->add_option("--B", B, "max total base letters per word");
        sweep->add_option("--D", D, "separation target");
        sweep->add_option("--precision", prec, "mpfr bits");
        sweep->add_flag("--timing", timing, "include wall-clock runtime (non-deterministic)");
        sweep->callback([&] {
            GroupConfig cfg = config_from_json(load_json_file(config_path));
            emit(to_ojson(faithfulness_sweep(cfg, SweepBounds{L, E, B}, D, prec, timing)), out_path);
        });
    }

    // ---- certify ----
    {
        auto* c = app.add_subcommand("certify", "broken-geodesic certificate for one word");
        c->add_option("--config", config_path)->required();
        c->add_option("--word", word_path)->required();
        double D = 6.0;
        long prec = 256;
        c->add_option("--D", D);
        c->add_option("--precision", prec);
        bool with_geodesic = false;
        c->add_flag("--geodesic", with_geodesic, "include the full broken-geodesic data");
        c->callback([&] {
            GroupConfig cfg = config_from_json(load_json_file(config_path));
            validate_config(cfg);
            Word word = word_from_json(load_json_file(word_path));
            mpfr_prec_t p = static_cast<mpfr_prec_t>(prec);
            Rat level = choose_horoball_levels(cfg, D, p);
            GroupConfig powered = cfg;
            ojson powers = ojson::array();
            for (size_t i = 0; i < cfg.cusps.size(); ++i) {
                PowerChoice pc = choose_power(cfg.stable_letters[i],
                                              Horoball{cfg.cusps[i].point, level},
                                              cfg.subform_indices, cfg.q, D, p);
                powered.stable_letters[i] = matrix_power(cfg.stable_letters[i], pc.power);
                powers.push_back({{"cusp", i}, {"power", pc.power.get_str()}});
            }
            // exact basepoint in the subform plane
            int t = -1;
            for (int i = 0; i < cfg.q.rank(); ++i)
                if (cfg.q.coeffs[i] < 0) { t = i; break; }
            QVector basepoint(cfg.q.rank(), Rat(0));
            {
                const QVector& u0 = cfg.cusps[0].point;
                Rat at(cfg.q.coeffs[t]);
                Rat alpha = (Rat(-1) - at) / (2 * at * u0[t]);
                for (int i = 0; i < cfg.q.rank(); ++i) basepoint[i] = alpha * u0[i];
                basepoint[t] += 1;
                if (basepoint[t] < 0)
                    for (Rat& x : basepoint) x = -x;
            }
            Word reduced = britton_reduce(word, powered);
            std::vector<Rat> levels(cfg.cusps.size(), level);
            BrokenGeodesic bg = build_broken_geodesic(reduced, powered, levels, basepoint, p);
            Certificate cert = check_certificate(bg, D, base_syllable_count(reduced), p);
            ojson j = ojson::object();
            j["word"] = to_ojson(reduced);
            j["horoballLevel"] = rat_to_string(level);
            j["powers"] = powers;
            j["certificate"] = to_ojson(cert);
            if (with_geodesic) j["geodesic"] = to_ojson(bg);
            emit(j, out_path);
        });
    }

    // ---- horoballs ----
    {
        auto* h = app.add_subcommand("horoballs", "choose levels for pairwise separation");
        h->add_option("--config", config_path)->required();
        double D = 6.0;
        long prec = 256;
        h->add_option("--D", D);
        h->add_option("--precision", prec);
        h->callback([&] {
            GroupConfig cfg = config_from_json(load_json_file(config_path));
            mpfr_prec_t p = static_cast<mpfr_prec_t>(prec);
            Rat level = choose_horoball_levels(cfg, D, p);
            ojson j = ojson::object();
            j["D"] = D;
            ojson levels = ojson::array();
            for (size_t i = 0; i < cfg.cusps.size(); ++i)
                levels.push_back({{"cusp", i}, {"level", rat_to_string(level)}});
            j["levels"] = levels;
            ojson pd = ojson::array();
            for (size_t i = 0; i < cfg.cusps.size(); ++i)
                for (size_t k = i + 1; k < cfg.cusps.size(); ++k) {
                    Real d = horoball_distance(Horoball{cfg.cusps[i].point, level},
                                               Horoball{cfg.cusps[k].point, level}, cfg.q, p);
                    pd.push_back({{"i", i}, {"j", k}, {"distance", d.str(20)}});
                }
            j["pairwiseDistances"] = pd;
            emit(j, out_path);
        });
    }

    // ---- density ----
    {
        auto* d = app.add_subcommand("density", "no-invariant-hyperplane check");
        d->add_option("--config", config_path)->required();
        bool base_only = false;
        d->add_flag("--base-only", base_only, "check the base generators without stable letters");
        d->callback([&] {
            GroupConfig cfg = config_from_json(load_json_file(config_path));
            std::vector<QMatrix> gens = cfg.base_generators;
            if (!base_only)
                for (const QMatrix& t : cfg.stable_letters) gens.push_back(t);
            emit(to_ojson(hyperplane_invariance_check(gens, cfg.q, cfg.subform_indices)), out_path);
        });
    }

    // ---- pipeline ----
    {
        auto* p = app.add_subcommand("pipeline", "end-to-end construction and verification");
        p->require_subcommand(1);
        PipelineOptions opts;
        std::string wb = "1000";
        auto add_opts = [&](CLI::App* sub) {
            sub->add_option("--D", opts.D);
            sub->add_option("--precision", opts.precision_bits);
            sub->add_option("--L", opts.sweep.L);
            sub->add_option("--E", opts.sweep.E);
            sub->add_option("--B", opts.sweep.B);
            sub->add_option("--witness-bound", wb);
            sub->add_option("--scan-cap", opts.scan_cap);
            sub->add_option("--legendre", legendre_name);
            sub->add_flag("--timing", opts.timing, "include runtimes (non-deterministic)");
            sub->add_flag("--no-sweep,!--sweep", opts.run_sweep,
                          "skip the faithfulness sweep stage")
                ->default_val(true);
        };
        auto* run = p->add_subcommand("run", "from parameters (S, a) or a form");
        run->add_option("--S", S_str);
        run->add_option("--a", a_str);
        run->add_option("--coeffs", coeffs, "alternative: run from a signature-(n,1) form");
        add_opts(run);
        run->callback([&] {
            opts.witness_bound = Int(wb);
            opts.legendre = parse_legendre_condition(legendre_name);
            if (!coeffs.empty()) {
                emit(run_pipeline_from_form(form_from_coeff_list(coeffs), opts), out_path);
            } else if (!S_str.empty() && !a_str.empty()) {
                emit(run_pipeline_from_params(Int(S_str), Int(a_str), opts), out_path);
            } else {
                throw CLI::ValidationError("pipeline run needs --S/--a or --coeffs");
            }
        });
        auto* toy = p->add_subcommand("toy", "run on a shipped verifier config");
        std::string toy_name = "T1";
        int cusps = 2;
        toy->add_option("--name", toy_name);
        toy->add_option("--cusps", cusps, "1, 2 or 3");
        add_opts(toy);
        toy->callback([&] {
            opts.witness_bound = Int(wb);
            opts.legendre = parse_legendre_condition(legendre_name);
            emit(run_pipeline_toy(toy_name, cusps, opts), out_path);
        });
        auto* cfgcmd = p->add_subcommand("config", "write a shipped verifier config as JSON");
        cfgcmd->add_option("--name", toy_name);
        cfgcmd->add_option("--cusps", cusps);
        cfgcmd->callback([&] {
            if (toy_name != "T1") throw CLI::ValidationError("unknown config name");
            emit(to_ojson(make_toy_config(cusps)), out_path);
        });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
