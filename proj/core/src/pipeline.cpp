#include "quadrica/pipeline.hpp"
#include "quadrica/error.hpp"
#include "quadrica/json_io.hpp"

#include <algorithm>
#include <chrono>
#include <thread>
#include <set>
#include <sstream>

namespace quadrica {

ChainAssignment assign_stable_letters(int n, int N,
                                      const std::vector<std::map<int, QMatrix>>& cusp_chains) {
    if (n < 4) throw precondition_error("ambient dimension must be >= 4");
    if (N <= n - 3)
        throw precondition_error("cusp count must exceed n-3: N = " + std::to_string(N) +
                                 ", n = " + std::to_string(n));
    if (static_cast<int>(cusp_chains.size()) < N)
        throw precondition_error("missing cusp chains: have " +
                                 std::to_string(cusp_chains.size()) + ", need " + std::to_string(N));
    ChainAssignment out;
    out.n = n;
    out.N = N;
    for (int i = 0; i < N; ++i) {
        ChainAssignmentEntry e;
        e.i = i;
        if (n == 4) {
            e.requested_k = 2; // the single extra parabolic per cusp
        } else if (i <= n - 3) {
            e.requested_k = i + 2;
        } else {
            e.requested_k = 2;
        }
        e.used_k = std::min(e.requested_k, n - 2);
        e.clamped = (e.used_k != e.requested_k);
        if (e.used_k < 2)
            throw precondition_error("chain level below 2 at cusp " + std::to_string(i));
        if (!cusp_chains[i].count(e.used_k))
            throw precondition_error("missing parabolic p(" + std::to_string(e.used_k) + "," +
                                     std::to_string(i) + ")");
        e.label = "p(" + std::to_string(e.used_k) + "," + std::to_string(i) + ")";
        out.any_clamped = out.any_clamped || e.clamped;
        out.table.push_back(e);
    }
    return out;
}

namespace {

// intersection of span(basis) with ker(g - sigma I)
std::vector<QVector> intersect_eigenspace(const std::vector<QVector>& basis, const QMatrix& g,
                                          int sigma) {
    if (basis.empty()) return {};
    const int n = g.dim();
    const int k = static_cast<int>(basis.size());
    // rows of the n x k matrix (g - sigma) * basis_j
    std::vector<QVector> rows(n, QVector(k, Rat(0)));
    for (int j = 0; j < k; ++j) {
        QVector img = g.apply(basis[j]);
        for (int i = 0; i < n; ++i) rows[i][j] = img[i] - Rat(sigma) * basis[j][i];
    }
    std::vector<QVector> coeffs = kernel_basis(rows, k);
    std::vector<QVector> out;
    for (const QVector& c : coeffs) {
        QVector v(n, Rat(0));
        for (int j = 0; j < k; ++j)
            for (int i = 0; i < n; ++i) v[i] += c[j] * basis[j][i];
        out.push_back(std::move(v));
    }
    return out;
}

QVector normalize_primitive(const QVector& v) {
    Int l = 1;
    for (const Rat& x : v) mpz_lcm(l.get_mpz_t(), l.get_mpz_t(), x.get_den().get_mpz_t());
    std::vector<Int> w;
    Int g = 0;
    for (const Rat& x : v) {
        Rat y = x * Rat(l);
        w.push_back(y.get_num());
        mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), w.back().get_mpz_t());
    }
    if (g == 0) return v;
    int sign = 0;
    for (const Int& x : w)
        if (x != 0) { sign = (x > 0) ? 1 : -1; break; }
    QVector out;
    for (const Int& x : w) out.push_back(Rat(x / g * sign));
    return out;
}

// congruence diagonalization of the form restricted to span(basis); returns
// representative vectors with q(v) > 0
std::vector<QVector> positive_vectors_in(const DiagonalForm& q, std::vector<QVector> vecs) {
    std::vector<QVector> out;
    size_t i = 0;
    while (i < vecs.size()) {
        if (form_value(q, vecs[i]) == 0) {
            // try to make the pivot anisotropic with a later vector
            bool fixed = false;
            for (size_t j = i + 1; j < vecs.size() && !fixed; ++j) {
                if (bilinear(q, vecs[i], vecs[j]) != 0) {
                    for (size_t t = 0; t < vecs[i].size(); ++t) vecs[i][t] += vecs[j][t];
                    fixed = true;
                }
            }
            if (!fixed && form_value(q, vecs[i]) == 0) {
                ++i; // isotropic direction orthogonal to the rest; no sign
                continue;
            }
        }
        Rat qi = form_value(q, vecs[i]);
        if (qi > 0) out.push_back(normalize_primitive(vecs[i]));
        for (size_t j = i + 1; j < vecs.size(); ++j) {
            Rat c = bilinear(q, vecs[j], vecs[i]) / qi;
            for (size_t t = 0; t < vecs[j].size(); ++t) vecs[j][t] -= c * vecs[i][t];
        }
        ++i;
    }
    return out;
}

} // namespace

DensityReport hyperplane_invariance_check(const std::vector<QMatrix>& gens, const DiagonalForm& q,
                                          const std::vector<int>& corner_indices) {
    if (gens.size() > 20) throw invalid_input("sign-pattern enumeration capped at 20 generators");
    for (const QMatrix& g : gens)
        if (!preserves_form(g, q)) throw invalid_input("generator does not preserve the form");

    DensityReport rep;
    rep.generator_count = static_cast<int>(gens.size());
    rep.degenerate = std::all_of(gens.begin(), gens.end(),
                                 [](const QMatrix& g) { return g.is_identity(); });

    const int n = q.rank();
    std::vector<QVector> full;
    for (int i = 0; i < n; ++i) {
        QVector e(n, Rat(0));
        e[i] = 1;
        full.push_back(std::move(e));
    }

    std::function<void(size_t, std::vector<QVector>)> dfs = [&](size_t gi,
                                                                std::vector<QVector> basis) {
        if (basis.empty()) {
            rep.patterns_pruned++;
            return;
        }
        if (gi == gens.size()) {
            rep.patterns_examined++;
            for (QVector& v : positive_vectors_in(q, basis))
                rep.invariant_vectors.push_back(std::move(v));
            return;
        }
        for (int sigma : {+1, -1})
            dfs(gi + 1, intersect_eigenspace(basis, gens[gi], sigma));
    };
    dfs(0, full);

    if (!corner_indices.empty()) {
        std::vector<bool> inside(n, false);
        for (int i : corner_indices) inside[i] = true;
        for (const QMatrix& g : gens) {
            if (g.is_identity()) continue;
            bool corner = true;
            for (int j = 0; j < n && corner; ++j) {
                QVector e(n, Rat(0));
                e[j] = 1;
                QVector img = g.apply(e);
                if (inside[j]) {
                    for (int i = 0; i < n; ++i)
                        if (!inside[i] && img[i] != 0) corner = false;
                } else {
                    if (!(img == e)) corner = false;
                }
            }
            if (corner) {
                rep.contains_corner_block = true;
                break;
            }
        }
    }
    return rep;
}

namespace {

QVector unit_vector(int n, int i) {
    QVector e(n, Rat(0));
    e[i] = 1;
    return e;
}

struct CuspSpec {
    QVector point; // in subform coordinates
    std::vector<int> dirs; // subform coordinate positions for the two transvections
};

} // namespace

GroupConfig make_toy_config(int num_cusps) {
    if (num_cusps < 1 || num_cusps > 3) throw invalid_input("toy config has 1..3 cusps");
    GroupConfig cfg;
    cfg.q = DiagonalForm({-1, 1, 1, 1, 1});
    cfg.subform_indices = {0, 1, 2, 3};
    cfg.name = (num_cusps == 2) ? "T1" : ("T1-" + std::to_string(num_cusps) + "cusp");

    const int n = 5;
    std::vector<CuspSpec> specs = {
        {{Rat(1), Rat(1), Rat(0), Rat(0), Rat(0)}, {2, 3}},
        {{Rat(1), Rat(-1), Rat(0), Rat(0), Rat(0)}, {2, 3}},
        {{Rat(1), Rat(0), Rat(1), Rat(0), Rat(0)}, {1, 3}},
    };
    const char* names = "ABCDEF";
    for (int c = 0; c < num_cusps; ++c) {
        CuspData cusp;
        cusp.index = c;
        cusp.point = specs[c].point;
        for (int d = 0; d < 2; ++d) {
            QMatrix gen = eichler_transvection(cfg.q, cusp.point, unit_vector(n, specs[c].dirs[d]));
            std::string name(1, names[2 * c + d]);
            cfg.generator_names.push_back(name);
            cfg.base_generators.push_back(gen);
            cusp.generator_names.push_back(name);
            cusp.generators.push_back(std::move(gen));
        }
        cfg.cusps.push_back(std::move(cusp));
        cfg.stable_letters.push_back(eichler_transvection(cfg.q, specs[c].point, unit_vector(n, 4)));
    }
    return cfg;
}

namespace {

// first N projectively distinct primitive isotropic vectors in scan order
std::vector<std::vector<Int>> collect_isotropic_points(const DiagonalForm& f, int N,
                                                       const Int& bound) {
    std::vector<std::vector<Int>> found;
    auto seen = [&](const std::vector<Int>& v) {
        for (const auto& w : found) {
            // primitive vectors: projectively equal iff equal up to sign
            bool eq = true, eqneg = true;
            for (size_t i = 0; i < v.size(); ++i) {
                if (v[i] != w[i]) eq = false;
                if (v[i] != -w[i]) eqneg = false;
            }
            if (eq || eqneg) return true;
        }
        return false;
    };
    // continue the deterministic shell scan, accumulating distinct points
    const int n = f.rank();
    auto nth_value = [](long k, long shell) -> long {
        if (k == 2 * shell) return 0;
        return (k % 2 == 0) ? k / 2 + 1 : -(k / 2 + 1);
    };
    const long B = bound.get_si();
    std::vector<Int> x(n);
    for (long shell = 1; shell <= B && static_cast<int>(found.size()) < N; ++shell) {
        std::vector<long> idx(n, 0);
        while (static_cast<int>(found.size()) < N) {
            long maxc = 0;
            Int val = 0;
            for (int i = 0; i < n; ++i) {
                long vi = nth_value(idx[i], shell);
                maxc = std::max(maxc, std::labs(vi));
                x[i] = vi;
                val += f.coeffs[i] * vi * vi;
            }
            if (maxc == shell && val == 0) {
                Int g = 0;
                for (const Int& c : x) mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), c.get_mpz_t());
                if (g == 1 && !seen(x)) found.push_back(x);
            }
            int i = n - 1;
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
    if (static_cast<int>(found.size()) < N)
        throw search_exhausted("found only " + std::to_string(found.size()) + " of " +
                               std::to_string(N) + " isotropic points within bound " +
                               bound.get_str());
    return found;
}

// two transvection directions orthogonal to u inside the subform, independent
// modulo u
std::vector<QVector> transvection_directions(const DiagonalForm& f, const QVector& u) {
    const int n = f.rank();
    std::vector<QVector> row(1, QVector(n, Rat(0)));
    for (int i = 0; i < n; ++i) row[0][i] = Rat(f.coeffs[i]) * u[i];
    std::vector<QVector> kern = kernel_basis(row, n);
    // keep directions independent modulo u: rank of {u, v} must be 2
    std::vector<QVector> dirs;
    std::vector<QVector> span{u};
    for (const QVector& v : kern) {
        std::vector<QVector> test = span;
        test.push_back(v);
        // rank via row reduction on copies
        std::vector<QVector> rows = test;
        int cols = n;
        int rank = 0;
        for (int col = 0; col < cols && rank < static_cast<int>(rows.size()); ++col) {
            int piv = -1;
            for (int r = rank; r < static_cast<int>(rows.size()); ++r)
                if (rows[r][col] != 0) { piv = r; break; }
            if (piv < 0) continue;
            std::swap(rows[rank], rows[piv]);
            for (int r = 0; r < static_cast<int>(rows.size()); ++r) {
                if (r == rank || rows[r][col] == 0) continue;
                Rat fct = rows[r][col] / rows[rank][col];
                for (int j2 = 0; j2 < cols; ++j2) rows[r][j2] -= fct * rows[rank][j2];
            }
            ++rank;
        }
        if (rank == static_cast<int>(span.size()) + 1) {
            dirs.push_back(normalize_primitive(v));
            span.push_back(v);
        }
        if (dirs.size() == 2) break;
    }
    if (dirs.size() < 2) throw invariant_error("could not find two transvection directions");
    return dirs;
}

} // namespace

GroupConfig build_config_from_params(const Int& S, const Int& a, const PipelineOptions& opts) {
    MontesinosReport mrep = montesinos_form(S, a, opts.legendre);
    SubformSelection sel =
        select_isotropic_subform(mrep.form, opts.legendre, opts.witness_bound, opts.scan_cap);

    GroupConfig cfg;
    cfg.q = sel.q;
    cfg.subform_indices = sel.indices;
    cfg.D = opts.D;
    cfg.precision_bits = opts.precision_bits;
    cfg.sweep = opts.sweep;
    cfg.name = "params-S" + S.get_str() + "-a" + a.get_str();

    const int n = cfg.q.rank();
    int comp = -1;
    {
        std::vector<bool> inside(n, false);
        for (int i : cfg.subform_indices) inside[i] = true;
        for (int i = 0; i < n; ++i)
            if (!inside[i]) comp = i;
    }

    // two cusp points: the subform witness and its last-nonzero sign flip
    std::vector<std::vector<Int>> pts;
    pts.push_back(sel.witness);
    {
        std::vector<Int> flip = sel.witness;
        for (int i = static_cast<int>(flip.size()) - 1; i >= 0; --i)
            if (flip[i] != 0) { flip[i] = -flip[i]; break; }
        pts.push_back(flip);
    }

    for (int c = 0; c < 2; ++c) {
        QVector uf(sel.f.rank(), Rat(0));
        for (int i = 0; i < sel.f.rank(); ++i) uf[i] = Rat(pts[c][i]);
        std::vector<QVector> dirs = transvection_directions(sel.f, uf);
        CuspData cusp;
        cusp.index = c;
        cusp.point = QVector(n, Rat(0));
        for (int i = 0; i < sel.f.rank(); ++i) cusp.point[cfg.subform_indices[i]] = uf[i];
        for (int d = 0; d < 2; ++d) {
            QMatrix gf = eichler_transvection(sel.f, uf, dirs[d]);
            QMatrix g = embed_at_indices(gf, cfg.subform_indices, n);
            std::string name = std::string(d == 0 ? "A" : "B") + std::to_string(c);
            cfg.generator_names.push_back(name);
            cfg.base_generators.push_back(g);
            cusp.generator_names.push_back(name);
            cusp.generators.push_back(std::move(g));
        }
        cfg.stable_letters.push_back(eichler_transvection(cfg.q, cusp.point, unit_vector(n, comp)));
        cfg.cusps.push_back(std::move(cusp));
    }
    return cfg;
}

SweepReport faithfulness_sweep(const GroupConfig& cfg, const SweepBounds& bounds, double D,
                               long precision_bits, bool timing) {
    validate_config(cfg);
    auto t0 = std::chrono::steady_clock::now();
    const mpfr_prec_t prec = static_cast<mpfr_prec_t>(precision_bits);

    SweepReport rep;
    rep.bounds = bounds;
    rep.D = D;
    rep.precision_bits = precision_bits;
    rep.level = choose_horoball_levels(cfg, D, prec);

    GroupConfig powered = cfg;
    for (size_t i = 0; i < cfg.cusps.size(); ++i) {
        PowerChoice pc = choose_power(cfg.stable_letters[i], Horoball{cfg.cusps[i].point, rep.level},
                                      cfg.subform_indices, cfg.q, D, prec);
        rep.powers.push_back(pc.power);
        rep.power_displacements.push_back(pc.displacement.str(20));
        powered.stable_letters[i] = matrix_power(cfg.stable_letters[i], pc.power);
    }
    std::vector<Rat> levels(cfg.cusps.size(), rep.level);

    // exact basepoint in the subform plane
    int t = -1;
    for (int i = 0; i < cfg.q.rank(); ++i)
        if (cfg.q.coeffs[i] < 0) { t = i; break; }
    QVector basepoint;
    {
        const QVector& u0 = cfg.cusps.empty() ? QVector() : cfg.cusps[0].point;
        if (u0.empty()) throw precondition_error("sweep needs at least one cusp");
        Rat at(cfg.q.coeffs[t]);
        Rat alpha = (Rat(-1) - at) / (2 * at * u0[t]);
        basepoint = QVector(cfg.q.rank(), Rat(0));
        for (int i = 0; i < cfg.q.rank(); ++i) basepoint[i] = alpha * u0[i];
        basepoint[t] += 1;
        if (basepoint[t] < 0)
            for (Rat& c : basepoint) c = -c;
    }

    // phase 1: enumerate, exact nontriviality, queue certificate jobs
    std::vector<Word> cert_queue;
    enumerate_reduced_words(powered, bounds, [&](const Word& w, const QMatrix& m) {
        int ell = base_syllable_count(w);
        rep.words++;
        rep.by_ell[ell]++;
        if (w.syllables.empty()) return true;
        if (m.is_identity()) {
            std::string msg = "nonempty reduced word evaluates to the identity: " + word_str(w, cfg);
            if (ell >= 2) throw faithfulness_violation(msg);
            rep.failures.push_back(msg);
            return true;
        }
        if (ell >= 2) cert_queue.push_back(w);
        return true;
    });

    // phase 2: certificates, parallel over contiguous chunks; the merge below
    // is order-deterministic, so the thread count never changes the report
    rep.certificates = static_cast<long>(cert_queue.size());
    if (!cert_queue.empty()) {
        unsigned n_threads = std::max(1u, std::min(8u, std::thread::hardware_concurrency()));
        if (cert_queue.size() < 256) n_threads = 1;
        struct ChunkResult {
            Real min_angle, min_len;
            std::vector<std::pair<size_t, std::string>> failures;
            std::string error;
        };
        std::vector<ChunkResult> results(n_threads,
                                         ChunkResult{Real::pos_infinity(prec),
                                                     Real::pos_infinity(prec), {}, {}});
        auto worker = [&](unsigned tid) {
            size_t lo = cert_queue.size() * tid / n_threads;
            size_t hi = cert_queue.size() * (tid + 1) / n_threads;
            ChunkResult& out = results[tid];
            try {
                GeodesicBuilder builder(powered, levels, basepoint, prec, bounds.E);
                for (size_t i = lo; i < hi; ++i) {
                    const Word& w = cert_queue[i];
                    BrokenGeodesic bg = builder.build(w);
                    Certificate cert = check_certificate(bg, D, base_syllable_count(w), prec);
                    if (cert.min_angle_margin < out.min_angle) out.min_angle = cert.min_angle_margin;
                    if (cert.min_length_margin < out.min_len) out.min_len = cert.min_length_margin;
                    if (!cert.pass)
                        out.failures.push_back({i, "certificate failed (" + cert.failure +
                                                       ") for: " + word_str(w, cfg)});
                }
            } catch (const std::exception& e) {
                out.error = e.what();
            }
        };
        if (n_threads == 1) {
            worker(0);
        } else {
            std::vector<std::thread> pool;
            for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(worker, t);
            for (auto& th : pool) th.join();
        }
        Real min_angle = Real::pos_infinity(prec), min_len = Real::pos_infinity(prec);
        std::vector<std::pair<size_t, std::string>> all_failures;
        for (const ChunkResult& r : results) {
            if (!r.error.empty()) throw invariant_error("certificate worker failed: " + r.error);
            if (r.min_angle < min_angle) min_angle = r.min_angle;
            if (r.min_len < min_len) min_len = r.min_len;
            all_failures.insert(all_failures.end(), r.failures.begin(), r.failures.end());
        }
        std::sort(all_failures.begin(), all_failures.end());
        for (auto& [idx, msg] : all_failures) rep.failures.push_back(msg);
        rep.min_angle_margin = min_angle.str(20);
        rep.min_length_margin = min_len.str(20);
    }
    if (timing) {
        auto t1 = std::chrono::steady_clock::now();
        rep.runtime_ms =
            std::chrono::duration_cast<std::chrono::milliseconds>(t1 - t0).count();
    }
    return rep;
}

namespace {

template <typename F>
auto run_stage(const std::string& name, F&& f) {
    try {
        return f();
    } catch (const Error& e) {
        throw Error(e.code(), "[stage " + name + "] " + e.what());
    }
}

Word relation_to_word(const std::vector<int>& letters, int num_base) {
    std::vector<Syllable> syl;
    for (int l : letters) {
        int idx = std::abs(l);
        if (idx <= num_base) {
            syl.push_back(BaseSyllable{{l}});
        } else {
            syl.push_back(StableSyllable{idx - num_base - 1, Int(l > 0 ? 1 : -1)});
        }
    }
    return make_word(std::move(syl));
}

ojson pipeline_tail(const GroupConfig& cfg, const PipelineOptions& opts,
                    const std::vector<std::map<int, QMatrix>>& chains) {
    ojson stages = ojson::object();
    run_stage("config-validate", [&] {
        validate_config(cfg);
        return 0;
    });
    stages["config"] = to_ojson(cfg);

    Presentation pres = run_stage("presentation", [&] { return folded_presentation(cfg); });
    {
        bool all_identity = true;
        const int m = static_cast<int>(cfg.base_generators.size());
        for (const auto& rel : pres.relations) {
            Word w = relation_to_word(rel, m);
            if (!evaluate(w, cfg).is_identity()) all_identity = false;
        }
        ojson pj = to_ojson(pres);
        pj["relationsEvaluateToIdentity"] = all_identity;
        stages["presentation"] = pj;
        if (!all_identity)
            throw invariant_error("[stage presentation] relation fails to evaluate to identity");
    }

    const int n_dim = cfg.q.rank() - 1;
    ChainAssignment assign = run_stage("assignment", [&] {
        return assign_stable_letters(n_dim, static_cast<int>(cfg.cusps.size()), chains);
    });
    stages["assignment"] = to_ojson(assign);

    const mpfr_prec_t prec = static_cast<mpfr_prec_t>(opts.precision_bits);
    Rat level = run_stage("horoballs", [&] { return choose_horoball_levels(cfg, opts.D, prec); });
    {
        ojson hj = ojson::object();
        hj["level"] = rat_to_string(level);
        ojson pd = ojson::array();
        for (size_t i = 0; i < cfg.cusps.size(); ++i)
            for (size_t j = i + 1; j < cfg.cusps.size(); ++j) {
                Real d = horoball_distance(Horoball{cfg.cusps[i].point, level},
                                           Horoball{cfg.cusps[j].point, level}, cfg.q, prec);
                pd.push_back({{"i", i}, {"j", j}, {"distance", d.str(20)}});
            }
        hj["pairwiseDistances"] = pd;
        stages["horoballs"] = hj;
    }

    {
        ojson powers = ojson::array();
        for (size_t i = 0; i < cfg.cusps.size(); ++i) {
            PowerChoice pc = run_stage("powers", [&] {
                return choose_power(cfg.stable_letters[i], Horoball{cfg.cusps[i].point, level},
                                    cfg.subform_indices, cfg.q, opts.D, prec);
            });
            powers.push_back({{"cusp", i},
                              {"power", pc.power.get_str()},
                              {"displacement", pc.displacement.str(20)}});
        }
        stages["powers"] = powers;
    }

    if (opts.run_sweep) {
        SweepReport sweep = run_stage("sweep", [&] {
            return faithfulness_sweep(cfg, cfg.sweep, opts.D, opts.precision_bits, opts.timing);
        });
        stages["sweep"] = to_ojson(sweep);
        if (!sweep.failures.empty())
            throw invariant_error("[stage sweep] " + std::to_string(sweep.failures.size()) +
                                  " failures");
    }

    {
        DensityReport base_only = run_stage("density", [&] {
            return hyperplane_invariance_check(cfg.base_generators, cfg.q, cfg.subform_indices);
        });
        std::vector<QMatrix> all = cfg.base_generators;
        for (const QMatrix& t : cfg.stable_letters) all.push_back(t);
        DensityReport with_stable = run_stage("density", [&] {
            return hyperplane_invariance_check(all, cfg.q, cfg.subform_indices);
        });
        ojson dj = ojson::object();
        dj["baseOnly"] = to_ojson(base_only);
        dj["withStableLetters"] = to_ojson(with_stable);
        stages["density"] = dj;
    }
    return stages;
}

std::vector<std::map<int, QMatrix>> rank5_chains(const GroupConfig& cfg) {
    std::vector<std::map<int, QMatrix>> chains;
    for (size_t i = 0; i < cfg.cusps.size(); ++i)
        chains.push_back({{2, cfg.stable_letters[i]}});
    return chains;
}

} // namespace

ojson run_pipeline_from_params(const Int& S, const Int& a, const PipelineOptions& opts) {
    ojson report = ojson::object();
    report["schema"] = "quadrica.pipeline.report/1";
    report["input"] = {{"kind", "params"},
                       {"S", S.get_str()},
                       {"a", a.get_str()},
                       {"legendreCondition", legendre_condition_name(opts.legendre)}};
    report["options"] = to_ojson(opts);

    ojson stages = ojson::object();
    MontesinosReport mrep = run_stage("montesinos", [&] { return montesinos_form(S, a, opts.legendre); });
    stages["montesinos"] = to_ojson(mrep);

    SubformSelection sel = run_stage("subform", [&] {
        return select_isotropic_subform(mrep.form, opts.legendre, opts.witness_bound, opts.scan_cap);
    });
    stages["subform"] = to_ojson(sel);

    SubformChain chain = run_stage("chain", [&] { return subform_chain(sel.q, opts.witness_bound); });
    stages["chain"] = to_ojson(chain);

    GroupConfig cfg = run_stage("config", [&] { return build_config_from_params(S, a, opts); });
    ojson tail = pipeline_tail(cfg, opts, rank5_chains(cfg));
    for (auto& [k, v] : tail.items()) stages[k] = v;
    report["stages"] = stages;
    return report;
}

ojson run_pipeline_from_form(const DiagonalForm& q, const PipelineOptions& opts) {
    // parametric shapes route through the dedicated path
    try {
        auto [S, a] = montesinos_parameters_of(q);
        return run_pipeline_from_params(S, a, opts);
    } catch (const Error&) {
        // general signature-(n,1) route
    }
    ojson report = ojson::object();
    report["schema"] = "quadrica.pipeline.report/1";
    report["input"] = {{"kind", "form"}, {"coeffs", to_ojson(q)}};
    report["options"] = to_ojson(opts);
    ojson stages = ojson::object();

    SubformChain chain = run_stage("chain", [&] { return subform_chain(q, opts.witness_bound); });
    stages["chain"] = to_ojson(chain);
    if (!chain.complete)
        throw Error("chain-tail", "[stage chain] " + chain.failure);

    const DiagonalForm& f3 = chain.steps.back().form;
    const std::vector<int>& idx3 = chain.steps.back().indices_in_root;
    const int n = q.rank();       // rank n = dim + 1
    const int dim = n - 1;
    const int N = dim - 2;        // N > dim - 3

    GroupConfig cfg;
    cfg.q = q;
    cfg.subform_indices = idx3;
    cfg.D = opts.D;
    cfg.precision_bits = opts.precision_bits;
    cfg.sweep = opts.sweep;
    cfg.name = "form" + q.str();

    // added coordinate at each chain level, walking back up the chain
    std::vector<int> added; // added[j] = coordinate gained from f_{3+j} to f_{4+j}
    {
        std::vector<std::vector<int>> all_indices;
        for (auto it = chain.steps.rbegin(); it != chain.steps.rend(); ++it)
            all_indices.push_back(it->indices_in_root);
        std::vector<int> full(n);
        for (int i = 0; i < n; ++i) full[i] = i;
        all_indices.push_back(full);
        for (size_t j = 0; j + 1 < all_indices.size(); ++j) {
            std::set<int> small(all_indices[j].begin(), all_indices[j].end());
            for (int i : all_indices[j + 1])
                if (!small.count(i)) added.push_back(i);
        }
    }

    auto pts = run_stage("cusps", [&] { return collect_isotropic_points(f3, N, opts.witness_bound); });
    std::vector<std::map<int, QMatrix>> chains;
    for (int c = 0; c < N; ++c) {
        QVector uf(f3.rank(), Rat(0));
        for (int i = 0; i < f3.rank(); ++i) uf[i] = Rat(pts[c][i]);
        QVector uq(n, Rat(0));
        for (int i = 0; i < f3.rank(); ++i) uq[idx3[i]] = uf[i];
        std::vector<QVector> dirs = transvection_directions(f3, uf);
        CuspData cusp;
        cusp.index = c;
        cusp.point = uq;
        for (int d = 0; d < 2; ++d) {
            QMatrix g = embed_at_indices(eichler_transvection(f3, uf, dirs[d]), idx3, n);
            std::string name = std::string(d == 0 ? "A" : "B") + std::to_string(c);
            cfg.generator_names.push_back(name);
            cfg.base_generators.push_back(g);
            cusp.generator_names.push_back(name);
            cusp.generators.push_back(std::move(g));
        }
        cfg.cusps.push_back(std::move(cusp));
        std::map<int, QMatrix> levels_for_cusp;
        for (size_t j = 0; j < added.size(); ++j)
            levels_for_cusp.emplace(static_cast<int>(j) + 2,
                                    eichler_transvection(q, uq, unit_vector(n, added[j])));
        chains.push_back(std::move(levels_for_cusp));
    }
    ChainAssignment assign = run_stage("assignment", [&] {
        return assign_stable_letters(dim, N, chains);
    });
    for (int c = 0; c < N; ++c)
        cfg.stable_letters.push_back(chains[c].at(assign.table[c].used_k));

    ojson tail = pipeline_tail(cfg, opts, chains);
    for (auto& [k, v] : tail.items()) stages[k] = v;
    report["stages"] = stages;
    return report;
}

ojson run_pipeline_toy(const std::string& name, int num_cusps, const PipelineOptions& opts) {
    if (name != "T1") throw invalid_input("unknown toy config: " + name);
    GroupConfig cfg = make_toy_config(num_cusps);
    cfg.D = opts.D;
    cfg.precision_bits = opts.precision_bits;
    cfg.sweep = opts.sweep;
    ojson report = ojson::object();
    report["schema"] = "quadrica.pipeline.report/1";
    report["input"] = {{"kind", "toy"}, {"name", cfg.name}, {"cusps", num_cusps}};
    report["options"] = to_ojson(opts);
    report["stages"] = pipeline_tail(cfg, opts, rank5_chains(cfg));
    return report;
}

} // namespace quadrica
