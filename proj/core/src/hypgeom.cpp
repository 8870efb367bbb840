#include "quadrica/hypgeom.hpp"
#include "quadrica/error.hpp"

#include <algorithm>
#include <cmath>

namespace quadrica {

namespace {

QVector qv_combine(const QVector& a, const Rat& ca, const QVector& b, const Rat& cb) {
    QVector r(a.size());
    for (size_t i = 0; i < a.size(); ++i) r[i] = a[i] * ca + b[i] * cb;
    return r;
}

bool qv_zero(const QVector& v) {
    return std::all_of(v.begin(), v.end(), [](const Rat& x) { return x == 0; });
}

Real clamp_unit(const Real& x) {
    Real one = Real::of(1.0, x.prec());
    if (x > one) return one;
    if (x < -one) return -one;
    return x;
}

} // namespace

RVector to_real(const QVector& v, mpfr_prec_t prec) {
    RVector r;
    r.reserve(v.size());
    for (const Rat& x : v) r.push_back(Real::of(x, prec));
    return r;
}

Real form_value_r(const DiagonalForm& q, const RVector& x) {
    if (static_cast<int>(x.size()) != q.rank()) throw dimension_error("form/vector rank mismatch");
    Real s(x.empty() ? 64 : x[0].prec());
    for (int i = 0; i < q.rank(); ++i)
        s = s + Real::of(q.coeffs[i], x[i].prec()) * x[i] * x[i];
    return s;
}

Real bilinear_r(const DiagonalForm& q, const RVector& x, const RVector& y) {
    if (x.size() != y.size() || static_cast<int>(x.size()) != q.rank())
        throw dimension_error("bilinear rank mismatch");
    Real s(x.empty() ? 64 : x[0].prec());
    for (int i = 0; i < q.rank(); ++i)
        s = s + Real::of(q.coeffs[i], x[i].prec()) * x[i] * y[i];
    return s;
}

namespace {

int timelike_index(const DiagonalForm& q) {
    auto [pos, neg] = q.signature();
    (void)pos;
    if (neg != 1) throw precondition_error("hyperboloid model needs signature (n,1)");
    for (int i = 0; i < q.rank(); ++i)
        if (q.coeffs[i] < 0) return i;
    return -1;
}

} // namespace

HPoint normalize_point(const RVector& x, const DiagonalForm& q) {
    Real v = form_value_r(q, x);
    if (!(v.sign() < 0)) throw invalid_input("point is not timelike: q(x) >= 0");
    Real scale = Real::of(1.0, x[0].prec()) / sqrt(-v);
    int t = timelike_index(q);
    if (x[t].sign() < 0) scale = -scale;
    HPoint p;
    p.x.reserve(x.size());
    for (const Real& c : x) p.x.push_back(c * scale);
    return p;
}

HPoint hpoint_of(const QVector& x, const DiagonalForm& q, mpfr_prec_t prec) {
    return normalize_point(to_real(x, prec), q);
}

Real distance(const HPoint& a, const HPoint& b, const DiagonalForm& q) {
    Real c = -bilinear_r(q, a.x, b.x);
    Real one = Real::of(1.0, c.prec());
    if (c < one) c = one; // rounding guard at coincident points
    return acosh(c);
}

Real horoball_distance(const Horoball& a, const Horoball& b, const DiagonalForm& q,
                       mpfr_prec_t prec) {
    Rat bb = bilinear(q, a.center, b.center);
    if (bb == 0) throw precondition_error("horoball centers coincide as ideal points");
    Rat arg = abs(bb) / (2 * a.level * b.level);
    return log(Real::of(arg, prec));
}

Ray ray_to_ideal(const HPoint& x, const QVector& u, const DiagonalForm& q) {
    if (qv_zero(u)) throw precondition_error("degenerate ideal center");
    {
        Rat qu = form_value(q, u);
        if (qu != 0) throw precondition_error("ideal center must be isotropic");
    }
    RVector ur = to_real(u, x.x[0].prec());
    Real bu = bilinear_r(q, x.x, ur);
    if (bu.sign() == 0) throw precondition_error("ray basepoint orthogonal to the ideal center");
    Ray r;
    r.base = x;
    r.ideal = u;
    Real minus_inv = -(Real::of(1.0, bu.prec()) / bu);
    r.dir.reserve(x.x.size());
    for (size_t i = 0; i < x.x.size(); ++i) r.dir.push_back(ur[i] * minus_inv - x.x[i]);
    return r;
}

HPoint ray_point(const Ray& r, const Real& t, const DiagonalForm& q) {
    (void)q;
    Real ch = cosh(t), sh = sinh(t);
    HPoint p;
    p.x.reserve(r.base.x.size());
    for (size_t i = 0; i < r.base.x.size(); ++i)
        p.x.push_back(r.base.x[i] * ch + r.dir[i] * sh);
    return p;
}

Segment segment_between(const HPoint& a, const HPoint& b) { return Segment{a, b}; }

Real truncate_parameter(const Ray& r, const Horoball& h, const DiagonalForm& q) {
    mpfr_prec_t prec = r.base.x[0].prec();
    RVector u = to_real(h.center, prec);
    Real bb = bilinear_r(q, r.base.x, u);
    Real bd = bilinear_r(q, r.dir, u);
    Real s = Real::of(h.level, prec);
    Real half = Real::of(0.5, prec);
    Real A = (bb + bd) * half;
    Real B = (bb - bd) * half;
    // b(gamma(t), u) = A e^t + B e^{-t}
    Real tiny = Real::of(1e-30, prec) * (abs(bb) + abs(bd));
    if (abs(A) <= tiny) {
        // asymptotic to the center: |B| e^{-t} = s
        return log(abs(B) / s);
    }
    // solve A z^2 -+ s z + B = 0 for z = e^t > 0, both sign cases
    bool found = false;
    Real best(prec);
    for (int sgn : {+1, -1}) {
        Real sv = Real::of(sgn, prec) * s;
        Real disc = sv * sv - Real::of(4.0, prec) * A * B;
        if (disc.sign() < 0) continue;
        Real root = sqrt(disc);
        for (int branch : {+1, -1}) {
            Real z = (sv + Real::of(branch, prec) * root) / (Real::of(2.0, prec) * A);
            if (!(z.sign() > 0)) continue;
            Real t = log(z);
            if (t < Real::of(-1e-12, prec)) continue; // behind the ray
            if (!found || t < best) {
                best = t;
                found = true;
            }
        }
    }
    if (!found) throw no_intersection("ray does not meet the horosphere");
    return best;
}

HPoint truncate_at_horosphere(const Ray& r, const Horoball& h, const DiagonalForm& q) {
    return ray_point(r, truncate_parameter(r, h, q), q);
}

Real angle_at(const DiagonalForm& q, const HPoint& p, const Segment& s1, const Segment& s2,
              double join_tol) {
    mpfr_prec_t prec = p.x[0].prec();
    auto near = [&](const HPoint& a) {
        Real tol = Real::of(join_tol, prec);
        for (size_t i = 0; i < p.x.size(); ++i)
            if (abs(a.x[i] - p.x[i]) > tol) return false;
        return true;
    };
    auto away = [&](const Segment& s) -> RVector {
        bool a_at = near(s.a), b_at = near(s.b);
        if (a_at == b_at)
            throw precondition_error("segment does not have exactly one endpoint at the joint");
        const HPoint& other = a_at ? s.b : s.a;
        Real b = bilinear_r(q, p.x, other.x);
        RVector w(p.x.size(), Real(prec));
        for (size_t i = 0; i < p.x.size(); ++i) w[i] = other.x[i] + b * p.x[i];
        return w;
    };
    RVector v = away(s1), w = away(s2);
    Real num = bilinear_r(q, v, w);
    Real den = sqrt(bilinear_r(q, v, v) * bilinear_r(q, w, w));
    if (den.sign() <= 0) throw precondition_error("degenerate tangent at the joint");
    return acos(clamp_unit(num / den));
}

ExactRayEntry ray_entry_exact(const DiagonalForm& q, const QVector& x0, const QVector& u,
                              const Rat& s) {
    if (s <= 0) throw precondition_error("horoball level must be positive");
    if (form_value(q, x0) != -1) throw precondition_error("basepoint must satisfy q(x) = -1");
    if (form_value(q, u) != 0) throw precondition_error("center must be isotropic");
    Rat b0 = bilinear(q, x0, u);
    if (b0 == 0) throw precondition_error("basepoint orthogonal to the center");
    Rat rho = abs(b0) / s; // e^{t*}
    QVector w = qv_combine(u, Rat(-1) / b0, x0, Rat(-1));
    Rat ch = (rho + 1 / rho) / 2;
    Rat sh = (rho - 1 / rho) / 2;
    ExactRayEntry out;
    out.point = qv_combine(x0, ch, w, sh);
    out.away_tangent = qv_combine(x0, -sh, w, -ch);
    out.ratio = rho;
    return out;
}

ExactConnector connector_exact(const DiagonalForm& q, const QVector& c1, const Rat& s1,
                               const QVector& c2, const Rat& s2) {
    Rat b = bilinear(q, c1, c2);
    if (b == 0) throw precondition_error("connector centers coincide as ideal points");
    if (b > 0) throw precondition_error("connector centers must lie on the forward cone");
    Rat absb = -b;
    ExactConnector out;
    out.exit_c1 = qv_combine(c1, Rat(1) / (2 * s1), c2, s1 / absb);
    out.entry_c2 = qv_combine(c1, s2 / absb, c2, Rat(1) / (2 * s2));
    out.abs_b = absb;
    return out;
}

Rat choose_horoball_levels(const GroupConfig& cfg, double D, mpfr_prec_t prec) {
    if (cfg.cusps.empty()) throw precondition_error("no cusps to place horoballs at");
    Real target = Real::of(D, prec) + Real::of(1e-6, prec);
    Rat s(1, 2);
    for (int round = 0; round < 64; ++round) {
        bool ok = true;
        // worst-case floor: translate centers are integral, |b| >= 1
        Real floor_d = log(Real::of(Rat(1) / (2 * s * s), prec));
        if (floor_d < target) ok = false;
        for (size_t i = 0; i < cfg.cusps.size() && ok; ++i)
            for (size_t j = i + 1; j < cfg.cusps.size() && ok; ++j) {
                Horoball a{cfg.cusps[i].point, s}, b{cfg.cusps[j].point, s};
                if (horoball_distance(a, b, cfg.q, prec) < target) ok = false;
            }
        if (ok) return s;
        s /= 2;
    }
    throw search_exhausted("no horoball level clears the separation target in 64 halvings");
}

PowerChoice choose_power(const QMatrix& p, const Horoball& h, const std::vector<int>& plane,
                         const DiagonalForm& q, double D, mpfr_prec_t prec) {
    // parabolic must preserve the boundary horosphere
    if (!preserves_form(p, q)) throw precondition_error("power base does not preserve the form");
    {
        QVector pu = p.apply(h.center);
        if (!(pu == h.center))
            throw precondition_error("power base does not fix the horoball center");
    }
    int t = timelike_index(q);
    if (std::find(plane.begin(), plane.end(), t) == plane.end())
        throw precondition_error("plane must contain the timelike coordinate");
    if (h.center[t] == 0) throw precondition_error("degenerate center: zero timelike coordinate");

    // exact basepoint in the plane: alpha * u + e_t scaled onto q = -1
    const Rat at = Rat(q.coeffs[t]);
    QVector e_t(q.rank(), Rat(0));
    e_t[t] = 1;
    Rat alpha = (Rat(-1) - at) / (2 * at * h.center[t]);
    QVector x0 = qv_combine(h.center, alpha, e_t, Rat(1));
    if (x0[t] < 0)
        for (Rat& c : x0) c = -c;

    ExactRayEntry entry = ray_entry_exact(q, x0, h.center, h.level);
    QVector fixture = entry.point;

    Real coshD = cosh(Real::of(D, prec));
    auto disp_ok = [&](const Int& j, Real* out_disp) {
        QMatrix pj = matrix_power(p, j);
        QVector y = pj.apply(fixture);
        if (y == fixture) {
            if (j == 1) throw degenerate_parabolic("power base fixes the fixture point");
            return false;
        }
        Rat c = -bilinear(q, fixture, y);
        Real cr = Real::of(c, prec);
        if (out_disp) {
            Real one = Real::of(1.0, prec);
            *out_disp = acosh(cr < one ? one : cr);
        }
        return cr >= coshD;
    };

    PowerChoice out;
    out.fixture = fixture;
    if (D <= 0) {
        out.power = 1;
        disp_ok(1, &out.displacement);
        return out;
    }
    Int hi = 1;
    Real disp(prec);
    if (disp_ok(hi, &disp)) {
        out.power = 1;
        out.displacement = disp;
        return out;
    }
    Int lo = 1;
    for (int rounds = 0;; ++rounds) {
        if (rounds > 60)
            throw degenerate_parabolic("displacement does not reach the target in 2^60 powers");
        lo = hi;
        hi *= 2;
        if (disp_ok(hi, nullptr)) break;
    }
    while (lo + 1 < hi) {
        Int mid = (lo + hi) / 2;
        if (disp_ok(mid, nullptr))
            hi = mid;
        else
            lo = mid;
    }
    out.power = hi;
    disp_ok(hi, &out.displacement);
    return out;
}

namespace {

struct WordParts {
    std::vector<BaseSyllable> bases;    // m_1 .. m_l
    std::vector<StableSyllable> stables; // between them
};

WordParts split_word(const Word& w) {
    WordParts parts;
    for (const auto& s : w.syllables) {
        if (std::holds_alternative<BaseSyllable>(s))
            parts.bases.push_back(std::get<BaseSyllable>(s));
        else
            parts.stables.push_back(std::get<StableSyllable>(s));
    }
    return parts;
}

} // namespace

namespace {

void validate_geodesic_inputs(const GroupConfig& cfg, const std::vector<Rat>& levels,
                              const QVector& basepoint) {
    const DiagonalForm& q = cfg.q;
    if (levels.size() != cfg.cusps.size())
        throw precondition_error("one horoball level per cusp required");
    if (form_value(q, basepoint) != -1)
        throw precondition_error("basepoint must satisfy q(x) = -1 exactly");
    int t = timelike_index(q);
    if (basepoint[t] <= 0) throw precondition_error("basepoint must lie on the upper sheet");
    std::vector<bool> in_plane(q.rank(), false);
    for (int i : cfg.subform_indices) in_plane[i] = true;
    for (int i = 0; i < q.rank(); ++i)
        if (!in_plane[i] && basepoint[i] != 0)
            throw precondition_error("basepoint must lie in the subform plane");
}

BrokenGeodesic build_from_prefixes(const GroupConfig& cfg, const WordParts& parts,
                                   const std::vector<QMatrix>& prefixes,
                                   const std::vector<Rat>& levels, const QVector& basepoint,
                                   mpfr_prec_t prec) {
    const DiagonalForm& q = cfg.q;
    const int ell = static_cast<int>(parts.bases.size());
    if (ell < 2) throw precondition_error("broken geodesic needs l >= 2 (use the matrix test)");

    BrokenGeodesic bg;
    bg.ell = ell;
    bg.basepoint = basepoint;
    bg.endpoint = prefixes[ell].apply(basepoint);
    for (int k = 1; k <= ell - 1; ++k) {
        bg.centers.push_back(prefixes[k].apply(cfg.cusps[parts.stables[k - 1].cusp].point));
        bg.ball_levels.push_back(levels[parts.stables[k - 1].cusp]);
    }
    for (int k = 0; k + 1 < static_cast<int>(bg.centers.size()); ++k)
        if (bilinear(q, bg.centers[k], bg.centers[k + 1]) == 0)
            throw invariant_error("consecutive horoball centers coincide (word not reduced?)");

    // joint points
    ExactRayEntry first = ray_entry_exact(q, basepoint, bg.centers.front(), bg.ball_levels.front());
    if (first.ratio <= 1)
        throw precondition_error("basepoint lies inside the first horoball");
    ExactRayEntry last = ray_entry_exact(q, bg.endpoint, bg.centers.back(), bg.ball_levels.back());
    if (last.ratio <= 1)
        throw precondition_error("endpoint lies inside the last horoball");

    std::vector<QVector> entry(ell), exit(ell); // entry/exit of ball k at [k-1]
    entry[0] = first.point;
    std::vector<ExactConnector> connectors;
    for (int k = 1; k <= ell - 2; ++k) {
        ExactConnector c = connector_exact(q, bg.centers[k - 1], bg.ball_levels[k - 1],
                                           bg.centers[k], bg.ball_levels[k]);
        connectors.push_back(c);
        exit[k - 1] = c.exit_c1;
        entry[k] = c.entry_c2;
    }
    exit[ell - 2] = last.point;

    const Real inf = Real::pos_infinity(prec);
    auto chord_length = [&](const QVector& a, const QVector& b) {
        Rat c = -bilinear(q, a, b);
        Real cr = Real::of(c, prec);
        Real one = Real::of(1.0, prec);
        return acosh(cr < one ? one : cr);
    };

    // segments: ray, then per ball k: chord, connector (except after last ball)
    {
        GeoSegment s;
        s.kind = GeoSegment::Kind::Ray;
        s.a = basepoint; // traversal starts at the ideal far end; basepoint recorded
        s.b = entry[0];
        s.a_ideal = true;
        s.carrier_prefix = 1;
        s.length = inf;
        bg.segments.push_back(std::move(s));
    }
    for (int k = 1; k <= ell - 1; ++k) {
        GeoSegment chord;
        chord.kind = GeoSegment::Kind::Chord;
        chord.a = entry[k - 1];
        chord.b = exit[k - 1];
        chord.ball = k;
        chord.length = chord_length(chord.a, chord.b);
        bg.segments.push_back(std::move(chord));
        if (k <= ell - 2) {
            GeoSegment conn;
            conn.kind = GeoSegment::Kind::Connector;
            conn.a = exit[k - 1];
            conn.b = entry[k];
            conn.carrier_prefix = k + 1;
            conn.length = log(Real::of(
                connectors[k - 1].abs_b / (2 * bg.ball_levels[k - 1] * bg.ball_levels[k]), prec));
            bg.segments.push_back(std::move(conn));
        }
    }
    {
        GeoSegment s;
        s.kind = GeoSegment::Kind::Ray;
        s.a = exit[ell - 2];
        s.b = bg.endpoint; // traversal continues past the endpoint to the ideal far end
        s.b_ideal = true;
        s.carrier_prefix = ell;
        s.length = inf;
        bg.segments.push_back(std::move(s));
    }

    // joints with exact away-tangents
    auto ideal_tangent = [&](const QVector& p, const QVector& c) {
        Rat b = bilinear(q, p, c);
        if (b == 0) throw invariant_error("joint point orthogonal to an ideal center");
        return qv_combine(c, Rat(-1) / b, p, Rat(-1));
    };
    auto chord_tangent = [&](const QVector& p, const QVector& y) {
        Rat b = bilinear(q, p, y);
        return qv_combine(y, Rat(1), p, b);
    };
    auto push_joint = [&](const QVector& p, const QVector& t_before, const QVector& t_after) {
        GeoJoint j;
        j.point = p;
        if (qv_zero(t_before) || qv_zero(t_after)) {
            j.cos_num = 1;
            j.cos_den_sq = 1;
            j.angle = Real::of(0.0, prec);
        } else {
            j.cos_num = bilinear(q, t_before, t_after);
            j.cos_den_sq = form_value(q, t_before) * form_value(q, t_after);
            Real c = Real::of(j.cos_num, prec) / sqrt(Real::of(j.cos_den_sq, prec));
            j.angle = acos(clamp_unit(c));
        }
        bg.joints.push_back(std::move(j));
    };

    for (int k = 1; k <= ell - 1; ++k) {
        // joint at the entry of ball k
        QVector before = (k == 1) ? first.away_tangent : ideal_tangent(entry[k - 1], bg.centers[k - 2]);
        push_joint(entry[k - 1], before, chord_tangent(entry[k - 1], exit[k - 1]));
        // joint at the exit of ball k
        QVector after = (k <= ell - 2) ? ideal_tangent(exit[k - 1], bg.centers[k])
                                       : last.away_tangent;
        push_joint(exit[k - 1], chord_tangent(exit[k - 1], entry[k - 1]), after);
    }

    // condition 3: the third-to-last segment meets ball l-1 radially
    bg.designated_joint = 2 * ell - 4;
    {
        const QVector& p = entry[ell - 2];
        QVector radial = ideal_tangent(p, bg.centers[ell - 2]);
        QVector travel = radial;
        if (ell == 2) {
            // the first ray's forward direction at its truncation point
            travel.resize(first.away_tangent.size());
            for (size_t i = 0; i < travel.size(); ++i) travel[i] = -first.away_tangent[i];
        }
        Rat num = bilinear(q, travel, radial);
        Rat den2 = form_value(q, travel) * form_value(q, radial);
        Real c = Real::of(num, prec) / sqrt(Real::of(den2, prec));
        bg.designated_orthogonality = acos(clamp_unit(c));
        // carrier containment of the designated segment in prefix_{l-1} H_G:
        // x in g H_G iff b(x, g e_j) = 0 for every complement coordinate j,
        // using that g preserves the bilinear form
        int carrier = (ell == 2) ? 1 : ell - 1;
        std::vector<bool> in_plane(q.rank(), false);
        for (int i : cfg.subform_indices) in_plane[i] = true;
        std::vector<QVector> normals;
        for (int j = 0; j < q.rank(); ++j) {
            if (in_plane[j]) continue;
            QVector e(q.rank(), Rat(0));
            e[j] = 1;
            normals.push_back(prefixes[carrier].apply(e));
        }
        auto contained = [&](const QVector& v) {
            for (const QVector& nrm : normals)
                if (bilinear(q, v, nrm) != 0) return false;
            return true;
        };
        const GeoSegment& des = bg.segments[2 * ell - 4];
        bg.designated_carrier_ok = contained(des.b) && (des.a_ideal || contained(des.a));
    }

    // numeric reporting endpoints for the two rays (basepoint / word image
    // side); verdicts never use these
    bg.segments.front().report_a = to_real(basepoint, prec);
    bg.segments.front().report_b = to_real(bg.segments.front().b, prec);
    bg.segments.back().report_a = to_real(bg.segments.back().a, prec);
    bg.segments.back().report_b = to_real(bg.endpoint, prec);
    return bg;
}

} // namespace

BrokenGeodesic build_broken_geodesic(const Word& w, const GroupConfig& cfg,
                                     const std::vector<Rat>& levels, const QVector& basepoint,
                                     mpfr_prec_t prec) {
    validate_geodesic_inputs(cfg, levels, basepoint);
    Word reduced = britton_reduce(w, cfg);
    if (!(reduced == w)) throw precondition_error("word is not reduced");
    WordParts parts = split_word(w);
    const int ell = static_cast<int>(parts.bases.size());
    if (ell < 2) throw precondition_error("broken geodesic needs l >= 2 (use the matrix test)");

    std::vector<QMatrix> prefixes(ell + 1);
    QMatrix acc = evaluate_base(parts.bases[0], cfg);
    prefixes[1] = acc;
    for (int k = 2; k <= ell; ++k) {
        acc = acc * matrix_power(cfg.stable_letters[parts.stables[k - 2].cusp],
                                 parts.stables[k - 2].power);
        acc = acc * evaluate_base(parts.bases[k - 1], cfg);
        prefixes[k] = acc;
    }
    return build_from_prefixes(cfg, parts, prefixes, levels, basepoint, prec);
}

GeodesicBuilder::GeodesicBuilder(const GroupConfig& powered_cfg, std::vector<Rat> levels,
                                 QVector basepoint, mpfr_prec_t prec, int max_exponent)
    : cfg_(powered_cfg), levels_(std::move(levels)), basepoint_(std::move(basepoint)), prec_(prec),
      max_exponent_(max_exponent) {
    validate_geodesic_inputs(cfg_, levels_, basepoint_);
    stable_powers_.resize(cfg_.stable_letters.size());
    for (size_t c = 0; c < cfg_.stable_letters.size(); ++c)
        for (int k = 0; k < 2 * max_exponent_; ++k) {
            int mag = k / 2 + 1;
            Int pw = (k % 2 == 0) ? Int(mag) : Int(-mag);
            stable_powers_[c].push_back(matrix_power(cfg_.stable_letters[c], pw));
        }
}

const QMatrix& GeodesicBuilder::stable_power(int cusp, const Int& k) {
    if (abs(k) <= max_exponent_) {
        long kk = k.get_si();
        int idx = (kk > 0) ? 2 * static_cast<int>(kk - 1) : 2 * static_cast<int>(-kk) - 1;
        return stable_powers_[cusp][idx];
    }
    power_scratch_.push_back(matrix_power(cfg_.stable_letters[cusp], k));
    return power_scratch_.back();
}

BrokenGeodesic GeodesicBuilder::build(const Word& w) {
    WordParts parts = split_word(w);
    const int ell = static_cast<int>(parts.bases.size());
    if (ell < 2) throw precondition_error("broken geodesic needs l >= 2 (use the matrix test)");

    // reuse prefixes for the longest shared syllable run with the last word
    size_t shared = 0;
    while (shared < w.syllables.size() && shared < memo_syllables_.size() &&
           w.syllables[shared] == memo_syllables_[shared])
        ++shared;
    std::vector<QMatrix> prefixes(ell + 1);
    power_scratch_.clear();
    for (int k = 1; k <= ell; ++k) {
        size_t need = 2 * static_cast<size_t>(k) - 1; // syllables feeding prefix k
        if (need <= shared && k < static_cast<int>(memo_prefixes_.size())) {
            prefixes[k] = memo_prefixes_[k];
            continue;
        }
        if (k == 1) {
            prefixes[1] = evaluate_base(parts.bases[0], cfg_);
        } else {
            const StableSyllable& st = parts.stables[k - 2];
            prefixes[k] = prefixes[k - 1] * stable_power(st.cusp, st.power);
            if (!parts.bases[k - 1].letters.empty())
                prefixes[k] = prefixes[k] * evaluate_base(parts.bases[k - 1], cfg_);
        }
    }
    memo_syllables_ = w.syllables;
    memo_prefixes_ = prefixes;
    return build_from_prefixes(cfg_, parts, prefixes, levels_, basepoint_, prec_);
}

Certificate check_certificate(const BrokenGeodesic& bg, double D, int ell, mpfr_prec_t prec) {
    Certificate cert;
    cert.D = D;
    cert.ell = ell;
    cert.segment_count = static_cast<int>(bg.segments.size());
    const Real margin_floor = Real::of(1e-9, prec);
    const Real Dr = Real::of(D, prec);
    const Real half_pi = Real::pi(prec) * Real::of(0.5, prec);

    cert.count_ok = (cert.segment_count == 2 * ell - 1) && (bg.ell == ell);
    cert.items.push_back({"segment-count = 2l-1", cert.count_ok,
                          Real::of(cert.segment_count - (2 * ell - 1), prec)});

    cert.lengths_ok = true;
    cert.min_length_margin = Real::pos_infinity(prec);
    for (size_t i = 0; i < bg.segments.size(); ++i) {
        const GeoSegment& s = bg.segments[i];
        if (s.kind == GeoSegment::Kind::Ray) continue; // infinite
        Real margin = s.length - Dr;
        bool ok = margin >= margin_floor;
        cert.items.push_back({"segment " + std::to_string(i + 1) + " length >= D", ok, margin});
        if (margin < cert.min_length_margin) cert.min_length_margin = margin;
        cert.lengths_ok = cert.lengths_ok && ok;
    }

    cert.angles_ok = true;
    cert.min_angle_margin = Real::pos_infinity(prec);
    for (size_t i = 0; i < bg.joints.size(); ++i) {
        Real margin = bg.joints[i].angle - half_pi;
        bool ok = margin >= margin_floor;
        cert.items.push_back({"joint " + std::to_string(i + 1) + " angle > pi/2", ok, margin});
        if (margin < cert.min_angle_margin) cert.min_angle_margin = margin;
        cert.angles_ok = cert.angles_ok && ok;
    }

    {
        Real tol = Real::of(1e-9, prec);
        bool ortho = bg.designated_orthogonality <= tol && bg.designated_carrier_ok;
        cert.orthogonality_ok = ortho;
        cert.items.push_back({"third-to-last segment meets its horoball radially", ortho,
                              bg.designated_orthogonality});
    }

    cert.pass = cert.count_ok && cert.lengths_ok && cert.angles_ok && cert.orthogonality_ok;
    for (const auto& item : cert.items)
        if (!item.pass) {
            cert.failure = item.what;
            break;
        }
    return cert;
}

} // namespace quadrica
