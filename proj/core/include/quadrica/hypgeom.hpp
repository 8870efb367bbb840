#pragma once

#include "quadrica/grouppres.hpp"
#include "quadrica/real.hpp"

#include <optional>
#include <vector>

namespace quadrica {

using RVector = std::vector<Real>;

RVector to_real(const QVector& v, mpfr_prec_t prec);
Real form_value_r(const DiagonalForm& q, const RVector& x);
Real bilinear_r(const DiagonalForm& q, const RVector& x, const RVector& y);

// Point on the upper sheet of q(x) = -1 (signature (n,1)).
struct HPoint {
    RVector x;
};

// Scales a timelike vector onto the unit hyperboloid, upper sheet.
HPoint normalize_point(const RVector& x, const DiagonalForm& q);
HPoint hpoint_of(const QVector& x, const DiagonalForm& q, mpfr_prec_t prec);

Real distance(const HPoint& a, const HPoint& b, const DiagonalForm& q);

// Horoball {x : |b(x, center)| <= level}; center exact isotropic.
struct Horoball {
    QVector center;
    Rat level;
};

// Signed boundary-to-boundary distance along the joining geodesic:
// log(|b(u,u')| / (2 s s')); negative when the balls overlap.
Real horoball_distance(const Horoball& a, const Horoball& b, const DiagonalForm& q,
                       mpfr_prec_t prec);

// Unit-speed ray γ(t) = base cosh t + dir sinh t asymptotic to the ideal
// center as t -> +inf; |b(γ(t), u)| decreases strictly.
struct Ray {
    HPoint base;
    RVector dir;
    QVector ideal;
};

Ray ray_to_ideal(const HPoint& x, const QVector& u, const DiagonalForm& q);
HPoint ray_point(const Ray& r, const Real& t, const DiagonalForm& q);

struct Segment {
    HPoint a, b;
};
Segment segment_between(const HPoint& a, const HPoint& b);

// Parameter where the ray crosses the horosphere |b| = level. For the ray's
// own asymptotic center the closed form log(|b(base,u)|/s); for other
// horoballs the two-sided exponential equation, error when it misses.
Real truncate_parameter(const Ray& r, const Horoball& h, const DiagonalForm& q);
HPoint truncate_at_horosphere(const Ray& r, const Horoball& h, const DiagonalForm& q);

// Angle in [0, pi] between segments sharing the endpoint p, measured between
// tangents pointing away from p into each segment.
Real angle_at(const DiagonalForm& q, const HPoint& p, const Segment& s1, const Segment& s2,
              double join_tol = 1e-9);

// --- exact-skeleton helpers (rational joint data) ---

// Entry point of the ray from x0 (exact, q(x0) = -1) toward isotropic u at
// level s, together with the away tangent -γ'(t*); both exact.
struct ExactRayEntry {
    QVector point;
    QVector away_tangent;
    Rat ratio; // e^{t*} = |b(x0,u)| / s
};
ExactRayEntry ray_entry_exact(const DiagonalForm& q, const QVector& x0, const QVector& u,
                              const Rat& s);

// The truncation points of the geodesic joining two ideal centers: exit of
// ball (c1, s1) and entry of ball (c2, s2); both exact.
struct ExactConnector {
    QVector exit_c1;
    QVector entry_c2;
    Rat abs_b; // |b(c1, c2)|
};
ExactConnector connector_exact(const DiagonalForm& q, const QVector& c1, const Rat& s1,
                               const QVector& c2, const Rat& s2);

// Uniform horoball level for the config's cusp family: start 1/2, halve until
// every pairwise distance and the worst-case unit-b floor clear D (+1e-6).
Rat choose_horoball_levels(const GroupConfig& cfg, double D, mpfr_prec_t prec);

struct PowerChoice {
    Int power;
    Real displacement;  // at the chosen power
    QVector fixture;    // the point on the horosphere within the plane
};

// Least j >= 1 with distance(x, p^j x) >= D for the fixture point x on the
// horosphere within the plane; doubling then bisection.
PowerChoice choose_power(const QMatrix& p, const Horoball& h, const std::vector<int>& plane,
                         const DiagonalForm& q, double D, mpfr_prec_t prec);

struct GeoSegment {
    enum class Kind { Ray, Chord, Connector };
    Kind kind = Kind::Chord;
    QVector a, b;          // exact endpoints (for rays, the finite truncation point is b or a)
    bool a_ideal = false;  // traversal start escapes to the ideal boundary
    bool b_ideal = false;
    int carrier_prefix = -1; // lies in prefix_k · H_G (1-based prefix index)
    int ball = -1;           // chords: index of the containing horoball
    Real length;             // +inf for rays
    RVector report_a, report_b; // clipped numeric endpoints for rays
};

struct GeoJoint {
    QVector point;
    Rat cos_num;     // b(t_before, t_after), exact; angle > pi/2 iff < 0
    Rat cos_den_sq;  // q(t_before) q(t_after), exact, > 0
    Real angle;
};

struct BrokenGeodesic {
    int ell = 0;
    std::vector<GeoSegment> segments; // 2*ell - 1 of them
    std::vector<GeoJoint> joints;     // 2*ell - 2 of them
    int designated_joint = -1;        // entry of ball ell-1 (condition 3)
    Real designated_orthogonality;    // angle between segment and radial direction
    bool designated_carrier_ok = false;
    QVector basepoint, endpoint;
    std::vector<QVector> centers;     // c_1 .. c_{ell-1}
    std::vector<Rat> ball_levels;
};

// The inductive broken-geodesic construction for a reduced word with l >= 2
// over a config whose stable letters are already raised to their powers.
// levels: horoball level per cusp. basepoint: exact with q = -1, upper sheet,
// supported on the subform coordinates.
BrokenGeodesic build_broken_geodesic(const Word& w, const GroupConfig& powered_cfg,
                                     const std::vector<Rat>& levels, const QVector& basepoint,
                                     mpfr_prec_t prec);

// Amortizes stable-letter powers and shared word prefixes across many
// builds. Words must arrive Britton-reduced (sweeps enumerate them so).
class GeodesicBuilder {
public:
    GeodesicBuilder(const GroupConfig& powered_cfg, std::vector<Rat> levels, QVector basepoint,
                    mpfr_prec_t prec, int max_exponent);
    BrokenGeodesic build(const Word& w);

private:
    const GroupConfig& cfg_;
    std::vector<Rat> levels_;
    QVector basepoint_;
    mpfr_prec_t prec_;
    int max_exponent_;
    std::vector<std::vector<QMatrix>> stable_powers_; // [cusp][power-order index]
    std::vector<Syllable> memo_syllables_;
    std::vector<QMatrix> memo_prefixes_; // prefixes[i] after syllable 2i-1
    const QMatrix& stable_power(int cusp, const Int& k);
    std::vector<QMatrix> power_scratch_;
};

struct CertificateItem {
    std::string what;
    bool pass = false;
    Real margin;
};

struct Certificate {
    double D = 0;
    int ell = 0;
    int segment_count = 0;
    bool count_ok = false, lengths_ok = false, angles_ok = false, orthogonality_ok = false;
    bool pass = false;
    std::vector<CertificateItem> items;
    Real min_angle_margin;   // min over joints of angle - pi/2
    Real min_length_margin;  // min over finite segments of length - D
    std::string failure;     // first failing item
};

// Verifies count = 2l-1, finite lengths >= D, joint angles > pi/2 and the
// designated orthogonality, each with margin at least 1e-9.
Certificate check_certificate(const BrokenGeodesic& bg, double D, int ell, mpfr_prec_t prec);

} // namespace quadrica
