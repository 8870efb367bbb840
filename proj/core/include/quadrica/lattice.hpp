#pragma once

#include "quadrica/qforms.hpp"

#include <optional>
#include <string>
#include <vector>

namespace quadrica {

using QVector = std::vector<Rat>;

// Square matrix with exact rational entries, row-major.
class QMatrix {
public:
    QMatrix() = default;
    explicit QMatrix(int n) : n_(n), e_(static_cast<size_t>(n) * n, Rat(0)) {}

    static QMatrix identity(int n);
    static QMatrix diagonal(const std::vector<Int>& d);

    int dim() const { return n_; }
    Rat& at(int i, int j) { return e_[static_cast<size_t>(i) * n_ + j]; }
    const Rat& at(int i, int j) const { return e_[static_cast<size_t>(i) * n_ + j]; }

    QMatrix operator*(const QMatrix& o) const;
    QMatrix operator+(const QMatrix& o) const;
    QMatrix operator-(const QMatrix& o) const;
    QMatrix scaled(const Rat& c) const;
    bool operator==(const QMatrix& o) const = default;

    QMatrix transpose() const;
    QMatrix inverse() const; // throws singular-matrix
    Rat det() const;
    bool is_identity() const;
    bool is_zero() const;
    QVector apply(const QVector& x) const;

private:
    int n_ = 0;
    std::vector<Rat> e_;
};

// Exact power with binary exponentiation; negative k via exact inverse.
QMatrix matrix_power(const QMatrix& g, const Int& k);

// q(x) and the bilinear form b(x,y) = sum a_i x_i y_i (so b(x,x) = q(x)).
Rat form_value(const DiagonalForm& q, const QVector& x);
Rat bilinear(const DiagonalForm& q, const QVector& x, const QVector& y);

// Exact test g^T A_q g = A_q.
bool preserves_form(const QMatrix& g, const DiagonalForm& q);

// Block embedding g -> g (+) [1].
QMatrix corner_embed(const QMatrix& g);

// g acting on the listed coordinates (in order), identity elsewhere.
QMatrix embed_at_indices(const QMatrix& g, const std::vector<int>& idx, int dim);

// x -> x + 2 b(x,u) v - 2 b(x,v) u - 2 q(v) b(x,u) u.
// Preconditions: q(u) = 0, u != 0, b(u,v) = 0. The output preserves q, is
// unipotent, fixes u, and E(u,v1) E(u,v2) = E(u, v1+v2) for v1, v2 ⊥ u.
QMatrix eichler_transvection(const DiagonalForm& q, const QVector& u, const QVector& v);

bool is_unipotent(const QMatrix& g);

// log of a unipotent matrix as the finite alternating sum; exact.
QMatrix unipotent_log(const QMatrix& g);

// exp of a nilpotent matrix as the finite sum; exact.
QMatrix nilpotent_exp(const QMatrix& n);

// det = +1 and preservation of the upper hyperboloid sheet (signature (n,1)).
bool is_so_plus(const QMatrix& g, const DiagonalForm& q);

struct CuspData {
    int index = 0;
    QVector point;                            // isotropic fixed vector u_i
    std::vector<std::string> generator_names; // parallel to generators
    std::vector<QMatrix> generators;          // commuting unipotents fixing point
};

// Checks the CuspData invariants against q; throws invariant-error.
void validate_cusp(const CuspData& cusp, const DiagonalForm& q);

// Integer exponents (k_j) with prod gen_j^{k_j} = c, via exact linear algebra
// on unipotent logs, verified by exact product. nullopt when c is not in the
// cusp subgroup (or not unipotent, or moves the fixed vector).
std::optional<std::vector<Int>> cusp_membership(const QMatrix& c, const CuspData& cusp,
                                                const DiagonalForm& q);

// As cusp_membership, but assumes the CuspData invariants were already
// validated (hot paths revalidating per call would dominate).
std::optional<std::vector<Int>> cusp_membership_unchecked(const QMatrix& c, const CuspData& cusp,
                                                          const DiagonalForm& q);

// --- generic exact linear algebra helpers ---

// Basis of the null space of an m x n rational matrix (rows x cols).
std::vector<QVector> kernel_basis(const std::vector<QVector>& rows, int cols);

// Solves A x = b for rectangular A given by columns; unique solution or
// nullopt (no solution or underdetermined).
std::optional<QVector> solve_columns_unique(const std::vector<QVector>& columns, const QVector& rhs);

} // namespace quadrica
