#include "quadrica/lattice.hpp"
#include "quadrica/error.hpp"

#include <algorithm>

namespace quadrica {

QMatrix QMatrix::identity(int n) {
    QMatrix m(n);
    for (int i = 0; i < n; ++i) m.at(i, i) = 1;
    return m;
}

QMatrix QMatrix::diagonal(const std::vector<Int>& d) {
    QMatrix m(static_cast<int>(d.size()));
    for (int i = 0; i < m.dim(); ++i) m.at(i, i) = Rat(d[i]);
    return m;
}

QMatrix QMatrix::operator*(const QMatrix& o) const {
    if (n_ != o.n_) throw dimension_error("matrix product dimension mismatch");
    QMatrix r(n_);
    for (int i = 0; i < n_; ++i)
        for (int k = 0; k < n_; ++k) {
            const Rat& aik = at(i, k);
            if (aik == 0) continue;
            for (int j = 0; j < n_; ++j)
                r.at(i, j) += aik * o.at(k, j);
        }
    return r;
}

QMatrix QMatrix::operator+(const QMatrix& o) const {
    if (n_ != o.n_) throw dimension_error("matrix sum dimension mismatch");
    QMatrix r(n_);
    for (size_t i = 0; i < e_.size(); ++i) r.e_[i] = e_[i] + o.e_[i];
    return r;
}

QMatrix QMatrix::operator-(const QMatrix& o) const {
    if (n_ != o.n_) throw dimension_error("matrix difference dimension mismatch");
    QMatrix r(n_);
    for (size_t i = 0; i < e_.size(); ++i) r.e_[i] = e_[i] - o.e_[i];
    return r;
}

QMatrix QMatrix::scaled(const Rat& c) const {
    QMatrix r(n_);
    for (size_t i = 0; i < e_.size(); ++i) r.e_[i] = e_[i] * c;
    return r;
}

QMatrix QMatrix::transpose() const {
    QMatrix r(n_);
    for (int i = 0; i < n_; ++i)
        for (int j = 0; j < n_; ++j)
            r.at(j, i) = at(i, j);
    return r;
}

bool QMatrix::is_identity() const {
    for (int i = 0; i < n_; ++i)
        for (int j = 0; j < n_; ++j)
            if (at(i, j) != (i == j ? 1 : 0)) return false;
    return true;
}

bool QMatrix::is_zero() const {
    return std::all_of(e_.begin(), e_.end(), [](const Rat& x) { return x == 0; });
}

QVector QMatrix::apply(const QVector& x) const {
    if (static_cast<int>(x.size()) != n_) throw dimension_error("matrix-vector dimension mismatch");
    QVector y(n_, Rat(0));
    for (int i = 0; i < n_; ++i)
        for (int j = 0; j < n_; ++j)
            if (at(i, j) != 0) y[i] += at(i, j) * x[j];
    return y;
}

namespace {

// Gauss-Jordan on an augmented copy; returns rank, transforms rows in place.
int row_reduce(std::vector<QVector>& rows, int cols) {
    int rank = 0;
    for (int col = 0; col < cols && rank < static_cast<int>(rows.size()); ++col) {
        int piv = -1;
        for (int r = rank; r < static_cast<int>(rows.size()); ++r)
            if (rows[r][col] != 0) { piv = r; break; }
        if (piv < 0) continue;
        std::swap(rows[rank], rows[piv]);
        Rat inv = 1 / rows[rank][col];
        for (int j = 0; j < static_cast<int>(rows[rank].size()); ++j) rows[rank][j] *= inv;
        for (int r = 0; r < static_cast<int>(rows.size()); ++r) {
            if (r == rank || rows[r][col] == 0) continue;
            Rat f = rows[r][col];
            for (int j = 0; j < static_cast<int>(rows[r].size()); ++j)
                rows[r][j] -= f * rows[rank][j];
        }
        ++rank;
    }
    return rank;
}

} // namespace

QMatrix QMatrix::inverse() const {
    std::vector<QVector> rows(n_, QVector(2 * n_, Rat(0)));
    for (int i = 0; i < n_; ++i) {
        for (int j = 0; j < n_; ++j) rows[i][j] = at(i, j);
        rows[i][n_ + i] = 1;
    }
    if (row_reduce(rows, n_) != n_) throw singular_matrix("inverse of singular matrix");
    QMatrix r(n_);
    for (int i = 0; i < n_; ++i)
        for (int j = 0; j < n_; ++j)
            r.at(i, j) = rows[i][n_ + j];
    return r;
}

Rat QMatrix::det() const {
    std::vector<QVector> rows(n_, QVector(n_, Rat(0)));
    for (int i = 0; i < n_; ++i)
        for (int j = 0; j < n_; ++j) rows[i][j] = at(i, j);
    Rat d = 1;
    int sign = 1;
    for (int col = 0, rr = 0; col < n_ && rr < n_; ++col, ++rr) {
        int piv = -1;
        for (int r = rr; r < n_; ++r)
            if (rows[r][col] != 0) { piv = r; break; }
        if (piv < 0) return 0;
        if (piv != rr) { std::swap(rows[piv], rows[rr]); sign = -sign; }
        d *= rows[rr][col];
        Rat inv = 1 / rows[rr][col];
        for (int r = rr + 1; r < n_; ++r) {
            if (rows[r][col] == 0) continue;
            Rat f = rows[r][col] * inv;
            for (int j = col; j < n_; ++j) rows[r][j] -= f * rows[rr][j];
        }
    }
    return (sign > 0) ? d : -d;
}

QMatrix matrix_power(const QMatrix& g, const Int& k) {
    Int e = k;
    QMatrix base = g;
    if (e < 0) {
        base = g.inverse();
        e = -e;
    }
    QMatrix acc = QMatrix::identity(g.dim());
    while (e > 0) {
        if (mpz_odd_p(e.get_mpz_t())) acc = acc * base;
        e >>= 1;
        if (e > 0) base = base * base;
    }
    return acc;
}

Rat form_value(const DiagonalForm& q, const QVector& x) {
    if (static_cast<int>(x.size()) != q.rank()) throw dimension_error("form/vector rank mismatch");
    Rat s = 0;
    for (int i = 0; i < q.rank(); ++i) s += Rat(q.coeffs[i]) * x[i] * x[i];
    return s;
}

Rat bilinear(const DiagonalForm& q, const QVector& x, const QVector& y) {
    if (x.size() != y.size() || static_cast<int>(x.size()) != q.rank())
        throw dimension_error("bilinear rank mismatch");
    Rat s = 0;
    for (int i = 0; i < q.rank(); ++i) s += Rat(q.coeffs[i]) * x[i] * y[i];
    return s;
}

bool preserves_form(const QMatrix& g, const DiagonalForm& q) {
    if (g.dim() != q.rank()) throw dimension_error("matrix/form rank mismatch");
    QMatrix a = QMatrix::diagonal(q.coeffs);
    return g.transpose() * a * g == a;
}

QMatrix corner_embed(const QMatrix& g) {
    QMatrix r(g.dim() + 1);
    for (int i = 0; i < g.dim(); ++i)
        for (int j = 0; j < g.dim(); ++j)
            r.at(i, j) = g.at(i, j);
    r.at(g.dim(), g.dim()) = 1;
    return r;
}

QMatrix embed_at_indices(const QMatrix& g, const std::vector<int>& idx, int dim) {
    if (static_cast<int>(idx.size()) != g.dim())
        throw dimension_error("index list does not match matrix dimension");
    QMatrix r = QMatrix::identity(dim);
    for (int i = 0; i < g.dim(); ++i) {
        if (idx[i] < 0 || idx[i] >= dim) throw invalid_input("embedding index out of range");
        r.at(idx[i], idx[i]) = 0;
    }
    for (int i = 0; i < g.dim(); ++i)
        for (int j = 0; j < g.dim(); ++j)
            r.at(idx[i], idx[j]) = g.at(i, j);
    return r;
}

QMatrix eichler_transvection(const DiagonalForm& q, const QVector& u, const QVector& v) {
    const int n = q.rank();
    if (static_cast<int>(u.size()) != n || static_cast<int>(v.size()) != n)
        throw dimension_error("transvection vector rank mismatch");
    if (std::all_of(u.begin(), u.end(), [](const Rat& x) { return x == 0; }))
        throw precondition_error("transvection base vector is zero");
    if (form_value(q, u) != 0)
        throw precondition_error("transvection base vector must be isotropic");
    if (bilinear(q, u, v) != 0)
        throw precondition_error("transvection direction must be orthogonal to the base vector");
    Rat qv = form_value(q, v);
    QMatrix m(n);
    for (int j = 0; j < n; ++j) {
        // image of e_j
        Rat bu = Rat(q.coeffs[j]) * u[j]; // b(e_j, u)
        Rat bv = Rat(q.coeffs[j]) * v[j]; // b(e_j, v)
        for (int i = 0; i < n; ++i) {
            Rat x = (i == j) ? Rat(1) : Rat(0);
            x += 2 * bu * v[i] - 2 * bv * u[i] - 2 * qv * bu * u[i];
            m.at(i, j) = x;
        }
    }
    return m;
}

bool is_unipotent(const QMatrix& g) {
    QMatrix n = g - QMatrix::identity(g.dim());
    QMatrix p = n;
    for (int k = 1; k < g.dim(); ++k) {
        if (p.is_zero()) return true;
        p = p * n;
    }
    return p.is_zero();
}

QMatrix unipotent_log(const QMatrix& g) {
    if (!is_unipotent(g)) throw precondition_error("log of a non-unipotent matrix");
    QMatrix n = g - QMatrix::identity(g.dim());
    QMatrix acc(g.dim());
    QMatrix p = n;
    int sign = 1;
    for (int k = 1; k <= g.dim() && !p.is_zero(); ++k) {
        acc = acc + p.scaled(Rat(sign, k));
        p = p * n;
        sign = -sign;
    }
    return acc;
}

QMatrix nilpotent_exp(const QMatrix& n) {
    QMatrix acc = QMatrix::identity(n.dim());
    QMatrix p = n;
    Int fact = 1;
    for (int k = 1; k <= n.dim() && !p.is_zero(); ++k) {
        fact *= k;
        acc = acc + p.scaled(Rat(Int(1), fact));
        p = p * n;
    }
    return acc;
}

bool is_so_plus(const QMatrix& g, const DiagonalForm& q) {
    if (!preserves_form(g, q)) return false;
    if (g.det() != 1) return false;
    auto [pos, neg] = q.signature();
    (void)pos;
    if (neg != 1) throw precondition_error("sheet test needs signature (n,1)");
    int t = -1;
    for (int i = 0; i < q.rank(); ++i)
        if (q.coeffs[i] < 0) { t = i; break; }
    // g applied to the timelike basis direction keeps the sheet iff the
    // timelike coordinate stays positive
    QVector x0(q.rank(), Rat(0));
    x0[t] = 1;
    return g.apply(x0)[t] > 0;
}

void validate_cusp(const CuspData& cusp, const DiagonalForm& q) {
    if (static_cast<int>(cusp.point.size()) != q.rank())
        throw invariant_error("cusp point rank mismatch");
    if (form_value(q, cusp.point) != 0)
        throw invariant_error("cusp point must be isotropic");
    if (std::all_of(cusp.point.begin(), cusp.point.end(), [](const Rat& x) { return x == 0; }))
        throw invariant_error("cusp point is zero");
    for (const QMatrix& g : cusp.generators) {
        if (!preserves_form(g, q)) throw invariant_error("cusp generator does not preserve the form");
        if (!is_unipotent(g)) throw invariant_error("cusp generator is not unipotent");
        if (g.apply(cusp.point) != cusp.point)
            throw invariant_error("cusp generator does not fix the cusp point");
    }
    for (size_t i = 0; i < cusp.generators.size(); ++i)
        for (size_t j = i + 1; j < cusp.generators.size(); ++j)
            if (!(cusp.generators[i] * cusp.generators[j] ==
                  cusp.generators[j] * cusp.generators[i]))
                throw invariant_error("cusp generators do not commute");
}

std::optional<std::vector<Int>> cusp_membership(const QMatrix& c, const CuspData& cusp,
                                                const DiagonalForm& q) {
    validate_cusp(cusp, q);
    return cusp_membership_unchecked(c, cusp, q);
}

std::optional<std::vector<Int>> cusp_membership_unchecked(const QMatrix& c, const CuspData& cusp,
                                                          const DiagonalForm& q) {
    if (c.dim() != q.rank()) throw dimension_error("membership matrix rank mismatch");
    if (!is_unipotent(c)) return std::nullopt;
    if (c.apply(cusp.point) != cusp.point) return std::nullopt;
    if (cusp.generators.empty())
        return c.is_identity() ? std::optional<std::vector<Int>>(std::vector<Int>{}) : std::nullopt;

    const int n = c.dim();
    QMatrix target = unipotent_log(c);
    std::vector<QVector> columns;
    for (const QMatrix& g : cusp.generators) {
        QMatrix l = unipotent_log(g);
        QVector col;
        col.reserve(static_cast<size_t>(n) * n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) col.push_back(l.at(i, j));
        columns.push_back(std::move(col));
    }
    QVector rhs;
    rhs.reserve(static_cast<size_t>(n) * n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) rhs.push_back(target.at(i, j));

    auto sol = solve_columns_unique(columns, rhs);
    if (!sol) return std::nullopt;
    std::vector<Int> exps;
    for (const Rat& x : *sol) {
        if (x.get_den() != 1) return std::nullopt;
        exps.push_back(x.get_num());
    }
    // exact verification of the product
    QMatrix prod = QMatrix::identity(n);
    for (size_t j = 0; j < exps.size(); ++j)
        prod = prod * matrix_power(cusp.generators[j], exps[j]);
    if (!(prod == c)) return std::nullopt;
    return exps;
}

std::vector<QVector> kernel_basis(const std::vector<QVector>& rows_in, int cols) {
    std::vector<QVector> rows = rows_in;
    for (auto& r : rows)
        if (static_cast<int>(r.size()) != cols) throw dimension_error("kernel row length mismatch");
    int rank = row_reduce(rows, cols);
    rows.resize(rank);
    // locate pivot columns
    std::vector<int> pivot_col(rank, -1);
    std::vector<bool> is_pivot(cols, false);
    for (int r = 0; r < rank; ++r) {
        for (int c = 0; c < cols; ++c)
            if (rows[r][c] != 0) { pivot_col[r] = c; is_pivot[c] = true; break; }
    }
    std::vector<QVector> basis;
    for (int c = 0; c < cols; ++c) {
        if (is_pivot[c]) continue;
        QVector v(cols, Rat(0));
        v[c] = 1;
        for (int r = 0; r < rank; ++r)
            if (pivot_col[r] >= 0) v[pivot_col[r]] = -rows[r][c];
        basis.push_back(std::move(v));
    }
    return basis;
}

std::optional<QVector> solve_columns_unique(const std::vector<QVector>& columns, const QVector& rhs) {
    const int m = static_cast<int>(rhs.size());
    const int k = static_cast<int>(columns.size());
    for (const auto& c : columns)
        if (static_cast<int>(c.size()) != m) throw dimension_error("solver column length mismatch");
    // build augmented rows [A | rhs]
    std::vector<QVector> rows(m, QVector(k + 1, Rat(0)));
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < k; ++j) rows[i][j] = columns[j][i];
        rows[i][k] = rhs[i];
    }
    row_reduce(rows, k);
    QVector sol(k, Rat(0));
    std::vector<bool> pinned(k, false);
    for (const auto& row : rows) {
        int lead = -1;
        for (int j = 0; j < k; ++j)
            if (row[j] != 0) { lead = j; break; }
        if (lead < 0) {
            if (row[k] != 0) return std::nullopt; // inconsistent
            continue;
        }
        // unique solution requires a fully reduced row: exactly one nonzero
        for (int j = lead + 1; j < k; ++j)
            if (row[j] != 0) return std::nullopt; // underdetermined
        sol[lead] = row[k];
        pinned[lead] = true;
    }
    for (bool p : pinned)
        if (!p && k > 0 && m > 0) return std::nullopt; // free variable
    return sol;
}

} // namespace quadrica
