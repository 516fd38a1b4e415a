#include "psc/sparse.hpp"

#include <algorithm>
#include <cmath>

namespace psc {

namespace {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm2(const std::vector<double>& a) { return std::sqrt(dot(a, a)); }

double residual_norm(const CsrMatrix& a, const std::vector<double>& b,
                     const std::vector<double>& x) {
    std::vector<double> r(b.size());
    a.multiply(x, r);
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = b[i] - r[i];
    return norm2(r);
}

} // namespace

void CsrMatrix::multiply(const std::vector<double>& x, std::vector<double>& y) const {
    y.assign(static_cast<std::size_t>(n), 0.0);
    for (std::int64_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (std::int64_t p = rowptr[i]; p < rowptr[i + 1]; ++p) s += val[p] * x[col[p]];
        y[i] = s;
    }
}

bool CsrMatrix::pattern_symmetric() const {
    for (std::int64_t i = 0; i < n; ++i) {
        for (std::int64_t p = rowptr[i]; p < rowptr[i + 1]; ++p) {
            const std::int32_t j = col[p];
            const std::int64_t lo = rowptr[j], hi = rowptr[j + 1];
            bool found = std::binary_search(col.begin() + lo, col.begin() + hi,
                                            static_cast<std::int32_t>(i));
            if (!found) return false;
        }
    }
    return true;
}

CsrMatrix csr_from_rows(std::int64_t n,
                        const std::vector<std::vector<std::pair<std::int32_t, double>>>& rows,
                        const std::vector<std::vector<std::uint8_t>>& prov_rows) {
    CsrMatrix m;
    m.n = n;
    m.rowptr.assign(static_cast<std::size_t>(n) + 1, 0);

    std::vector<std::size_t> order;
    for (std::int64_t i = 0; i < n; ++i) {
        const auto& row = rows[i];
        order.resize(row.size());
        for (std::size_t q = 0; q < row.size(); ++q) order[q] = q;
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return row[a].first < row[b].first;
        });
        std::int32_t last = -1;
        for (std::size_t q : order) {
            if (row[q].first == last) {
                m.val.back() += row[q].second;
                m.prov.back() |= prov_rows[i][q];
            } else {
                m.col.push_back(row[q].first);
                m.val.push_back(row[q].second);
                m.prov.push_back(prov_rows[i][q]);
                last = row[q].first;
            }
        }
        m.rowptr[i + 1] = static_cast<std::int64_t>(m.col.size());
    }
    return m;
}

void Ilu0::build(const CsrMatrix& a) {
    rowptr = a.rowptr;
    col = a.col;
    val = a.val;
    diag.assign(static_cast<std::size_t>(a.n), -1);
    for (std::int64_t i = 0; i < a.n; ++i)
        for (std::int64_t p = rowptr[i]; p < rowptr[i + 1]; ++p)
            if (col[p] == i) diag[i] = p;
    for (std::int64_t i = 0; i < a.n; ++i)
        if (diag[i] < 0) throw SolverError("ILU(0) needs a structurally full diagonal");

    // pattern-limited incomplete factorization (columns are sorted per row)
    for (std::int64_t i = 0; i < a.n; ++i) {
        for (std::int64_t p = rowptr[i]; p < rowptr[i + 1] && col[p] < i; ++p) {
            const std::int32_t k = col[p];
            const double piv = val[diag[k]];
            if (piv == 0.0) throw SolverError("zero pivot in ILU(0)");
            const double f = val[p] / piv;
            val[p] = f;
            std::int64_t pk = diag[k] + 1;
            std::int64_t pi = p + 1;
            const std::int64_t endk = rowptr[k + 1];
            const std::int64_t endi = rowptr[i + 1];
            while (pk < endk && pi < endi) {
                if (col[pk] == col[pi]) {
                    val[pi] -= f * val[pk];
                    ++pk;
                    ++pi;
                } else if (col[pk] < col[pi]) {
                    ++pk;
                } else {
                    ++pi;
                }
            }
        }
    }
}

void Ilu0::apply(const std::vector<double>& r, std::vector<double>& z) const {
    const std::int64_t n = static_cast<std::int64_t>(diag.size());
    z.assign(r.begin(), r.end());
    for (std::int64_t i = 0; i < n; ++i) {
        double s = z[i];
        for (std::int64_t p = rowptr[i]; col[p] < i; ++p) s -= val[p] * z[col[p]];
        z[i] = s;
    }
    for (std::int64_t i = n - 1; i >= 0; --i) {
        double s = z[i];
        for (std::int64_t p = diag[i] + 1; p < rowptr[i + 1]; ++p) s -= val[p] * z[col[p]];
        z[i] = s / val[diag[i]];
    }
}

SolveStats bicgstab(const CsrMatrix& a, const std::vector<double>& b,
                    std::vector<double>& x, double tol, int max_iter) {
    const std::size_t n = static_cast<std::size_t>(a.n);
    if (x.size() != n) x.assign(n, 0.0);
    Ilu0 prec;
    prec.build(a);

    SolveStats st;
    st.method = "bicgstab+ilu0";
    const double bnorm = norm2(b);
    if (bnorm == 0.0) {
        x.assign(n, 0.0);
        st.converged = true;
        st.rel_residual = 0.0;
        return st;
    }

    std::vector<double> r(n), r0(n), p(n, 0.0), v(n, 0.0), s(n), t(n), phat(n), shat(n);
    int used = 0;

    // recurrence residuals drift from the true residual; restart from the
    // current iterate until the recomputed residual meets the tolerance
    for (int restart = 0; restart < 4 && used < max_iter; ++restart) {
        a.multiply(x, r);
        for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - r[i];
        if (norm2(r) / bnorm < tol) break;
        r0 = r;
        double rho = 1.0, alpha = 1.0, omega = 1.0;
        std::fill(p.begin(), p.end(), 0.0);
        std::fill(v.begin(), v.end(), 0.0);

        bool stalled = false;
        for (int it = 1; used < max_iter && !stalled; ++it) {
            const double rho1 = dot(r0, r);
            if (rho1 == 0.0) break;
            if (it == 1) {
                p = r;
            } else {
                const double beta = (rho1 / rho) * (alpha / omega);
                for (std::size_t i = 0; i < n; ++i)
                    p[i] = r[i] + beta * (p[i] - omega * v[i]);
            }
            rho = rho1;
            prec.apply(p, phat);
            a.multiply(phat, v);
            const double r0v = dot(r0, v);
            if (r0v == 0.0) break;
            alpha = rho / r0v;
            for (std::size_t i = 0; i < n; ++i) s[i] = r[i] - alpha * v[i];
            ++used;
            if (norm2(s) / bnorm < tol) {
                for (std::size_t i = 0; i < n; ++i) x[i] += alpha * phat[i];
                break;
            }
            prec.apply(s, shat);
            a.multiply(shat, t);
            const double tt = dot(t, t);
            if (tt == 0.0) break;
            omega = dot(t, s) / tt;
            for (std::size_t i = 0; i < n; ++i) {
                x[i] += alpha * phat[i] + omega * shat[i];
                r[i] = s[i] - omega * t[i];
            }
            if (norm2(r) / bnorm < tol) break;
            if (omega == 0.0) stalled = true;
        }
    }

    st.iterations = used;
    st.rel_residual = residual_norm(a, b, x) / bnorm;
    st.converged = st.rel_residual <= tol;
    return st;
}

SolveStats dense_lu_solve(const CsrMatrix& a, const std::vector<double>& b,
                          std::vector<double>& x) {
    const std::int64_t n = a.n;
    std::vector<double> m(static_cast<std::size_t>(n) * n, 0.0);
    for (std::int64_t i = 0; i < n; ++i)
        for (std::int64_t p = a.rowptr[i]; p < a.rowptr[i + 1]; ++p)
            m[i * n + a.col[p]] = a.val[p];

    std::vector<std::int64_t> perm(n);
    for (std::int64_t i = 0; i < n; ++i) perm[i] = i;
    for (std::int64_t c = 0; c < n; ++c) {
        std::int64_t piv = c;
        for (std::int64_t r = c + 1; r < n; ++r)
            if (std::fabs(m[r * n + c]) > std::fabs(m[piv * n + c])) piv = r;
        if (m[piv * n + c] == 0.0) throw SolverError("singular matrix in direct solve");
        if (piv != c) {
            std::swap(perm[piv], perm[c]);
            for (std::int64_t j = 0; j < n; ++j) std::swap(m[piv * n + j], m[c * n + j]);
        }
        const double inv = 1.0 / m[c * n + c];
        for (std::int64_t r = c + 1; r < n; ++r) {
            const double f = m[r * n + c] * inv;
            m[r * n + c] = f;
            for (std::int64_t j = c + 1; j < n; ++j) m[r * n + j] -= f * m[c * n + j];
        }
    }

    x.assign(static_cast<std::size_t>(n), 0.0);
    for (std::int64_t i = 0; i < n; ++i) {
        double s = b[perm[i]];
        for (std::int64_t j = 0; j < i; ++j) s -= m[i * n + j] * x[j];
        x[i] = s;
    }
    for (std::int64_t i = n - 1; i >= 0; --i) {
        double s = x[i];
        for (std::int64_t j = i + 1; j < n; ++j) s -= m[i * n + j] * x[j];
        x[i] = s / m[i * n + i];
    }

    SolveStats st;
    st.method = "dense-lu";
    st.iterations = 1;
    const double bnorm = norm2(b);
    st.rel_residual = bnorm == 0.0 ? 0.0 : residual_norm(a, b, x) / bnorm;
    st.converged = true;
    return st;
}

SolveStats solve_linear(const CsrMatrix& a, const std::vector<double>& b,
                        std::vector<double>& x, double tol, int max_iter,
                        std::int64_t dense_limit) {
    if (a.n <= dense_limit) return dense_lu_solve(a, b, x);
    return bicgstab(a, b, x, tol, max_iter);
}

} // namespace psc
