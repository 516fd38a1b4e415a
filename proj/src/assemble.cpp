#include "psc/solver.hpp"

#include <algorithm>
#include <cmath>

namespace psc {

namespace {

constexpr int S = kMaxVars;

struct StencilEntry {
    int off;
    double w;
};

void axis_stencils(double h, int order, std::vector<StencilEntry>& d1,
                   std::vector<StencilEntry>& d2) {
    d1.clear();
    d2.clear();
    if (order == 2) {
        d1 = {{-1, -0.5 / h}, {1, 0.5 / h}};
        const double h2 = h * h;
        d2 = {{-1, 1.0 / h2}, {0, -2.0 / h2}, {1, 1.0 / h2}};
    } else {
        d1 = {{-2, 1.0 / (12 * h)}, {-1, -8.0 / (12 * h)},
              {1, 8.0 / (12 * h)}, {2, -1.0 / (12 * h)}};
        const double h2 = h * h;
        d2 = {{-2, -1.0 / (12 * h2)}, {-1, 16.0 / (12 * h2)}, {0, -30.0 / (12 * h2)},
              {1, 16.0 / (12 * h2)}, {2, 1.0 / (12 * h2)}};
    }
}

} // namespace

DiscreteOperator assemble_operator(const MetricSpec& spec, const ChartGrid& grid,
                                   const std::vector<ScalarField>& drift_fields,
                                   const std::vector<double>& drift_coeffs,
                                   double lap_coeff, const ScalarField& potential,
                                   int order) {
    const int d = spec.dim();
    if (order != 2 && order != 4) throw SolverError("stencil order must be 2 or 4");
    if (drift_fields.size() != drift_coeffs.size())
        throw SolverError("drift field and coefficient counts differ");
    for (const auto& ax : grid.axes)
        if (ax.kind == TopKind::Line)
            throw SolverError("operator assembly needs closed chart directions");
    for (const auto& f : drift_fields)
        if (static_cast<std::int64_t>(f.size()) != grid.total * d)
            throw SolverError("drift field size does not match the grid");
    if (static_cast<std::int64_t>(potential.size()) != grid.total)
        throw SolverError("potential size does not match the grid");

    std::vector<std::vector<StencilEntry>> st1(d), st2(d);
    for (int a = 0; a < d; ++a) axis_stencils(grid.axes[a].h, order, st1[a], st2[a]);

    DiscreteOperator op;
    op.order = order;
    op.potential = potential;
    op.A.n = grid.total;
    op.A.rowptr.assign(static_cast<std::size_t>(grid.total) + 1, 0);
    // order-2 rows in 3d stay under ~25 entries; reserve a sensible guess
    op.A.col.reserve(static_cast<std::size_t>(grid.total) * (order == 2 ? 9 : 17));
    op.A.val.reserve(op.A.col.capacity());
    op.A.prov.reserve(op.A.col.capacity());

    std::vector<std::pair<std::int32_t, double>> row;
    std::vector<std::uint8_t> rowprov;

    double a2[kMaxVars][kMaxVars];
    double b1[kMaxVars];

    auto emit = [&](std::int64_t idx, std::uint8_t bit) {
        for (int i = 0; i < d; ++i) {
            if (a2[i][i] != 0.0)
                for (const auto& e : st2[i])
                    row.push_back({static_cast<std::int32_t>(grid.neighbor(idx, i, e.off)),
                                   a2[i][i] * e.w}),
                        rowprov.push_back(bit);
            for (int j = i + 1; j < d; ++j) {
                const double c = a2[i][j] + a2[j][i];
                if (c == 0.0) continue;
                for (const auto& ei : st1[i]) {
                    const std::int64_t mid = grid.neighbor(idx, i, ei.off);
                    for (const auto& ej : st1[j])
                        row.push_back({static_cast<std::int32_t>(grid.neighbor(mid, j, ej.off)),
                                       c * ei.w * ej.w}),
                            rowprov.push_back(bit);
                }
            }
        }
        for (int k = 0; k < d; ++k) {
            if (b1[k] == 0.0) continue;
            for (const auto& e : st1[k])
                row.push_back({static_cast<std::int32_t>(grid.neighbor(idx, k, e.off)),
                               b1[k] * e.w}),
                    rowprov.push_back(bit);
        }
    };

    std::vector<std::size_t> perm;
    for (std::int64_t idx = 0; idx < grid.total; ++idx) {
        row.clear();
        rowprov.clear();
        const std::vector<double> x = grid.point(idx);
        const PointMetric pm = metric_at(spec, x);
        const Christoffel ch = christoffel(pm);

        // directional Hessians
        for (int i = 0; i < d; ++i) {
            b1[i] = 0.0;
            for (int j = 0; j < d; ++j) a2[i][j] = 0.0;
        }
        bool any = false;
        for (std::size_t f = 0; f < drift_fields.size(); ++f) {
            const double c = drift_coeffs[f];
            const double* V = drift_fields[f].data() + idx * d;
            for (int i = 0; i < d; ++i) {
                if (V[i] == 0.0) continue;
                for (int j = 0; j < d; ++j) {
                    const double w = c * V[i] * V[j];
                    if (w == 0.0) continue;
                    any = true;
                    a2[i][j] += w;
                    for (int k = 0; k < d; ++k) b1[k] -= w * ch.G[k][i * S + j];
                }
            }
        }
        if (any) emit(idx, kProvDirectional);

        // Laplace-Beltrami
        if (lap_coeff != 0.0) {
            for (int i = 0; i < d; ++i) {
                b1[i] = 0.0;
                for (int j = 0; j < d; ++j) a2[i][j] = 0.0;
            }
            for (int i = 0; i < d; ++i)
                for (int j = 0; j < d; ++j) {
                    const double w = lap_coeff * pm.ginv[i * S + j];
                    a2[i][j] += w;
                    for (int k = 0; k < d; ++k) b1[k] -= w * ch.G[k][i * S + j];
                }
            emit(idx, kProvLaplacian);
        }

        row.push_back({static_cast<std::int32_t>(idx), potential[idx]});
        rowprov.push_back(kProvPotential);

        // sort by column and merge duplicates
        perm.resize(row.size());
        for (std::size_t q = 0; q < row.size(); ++q) perm[q] = q;
        std::sort(perm.begin(), perm.end(), [&](std::size_t a, std::size_t b) {
            if (row[a].first != row[b].first) return row[a].first < row[b].first;
            return a < b;
        });
        std::int32_t last = -1;
        for (std::size_t q : perm) {
            if (row[q].first == last) {
                op.A.val.back() += row[q].second;
                op.A.prov.back() |= rowprov[q];
            } else {
                op.A.col.push_back(row[q].first);
                op.A.val.push_back(row[q].second);
                op.A.prov.push_back(rowprov[q]);
                last = row[q].first;
            }
        }
        op.A.rowptr[idx + 1] = static_cast<std::int64_t>(op.A.col.size());
    }
    return op;
}

} // namespace psc
