#include "psc/grid.hpp"

#include <cmath>

namespace psc {

ChartGrid ChartGrid::make(const MetricSpec& spec, const std::vector<int>& counts,
                          const std::vector<std::pair<double, double>>& line_extents) {
    if (static_cast<int>(counts.size()) != spec.dim())
        throw std::invalid_argument("grid: need one node count per coordinate");
    ChartGrid g;
    g.axes.resize(spec.dim());
    size_t line_seen = 0;
    for (int d = 0; d < spec.dim(); ++d) {
        GridAxis& ax = g.axes[d];
        ax.n = counts[d];
        if (ax.n < 3) throw std::invalid_argument("grid: need at least 3 nodes per axis");
        ax.kind = spec.topology[d].kind;
        switch (ax.kind) {
            case TopKind::Periodic:
                ax.h = spec.topology[d].period / ax.n;
                ax.x0 = 0.0;
                break;
            case TopKind::PolarTheta:
                ax.h = M_PI / ax.n;
                ax.x0 = 0.5 * ax.h;
                ax.azimuth = spec.topology[d].azimuth;
                break;
            case TopKind::Line: {
                double lo = -3.0, hi = 3.0;
                if (line_seen < line_extents.size()) {
                    lo = line_extents[line_seen].first;
                    hi = line_extents[line_seen].second;
                }
                ++line_seen;
                if (!(hi > lo)) throw std::invalid_argument("grid: bad line extent");
                ax.h = (hi - lo) / (ax.n - 1);
                ax.x0 = lo;
                break;
            }
        }
    }
    for (int d = 0; d < spec.dim(); ++d) {
        const GridAxis& ax = g.axes[d];
        if (ax.kind == TopKind::PolarTheta) {
            if (ax.azimuth < 0 || ax.azimuth >= spec.dim())
                throw std::invalid_argument("grid: polar axis lacks azimuth partner");
            if (g.axes[ax.azimuth].n % 2 != 0)
                throw std::invalid_argument("grid: polar wrap needs an even azimuth node count");
        }
    }
    g.strides.assign(g.axes.size(), 1);
    for (int d = g.ndim() - 2; d >= 0; --d)
        g.strides[d] = g.strides[d + 1] * g.axes[d + 1].n;
    g.total = g.strides[0] * g.axes[0].n;
    return g;
}

int64_t ChartGrid::index(const std::vector<int>& idx) const {
    int64_t flat = 0;
    for (int d = 0; d < ndim(); ++d) flat += strides[d] * idx[d];
    return flat;
}

void ChartGrid::unravel(int64_t flat, std::vector<int>& idx) const {
    idx.resize(ndim());
    for (int d = 0; d < ndim(); ++d) {
        idx[d] = static_cast<int>(flat / strides[d]);
        flat %= strides[d];
    }
}

double ChartGrid::coord(int axis, int i) const {
    return axes[axis].x0 + axes[axis].h * i;
}

void ChartGrid::point(const std::vector<int>& idx, std::vector<double>& x) const {
    x.resize(ndim());
    for (int d = 0; d < ndim(); ++d) x[d] = coord(d, idx[d]);
}

std::vector<double> ChartGrid::point(int64_t flat) const {
    std::vector<int> idx;
    unravel(flat, idx);
    std::vector<double> x;
    point(idx, x);
    return x;
}

int64_t ChartGrid::neighbor(int64_t flat, int axis, int off) const {
    std::vector<int> idx;
    unravel(flat, idx);
    return neighbor(idx, axis, off);
}

int64_t ChartGrid::neighbor(const std::vector<int>& idx, int axis, int off) const {
    const GridAxis& ax = axes[axis];
    int i = idx[axis] + off;
    switch (ax.kind) {
        case TopKind::Periodic: {
            i %= ax.n;
            if (i < 0) i += ax.n;
            int64_t flat = 0;
            for (int d = 0; d < ndim(); ++d) flat += strides[d] * (d == axis ? i : idx[d]);
            return flat;
        }
        case TopKind::Line: {
            if (i < 0 || i >= ax.n)
                throw std::out_of_range("grid: stencil leaves a line axis");
            int64_t flat = 0;
            for (int d = 0; d < ndim(); ++d) flat += strides[d] * (d == axis ? i : idx[d]);
            return flat;
        }
        case TopKind::PolarTheta: {
            // reflect through the pole and advance the azimuth half a turn
            bool flip = false;
            if (i < 0) { i = -1 - i; flip = true; }
            else if (i >= ax.n) { i = 2 * ax.n - 1 - i; flip = true; }
            if (i < 0 || i >= ax.n)
                throw std::out_of_range("grid: polar stencil reflects past the opposite pole");
            int64_t flat = 0;
            for (int d = 0; d < ndim(); ++d) {
                int id = idx[d];
                if (d == axis) id = i;
                if (flip && d == ax.azimuth) {
                    id = (id + axes[ax.azimuth].n / 2) % axes[ax.azimuth].n;
                }
                flat += strides[d] * id;
            }
            return flat;
        }
    }
    throw std::logic_error("unreachable");
}

double ChartGrid::cell_weight(const std::vector<int>& idx) const {
    double w = 1.0;
    for (int d = 0; d < ndim(); ++d) {
        const GridAxis& ax = axes[d];
        double wd = ax.h;
        if (ax.kind == TopKind::Line && (idx[d] == 0 || idx[d] == ax.n - 1)) wd *= 0.5;
        w *= wd;
    }
    return w;
}

namespace {

double sample(const ChartGrid& g, const ScalarField& u, const std::vector<int>& idx,
              int axis, int off) {
    return u[g.neighbor(idx, axis, off)];
}

bool line_interior(const ChartGrid& g, const std::vector<int>& idx, int axis, int halo) {
    const GridAxis& ax = g.axes[axis];
    if (ax.kind != TopKind::Line) return true;
    return idx[axis] - halo >= 0 && idx[axis] + halo < ax.n;
}

} // namespace

double diff1(const ChartGrid& g, const ScalarField& u, const std::vector<int>& idx,
             int axis, int order) {
    double h = g.axes[axis].h;
    if (order == 4 && line_interior(g, idx, axis, 2)) {
        double m2 = sample(g, u, idx, axis, -2), m1 = sample(g, u, idx, axis, -1);
        double p1 = sample(g, u, idx, axis, 1), p2 = sample(g, u, idx, axis, 2);
        return (m2 - 8.0 * m1 + 8.0 * p1 - p2) / (12.0 * h);
    }
    if (line_interior(g, idx, axis, 1))
        return (sample(g, u, idx, axis, 1) - sample(g, u, idx, axis, -1)) / (2.0 * h);
    // one-sided second order at the ends of a line axis
    int i = idx[axis];
    double s = i == 0 ? 1.0 : -1.0;
    double u0 = u[g.index(idx)];
    double u1 = sample(g, u, idx, axis, i == 0 ? 1 : -1);
    double u2 = sample(g, u, idx, axis, i == 0 ? 2 : -2);
    return s * (-3.0 * u0 + 4.0 * u1 - u2) / (2.0 * h);
}

double diff2(const ChartGrid& g, const ScalarField& u, const std::vector<int>& idx,
             int axis, int order) {
    double h = g.axes[axis].h;
    double u0 = u[g.index(idx)];
    if (order == 4 && line_interior(g, idx, axis, 2)) {
        double m2 = sample(g, u, idx, axis, -2), m1 = sample(g, u, idx, axis, -1);
        double p1 = sample(g, u, idx, axis, 1), p2 = sample(g, u, idx, axis, 2);
        return (-m2 + 16.0 * m1 - 30.0 * u0 + 16.0 * p1 - p2) / (12.0 * h * h);
    }
    if (line_interior(g, idx, axis, 1)) {
        return (sample(g, u, idx, axis, 1) - 2.0 * u0 + sample(g, u, idx, axis, -1)) / (h * h);
    }
    // one-sided first order; line ends are diagnostics territory
    int i = idx[axis];
    double u1 = sample(g, u, idx, axis, i == 0 ? 1 : -1);
    double u2 = sample(g, u, idx, axis, i == 0 ? 2 : -2);
    return (u0 - 2.0 * u1 + u2) / (h * h);
}

double diff2_mixed(const ChartGrid& g, const ScalarField& u, const std::vector<int>& idx,
                   int axis_a, int axis_b, int order) {
    if (axis_a == axis_b) return diff2(g, u, idx, axis_a, order);
    double ha = g.axes[axis_a].h, hb = g.axes[axis_b].h;
    std::vector<int> id = idx;
    auto at = [&](int oa, int ob) {
        // two wraps composed; reuse neighbor twice via an index copy
        std::vector<int> tmp;
        g.unravel(g.neighbor(id, axis_a, oa), tmp);
        return u[g.neighbor(tmp, axis_b, ob)];
    };
    if (order == 4 && line_interior(g, idx, axis_a, 2) && line_interior(g, idx, axis_b, 2)) {
        double acc = 0.0;
        const int offs[4] = {-2, -1, 1, 2};
        const double w[4] = {1.0 / 12.0, -8.0 / 12.0, 8.0 / 12.0, -1.0 / 12.0};
        for (int a = 0; a < 4; ++a)
            for (int b = 0; b < 4; ++b) acc += w[a] * w[b] * at(offs[a], offs[b]);
        return acc / (ha * hb);
    }
    return (at(1, 1) - at(1, -1) - at(-1, 1) + at(-1, -1)) / (4.0 * ha * hb);
}

} // namespace psc
