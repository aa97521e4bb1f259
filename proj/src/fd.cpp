#include "invcone/fd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>

#include "invcone/error.hpp"
#include "invcone/kernels.hpp"

namespace invcone {

// ---------------------------------------------------------------- grid

GridDomain GridDomain::interval(double lo, double hi, std::size_t points) {
    GridDomain g{Kind::interval, {lo}, {hi}, {points}};
    g.validate();
    return g;
}

GridDomain GridDomain::rectangle(double x_lo, double x_hi, double y_lo, double y_hi, std::size_t nx, std::size_t ny) {
    GridDomain g{Kind::rectangle, {x_lo, y_lo}, {x_hi, y_hi}, {nx, ny}};
    g.validate();
    return g;
}

GridDomain GridDomain::with_spacing(Kind kind, std::vector<double> lo, std::vector<double> hi, double h) {
    if (!(h > 0.0) || !std::isfinite(h)) throw Error(ErrorCode::InvalidParams, "grid spacing must be positive");
    GridDomain g{kind, std::move(lo), std::move(hi), {}};
    for (std::size_t a = 0; a < g.lo.size() && a < g.hi.size(); ++a)
        g.resolution.push_back(static_cast<std::size_t>(std::llround((g.hi[a] - g.lo[a]) / h)) + 1);
    g.validate();
    return g;
}

void GridDomain::validate() const {
    const std::size_t d = kind == Kind::interval ? 1 : 2;
    if (lo.size() != d || hi.size() != d || resolution.size() != d)
        throw Error(ErrorCode::InvalidParams, "grid bounds and resolution must match the domain kind");
    for (std::size_t a = 0; a < d; ++a) {
        if (!std::isfinite(lo[a]) || !std::isfinite(hi[a]) || !(lo[a] < hi[a]))
            throw Error(ErrorCode::InvalidParams, "grid needs lo < hi on every axis");
        if (resolution[a] < 3) throw Error(ErrorCode::InvalidParams, "grid needs at least 3 points per axis");
    }
}

std::size_t GridDomain::nodes() const noexcept {
    std::size_t n = 1;
    for (std::size_t r : resolution) n *= r;
    return n;
}

double GridDomain::h(std::size_t axis) const {
    return (hi[axis] - lo[axis]) / double(resolution[axis] - 1);
}

std::vector<double> GridDomain::coords(std::size_t node) const {
    std::vector<double> x(dim());
    for (std::size_t a = 0; a < dim(); ++a) {
        const std::size_t i = node % resolution[a];
        node /= resolution[a];
        // exact endpoints, no accumulated rounding
        x[a] = i + 1 == resolution[a] ? hi[a] : lo[a] + double(i) * h(a);
    }
    return x;
}

bool GridDomain::is_boundary(std::size_t node) const {
    for (std::size_t a = 0; a < dim(); ++a) {
        const std::size_t i = node % resolution[a];
        node /= resolution[a];
        if (i == 0 || i + 1 == resolution[a]) return true;
    }
    return false;
}

std::vector<std::size_t> GridDomain::interior_nodes() const {
    std::vector<std::size_t> out;
    for (std::size_t p = 0; p < nodes(); ++p)
        if (!is_boundary(p)) out.push_back(p);
    return out;
}

std::vector<std::size_t> GridDomain::boundary_nodes() const {
    std::vector<std::size_t> out;
    for (std::size_t p = 0; p < nodes(); ++p)
        if (is_boundary(p)) out.push_back(p);
    return out;
}

std::string to_string(Scheme s) { return s == Scheme::centered ? "centered" : "upwind"; }

std::string to_string(Outcome o) {
    switch (o) {
        case Outcome::holds: return "holds";
        case Outcome::fails: return "fails";
        case Outcome::inconclusive: return "inconclusive";
    }
    return "?";
}

// ---------------------------------------------------------------- sparse

std::vector<double> Csr::apply(std::span<const double> x) const {
    std::vector<double> y(n, 0.0);
    for (std::size_t r = 0; r < n; ++r) {
        double s = 0.0;
        for (std::size_t e = row_ptr[r]; e < row_ptr[r + 1]; ++e) s += val[e] * x[col[e]];
        y[r] = s;
    }
    return y;
}

double Csr::max_abs_row_sum() const {
    double best = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
        double s = 0.0;
        for (std::size_t e = row_ptr[r]; e < row_ptr[r + 1]; ++e) s += std::fabs(val[e]);
        best = std::max(best, s);
    }
    return best;
}

namespace {

// Row accumulator: merges duplicate columns, drops exact zeros.
void push_row(Csr& a, std::vector<std::pair<std::size_t, double>>& entries) {
    std::sort(entries.begin(), entries.end());
    for (std::size_t i = 0; i < entries.size();) {
        std::size_t j = i;
        double s = 0.0;
        while (j < entries.size() && entries[j].first == entries[i].first) s += entries[j++].second;
        if (s != 0.0) {
            a.col.push_back(entries[i].first);
            a.val.push_back(s);
        }
        i = j;
    }
    a.row_ptr.push_back(a.col.size());
    entries.clear();
}

void split_unknowns(DiscreteOperator& op) {
    op.interior.clear();
    op.boundary.clear();
    for (std::size_t p = 0; p < op.grid.nodes(); ++p) {
        auto& dst = op.grid.is_boundary(p) ? op.boundary : op.interior;
        for (std::size_t j = 0; j < op.m; ++j) dst.push_back(op.m * p + j);
    }
}

}  // namespace

DiscreteOperator assemble(const EllipticSystem& sys, const GridDomain& g, Scheme scheme) {
    sys.validate();
    g.validate();
    if (sys.n != 1 && sys.n != 2)
        throw Error(ErrorCode::UnsupportedDimension, "finite differences support n = 1 or 2, got " + std::to_string(sys.n));
    if (sys.n != g.dim())
        throw Error(ErrorCode::UnsupportedDimension, "system dimension " + std::to_string(sys.n) +
                                                         " differs from grid dimension " + std::to_string(g.dim()));
    DiscreteOperator op;
    op.m = sys.m;
    op.grid = g;
    op.scheme = scheme;
    const std::size_t m = sys.m, n = sys.n, nodes = g.nodes();

    double bmax = 0.0, hmax = 0.0;
    for (const auto& bi : sys.b) bmax = std::max(bmax, bi.max_abs());
    for (std::size_t a = 0; a < n; ++a) hmax = std::max(hmax, g.h(a));
    op.cfl_ratio = hmax * bmax;
    if (op.cfl_ratio > 1.0)
        op.warnings.push_back("h * max|B| = " + std::to_string(op.cfl_ratio) +
                              " > 1: the discrete operator may lose monotonicity");

    std::vector<std::size_t> stride(n, 1);
    for (std::size_t a = 1; a < n; ++a) stride[a] = stride[a - 1] * g.resolution[a - 1];

    Csr& a = op.matrix;
    a.n = m * nodes;
    std::vector<std::pair<std::size_t, double>> row;
    for (std::size_t p = 0; p < nodes; ++p) {
        const bool bd = g.is_boundary(p);
        for (std::size_t j = 0; j < m; ++j) {
            if (bd) {
                row.push_back({m * p + j, 1.0});
                push_row(a, row);
                continue;
            }
            for (std::size_t ax = 0; ax < n; ++ax) {
                const double h = g.h(ax);
                const std::size_t up = p + stride[ax], dn = p - stride[ax];
                row.push_back({m * up + j, 1.0 / (h * h)});
                row.push_back({m * dn + j, 1.0 / (h * h)});
                row.push_back({m * p + j, -2.0 / (h * h)});
                for (std::size_t k = 0; k < m; ++k) {
                    const double b = sys.b[ax](j, k);
                    if (b == 0.0) continue;
                    if (scheme == Scheme::upwind && k == j) {
                        if (b > 0) {
                            row.push_back({m * up + k, b / h});
                            row.push_back({m * p + k, -b / h});
                        } else {
                            row.push_back({m * p + k, b / h});
                            row.push_back({m * dn + k, -b / h});
                        }
                    } else {
                        row.push_back({m * up + k, b / (2 * h)});
                        row.push_back({m * dn + k, -b / (2 * h)});
                    }
                }
            }
            for (std::size_t k = 0; k < m; ++k)
                if (sys.c(j, k) != 0.0) row.push_back({m * p + k, sys.c(j, k)});
            push_row(a, row);
        }
    }
    split_unknowns(op);
    return op;
}

DiscreteOperator conjugate_operator(const DiscreteOperator& op, const Mat& a, const Mat& b) {
    const std::size_t m = op.m;
    if (a.rows() != m || a.cols() != m || b.rows() != m || b.cols() != m)
        throw Error(ErrorCode::DimensionMismatch, "conjugating matrices must be m x m");
    DiscreteOperator out = op;
    Csr& c = out.matrix;
    c.row_ptr.assign(1, 0);
    c.col.clear();
    c.val.clear();
    std::vector<std::pair<std::size_t, double>> row;
    const Csr& s = op.matrix;
    for (std::size_t p = 0; p < op.grid.nodes(); ++p) {
        if (op.grid.is_boundary(p)) {
            for (std::size_t j = 0; j < m; ++j) {
                row.push_back({m * p + j, 1.0});
                push_row(c, row);
            }
            continue;
        }
        std::map<std::size_t, Mat> blocks;  // neighbor node -> m x m block
        for (std::size_t j = 0; j < m; ++j) {
            const std::size_t r = m * p + j;
            for (std::size_t e = s.row_ptr[r]; e < s.row_ptr[r + 1]; ++e) {
                auto [it, fresh] = blocks.try_emplace(s.col[e] / m, m, m);
                it->second(j, s.col[e] % m) += s.val[e];
            }
        }
        std::map<std::size_t, Mat> conj;
        for (const auto& [q, blk] : blocks) conj.emplace(q, a * blk * b);
        for (std::size_t j = 0; j < m; ++j) {
            for (const auto& [q, blk] : conj)
                for (std::size_t k = 0; k < m; ++k) row.push_back({m * q + k, blk(j, k)});
            push_row(c, row);
        }
    }
    return out;
}

DiscreteField sample(const AnalyticField& f, const GridDomain& g) {
    g.validate();
    if (f.n() != g.dim()) throw Error(ErrorCode::DimensionMismatch, "field and grid dimensions differ");
    DiscreteField out{g, f.m(), std::vector<double>(f.m() * g.nodes())};
    for (std::size_t p = 0; p < g.nodes(); ++p) {
        const auto x = g.coords(p);
        for (std::size_t j = 0; j < f.m(); ++j) out.values[f.m() * p + j] = f.value(j, x);
    }
    return out;
}

// ---------------------------------------------------------------- banded LU

BandLu::BandLu(const DiscreteOperator& op) {
    const std::size_t total = op.size();
    std::vector<std::size_t> pos(total, std::numeric_limits<std::size_t>::max());
    for (std::size_t i = 0; i < op.interior.size(); ++i) pos[op.interior[i]] = i;
    n_ = op.interior.size();
    const Csr& a = op.matrix;
    for (std::size_t ri = 0; ri < n_; ++ri) {
        const std::size_t r = op.interior[ri];
        for (std::size_t e = a.row_ptr[r]; e < a.row_ptr[r + 1]; ++e) {
            const std::size_t ci = pos[a.col[e]];
            if (ci == std::numeric_limits<std::size_t>::max()) continue;
            if (ci < ri) kl_ = std::max(kl_, ri - ci);
            else ku_ = std::max(ku_, ci - ri);
        }
    }
    width_ = 2 * kl_ + ku_ + 1;
    band_.assign(n_ * width_, 0.0);
    double scale = 0.0;
    for (std::size_t ri = 0; ri < n_; ++ri) {
        const std::size_t r = op.interior[ri];
        for (std::size_t e = a.row_ptr[r]; e < a.row_ptr[r + 1]; ++e) {
            const std::size_t ci = pos[a.col[e]];
            if (ci == std::numeric_limits<std::size_t>::max()) continue;
            band_[ri * width_ + (ci + kl_ - ri)] = a.val[e];
            scale = std::max(scale, std::fabs(a.val[e]));
        }
    }
    auto at = [&](std::size_t r, std::size_t c) -> double& { return band_[r * width_ + (c + kl_ - r)]; };

    lower_.assign(n_ * std::max<std::size_t>(kl_, 1), 0.0);
    piv_.resize(n_);
    const double tiny = 1e-14 * std::max(scale, 1e-300);
    for (std::size_t k = 0; k < n_; ++k) {
        const std::size_t last_row = std::min(n_ - 1, k + kl_);
        const std::size_t last_col = std::min(n_ - 1, k + ku_ + kl_);
        std::size_t p = k;
        for (std::size_t r = k + 1; r <= last_row; ++r)
            if (std::fabs(at(r, k)) > std::fabs(at(p, k))) p = r;
        if (!(std::fabs(at(p, k)) > tiny))
            throw Error(ErrorCode::SingularOperator, "interior block is singular (pivot " + std::to_string(k) + ")");
        piv_[k] = p;
        if (p != k)
            for (std::size_t c = k; c <= last_col; ++c) std::swap(at(k, c), at(p, c));
        const double d = at(k, k);
        const std::size_t len = last_col - k;
        for (std::size_t r = k + 1; r <= last_row; ++r) {
            const double l = at(r, k) / d;
            lower_[k * kl_ + (r - k - 1)] = l;
            at(r, k) = 0.0;
            if (l != 0.0 && len > 0)
                kernels::axpy(-l, std::span<const double>(&at(k, k + 1), len), std::span<double>(&at(r, k + 1), len));
        }
    }
}

void BandLu::solve(std::span<double> b) const {
    if (b.size() != n_) throw Error(ErrorCode::DimensionMismatch, "right-hand side has the wrong length");
    for (std::size_t k = 0; k < n_; ++k) {
        if (piv_[k] != k) std::swap(b[k], b[piv_[k]]);
        const double bk = b[k];
        if (bk == 0.0) continue;
        const std::size_t last_row = std::min(n_ - 1, k + kl_);
        for (std::size_t r = k + 1; r <= last_row; ++r) b[r] -= lower_[k * kl_ + (r - k - 1)] * bk;
    }
    for (std::size_t k = n_; k-- > 0;) {
        const double* row = &band_[k * width_ + kl_];  // column k
        const std::size_t len = std::min(n_ - 1, k + ku_ + kl_) - k;
        double s = b[k];
        if (len > 0) s -= kernels::dot(std::span<const double>(row + 1, len), std::span<const double>(&b[k + 1], len));
        b[k] = s / row[0];
    }
}

// ---------------------------------------------------------------- solves

namespace {

// rhs - L_B u_B on interior rows
std::vector<double> lift_boundary(const DiscreteOperator& op, std::span<const double> rhs, const std::vector<double>& u) {
    std::vector<double> b(rhs.begin(), rhs.end());
    const Csr& a = op.matrix;
    for (std::size_t ri = 0; ri < op.interior.size(); ++ri) {
        const std::size_t r = op.interior[ri];
        for (std::size_t e = a.row_ptr[r]; e < a.row_ptr[r + 1]; ++e)
            if (op.grid.is_boundary(a.col[e] / op.m)) b[ri] -= a.val[e] * u[a.col[e]];
    }
    return b;
}

DiscreteField solve_with(const DiscreteOperator& op, const BandLu& lu, std::span<const double> rhs,
                         std::span<const double> boundary) {
    DiscreteField f{op.grid, op.m, std::vector<double>(op.size(), 0.0)};
    for (std::size_t i = 0; i < op.boundary.size(); ++i) f.values[op.boundary[i]] = boundary[i];
    auto b = lift_boundary(op, rhs, f.values);
    lu.solve(b);
    for (std::size_t i = 0; i < op.interior.size(); ++i) f.values[op.interior[i]] = b[i];
    return f;
}

}  // namespace

DiscreteField solve_dirichlet(const DiscreteOperator& op, std::span<const double> rhs, std::span<const double> boundary) {
    if (rhs.size() != op.interior.size() || boundary.size() != op.boundary.size())
        throw Error(ErrorCode::DimensionMismatch, "rhs/boundary lengths must match the interior/boundary unknowns");
    const BandLu lu(op);
    DiscreteField f = solve_with(op, lu, rhs, boundary);
    const auto lu_app = op.apply(f.values);
    double res = 0.0, rn = 0.0, un = 0.0;
    for (std::size_t i = 0; i < op.interior.size(); ++i) {
        res = std::max(res, std::fabs(lu_app[op.interior[i]] - rhs[i]));
        rn = std::max(rn, std::fabs(rhs[i]));
    }
    for (double v : f.values) un = std::max(un, std::fabs(v));
    if (res > 1e-10 * (rn + op.matrix.max_abs_row_sum() * un))
        throw Error(ErrorCode::SingularOperator, "Dirichlet solve residual " + std::to_string(res) + " too large");
    return f;
}

// ---------------------------------------------------------------- certificates

WitnessCheck validate_witness(const DiscreteOperator& op, const DiscreteField& u, const Mat* p, std::size_t k,
                              double tau) {
    WitnessCheck w;
    w.tau = tau;
    const std::size_t m = op.m;
    if (u.values.size() != op.size() || u.m != m) throw Error(ErrorCode::DimensionMismatch, "witness size differs");
    if (p && (p->rows() != m || p->cols() != m || k == 0 || k > m))
        throw Error(ErrorCode::DimensionMismatch, "cone rows must be m x m with 1 <= k <= m");
    if (!p) k = m;
    const auto r = op.apply(u.values);
    w.min_residual = std::numeric_limits<double>::infinity();
    for (std::size_t i : op.interior) w.min_residual = std::min(w.min_residual, r[i]);
    w.max_boundary = w.max_interior = -std::numeric_limits<double>::infinity();
    for (std::size_t node = 0; node < op.grid.nodes(); ++node) {
        const std::span<const double> un(&u.values[m * node], m);
        const bool bd = op.grid.is_boundary(node);
        for (std::size_t j = 0; j < k; ++j) {
            double s = 0.0;
            if (p) {
                for (std::size_t l = 0; l < m; ++l) s += (*p)(j, l) * un[l];
            } else {
                s = un[j];
            }
            (bd ? w.max_boundary : w.max_interior) = std::max(bd ? w.max_boundary : w.max_interior, s);
        }
    }
    w.valid = w.min_residual >= -tau && w.max_boundary <= tau && w.max_interior > 10 * tau;
    return w;
}

namespace {

struct SignScan {
    double max_value = -std::numeric_limits<double>::infinity();
    double max_abs_g = 0.0;
    bool from_h = false;
    std::size_t row = 0, col = 0;      // interior row index; interior (G) or boundary (H) column index
    std::vector<double> column;        // the maximizing column (interior ordering)
};

void consider(SignScan& s, std::span<const double> colv, bool from_h, std::size_t col) {
    const auto mx = kernels::max_entry(colv);
    if (mx.value > s.max_value) {
        s.max_value = mx.value;
        s.row = mx.index;
        s.col = col;
        s.from_h = from_h;
        s.column.assign(colv.begin(), colv.end());
    }
}

// Columns of L_B: for boundary unknown b, the (interior row, value) pairs.
std::vector<std::vector<std::pair<std::size_t, double>>> boundary_columns(const DiscreteOperator& op) {
    std::vector<std::size_t> bpos(op.size(), std::numeric_limits<std::size_t>::max());
    for (std::size_t i = 0; i < op.boundary.size(); ++i) bpos[op.boundary[i]] = i;
    std::vector<std::vector<std::pair<std::size_t, double>>> cols(op.boundary.size());
    const Csr& a = op.matrix;
    for (std::size_t ri = 0; ri < op.interior.size(); ++ri) {
        const std::size_t r = op.interior[ri];
        for (std::size_t e = a.row_ptr[r]; e < a.row_ptr[r + 1]; ++e) {
            const std::size_t b = bpos[a.col[e]];
            if (b != std::numeric_limits<std::size_t>::max()) cols[b].push_back({ri, a.val[e]});
        }
    }
    return cols;
}

// Dense inverse of the interior block, column by column (column-major).
std::vector<double> interior_inverse(const DiscreteOperator& op) {
    const std::size_t n = op.interior.size();
    if (n > kMaxDenseUnknowns)
        throw Error(ErrorCode::TooLargeForDense, std::to_string(n) + " interior unknowns exceed the dense limit of " +
                                                     std::to_string(kMaxDenseUnknowns));
    const BandLu lu(op);
    std::vector<double> g(n * n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        std::span<double> c(&g[j * n], n);
        c[j] = 1.0;
        lu.solve(c);
    }
    return g;
}

// Sign test on Gt = Ginv * Pk (Pk = I x P on interior unknowns, or identity)
// and H = Ginv * L_B.
SignScan scan_signs(const DiscreteOperator& op, const std::vector<double>& ginv, const Mat* p) {
    const std::size_t n = op.interior.size(), m = op.m;
    SignScan s;
    s.max_abs_g = kernels::max_abs(ginv);
    std::vector<double> col(n);
    for (std::size_t j = 0; j < n; ++j) {
        if (!p) {
            consider(s, std::span<const double>(&ginv[j * n], n), false, j);
            continue;
        }
        // column (node, c) of Ginv (I x P): sum_l Ginv[:, (node, l)] P(l, c)
        const std::size_t base = j - j % m, c = j % m;
        std::fill(col.begin(), col.end(), 0.0);
        for (std::size_t l = 0; l < m; ++l)
            if ((*p)(l, c) != 0.0) kernels::axpy((*p)(l, c), std::span<const double>(&ginv[(base + l) * n], n), col);
        s.max_abs_g = std::max(s.max_abs_g, kernels::max_abs(col));
        consider(s, col, false, j);
    }
    const auto bcols = boundary_columns(op);
    for (std::size_t b = 0; b < bcols.size(); ++b) {
        if (bcols[b].empty()) continue;  // corner nodes do not enter any interior row
        std::fill(col.begin(), col.end(), 0.0);
        for (const auto& [ri, v] : bcols[b]) kernels::axpy(v, std::span<const double>(&ginv[ri * n], n), col);
        consider(s, col, true, b);
    }
    return s;
}

// Builds v from the maximizing column, maps it through Q (or identity), scales to unit max norm.
DiscreteField witness_from_scan(const DiscreteOperator& op, const SignScan& s, const Mat* q) {
    const std::size_t m = op.m;
    std::vector<double> v(op.size(), 0.0);
    for (std::size_t i = 0; i < op.interior.size(); ++i) v[op.interior[i]] = s.column[i];
    if (s.from_h) v[op.boundary[s.col]] = -1.0;
    DiscreteField f{op.grid, m, std::vector<double>(op.size(), 0.0)};
    for (std::size_t node = 0; node < op.grid.nodes(); ++node)
        for (std::size_t j = 0; j < m; ++j) {
            double x = 0.0;
            if (q) {
                for (std::size_t l = 0; l < m; ++l) x += (*q)(j, l) * v[m * node + l];
            } else {
                x = v[m * node + j];
            }
            f.values[m * node + j] = x;
        }
    const double scale = kernels::max_abs(f.values);
    if (scale > 0.0) kernels::scale(1.0 / scale, f.values);
    return f;
}

Verdict finish(const DiscreteOperator& op, const DiscreteOperator& check_op, const SignScan& s, const Mat* p,
               const Mat* q) {
    Verdict v;
    v.tau = 1e-9 * (1.0 + s.max_abs_g);
    v.max_positive = s.max_value;
    v.margin = -s.max_value;
    v.max_source = s.from_h ? "H" : "G";
    v.max_row = op.interior.empty() ? 0 : op.interior[s.row];
    v.max_col = op.interior.empty() ? 0 : s.from_h ? op.boundary[s.col] : op.interior[s.col];
    if (s.max_value <= v.tau) {
        v.outcome = Outcome::holds;
        return v;
    }
    if (s.max_value <= 10 * v.tau) {
        v.outcome = Outcome::inconclusive;
        v.note = "largest positive entry is within 10 tau";
        return v;
    }
    auto w = witness_from_scan(op, s, q);
    v.witness_check = validate_witness(check_op, w, p, op.m, v.tau);
    v.witness = std::move(w);
    if (v.witness_check.valid) {
        v.outcome = Outcome::fails;
    } else {
        v.outcome = Outcome::inconclusive;
        v.note = "sign test failed but the witness did not re-validate";
    }
    return v;
}

}  // namespace

Verdict wmp_certificate(const DiscreteOperator& op) {
    const auto ginv = interior_inverse(op);
    const auto s = scan_signs(op, ginv, nullptr);
    return finish(op, op, s, nullptr, nullptr);
}

Verdict cone_certificate(const EllipticSystem& sys, const ConeCertificate& cert, const GridDomain& g, Scheme scheme) {
    sys.validate();
    if (cert.k != sys.m)
        throw Error(ErrorCode::PartialConeUnsupported, "cone_certificate needs k = m; use monte_carlo_invariance");
    if (cert.q.rows() != sys.m || cert.p.rows() != sys.m)
        throw Error(ErrorCode::DimensionMismatch, "certificate matrices must be m x m");
    const EllipticSystem hat = sys.transformed(cert.q, cert.p);
    const DiscreteOperator lhat = assemble(hat, g, scheme);
    const auto ginv = interior_inverse(lhat);
    const auto s = scan_signs(lhat, ginv, &cert.p);
    // The witness u = Q v is checked against (I x Q) Lhat (I x P), which is
    // the original assembly for the centered scheme.
    const DiscreteOperator pulled = conjugate_operator(lhat, cert.q, cert.p);
    Verdict v = finish(lhat, pulled, s, &cert.p, &cert.q);
    if (v.outcome == Outcome::holds) v.note = "discrete cone invariance for the assembled transformed operator";
    return v;
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// First axis side the node lies on: 2 * axis + (0 low, 1 high).
std::size_t boundary_face(const GridDomain& g, std::size_t node) {
    for (std::size_t a = 0; a < g.dim(); ++a) {
        const std::size_t i = node % g.resolution[a];
        node /= g.resolution[a];
        if (i == 0) return 2 * a;
        if (i + 1 == g.resolution[a]) return 2 * a + 1;
    }
    return 0;
}

}  // namespace

Verdict monte_carlo_invariance(const EllipticSystem& sys, const ConeCertificate& cert, const GridDomain& g,
                               std::size_t trials, std::uint64_t seed, Scheme scheme) {
    sys.validate();
    const std::size_t m = sys.m, k = cert.k;
    if (trials == 0) throw Error(ErrorCode::InvalidParams, "trials must be at least 1");
    if (cert.p.rows() != m || cert.p.cols() != m || cert.q.rows() != m || k == 0 || k > m)
        throw Error(ErrorCode::DimensionMismatch, "certificate must be m x m with 1 <= k <= m");
    const DiscreteOperator op = assemble(sys, g, scheme);
    const BandLu lu(op);
    const auto bnodes = g.boundary_nodes();
    const auto inodes = g.interior_nodes();
    const std::vector<double> zero_rhs(op.interior.size(), 0.0);

    Verdict v;
    v.tau = kMcTol;
    v.max_source = "trial";
    double worst = -std::numeric_limits<double>::infinity();
    std::vector<double> bvals(op.boundary.size());
    std::vector<double> y(m), w(m);
    for (std::size_t t = 0; t < trials; ++t) {
        std::mt19937_64 rng(splitmix64(seed + t));
        std::uniform_real_distribution<double> box(-1.0, 1.0);
        // Trials cycle through three data families: independent values per
        // boundary node, one value per face, and a single cone coordinate on a
        // single face. The last family follows the extreme rays of the cone;
        // iid node data alone averages out coherent effects.
        const std::size_t family = t % 3, nfaces = 2 * g.dim();
        std::vector<double> faces(nfaces * m, 0.0);
        bool sparse_rows = false;  // data already in cone coordinates
        std::size_t sparse_face = 0;
        if (family == 1) {
            for (double& x : faces) x = box(rng);
        } else if (family == 2) {
            sparse_face = std::size_t(rng() % nfaces);
            const std::size_t j = std::size_t(rng() % m);
            const double a = box(rng);
            faces[sparse_face * m + j] = j < k ? -std::fabs(a) : a;
            sparse_rows = true;
        }
        // boundary unknowns are ordered node-major, m per node
        for (std::size_t bi = 0; bi < bnodes.size(); ++bi) {
            if (family == 0) {
                for (double& x : y) x = box(rng);
            } else {
                const std::size_t f = boundary_face(g, bnodes[bi]);
                std::copy_n(faces.begin() + std::ptrdiff_t(f * m), m, y.begin());
            }
            if (sparse_rows) {
                for (std::size_t j = 0; j < m; ++j) {
                    double s = 0.0;
                    for (std::size_t l = 0; l < m; ++l) s += cert.q(j, l) * y[l];
                    bvals[m * bi + j] = s;
                }
                continue;
            }
            for (std::size_t j = 0; j < m; ++j) {
                double s = 0.0;
                for (std::size_t l = 0; l < m; ++l) s += cert.p(j, l) * y[l];
                w[j] = j < k ? -std::fabs(s) : s;
            }
            for (std::size_t j = 0; j < m; ++j) {
                double s = 0.0;
                for (std::size_t l = 0; l < m; ++l) s += cert.q(j, l) * w[l];
                bvals[m * bi + j] = s;
            }
        }
        DiscreteField u = solve_with(op, lu, zero_rhs, bvals);
        double tmax = -std::numeric_limits<double>::infinity();
        std::size_t arg = 0;
        for (std::size_t node : inodes)
            for (std::size_t j = 0; j < k; ++j) {
                double s = 0.0;
                for (std::size_t l = 0; l < m; ++l) s += cert.p(j, l) * u.values[m * node + l];
                if (s > tmax) {
                    tmax = s;
                    arg = m * node + j;
                }
            }
        if (tmax > worst) {
            worst = tmax;
            v.max_row = arg;
            v.max_col = t;
        }
        if (tmax > kMcTol) {
            v.outcome = Outcome::fails;
            v.max_positive = tmax;
            v.margin = -tmax;
            v.witness_check = validate_witness(op, u, &cert.p, k, kMcTol);
            v.witness = std::move(u);
            if (!v.witness_check.valid) {
                v.outcome = Outcome::inconclusive;
                v.note = "violation found but the witness did not re-validate";
            } else {
                v.note = "violated in trial " + std::to_string(t);
            }
            return v;
        }
    }
    v.outcome = Outcome::holds;
    v.max_positive = worst;
    v.margin = -worst;
    v.note = std::to_string(trials) + " trials";
    return v;
}

}  // namespace invcone
