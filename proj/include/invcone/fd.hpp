#pragma once
// Finite-difference discretization of the system on intervals and rectangles,
// discrete maximum-principle and cone-invariance certificates, Dirichlet
// solves and Monte-Carlo invariance sampling.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "invcone/cone.hpp"
#include "invcone/field.hpp"
#include "invcone/mat.hpp"
#include "invcone/system.hpp"

namespace invcone {

inline constexpr std::size_t kMaxDenseUnknowns = 6000;
inline constexpr double kMcTol = 1e-8;

struct GridDomain {
    enum class Kind { interval, rectangle };

    Kind kind = Kind::interval;
    std::vector<double> lo, hi;
    std::vector<std::size_t> resolution;  // points per axis, boundary included

    static GridDomain interval(double lo, double hi, std::size_t points);
    static GridDomain rectangle(double x_lo, double x_hi, double y_lo, double y_hi, std::size_t nx, std::size_t ny);
    /// Resolution per axis chosen as round((hi - lo) / h) + 1.
    static GridDomain with_spacing(Kind kind, std::vector<double> lo, std::vector<double> hi, double h);

    /// Throws Error{InvalidParams} unless resolution >= 3 and lo < hi per axis.
    void validate() const;

    std::size_t dim() const noexcept { return lo.size(); }
    std::size_t nodes() const noexcept;
    double h(std::size_t axis) const;
    std::vector<double> coords(std::size_t node) const;
    bool is_boundary(std::size_t node) const;
    std::vector<std::size_t> interior_nodes() const;
    std::vector<std::size_t> boundary_nodes() const;
};

enum class Scheme { centered, upwind };

std::string to_string(Scheme s);

/// Square sparse matrix in compressed rows.
struct Csr {
    std::size_t n = 0;
    std::vector<std::size_t> row_ptr{0};
    std::vector<std::size_t> col;
    std::vector<double> val;

    std::vector<double> apply(std::span<const double> x) const;
    double max_abs_row_sum() const;  // infinity norm
};

/// Unknown (node p, component j) sits at index m * p + j. Boundary rows are
/// identity rows, so apply() returns the boundary values there.
struct DiscreteOperator {
    std::size_t m = 0;
    GridDomain grid;
    Scheme scheme = Scheme::centered;
    double cfl_ratio = 0.0;            // max_axis h * max |B^(i)_jk|
    std::vector<std::string> warnings;
    Csr matrix;
    std::vector<std::size_t> interior;  // unknown indices, ascending
    std::vector<std::size_t> boundary;

    std::size_t size() const noexcept { return matrix.n; }
    std::vector<double> apply(std::span<const double> u) const { return matrix.apply(u); }
};

/// Throws Error{UnsupportedDimension} unless n in {1, 2} matches the grid.
DiscreteOperator assemble(const EllipticSystem& sys, const GridDomain& g, Scheme scheme = Scheme::centered);

/// (I x A) L (I x B) block by block; interior rows only, boundary rows stay identity.
DiscreteOperator conjugate_operator(const DiscreteOperator& op, const Mat& a, const Mat& b);

struct DiscreteField {
    GridDomain grid;
    std::size_t m = 0;
    std::vector<double> values;  // m * nodes, index m * p + j

    double at(std::size_t node, std::size_t j) const { return values[m * node + j]; }
};

/// Grid samples of an analytic field.
DiscreteField sample(const AnalyticField& f, const GridDomain& g);

/// Banded LU with partial pivoting of the interior block.
class BandLu {
public:
    explicit BandLu(const DiscreteOperator& op);

    std::size_t size() const noexcept { return n_; }
    /// Solves L_I x = b in place (interior ordering).
    void solve(std::span<double> b) const;

private:
    std::size_t n_ = 0, kl_ = 0, ku_ = 0, width_ = 0;
    std::vector<double> band_;      // row r holds columns r - kl .. r + ku + kl
    std::vector<double> lower_;     // multipliers, kl per column
    std::vector<std::size_t> piv_;
};

/// u with L u = rhs on interior rows and u = boundary on boundary nodes.
/// rhs and boundary follow op.interior / op.boundary ordering. Throws
/// Error{SingularOperator} and Error{DimensionMismatch}.
DiscreteField solve_dirichlet(const DiscreteOperator& op, std::span<const double> rhs, std::span<const double> boundary);

enum class Outcome { holds, fails, inconclusive };

std::string to_string(Outcome o);

struct WitnessCheck {
    bool valid = false;
    double min_residual = 0.0;   // over interior rows of the checked operator
    double max_boundary = 0.0;   // over boundary nodes, in cone coordinates
    double max_interior = 0.0;   // over interior nodes, in cone coordinates
    double tau = 0.0;
};

struct Verdict {
    Outcome outcome = Outcome::inconclusive;
    double margin = 0.0;             // >= -tau when the property holds
    double tau = 0.0;
    double max_positive = 0.0;       // largest entry found in the sign test
    std::string max_source;          // "G", "H" or "trial"
    std::size_t max_row = 0;         // unknown index
    std::size_t max_col = 0;         // unknown index (G, H) or trial number
    std::optional<DiscreteField> witness;
    WitnessCheck witness_check;
    std::string note;
};

/// Independent re-check of a witness: L u >= -tau on interior rows, rows
/// j < k of P u at boundary nodes <= tau, and their interior maximum > 10 tau.
/// With p absent the cone is the negative orthant.
WitnessCheck validate_witness(const DiscreteOperator& op, const DiscreteField& u, const Mat* p, std::size_t k,
                              double tau);

/// Entrywise sign test on G = L_I^-1 and H = G L_B.
Verdict wmp_certificate(const DiscreteOperator& op);

/// Sign test for the full cone {P u <= 0}: the transformed system's inverse
/// composed with P. Throws Error{PartialConeUnsupported} when k < m.
Verdict cone_certificate(const EllipticSystem& sys, const ConeCertificate& cert, const GridDomain& g,
                         Scheme scheme = Scheme::centered);

/// Random boundary data inside the cone, homogeneous interior, check rows
/// j < k of P u at interior nodes. Deterministic in (seed, trials).
Verdict monte_carlo_invariance(const EllipticSystem& sys, const ConeCertificate& cert, const GridDomain& g,
                               std::size_t trials, std::uint64_t seed, Scheme scheme = Scheme::centered);

}  // namespace invcone
