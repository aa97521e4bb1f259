#pragma once
// Algebraic conditions on the coupling matrices: spectra, cooperativity,
// M-matrix structure, conjugation and the orthant flux condition.

#include <complex>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "invcone/mat.hpp"

namespace invcone {

/// Absolute tolerance for every sign/zero test on matrix entries.
inline constexpr double kAlgTol = 1e-9;
inline constexpr std::size_t kMaxAlgebraDim = 16;

struct EigenCluster {
    double value;                          // real part (cluster mean)
    bool real;
    std::size_t algebraic_multiplicity;
    std::size_t geometric_multiplicity;    // 0 for complex clusters
};

struct EigenDecomp {
    /// Sorted by (real part, imaginary part). When `real_eigenbasis` is
    /// present, eigenvalues[j] belongs to column j.
    std::vector<std::complex<double>> eigenvalues;
    std::optional<Mat> real_eigenbasis;  // columns scaled to unit max-norm
    std::vector<EigenCluster> clusters;
    double basis_condition = 0.0;        // 1-norm condition of the basis, 0 if absent

    bool all_real() const noexcept;
    bool simple() const noexcept;        // all algebraic multiplicities equal 1
};

/// Throws Error{NonSquare} or Error{DimensionTooLarge} (m > 16).
EigenDecomp eigen(const Mat& m);

double spectral_radius(const Mat& m);

/// Basis of the numerical nullspace of `a`, from a reduced row echelon form
/// with partial pivoting; columns whose remaining pivot is below
/// `tol * max(1, |a|_max)` are free. Each vector has unit max-norm and a
/// positive largest-magnitude entry.
std::vector<std::vector<double>> nullspace(const Mat& a, double tol = 1e-8);

/// Flips the sign of v so its first largest-magnitude entry is positive and
/// scales it to unit max-norm. No-op on the zero vector.
void normalize_max(std::vector<double>& v);

struct CoopReport {
    bool is_cooperative = false;
    double worst_offdiag_margin = 0.0;  // min_{j!=k} c_jk (+inf when m = 1)
    double worst_rowsum_margin = 0.0;   // max_j sum_k c_jk
    double strict_level = 0.0;          // largest K with c_jk >= K, row sums <= -K
};

CoopReport is_cooperative(const Mat& c);

struct MMatrixReport {
    bool is_m_matrix = false;
    double s = 0.0;               // max diagonal entry
    Mat x;                        // s I - Q
    double spectral_radius = 0.0; // of x
    bool offdiag_nonpositive = false;
    bool inverse_nonnegative = false;  // only evaluated when is_m_matrix
};

MMatrixReport is_m_matrix(const Mat& q);

/// Q^{-1} C Q. Throws Error{SingularQ} when cond(Q) >= 1e12.
Mat conjugate(const Mat& c, const Mat& q);

struct FluxSample {
    std::vector<double> u;
    std::vector<double> p;
    double shift;   // s in the translated orthant s*1 + R^m_-
    double value;   // p . (C u)
};

struct FluxReport {
    bool holds = false;
    std::size_t samples_checked = 0;
    FluxSample worst;
};

/// Weinberger flux condition p . (C u) <= kAlgTol for f(u) = C u on the
/// boundary of the negative orthant and of its translates s*1 + R^m_-.
/// Deterministic samples (face centers, single-axis edges, the translated
/// vertex) are always checked; `samples` adds seeded random boundary points.
FluxReport flux_condition_orthant(const Mat& c, std::size_t samples, std::uint64_t seed = 0x5eed);

}  // namespace invcone
