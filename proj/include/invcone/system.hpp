#pragma once

#include <cstddef>
#include <vector>

#include "invcone/mat.hpp"

namespace invcone {

/// Linear system  Lap(u) + sum_i B^(i) D_i u + C u >= 0  for u: R^n -> R^m,
/// with the Laplacian acting componentwise. (B^(i) D_i u)_j = sum_k B^(i)_jk d_i u_k.
struct EllipticSystem {
    std::size_t n = 1;
    std::size_t m = 1;
    std::vector<Mat> b;  // n matrices, each m x m
    Mat c;               // m x m

    /// Throws Error{DimensionMismatch} unless all matrices are m x m, there are
    /// exactly n of them, n >= 1 and m >= 1.
    void validate() const;

    /// Same system expressed in the unknown v with u = Q v, premultiplied by P = Q^{-1}.
    EllipticSystem transformed(const Mat& q, const Mat& p) const;
};

}  // namespace invcone
