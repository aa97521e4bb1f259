#include "invcone/system.hpp"

#include "invcone/error.hpp"

namespace invcone {

void EllipticSystem::validate() const {
    if (n == 0 || m == 0) throw Error(ErrorCode::DimensionMismatch, "n and m must be positive");
    if (b.size() != n) throw Error(ErrorCode::DimensionMismatch, "expected n first-order matrices");
    for (const auto& bi : b)
        if (bi.rows() != m || bi.cols() != m) throw Error(ErrorCode::DimensionMismatch, "B^(i) must be m x m");
    if (c.rows() != m || c.cols() != m) throw Error(ErrorCode::DimensionMismatch, "C must be m x m");
}

EllipticSystem EllipticSystem::transformed(const Mat& q, const Mat& p) const {
    validate();
    EllipticSystem out{n, m, {}, p * c * q};
    out.b.reserve(n);
    for (const auto& bi : b) out.b.push_back(p * bi * q);
    return out;
}

}  // namespace invcone
