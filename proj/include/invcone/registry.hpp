#pragma once
// Worked examples with their exact systems, explicit witness fields and the
// verdict asserted for each.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "invcone/field.hpp"
#include "invcone/mat.hpp"
#include "invcone/system.hpp"

namespace invcone {

enum class ExpectedVerdict {
    wmp_fails,        // the witness is nonpositive on the boundary and positive inside
    wmp_holds,
    cone_invariant,   // the cone {P u <= 0 (first k rows)} is invariant
};

enum class DomainShape { box, disk };

struct RegistryEntry {
    std::string id;
    std::string description;
    EllipticSystem system;
    DomainShape shape = DomainShape::box;
    std::vector<double> lo, hi;              // box bounds, or the disk's bounding box
    std::optional<AnalyticField> witness;    // shows wMP failing when present
    ExpectedVerdict verdict = ExpectedVerdict::wmp_fails;
    std::optional<Mat> cone_p;               // for cone_invariant
    std::size_t cone_k = 0;
    std::optional<Mat> q_candidate;          // M-matrix candidate, when one is suggested
};

/// ids: ex1.1, ex1.3, ex1.8, ex1.10, remark1.8-matrices. Throws Error{UnknownId}.
RegistryEntry example_registry(const std::string& id);

const std::vector<std::string>& registry_ids();

/// The cross-coupled system on the unit square with gradient couplings eps, eps_prime.
/// Nonzero couplings get an explicit witness; both zero gives wmp_holds.
RegistryEntry example_1_3(double eps, double eps_prime);

/// Sample points: a deterministic spread over the domain interior (disk or
/// box), `count` points, seeded.
std::vector<Point> interior_points(const RegistryEntry& e, std::size_t count, std::uint64_t seed = 7);

/// Points on the domain boundary.
std::vector<Point> boundary_points(const RegistryEntry& e, std::size_t count);

}  // namespace invcone
