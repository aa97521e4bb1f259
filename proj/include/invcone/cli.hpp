#pragma once
// Batch front end: problem files in, JSON reports out.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

#include <json.hpp>

#include "invcone/fd.hpp"
#include "invcone/mat.hpp"
#include "invcone/system.hpp"

namespace invcone::cli {

using Json = nlohmann::json;

inline constexpr const char* kToolVersion = "0.1.0";

enum ExitCode : int { kOk = 0, kInternal = 1, kInput = 2, kMismatch = 3 };

struct Problem {
    EllipticSystem system;
    std::optional<GridDomain> grid;
    std::optional<Mat> cone_p;
    std::size_t cone_k = 0;
    std::optional<Mat> q_candidate;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> trials;
    Json source;  // the parsed input, for the digest
};

/// Throws Error{Schema} on any structural problem and Error{DimensionMismatch}
/// when the matrices do not fit n and m.
Problem parse_problem(const Json& j);
Json problem_to_json(const Problem& p);

/// Problem file for a registry id, or for "prop1.4" (eps = 1, alpha = 0,
/// c = 1, rho = 1, c_tilde = 0). Throws Error{UnknownId}.
Problem builtin_problem(const std::string& id);

Json mat_to_json(const Mat& m);
Mat mat_from_json(const Json& j);                // Error{Schema}
Json field_to_json(const DiscreteField& f);
DiscreteField field_from_json(const Json& j);    // Error{Schema}
Json grid_to_json(const GridDomain& g);
GridDomain grid_from_json(const Json& j);        // Error{Schema}

/// CSV rows x[,y],component,value.
std::string field_csv(const DiscreteField& f);

Json cmd_analyze(const Problem& p);
Json cmd_wmp(const Problem& p, std::optional<double> h, Scheme scheme);
Json cmd_invariance(const Problem& p, std::optional<std::size_t> trials, std::optional<std::uint64_t> seed,
                    std::optional<double> h, Scheme scheme);
Json cmd_eigen(const Problem& p);

struct Reproduction {
    Json report;
    bool reproduced = false;
    std::optional<std::string> csv;  // figure1.csv contents
};

/// Registry ids, "figure1", "prop1.4" or "prop1.6". Throws Error{UnknownId}.
Reproduction cmd_reproduce(const std::string& id);

/// Copy of a report without its timings, for determinism comparisons.
Json strip_timings(Json report);

/// Full command line entry point; returns the process exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace invcone::cli
