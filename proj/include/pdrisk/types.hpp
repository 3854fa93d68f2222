#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace pdrisk {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

// Error taxonomy. Everything derives from a std exception so callers that
// only care about "something went wrong" can catch std::exception.

/// A parameter is outside the documented domain (negative radius, NaN, ...).
struct InvalidParameter : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// The input is valid but the requested quantity is not well defined for it.
struct DegenerateInput : std::domain_error {
    using std::domain_error::domain_error;
};

/// A metric (e.g. psnr) is undefined for the given inputs.
struct UndefinedMetric : std::domain_error {
    using std::domain_error::domain_error;
};

/// Rejection sampling could not produce a draw from the requested event.
struct SamplingFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A constrained program has an empty feasible set.
struct Infeasible : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// An iterative solver misbehaved (objective increase, bracket failure).
struct SolverFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

inline void require(bool ok, const char *what) {
    if (!ok)
        throw InvalidParameter(what);
}

inline bool all_finite(const Vector &v) { return v.allFinite(); }

inline void require_finite(const Vector &v, const char *what) {
    if (!v.allFinite())
        throw InvalidParameter(what);
}

} // namespace detail

/// The three proximal-denoising programs.
enum class ProgramKind {
    ConstrainedLS,   ///< min ||y-x||_2  s.t. ||x||_1 <= tau
    UnconstrainedQP, ///< min 1/2||y-x||_2^2 + lambda ||x||_1
    BasisPursuitBP,  ///< min ||x||_1   s.t. ||y-x||_2 <= sigma
};

inline constexpr ProgramKind all_programs[] = {
    ProgramKind::ConstrainedLS, ProgramKind::UnconstrainedQP,
    ProgramKind::BasisPursuitBP};

inline std::string_view to_string(ProgramKind k) {
    switch (k) {
    case ProgramKind::ConstrainedLS: return "LS";
    case ProgramKind::UnconstrainedQP: return "QP";
    case ProgramKind::BasisPursuitBP: return "BP";
    }
    return "?";
}

inline ProgramKind program_from_string(std::string_view s) {
    if (s == "LS" || s == "ls") return ProgramKind::ConstrainedLS;
    if (s == "QP" || s == "qp") return ProgramKind::UnconstrainedQP;
    if (s == "BP" || s == "bp") return ProgramKind::BasisPursuitBP;
    throw InvalidParameter("unknown program '" + std::string(s) + "'");
}

/// A program together with its governing parameter, in signal units
/// (tau for LS, the soft threshold for QP, sigma for BP).
struct ProgramSpec {
    ProgramKind kind = ProgramKind::UnconstrainedQP;
    double param = 0.0;

    void validate() const {
        detail::require(std::isfinite(param) && param >= 0.0,
                        "ProgramSpec: parameter must be finite and >= 0");
    }
};

} // namespace pdrisk
