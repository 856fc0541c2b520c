#pragma once

#include <Eigen/Dense>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace lfray {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Axis-aligned chart box. An unbounded box accepts every point.
struct Box {
    Vec lo;
    Vec hi;

    Box() = default;
    Box(Vec lo_, Vec hi_) : lo(std::move(lo_)), hi(std::move(hi_)) {}

    bool unbounded() const { return lo.size() == 0; }
    bool contains(const Vec& x) const {
        if (unbounded()) return true;
        return (x.array() >= lo.array()).all() && (x.array() <= hi.array()).all();
    }
    double diameter() const {
        if (unbounded()) return 1.0;
        return (hi - lo).norm();
    }
};

// ---------------------------------------------------------------------------
// Errors

enum class ErrorCode {
    Generic,
    Domain,            // point outside chart bounds
    InvalidMetric,     // e.g. Randers wind with h-norm >= 1
    DegenerateTensor,  // singular or non-Lorentzian fundamental tensor
    InvalidInput,
    ProjectionFailure,
    IntegrationFailure,
    ConeExit,
    NoCrossing,
    GrazingContact,
    NonTransverse,
    SolverFailure,
    InternalConsistency,
    NoArrival,
    Trapped,
    Infeasible,
    Schema,
};

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
    ErrorCode code() const { return code_; }

private:
    ErrorCode code_;
};

struct DomainError : Error {
    explicit DomainError(const std::string& w) : Error(ErrorCode::Domain, w) {}
};
struct InvalidMetricError : Error {
    explicit InvalidMetricError(const std::string& w) : Error(ErrorCode::InvalidMetric, w) {}
};
struct DegenerateTensorError : Error {
    explicit DegenerateTensorError(const std::string& w) : Error(ErrorCode::DegenerateTensor, w) {}
};
struct InvalidInputError : Error {
    explicit InvalidInputError(const std::string& w) : Error(ErrorCode::InvalidInput, w) {}
};
struct ProjectionError : Error {
    explicit ProjectionError(const std::string& w) : Error(ErrorCode::ProjectionFailure, w) {}
};
struct ConeExitError : Error {
    explicit ConeExitError(const std::string& w) : Error(ErrorCode::ConeExit, w) {}
};
struct NoCrossingError : Error {
    explicit NoCrossingError(const std::string& w) : Error(ErrorCode::NoCrossing, w) {}
};
struct GrazingContactError : Error {
    explicit GrazingContactError(const std::string& w) : Error(ErrorCode::GrazingContact, w) {}
};
struct NonTransverseError : Error {
    explicit NonTransverseError(const std::string& w) : Error(ErrorCode::NonTransverse, w) {}
};
struct SolverError : Error {
    explicit SolverError(const std::string& w) : Error(ErrorCode::SolverFailure, w) {}
};
struct InternalConsistencyError : Error {
    explicit InternalConsistencyError(const std::string& w)
        : Error(ErrorCode::InternalConsistency, w) {}
};
struct NoArrivalError : Error {
    explicit NoArrivalError(const std::string& w) : Error(ErrorCode::NoArrival, w) {}
};
struct TrappedError : Error {
    explicit TrappedError(const std::string& w) : Error(ErrorCode::Trapped, w) {}
};
struct InfeasibleError : Error {
    explicit InfeasibleError(const std::string& w) : Error(ErrorCode::Infeasible, w) {}
};
struct SchemaError : Error {
    explicit SchemaError(const std::string& w) : Error(ErrorCode::Schema, w) {}
};

// ---------------------------------------------------------------------------
// Shared tolerances. Values are relative to a local quadratic scale unless
// stated otherwise.

struct Tolerances {
    double lightlike = 1e-9;        // |L| band classifying a vector as lightlike
    double classification = 1e-9;   // band for subspace causal characters
    double newton_residual = 1e-11; // Snell solver residual
    double dedupe_angle = 1e-6;     // angular separation of distinct solutions
    double side = 1e-9;             // one-sided band for the interface side filter
    double crossing = 1e-10;        // |f| at a refined interface crossing
    double projection = 1e-12;      // |L| after cone projection
    double receiver_tube = 1e-6;    // tube radius around curve receivers
};

// ---------------------------------------------------------------------------
// Small helpers

// Orthonormal basis of the kernel of a nonzero covector, as columns.
// Built from the Householder reflector sending omega to |omega| e0.
Mat kernel_basis(const Vec& omega);

// Extend `cols` (assumed full column rank) to an orthonormal-ish basis of the
// ambient space; returns the appended columns only.
Mat complete_basis(const Mat& cols);

inline double sqr(double x) { return x * x; }

// Angle in [0, pi] between two nonzero vectors under the Euclidean metric.
double euclidean_angle(const Vec& a, const Vec& b);

// Least-squares slope of y against x.
double fit_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace lfray
