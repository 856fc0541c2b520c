#pragma once

#include <optional>

#include "lfray/interface.hpp"

namespace lfray {

// Case labels for refraction outcomes. The letter encodes the causal
// character of the interface tangent space for the target cone (A timelike,
// B lightlike, C spacelike); the sub-case follows the character of the
// matched trace subspace.
enum class RefractionCase {
    A_i,                    // unique refraction, non-tangent
    A_ii,                   // unique refraction, tangent to the interface
    A_iii_NoCriticalPoints, // crossing directions exist but none critical
    B_i,                    // unique refraction, non-tangent
    B_ii_Exceptional,       // only the interface-tangency direction remains
    C_Two,                  // exactly two refractions
    NoCrossing,             // target cone entirely on the incoming side
    ExceptionalOnly,        // no crossing except along the tangency direction
    NotPossible,            // incompatible causal characters
};

enum class ReflectionCase {
    Astar_i,            // unique reflection, non-tangent
    Astar_ii_Unbroken,  // reflection coincides with the incident direction
    Bstar_Exceptional,  // only the interface-tangency direction remains
    NoReturning,        // incoming cone entirely on the far side
};

const char* to_string(RefractionCase c);
const char* to_string(ReflectionCase c);

// Everything the interface-point solve needs about the incident direction.
struct IncidentData {
    Vec p;           // interface point
    Vec u;           // incident direction, lightlike for medium 1, future
    Vec grad_f;      // unnormalized level-set gradient at p
    Mat eta_basis;   // n columns spanning the interface tangent space
    Vec transverse;  // normalized gradient, points into medium 2
    Mat pi_basis;    // n-1 columns spanning u-perp intersected with the tangent space
    Vec pi_completing;  // z_c tangent to the interface with dL1(u)(z_c) = 1

    SubspaceClass eta_char_1, eta_char_2;
    SubspaceClass pi_char_1, pi_char_2;
    bool transversal_ok = true;
    bool cone2_crosses = false;  // medium-2 cone meets the far side
    bool cone1_returns = false;  // medium-1 cone meets the near side
    bool u_tangent = false;
};

struct SnellDirection {
    Vec dir;  // normalized so the solver's time covector gives 1
    bool tangent_to_eta = false;
    bool straight_oriented = false;
    bool exceptional = false;
    double lambda = 0.0;    // proportionality factor of the matched covectors
    double residual = 0.0;  // snell_residual of this direction
};

struct SnellOutcome {
    bool is_reflection = false;
    RefractionCase refraction_case = RefractionCase::NotPossible;
    ReflectionCase reflection_case = ReflectionCase::NoReturning;
    std::vector<SnellDirection> directions;
    bool borderline = false;  // some causal classification sat in the tolerance band

    std::string case_label() const;
    // Direction count required by the case label (proper directions only).
    int expected_count() const;
};

// Assemble the incident data at p. Throws NonTransverseError when the
// orthogonal hyperplane of u coincides with the interface tangent space and
// InvalidInputError when u is not an incident direction.
IncidentData incident_data(const Metric& m1, const Metric& m2, const InterfaceSpec& eta,
                           const Vec& p, const Vec& u, const Tolerances& tol = {});

// Case predicted by the causal characters alone (the existence tables); the
// solvers verify their direction counts against these.
RefractionCase classify_refraction_case(const IncidentData& inc);
ReflectionCase classify_reflection_case(const IncidentData& inc);

// Solve the refraction law: directions v on the medium-2 cone whose orthogonal
// hyperplane cuts the interface tangent space in the same trace as the
// incident one, pointing into medium 2. Classifies the outcome, verifies the
// solver against the classification and fills per-direction flags.
SnellOutcome solve_refraction(const Metric& m1, const Metric& m2, const InterfaceSpec& eta,
                              const IncidentData& inc, const Tolerances& tol = {});

// Same constrained solve against the medium-1 metric with the side filter
// reversed (directions returning into medium 1).
SnellOutcome solve_reflection(const Metric& m1, const Metric& m2, const InterfaceSpec& eta,
                              const IncidentData& inc, const Tolerances& tol = {});

// Orientation criterion: true iff the broken hyperplane glued from the
// oriented half-hyperplanes of u and r selects a single region, i.e. the
// joined trajectory is locally time-minimizing. medium = 2 for refracted r,
// 1 for reflected r.
bool orientation_is_straight(const Metric& m1, const Metric& m2, const InterfaceSpec& eta,
                             const Vec& p, const Vec& u, const Vec& r, int medium,
                             const Tolerances& tol = {});

// Scale-free least-squares misfit of the restricted-covector proportionality
// after the optimal factor; zero for exact solutions.
double snell_residual(const Metric& m1, const Metric& m2, const InterfaceSpec& eta, const Vec& p,
                      const Vec& u, const Vec& r, int medium);

// arcsin(n2/n1) when n2 <= n1; empty otherwise.
std::optional<double> critical_angle(double n1, double n2);

// True iff no refraction exists while reflection does, for a doubly timelike
// interface point.
bool total_reflection_check(const IncidentData& inc);

struct ReceiverCheck {
    double residual = 0.0;  // normalized orthogonality defect
    bool ok = false;
};

// Curve receiver: ok iff the arrival velocity is NOT orthogonal to the curve
// tangent (the Fermat hypothesis).
ReceiverCheck receiver_check_curve(const Metric& m, const Vec& x, const Vec& v,
                                   const Vec& curve_tangent);

// Submanifold receiver with temporal function: ok iff every supplied basis
// vector of Ker(dt_B) lies in the orthogonal hyperplane of the arrival
// velocity.
ReceiverCheck receiver_check_submanifold(const Metric& m, const Vec& x, const Vec& v,
                                         const Mat& kernel_basis_dtB);

// Independent enumerator for spatial dimension 2: parametrizes the target
// cone by angle, brackets sign changes of the kernel-alignment determinant
// and refines by bisection. Used by tests to cross-check the Newton solver.
std::vector<Vec> sweep_solutions_2d(const Metric& m1, const Metric& target,
                                    const InterfaceSpec& eta, const Vec& p, const Vec& u,
                                    bool far_side, int samples = 2048,
                                    const Tolerances& tol = {});

}  // namespace lfray
