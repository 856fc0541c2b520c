#pragma once

#include "lfray/metric.hpp"

namespace lfray {

enum class CausalChar { Timelike, Lightlike, Spacelike };

const char* to_string(CausalChar c);

struct VectorClass {
    CausalChar character;
    bool future = false;  // meaningful for causal vectors only
    double value = 0.0;   // L on the classified representative
    double scale = 1.0;
};

struct SubspaceClass {
    CausalChar character;
    double extremal = 0.0;  // max of L over the probed subspace sphere
    double scale = 1.0;
    bool borderline = false;  // extremal within the tolerance band of zero
    Vec maximizer;            // direction realizing the extremal value
};

// Causal character of a single vector: timelike iff v lies inside the future
// cone, lightlike iff on it; spacelike iff neither v nor -v is causal. The
// future flag is false when -v is the causal representative.
VectorClass classify_vector(const Metric& m, const Vec& x, const Vec& v,
                            const Tolerances& tol = {});

// Causal character of span(basis columns): timelike iff the maximum of L over
// the unit sphere of the subspace (both orientations probed) exceeds the
// tolerance band, lightlike within it, spacelike below. Quadratic metrics use
// the exact generalized-eigenvalue route; other families use an angular sweep
// (dim 2) or projected-gradient ascent with restarts.
SubspaceClass classify_subspace(const Metric& m, const Vec& x, const Mat& basis,
                                const Tolerances& tol = {});

// Basis of the hyperplane tangent to the cone along lightlike v, i.e. of
// Ker(dL(v)); v itself lies in the span.
Mat orthogonal_hyperplane(const Metric& m, const Vec& x, const Vec& v,
                          const Tolerances& tol = {});

// F(pi(w)) T + pi(w) for spatial w in Ker(omega).
Vec lift_to_cone(const ConeTriple& triple, const Vec& spatial);

// count future lightlike directions at x, approximately equidistributed over
// the spatial sphere of the cone triple and normalized to omega(v) = 1.
std::vector<Vec> indicatrix_sample(const Metric& m, const Vec& x, int count);

// Finslerian angle between u and w measured in the direction base:
// arccos of g^F_base(u, w) / (F(u) F(w)), clamped into [-1, 1].
double finsler_angle(const SpatialNorm& f, const Vec& x, const Vec& base, const Vec& u,
                     const Vec& w);

}  // namespace lfray
