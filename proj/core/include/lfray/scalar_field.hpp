#pragma once

#include "lfray/common.hpp"

namespace lfray {

// Scalar field over the chart built from a small expression set: constants,
// affine functions and exponentials of affine functions. These are the only
// coefficient fields accepted in scene configs; library embeddings can pass
// arbitrary callbacks through the Custom variant instead.
class ScalarField {
public:
    enum class Kind { Constant, Affine, Exponential };

    static ScalarField constant(double c);
    // c0 + a . x
    static ScalarField affine(double c0, Vec a);
    // scale * exp(b . x)
    static ScalarField exponential(double scale, Vec b);

    double value(const Vec& x) const;
    Vec gradient(const Vec& x) const;

    Kind kind() const { return kind_; }
    double scale() const { return scale_; }
    const Vec& coeffs() const { return coeffs_; }

private:
    Kind kind_ = Kind::Constant;
    double scale_ = 0.0;  // constant value / affine offset / exp prefactor
    Vec coeffs_;          // affine or exponential coefficients
};

}  // namespace lfray
