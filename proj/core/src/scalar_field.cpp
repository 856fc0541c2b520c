#include "lfray/scalar_field.hpp"

#include <cmath>

namespace lfray {

ScalarField ScalarField::constant(double c) {
    ScalarField f;
    f.kind_ = Kind::Constant;
    f.scale_ = c;
    return f;
}

ScalarField ScalarField::affine(double c0, Vec a) {
    ScalarField f;
    f.kind_ = Kind::Affine;
    f.scale_ = c0;
    f.coeffs_ = std::move(a);
    return f;
}

ScalarField ScalarField::exponential(double scale, Vec b) {
    ScalarField f;
    f.kind_ = Kind::Exponential;
    f.scale_ = scale;
    f.coeffs_ = std::move(b);
    return f;
}

double ScalarField::value(const Vec& x) const {
    switch (kind_) {
        case Kind::Constant:
            return scale_;
        case Kind::Affine:
            return scale_ + coeffs_.dot(x);
        case Kind::Exponential:
            return scale_ * std::exp(coeffs_.dot(x));
    }
    return scale_;
}

Vec ScalarField::gradient(const Vec& x) const {
    switch (kind_) {
        case Kind::Constant:
            return Vec::Zero(x.size());
        case Kind::Affine:
            return coeffs_;
        case Kind::Exponential:
            return value(x) * coeffs_;
    }
    return Vec::Zero(x.size());
}

}  // namespace lfray
