#include "lfray/common.hpp"

#include <cmath>

namespace lfray {

Mat kernel_basis(const Vec& omega) {
    const int n = static_cast<int>(omega.size());
    const double nrm = omega.norm();
    if (nrm <= 0.0) throw InvalidInputError("kernel_basis: zero covector");

    // Householder reflector H taking omega/|omega| to +-e_k, k the pivot of
    // the largest component. Columns of H other than k span the kernel.
    int k = 0;
    omega.cwiseAbs().maxCoeff(&k);
    Vec u = omega / nrm;
    Vec e = Vec::Zero(n);
    e(k) = (u(k) >= 0.0) ? 1.0 : -1.0;
    Vec w = u + e;
    const double wn2 = w.squaredNorm();

    Mat basis(n, n - 1);
    int col = 0;
    for (int j = 0; j < n; ++j) {
        if (j == k) continue;
        Vec hj = Vec::Zero(n);
        hj(j) = 1.0;
        if (wn2 > 0.0) hj -= (2.0 * w(j) / wn2) * w;
        basis.col(col++) = hj;
    }
    return basis;
}

Mat complete_basis(const Mat& cols) {
    const int n = static_cast<int>(cols.rows());
    const int k = static_cast<int>(cols.cols());
    Eigen::HouseholderQR<Mat> qr(cols);
    Mat q = qr.householderQ() * Mat::Identity(n, n);
    return q.rightCols(n - k);
}

double euclidean_angle(const Vec& a, const Vec& b) {
    // Half-angle form: well conditioned near 0 and pi, unlike acos of the dot.
    const Vec ah = a / a.norm();
    const Vec bh = b / b.norm();
    return 2.0 * std::atan2((ah - bh).norm(), (ah + bh).norm());
}

double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const size_t n = x.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (size_t i = 0; i < n; ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    const double denom = n * sxx - sx * sx;
    return (n * sxy - sx * sy) / denom;
}

}  // namespace lfray
