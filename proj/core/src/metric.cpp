#include "lfray/metric.hpp"

#include <cmath>
#include <random>
#include <sstream>

namespace lfray {

namespace {

// Central-difference Hessian of a scalar function of the direction.
template <typename F>
Mat central_hessian(F&& f, const Vec& c, double h) {
    const int n = static_cast<int>(c.size());
    Mat hess(n, n);
    const double f0 = f(c);
    Vec p = c;
    for (int i = 0; i < n; ++i) {
        p(i) = c(i) + h;
        const double fp = f(p);
        p(i) = c(i) - h;
        const double fm = f(p);
        p(i) = c(i);
        hess(i, i) = (fp - 2.0 * f0 + fm) / (h * h);
    }
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            p(i) = c(i) + h;
            p(j) = c(j) + h;
            const double fpp = f(p);
            p(j) = c(j) - h;
            const double fpm = f(p);
            p(i) = c(i) - h;
            const double fmm = f(p);
            p(j) = c(j) + h;
            const double fmp = f(p);
            p(i) = c(i);
            p(j) = c(j);
            hess(i, j) = hess(j, i) = (fpp - fpm - fmp + fmm) / (4.0 * h * h);
        }
    }
    return hess;
}

// Richardson-extrapolated Hessian: kills the O(h^2) truncation term while a
// moderately large base step keeps the rounding error near 1e-9.
template <typename F>
Mat extrapolated_hessian(F&& f, const Vec& c, double h) {
    return (4.0 * central_hessian(f, c, h) - central_hessian(f, c, 2.0 * h)) / 3.0;
}

}  // namespace

// ---------------------------------------------------------------------------
// SpatialNorm

SpatialNorm SpatialNorm::isotropic(int spatial_dim, ScalarField index, double c0) {
    SpatialNorm f;
    f.kind_ = Kind::Isotropic;
    f.spatial_dim_ = spatial_dim;
    f.index_ = std::move(index);
    f.c0_ = c0;
    return f;
}

SpatialNorm SpatialNorm::randers(Mat h, std::vector<ScalarField> wind) {
    SpatialNorm f;
    f.kind_ = Kind::Randers;
    f.spatial_dim_ = static_cast<int>(h.rows());
    f.h_ = std::move(h);
    f.wind_ = std::move(wind);
    if (static_cast<int>(f.wind_.size()) != f.spatial_dim_)
        throw InvalidInputError("randers: wind dimension mismatch");
    return f;
}

SpatialNorm SpatialNorm::custom(int spatial_dim, NormFn fn) {
    SpatialNorm f;
    f.kind_ = Kind::Custom;
    f.spatial_dim_ = spatial_dim;
    f.fn_ = std::move(fn);
    return f;
}

bool SpatialNorm::symmetric() const {
    switch (kind_) {
        case Kind::Isotropic:
            return true;
        case Kind::Randers:
            for (const auto& w : wind_)
                if (!(w.kind() == ScalarField::Kind::Constant && w.scale() == 0.0)) return false;
            return true;
        case Kind::Custom:
            return false;
    }
    return false;
}

bool SpatialNorm::constant_coefficients() const {
    switch (kind_) {
        case Kind::Isotropic:
            return index_.kind() == ScalarField::Kind::Constant;
        case Kind::Randers:
            for (const auto& w : wind_)
                if (w.kind() != ScalarField::Kind::Constant) return false;
            return true;
        case Kind::Custom:
            return false;
    }
    return false;
}

Vec SpatialNorm::randers_wind(const Vec& x) const {
    Vec w(spatial_dim_);
    for (int i = 0; i < spatial_dim_; ++i) w(i) = wind_[i].value(x);
    return w;
}

double SpatialNorm::value(const Vec& x, const Vec& sv) const {
    switch (kind_) {
        case Kind::Isotropic:
            return index_.value(x) / c0_ * sv.norm();
        case Kind::Randers: {
            const Vec w = randers_wind(x);
            const double wnorm2 = w.dot(h_ * w);
            const double lam = 1.0 - wnorm2;
            if (lam < 1e-6)
                throw InvalidMetricError("randers wind reaches h-norm 1 at a queried point");
            const double hvw = sv.dot(h_ * w);
            const double hvv = sv.dot(h_ * sv);
            return (-hvw + std::sqrt(hvw * hvw + lam * hvv)) / lam;
        }
        case Kind::Custom:
            return fn_(x, sv);
    }
    return 0.0;
}

Vec SpatialNorm::grad_sq(const Vec& x, const Vec& sv) const {
    // The gradient of F^2 is 1-homogeneous: differencing at the normalized
    // direction keeps rounding error independent of |sv|.
    const double nrm = sv.norm();
    const Vec svn = sv / nrm;
    const int n = spatial_dim_;
    const double h = FdSteps::first(svn);
    Vec g(n);
    Vec p = svn;
    for (int i = 0; i < n; ++i) {
        p(i) = svn(i) + h;
        const double fp = sqr(value(x, p));
        p(i) = svn(i) - h;
        const double fm = sqr(value(x, p));
        p(i) = svn(i);
        g(i) = nrm * (fp - fm) / (2.0 * h);
    }
    return g;
}

Mat SpatialNorm::fundamental(const Vec& x, const Vec& sv_in) const {
    // 0-homogeneous in the direction: evaluate at the normalized
    // representative so g_{lambda v} = g_v holds exactly.
    const Vec sv = sv_in / sv_in.norm();
    auto f2 = [&](const Vec& p) { return sqr(value(x, p)); };
    return 0.5 * extrapolated_hessian(f2, sv, 5.0e-4 * (1.0 + sv.norm()));
}

SpatialNorm SpatialNorm::frozen_at(const Vec& x) const {
    switch (kind_) {
        case Kind::Isotropic:
            return isotropic(spatial_dim_, ScalarField::constant(index_.value(x)), c0_);
        case Kind::Randers: {
            const Vec w = randers_wind(x);
            std::vector<ScalarField> cw;
            cw.reserve(spatial_dim_);
            for (int i = 0; i < spatial_dim_; ++i) cw.push_back(ScalarField::constant(w(i)));
            return randers(h_, std::move(cw));
        }
        case Kind::Custom: {
            Vec x0 = x;
            NormFn f = fn_;
            return custom(spatial_dim_, [x0, f](const Vec&, const Vec& sv) { return f(x0, sv); });
        }
    }
    return *this;
}

// ---------------------------------------------------------------------------
// ConeTriple

ConeTriple::ConeTriple(const Metric* metric, Vec point, Vec omega, Vec timelike, Mat spatial_basis)
    : metric_(metric),
      point_(std::move(point)),
      omega_(std::move(omega)),
      timelike_(std::move(timelike)),
      spatial_basis_(std::move(spatial_basis)) {}

double ConeTriple::norm(const Vec& z) const {
    if (z.norm() == 0.0) throw InvalidInputError("cone triple norm of zero spatial vector");
    if (metric_->family() == Metric::Family::Product) {
        const int n = metric_->dim() - 1;
        return metric_->spatial_norm()->value(point_, z.tail(n));
    }
    if (metric_->family() == Metric::Family::Quadratic) {
        const Mat g = metric_->fundamental_tensor(point_, timelike_);
        const double lz = z.dot(g * z);
        const double lt = timelike_.dot(g * timelike_);
        return std::sqrt(std::max(0.0, -lz / lt));
    }
    // Generic graph solve: the unique a > 0 with L(a T + z) = 0.
    double lo = 0.0;
    double llo = metric_->eval(point_, z);
    if (llo >= 0.0) throw ProjectionError("spatial vector not spacelike in Ker(omega)");
    double hi = z.norm();
    double lhi = metric_->eval(point_, hi * timelike_ + z);
    int guard = 0;
    while (lhi < 0.0 && guard++ < 80) {
        hi *= 2.0;
        lhi = metric_->eval(point_, hi * timelike_ + z);
    }
    if (lhi < 0.0) throw ProjectionError("no cone point along the time direction");
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double lm = metric_->eval(point_, mid * timelike_ + z);
        if (lm < 0.0)
            lo = mid;
        else
            hi = mid;
        if (hi - lo < 1e-15 * (1.0 + hi)) break;
    }
    return 0.5 * (lo + hi);
}

Vec ConeTriple::lift(const Vec& z) const { return norm(z) * timelike_ + z; }

// ---------------------------------------------------------------------------
// Metric construction

Metric Metric::quadratic(Mat g0) { return quadratic(std::move(g0), ScalarField::constant(1.0)); }

Metric Metric::quadratic(Mat g0, ScalarField conformal) {
    Vec t = Vec::Zero(g0.rows());
    t(0) = 1.0;
    return quadratic(std::move(g0), std::move(conformal), std::move(t));
}

Metric Metric::quadratic(Mat g0, ScalarField conformal, Vec time_ref) {
    Metric m;
    m.family_ = Family::Quadratic;
    m.dim_ = static_cast<int>(g0.rows());
    if (g0.rows() != g0.cols()) throw InvalidMetricError("quadratic matrix not square");
    if ((g0 - g0.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + g0.cwiseAbs().maxCoeff()))
        throw InvalidMetricError("quadratic matrix not symmetric");
    m.g0_ = 0.5 * (g0 + g0.transpose());
    m.conformal_ = std::move(conformal);
    m.time_ref_ = std::move(time_ref);
    if (m.time_ref_.dot(m.g0_ * m.time_ref_) <= 0.0)
        throw InvalidMetricError("time reference vector is not timelike for the quadratic matrix");
    return m;
}

Metric Metric::product(SpatialNorm norm) {
    Metric m;
    m.family_ = Family::Product;
    m.dim_ = norm.spatial_dim() + 1;
    m.norm_ = std::move(norm);
    return m;
}

Metric Metric::product_isotropic(int dim, ScalarField index, double c0) {
    return product(SpatialNorm::isotropic(dim - 1, std::move(index), c0));
}

Metric Metric::custom(int dim, CustomLFn fn) {
    Vec omega = Vec::Zero(dim);
    omega(0) = 1.0;
    return custom(dim, std::move(fn), std::move(omega));
}

Metric Metric::custom(int dim, CustomLFn fn, Vec omega_ref) {
    Metric m;
    m.family_ = Family::CustomL;
    m.dim_ = dim;
    m.custom_ = std::move(fn);
    m.omega_ref_ = std::move(omega_ref);
    return m;
}

bool Metric::reversible() const {
    switch (family_) {
        case Family::Quadratic:
            return true;
        case Family::Product:
            return norm_.symmetric();
        case Family::CustomL:
            return false;
    }
    return false;
}

bool Metric::constant_coefficients() const {
    switch (family_) {
        case Family::Quadratic:
            return conformal_.kind() == ScalarField::Kind::Constant;
        case Family::Product:
            return frozen_flag_ || norm_.constant_coefficients();
        case Family::CustomL:
            return frozen_flag_;
    }
    return false;
}

void Metric::check_chart(const Vec& x) const {
    if (chart_.unbounded()) return;
    // Metrics extend smoothly a little past the chart box; the margin keeps
    // integrator substeps near the boundary evaluable.
    const Vec pad = 5e-2 * (chart_.hi - chart_.lo).cwiseAbs().cwiseMax(1e-12);
    if (((x - chart_.lo).array() < -pad.array()).any() ||
        ((x - chart_.hi).array() > pad.array()).any()) {
        std::ostringstream os;
        os << "point outside chart bounds: [" << x.transpose() << "]";
        throw DomainError(os.str());
    }
}

double Metric::eval(const Vec& x, const Vec& y) const {
    check_chart(x);
    switch (family_) {
        case Family::Quadratic:
            return conformal_.value(x) * y.dot(g0_ * y);
        case Family::Product: {
            const int n = dim_ - 1;
            const double f = norm_.value(x, y.tail(n));
            return sqr(y(0)) - sqr(f);
        }
        case Family::CustomL:
            return custom_(x, y);
    }
    return 0.0;
}

Vec Metric::grad(const Vec& x, const Vec& y) const {
    check_chart(x);
    switch (family_) {
        case Family::Quadratic:
            return 2.0 * conformal_.value(x) * (g0_ * y);
        case Family::Product: {
            const int n = dim_ - 1;
            Vec g(dim_);
            g(0) = 2.0 * y(0);
            g.tail(n) = -norm_.grad_sq(x, y.tail(n));
            return g;
        }
        case Family::CustomL: {
            // dL is 1-homogeneous; difference at the normalized direction.
            const double nrm = y.norm();
            const Vec yn = y / nrm;
            const double h = FdSteps::first(yn);
            Vec g(dim_);
            Vec p = yn;
            for (int i = 0; i < dim_; ++i) {
                p(i) = yn(i) + h;
                const double fp = custom_(x, p);
                p(i) = yn(i) - h;
                const double fm = custom_(x, p);
                p(i) = yn(i);
                g(i) = nrm * (fp - fm) / (2.0 * h);
            }
            return g;
        }
    }
    return Vec::Zero(dim_);
}

Mat Metric::fundamental_tensor(const Vec& x, const Vec& y) const {
    check_chart(x);
    switch (family_) {
        case Family::Quadratic:
            return conformal_.value(x) * g0_;
        case Family::Product: {
            const int n = dim_ - 1;
            Mat g = Mat::Zero(dim_, dim_);
            g(0, 0) = 1.0;
            g.bottomRightCorner(n, n) = -norm_.fundamental(x, y.tail(n));
            return g;
        }
        case Family::CustomL: {
            const Vec yn = y / y.norm();
            auto fl = [&](const Vec& p) { return custom_(x, p); };
            return 0.5 * extrapolated_hessian(fl, yn, 5.0e-4 * (1.0 + yn.norm()));
        }
    }
    return Mat::Zero(dim_, dim_);
}

Mat Metric::fundamental_tensor_checked(const Vec& x, const Vec& y) const {
    Mat g = fundamental_tensor(x, y);
    Eigen::SelfAdjointEigenSolver<Mat> es(g);
    const Vec ev = es.eigenvalues();
    const double emax = ev.cwiseAbs().maxCoeff();
    int pos = 0, neg = 0;
    for (int i = 0; i < ev.size(); ++i) {
        if (ev(i) > 1e-10 * emax)
            ++pos;
        else if (ev(i) < -1e-10 * emax)
            ++neg;
    }
    if (pos != 1 || neg != dim_ - 1)
        throw DegenerateTensorError("fundamental tensor is singular or not Lorentzian");
    return g;
}

Mat Metric::dg_dx(const Vec& x, const Vec& y, int i) const {
    if (family_ == Family::Quadratic) {
        return conformal_.gradient(x)(i) * g0_;
    }
    const double h = FdSteps::space(x);
    Vec xp = x, xm = x;
    xp(i) += h;
    xm(i) -= h;
    return (fundamental_tensor(xp, y) - fundamental_tensor(xm, y)) / (2.0 * h);
}

double Metric::quadratic_scale(const Vec& x, const Vec& y) const {
    switch (family_) {
        case Family::Quadratic: {
            const double phi = std::abs(conformal_.value(x));
            return phi * y.cwiseAbs().dot(g0_.cwiseAbs() * y.cwiseAbs());
        }
        case Family::Product: {
            const int n = dim_ - 1;
            const Vec sv = y.tail(n);
            const double f = sv.norm() > 0.0 ? norm_.value(x, sv) : 0.0;
            return sqr(y(0)) + sqr(f);
        }
        case Family::CustomL: {
            const Mat g = fundamental_tensor(x, y);
            return y.cwiseAbs().dot(g.cwiseAbs() * y.cwiseAbs());
        }
    }
    return 1.0;
}

Vec Metric::time_covector(const Vec& x) const {
    switch (family_) {
        case Family::Quadratic:
            return conformal_.value(x) * (g0_ * time_ref_);
        case Family::Product:
        case Family::CustomL: {
            if (family_ == Family::CustomL && omega_ref_.size() == dim_) return omega_ref_;
            Vec w = Vec::Zero(dim_);
            w(0) = 1.0;
            return w;
        }
    }
    return Vec::Zero(dim_);
}

ConeTriple Metric::cone_triple_at(const Vec& x) const {
    check_chart(x);
    switch (family_) {
        case Family::Quadratic: {
            const Mat g = fundamental_tensor(x, time_ref_);
            const double tt = time_ref_.dot(g * time_ref_);
            if (tt <= 0.0) throw InvalidMetricError("time reference not timelike at point");
            Vec t = time_ref_ / std::sqrt(tt);
            Vec omega = g * t;
            return ConeTriple(this, x, omega, t, kernel_basis(omega));
        }
        case Family::Product: {
            Vec omega = Vec::Zero(dim_);
            omega(0) = 1.0;
            Vec t = omega;
            Mat basis = Mat::Zero(dim_, dim_ - 1);
            basis.bottomRows(dim_ - 1).setIdentity();
            return ConeTriple(this, x, omega, t, basis);
        }
        case Family::CustomL: {
            Vec omega = time_covector(x);
            Vec t = omega / omega.squaredNorm();
            // Push t into the cone interior within the slice {omega = 1}.
            Mat ker = kernel_basis(omega);
            for (int it = 0; it < 200 && eval(x, t) <= 0.0; ++it) {
                Vec g = grad(x, t);
                Vec step = ker * (ker.transpose() * g);
                const double sn = step.norm();
                if (sn < 1e-14) throw InvalidMetricError("no timelike direction found for custom L");
                t += 0.2 / sn * step;
            }
            if (eval(x, t) <= 0.0)
                throw InvalidMetricError("no timelike direction found for custom L");
            return ConeTriple(this, x, omega, t, ker);
        }
    }
    throw InvalidMetricError("unreachable");
}

Metric Metric::frozen_at(const Vec& x) const {
    Metric m;
    switch (family_) {
        case Family::Quadratic:
            m = quadratic(conformal_.value(x) * g0_, ScalarField::constant(1.0), time_ref_);
            break;
        case Family::Product:
            m = product(norm_.frozen_at(x));
            break;
        case Family::CustomL: {
            Vec x0 = x;
            CustomLFn f = custom_;
            m = custom(
                dim_, [x0, f](const Vec&, const Vec& y) { return f(x0, y); }, omega_ref_);
            break;
        }
    }
    m.chart_ = chart_;
    m.frozen_flag_ = true;
    return m;
}

bool Metric::same_coefficients(const Metric& a, const Vec& xa, const Metric& b, const Vec& xb,
                               double tol) {
    if (a.family_ != b.family_ || a.dim_ != b.dim_) return false;
    switch (a.family_) {
        case Family::Quadratic: {
            const Mat ga = a.conformal_.value(xa) * a.g0_;
            const Mat gb = b.conformal_.value(xb) * b.g0_;
            return (ga - gb).cwiseAbs().maxCoeff() <= tol * (1.0 + ga.cwiseAbs().maxCoeff()) &&
                   (a.time_ref_ - b.time_ref_).cwiseAbs().maxCoeff() <= tol;
        }
        case Family::Product: {
            const SpatialNorm& na = a.norm_;
            const SpatialNorm& nb = b.norm_;
            if (na.kind() != nb.kind()) return false;
            if (na.kind() == SpatialNorm::Kind::Isotropic) {
                const double ka = na.index_field().value(xa) / na.index_c0();
                const double kb = nb.index_field().value(xb) / nb.index_c0();
                return std::abs(ka - kb) <= tol * (1.0 + std::abs(ka));
            }
            if (na.kind() == SpatialNorm::Kind::Randers) {
                return (na.randers_h() - nb.randers_h()).cwiseAbs().maxCoeff() <= tol &&
                       (na.randers_wind(xa) - nb.randers_wind(xb)).cwiseAbs().maxCoeff() <= tol;
            }
            return false;
        }
        case Family::CustomL:
            return false;
    }
    return false;
}

void Metric::validate_probabilistic(int samples, unsigned seed) const {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> uni(0.0, 1.0);

    Vec lo = chart_.unbounded() ? Vec::Constant(dim_, -1.0) : chart_.lo;
    Vec hi = chart_.unbounded() ? Vec::Constant(dim_, 1.0) : chart_.hi;

    for (int s = 0; s < samples; ++s) {
        Vec x(dim_);
        for (int i = 0; i < dim_; ++i) x(i) = lo(i) + uni(rng) * (hi(i) - lo(i));

        if (family_ == Family::Quadratic) {
            fundamental_tensor_checked(x, time_ref_);
            continue;
        }
        if (family_ == Family::Product) {
            const int n = dim_ - 1;
            Vec sv(n);
            for (int i = 0; i < n; ++i) sv(i) = gauss(rng);
            sv.normalize();
            const double f = norm_.value(x, sv);
            if (!(f > 0.0)) throw InvalidMetricError("spatial norm not positive on a sample");
            const double f2 = norm_.value(x, 2.0 * sv);
            if (std::abs(f2 - 2.0 * f) > 1e-7 * (1.0 + f))
                throw InvalidMetricError("spatial norm not 1-homogeneous on a sample");
            Eigen::SelfAdjointEigenSolver<Mat> es(norm_.fundamental(x, sv));
            if (es.eigenvalues().minCoeff() <= 0.0)
                throw InvalidMetricError("spatial fundamental tensor not positive definite");
            continue;
        }
        // CustomL: check 2-homogeneity on the cone triple's timelike direction.
        Vec y(dim_);
        for (int i = 0; i < dim_; ++i) y(i) = gauss(rng);
        const double l1 = eval(x, y);
        const double l2 = eval(x, 2.0 * y);
        if (std::abs(l2 - 4.0 * l1) > 1e-7 * std::max(1.0, std::abs(4.0 * l1)))
            throw InvalidMetricError("custom L not 2-homogeneous on a sample");
    }
}

}  // namespace lfray
