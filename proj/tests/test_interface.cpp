#include <doctest.h>

#include "support.hpp"

using namespace lfray;
using namespace lfray::testing;

namespace {

StopPredicate cross_plane(const InterfaceSpec& spec) {
    return [&spec](const GeodesicState& prev,
                   const GeodesicState& cur) -> std::optional<StopReason> {
        if (spec.level(prev.x) * spec.level(cur.x) < 0.0) return StopReason::InterfaceHit;
        if (cur.s > 10.0) return StopReason::MaxSteps;
        return std::nullopt;
    };
}

}  // namespace

TEST_CASE("side of the interface") {
    const InterfaceSpec spec = InterfaceSpec::plane(vec3(0, 1, 0), 0.0);  // f = x^1
    CHECK(side(spec, vec3(0, -1, 0)) == Side::Medium1);
    CHECK(side(spec, vec3(0, 1, 0)) == Side::Medium2);
    CHECK(side(spec, vec3(0, 0, 0.5)) == Side::OnInterface);
}

TEST_CASE("crossing a plane with a straight ray") {
    const Metric mk = Metric::quadratic(minkowski(3));
    const InterfaceSpec spec = InterfaceSpec::plane(vec3(0, 1, 0), 0.5);
    IntegrateOptions opts;
    opts.step = 1e-2;
    opts.normalize = false;
    const Segment seg =
        integrate_geodesic(mk, {vec3(0, 0, 0), vec3(1, 1, 0), 0.0}, cross_plane(spec), opts);
    REQUIRE(seg.stop_reason == StopReason::InterfaceHit);
    const CrossingEvent ev = locate_crossing(spec, mk, seg);
    CHECK((ev.point - vec3(0.5, 0.5, 0)).norm() < 1e-10);
    CHECK(ev.tau == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(std::abs(spec.gradient(ev.point).dot(ev.transverse) - 1.0) < 1e-12);
}

TEST_CASE("crossing refinement on a curved geodesic") {
    Vec b = Vec::Zero(3);
    b(1) = 2.0;
    const Metric m = Metric::quadratic(minkowski(3), ScalarField::exponential(1.0, b));
    const InterfaceSpec spec = InterfaceSpec::plane(vec3(0, 1, 0), 0.1);
    IntegrateOptions opts;
    opts.step = 1e-3;
    const Segment seg =
        integrate_geodesic(m, {vec3(0, -0.3, 0), vec3(1, 1, 0.4), 0.0}, cross_plane(spec), opts);
    REQUIRE(seg.stop_reason == StopReason::InterfaceHit);
    const CrossingEvent ev = locate_crossing(spec, m, seg);
    CHECK(std::abs(spec.level(ev.point)) <= 1e-10 * spec.local_scale(ev.point));
    // incoming velocity is on the cone
    CHECK(std::abs(m.eval(ev.point, ev.incoming)) <=
          1e-8 * std::max(1.0, m.quadratic_scale(ev.point, ev.incoming)));

    // Refined parameter is stable under halving the integration step.
    IntegrateOptions half = opts;
    half.step = 5e-4;
    const Segment seg2 =
        integrate_geodesic(m, {vec3(0, -0.3, 0), vec3(1, 1, 0.4), 0.0}, cross_plane(spec), half);
    const CrossingEvent ev2 = locate_crossing(spec, m, seg2);
    CHECK(std::abs(ev.tau - ev2.tau) <= 1e-8);
}

TEST_CASE("rays parallel to the interface never cross") {
    const Metric mk = Metric::quadratic(minkowski(3));
    const InterfaceSpec spec = InterfaceSpec::plane(vec3(0, 1, 0), 0.5);
    IntegrateOptions opts;
    opts.step = 1e-2;
    opts.normalize = false;
    const Segment seg =
        integrate_geodesic(mk, {vec3(0, 0, 0), vec3(1, 0, 1), 0.0}, cross_plane(spec), opts);
    REQUIRE(seg.stop_reason == StopReason::MaxSteps);
    CHECK_THROWS_AS(locate_crossing(spec, mk, seg), NoCrossingError);
}

TEST_CASE("grazing contact raises a dedicated error") {
    // a nearly interface-parallel lightlike ray: the sign change exists but
    // the crossing is tangential
    const Metric mk = Metric::quadratic(minkowski(3));
    const InterfaceSpec spec = InterfaceSpec::plane(vec3(0, 1, 0), 0.5);
    const double a = 5e-9;
    Segment seg;
    seg.medium = 1;
    const Vec v = vec3(1, a, std::sqrt(1.0 - a * a));
    const Vec x0 = vec3(0, 0.5 - 2e-7, 0);
    seg.samples.push_back({x0, v, 0.0});
    seg.samples.push_back({(x0 + 80.0 * v).eval(), v, 80.0});
    seg.stop_reason = StopReason::InterfaceHit;
    CHECK_THROWS_AS(locate_crossing(spec, mk, seg), GrazingContactError);
}

TEST_CASE("tangent basis spans the interface and completes with the transverse") {
    const InterfaceSpec spec = InterfaceSpec::graph(1, ScalarField::affine(0.2, vec3(0.1, 0, 0.3)));
    const Vec p = vec3(1.0, 0.2 + 0.1 * 1.0 + 0.3 * 0.7, 0.7);
    CHECK(std::abs(spec.level(p)) < 1e-12);
    const Vec grad = spec.gradient(p);
    const Mat basis = kernel_basis(grad);
    for (int j = 0; j < basis.cols(); ++j) CHECK(std::abs(grad.dot(basis.col(j))) < 1e-12);

    Mat full(3, 3);
    full.leftCols(2) = basis;
    full.col(2) = grad / grad.norm();
    Eigen::JacobiSVD<Mat> svd(full);
    CHECK(svd.singularValues()(0) / svd.singularValues()(2) < 1e6);
}

TEST_CASE("interface causal characters") {
    const Vec p0 = vec3(0, 0, 0);
    const Metric iso = Metric::product_isotropic(3, ScalarField::constant(1.3));
    // time-independent spatial interface: timelike
    CHECK(classify_interface(InterfaceSpec::plane(vec3(0, 1, 0), 0.0), iso, p0).character ==
          CausalChar::Timelike);

    const Metric mk = Metric::quadratic(minkowski(3));
    // constant-time slice: spacelike
    CHECK(classify_interface(InterfaceSpec::plane(vec3(1, 0, 0), 0.0), mk, p0).character ==
          CausalChar::Spacelike);
    // tangent plane to the cone: lightlike
    CHECK(classify_interface(InterfaceSpec::plane(vec3(1, -1, 0), 0.0), mk, p0).character ==
          CausalChar::Lightlike);

    CHECK_THROWS_AS(classify_interface(InterfaceSpec::plane(vec3(0, 1, 0), 0.3), mk, p0),
                    InvalidInputError);
}

TEST_CASE("cylinder level set") {
    const InterfaceSpec cyl = InterfaceSpec::cylinder({1, 2}, vec3(0, 0, 0), 0.5);
    CHECK(side(cyl, vec3(3, 0.1, 0.1)) == Side::Medium1);
    CHECK(side(cyl, vec3(3, 1, 1)) == Side::Medium2);
    CHECK(std::abs(cyl.level(vec3(0, 0.5, 0))) < 1e-14);
    const Vec g = cyl.gradient(vec3(0, 0.5, 0));
    CHECK(g(1) == doctest::Approx(1.0));
    CHECK(g(0) == doctest::Approx(0.0));
}
