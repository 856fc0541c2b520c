// Acceptance suite: one criterion per check, one PASS/FAIL line each, nonzero
// exit when anything fails. Tolerances are pinned here, not configurable.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>

#include "support.hpp"

using namespace lfray;
using namespace lfray::testing;

namespace {

constexpr double kDeg = 180.0 / M_PI;

int failures = 0;

void report(int index, const char* name, bool pass, const std::string& detail, double seconds) {
    std::printf("%s criterion %2d: %s (%s, %.2f s)\n", pass ? "PASS" : "FAIL", index, name,
                detail.c_str(), seconds);
    if (!pass) ++failures;
}

template <typename F>
void run(int index, const char* name, F&& body) {
    const auto t0 = std::chrono::steady_clock::now();
    bool pass = false;
    std::string detail;
    try {
        pass = body(detail);
    } catch (const std::exception& e) {
        pass = false;
        detail = std::string("exception: ") + e.what();
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    report(index, name, pass, detail, secs);
}

// 3+1 classical scene shared by criteria 1-3.
struct Classical4 {
    SceneConfig scene = classical_scene(4, 1.5, 1.0);
    Vec p = Vec::Zero(4);

    Vec incident(double theta, double azimuth) const {
        return classical_incident(scene, p, theta, azimuth);
    }
    IncidentData data(double theta, double azimuth) const {
        return incident_data(scene.metric1, scene.metric2, scene.interface_spec, p,
                             incident(theta, azimuth), scene.tol);
    }
};

bool criterion1(std::string& detail) {
    Classical4 c;
    double worst = 0.0;
    for (int deg = 5; deg <= 40; deg += 5) {
        const double th = deg / kDeg;
        const SnellOutcome out = solve_refraction(c.scene.metric1, c.scene.metric2,
                                                  c.scene.interface_spec, c.data(th, 0.6));
        if (out.directions.size() != 1) {
            detail = "unexpected direction count";
            return false;
        }
        const double got = spatial_angle_from_normal(out.directions[0].dir) * kDeg;
        const double expect = std::asin(1.5 * std::sin(th)) * kDeg;
        worst = std::max(worst, std::abs(got - expect));
    }
    char buf[96];
    std::snprintf(buf, sizeof buf, "max deviation %.3g deg", worst);
    detail = buf;
    return worst <= 1e-4;
}

bool criterion2(std::string& detail) {
    Classical4 c;
    double worst_angle = 0.0, worst_vol = 0.0;
    for (int deg = 5; deg <= 40; deg += 5) {
        const double th = deg / kDeg;
        const IncidentData inc = c.data(th, 0.6);
        const SnellOutcome refl =
            solve_reflection(c.scene.metric1, c.scene.metric2, c.scene.interface_spec, inc);
        if (refl.directions.size() != 1) {
            detail = "unexpected reflection count";
            return false;
        }
        const Vec& w = refl.directions[0].dir;
        worst_angle =
            std::max(worst_angle, std::abs(spatial_angle_from_normal(w) * kDeg - deg));

        const Eigen::Vector3d su = inc.u.tail(3).normalized();
        const Eigen::Vector3d sw = w.tail(3).normalized();
        const Eigen::Vector3d nrm = Eigen::Vector3d::UnitX();
        worst_vol = std::max(worst_vol, std::abs(su.cross(nrm).dot(sw)));

        const SnellOutcome refr =
            solve_refraction(c.scene.metric1, c.scene.metric2, c.scene.interface_spec, inc);
        const Eigen::Vector3d sv = refr.directions[0].dir.tail(3).normalized();
        worst_vol = std::max(worst_vol, std::abs(su.cross(nrm).dot(sv)));
    }
    char buf[96];
    std::snprintf(buf, sizeof buf, "max angle dev %.3g deg, max volume %.3g", worst_angle,
                  worst_vol);
    detail = buf;
    return worst_angle <= 1e-6 && worst_vol <= 1e-9;
}

bool criterion3(std::string& detail) {
    Classical4 c;
    auto refracts = [&](double th) {
        const RefractionCase rc = classify_refraction_case(c.data(th, 0.3));
        return rc == RefractionCase::A_i || rc == RefractionCase::A_ii;
    };
    double lo = 30.0 / kDeg, hi = 55.0 / kDeg;
    if (!refracts(lo) || refracts(hi)) {
        detail = "bracket invalid";
        return false;
    }
    for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (refracts(mid))
            lo = mid;
        else
            hi = mid;
    }
    const double flip = 0.5 * (lo + hi) * kDeg;
    const double expect = std::asin(1.0 / 1.5) * kDeg;

    // beyond the flip: no critical points, and the reflection stays unique
    const IncidentData beyond = c.data(50.0 / kDeg, 0.3);
    const bool beyond_ok =
        classify_refraction_case(beyond) == RefractionCase::A_iii_NoCriticalPoints &&
        classify_reflection_case(beyond) == ReflectionCase::Astar_i &&
        total_reflection_check(beyond);

    char buf[96];
    std::snprintf(buf, sizeof buf, "flip at %.4f deg vs %.4f", flip, expect);
    detail = buf;
    return std::abs(flip - expect) <= 0.01 && beyond_ok;
}

bool criterion4(std::string& detail) {
    std::mt19937_64 rng(20240817);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const Vec p = Vec::Zero(3);
    int done = 0, attempts = 0;
    while (done < 500 && attempts < 5000) {
        ++attempts;
        const Metric m1 = random_quadratic(rng, 3);
        const Metric m2 = random_quadratic(rng, 3);
        Vec normal(3);
        for (int i = 0; i < 3; ++i) normal(i) = gauss(rng);
        normal.normalize();
        const InterfaceSpec eta = InterfaceSpec::plane(normal, 0.0);

        Vec u;
        bool found = false;
        for (int k = 0; k < 32; ++k) {
            u = random_lightlike(rng, m1, p);
            if (normal.dot(u) > 0.02 * u.norm()) {
                found = true;
                break;
            }
        }
        if (!found) continue;

        IncidentData inc;
        try {
            inc = incident_data(m1, m2, eta, p, u);
        } catch (const NonTransverseError&) {
            continue;
        }
        // solve_refraction / solve_reflection verify the direction count and
        // tangency flags against the table rows and throw on any mismatch
        const SnellOutcome refr = solve_refraction(m1, m2, eta, inc);
        const SnellOutcome refl = solve_reflection(m1, m2, eta, inc);

        int proper = 0;
        for (const auto& d : refr.directions) proper += d.exceptional ? 0 : 1;
        if (proper != refr.expected_count()) {
            detail = "refraction count mismatch at instance " + std::to_string(done);
            return false;
        }
        proper = 0;
        for (const auto& d : refl.directions) proper += d.exceptional ? 0 : 1;
        if (proper != refl.expected_count()) {
            detail = "reflection count mismatch at instance " + std::to_string(done);
            return false;
        }
        ++done;
    }
    detail = std::to_string(done) + " randomized instances, no consistency errors";
    return done == 500;
}

bool criterion5(std::string& detail) {
    std::mt19937_64 rng(515151);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    const double scale = 2.0 * std::sqrt(3.0) * 2.0;  // chart diameter
    double worst_x = 0.0, worst_t = 0.0;
    int done = 0;
    while (done < 50) {
        const double n1 = 1.1 + 0.7 * uni(rng);
        const double n2 = 1.0 + 0.4 * uni(rng);
        SceneConfig scene = classical_scene(3, n1, n2);
        if (uni(rng) < 0.3) {
            // Randers far medium with a mild constant wind along the interface
            std::vector<ScalarField> wind = {ScalarField::constant(0.0),
                                             ScalarField::constant(0.1 + 0.2 * uni(rng))};
            scene.metric2 = Metric::product(SpatialNorm::randers(Mat::Identity(2, 2), wind));
            scene.metric2.set_chart(scene.chart);
        }

        const double theta = (8.0 + 20.0 * uni(rng)) / kDeg;
        const Vec start = vec3(0, -0.3 - 0.3 * uni(rng), -0.4 + 0.8 * uni(rng));
        Vec dir = classical_incident(scene, start, theta);
        dir.tail(2) = dir.tail(2) * (uni(rng) < 0.5 ? 1.0 : -1.0);

        Trajectory probe;
        try {
            probe = trace(scene, start, dir, 1);
        } catch (const Error&) {
            continue;
        }
        if (probe.events.size() != 1 || probe.events[0].chose_reflection) continue;

        // receiver: vertical observer on the refracted ray
        const Vec q = probe.events[0].crossing.point;
        const Vec v = probe.events[0].chosen_direction().dir;
        const double reach = 0.25 + 0.3 * uni(rng);
        ReceiverSpec rec;
        rec.kind = ReceiverSpec::Kind::Curve;
        Vec hit = q + reach * v / v.tail(2).norm();
        rec.origin = hit;
        rec.origin(0) = 0.0;
        rec.velocity = vec3(1, 0, 0);
        rec.param_min = 0.0;
        rec.param_max = 6.0;
        scene.receiver = rec;

        Trajectory traj;
        try {
            traj = trace(scene, start, dir);
        } catch (const Error&) {
            continue;
        }
        if (traj.status != TraceStatus::ReceiverHit) continue;

        FermatOracleResult oracle;
        try {
            oracle = fermat_oracle(scene.metric1, scene.metric2, scene.interface_spec, start,
                                   rec);
        } catch (const Error&) {
            continue;
        }
        worst_x = std::max(worst_x, (oracle.crossing - traj.events[0].crossing.point).norm());
        worst_t = std::max(worst_t, std::abs(oracle.time - *traj.arrival));
        ++done;
    }
    char buf[128];
    std::snprintf(buf, sizeof buf, "%d scenes, crossing dev %.3g (tol %.3g), time dev %.3g (%.3g)",
                  done, worst_x, 1e-4 * scale, worst_t, 1e-5 * scale);
    detail = buf;
    return done == 50 && worst_x <= 1e-4 * scale && worst_t <= 1e-5 * scale;
}

bool criterion6(std::string& detail) {
    std::mt19937_64 rng(606060);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const Vec p = Vec::Zero(3);
    int checked = 0, agreements = 0;
    while (checked < 100) {
        const Metric m1 = random_quadratic(rng, 3);
        const Metric m2 = random_quadratic(rng, 3);
        Vec normal(3);
        for (int i = 0; i < 3; ++i) normal(i) = gauss(rng);
        normal.normalize();
        const InterfaceSpec eta = InterfaceSpec::plane(normal, 0.0);
        Vec u;
        bool found = false;
        for (int k = 0; k < 32; ++k) {
            u = random_lightlike(rng, m1, p);
            if (normal.dot(u) > 0.05 * u.norm()) {
                found = true;
                break;
            }
        }
        if (!found) continue;

        IncidentData inc;
        SnellOutcome refr, refl;
        try {
            inc = incident_data(m1, m2, eta, p, u);
            refr = solve_refraction(m1, m2, eta, inc);
            refl = solve_reflection(m1, m2, eta, inc);
        } catch (const Error&) {
            continue;
        }
        auto probe = [&](const SnellDirection& d, const Metric& m_out) {
            if (d.exceptional || d.tangent_to_eta || checked >= 100) return;
            const double eps = 0.08;
            const Vec qb = p - eps * u.normalized();
            const Vec qa = p + eps * d.dir.normalized();
            const bool connector = timelike_connector_found(m1, m_out, eta, p, qb, qa, 200);
            ++checked;
            if (d.straight_oriented == !connector) ++agreements;
        };
        for (const auto& d : refr.directions) probe(d, m2);
        for (const auto& d : refl.directions) probe(d, m1);
    }
    detail = std::to_string(agreements) + "/" + std::to_string(checked) + " agree";
    return agreements == checked && checked == 100;
}

bool criterion7(std::string& detail) {
    std::mt19937_64 rng(707070);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const Vec p = Vec::Zero(3);
    int done = 0;
    while (done < 50) {
        const Metric m1 = random_quadratic(rng, 3, 0.25);
        const Metric m2 = random_quadratic(rng, 3, 0.25);
        // spacelike face for the far cone: the conormal of its time reference
        const Vec phi = m2.time_covector(p);
        const InterfaceSpec eta = InterfaceSpec::plane(phi, 0.0);

        Vec u;
        bool found = false;
        for (int k = 0; k < 32; ++k) {
            u = random_lightlike(rng, m1, p);
            if (phi.dot(u) > 0.05 * u.norm()) {
                found = true;
                break;
            }
        }
        if (!found) continue;

        IncidentData inc;
        SnellOutcome out;
        try {
            inc = incident_data(m1, m2, eta, p, u);
            if (inc.eta_char_2.character != CausalChar::Spacelike) continue;
            out = solve_refraction(m1, m2, eta, inc);
        } catch (const Error&) {
            continue;
        }
        if (out.refraction_case != RefractionCase::C_Two) continue;
        if (out.directions.size() != 2) {
            detail = "direction count mismatch";
            return false;
        }
        int straight = 0;
        for (const auto& d : out.directions) straight += d.straight_oriented ? 1 : 0;
        if (straight != 1) {
            detail = "straight-branch count " + std::to_string(straight);
            return false;
        }
        ++done;
    }
    detail = std::to_string(done) + " spacelike-face instances, one minimizing branch each";
    return done == 50;
}

bool criterion8(std::string& detail) {
    // lightlike drift along traced segments of the classical and a curved
    // quadratic scene
    double worst_drift = 0.0;
    {
        SceneConfig scene = classical_scene(3, 1.5, 1.0);
        const Vec start = vec3(0, -0.5, -0.2);
        const Trajectory traj = trace(scene, start, classical_incident(scene, start, 0.4));
        for (const auto& seg : traj.segments) {
            const Metric& m =
                scene.metric_for_side(seg.medium == 2 ? Side::Medium2 : Side::Medium1);
            for (const auto& st : seg.samples)
                worst_drift = std::max(worst_drift,
                                       std::abs(m.eval(st.x, st.y)) /
                                           std::max(1.0, m.quadratic_scale(st.x, st.y)));
        }
    }
    Vec b = Vec::Zero(3);
    b(1) = 2.0;
    const Metric conf = Metric::quadratic(minkowski(3), ScalarField::exponential(1.0, b));
    {
        IntegrateOptions opts;
        opts.step = 1e-3;
        auto stop = [](const GeodesicState&, const GeodesicState& cur)
            -> std::optional<StopReason> {
            return cur.s >= 0.5 ? std::optional(StopReason::MaxSteps) : std::nullopt;
        };
        const Segment seg =
            integrate_geodesic(conf, {vec3(0, -0.4, 0.1), vec3(1, 1, 0.3), 0.0}, stop, opts);
        for (const auto& st : seg.samples)
            worst_drift = std::max(worst_drift,
                                   std::abs(conf.eval(st.x, st.y)) /
                                       std::max(1.0, conf.quadratic_scale(st.x, st.y)));
    }

    // RK self-convergence order on the smooth quadratic scene
    auto endpoint = [&](double h) {
        IntegrateOptions opts;
        opts.step = h;
        auto stop = [](const GeodesicState&, const GeodesicState& cur)
            -> std::optional<StopReason> {
            return cur.s >= 0.5 - 1e-12 ? std::optional(StopReason::MaxSteps) : std::nullopt;
        };
        return integrate_geodesic(conf, {vec3(0, -0.4, 0.1), vec3(1, 1, 0.3), 0.0}, stop, opts)
            .samples.back()
            .x;
    };
    const Vec ref = endpoint(0.004 / 16.0);
    std::vector<double> lh, le;
    for (double h : {0.004, 0.002, 0.001}) {
        lh.push_back(std::log2(h));
        le.push_back(std::log2((endpoint(h) - ref).norm()));
    }
    const double slope = fit_slope(lh, le);

    char buf[96];
    std::snprintf(buf, sizeof buf, "drift %.3g, RK order %.2f", worst_drift, slope);
    detail = buf;
    return worst_drift <= 1e-8 && std::abs(slope - 4.0) <= 0.3;
}

bool criterion9(std::string& detail) {
    // (a) exact tiling of the two-media scene
    SceneConfig scene = classical_scene(3, 1.5, 1.0);
    GridScene tiled;
    tiled.metric1 = scene.metric1;
    tiled.metric2 = scene.metric2;
    tiled.interface_spec = scene.interface_spec;
    tiled.box = scene.chart;
    tiled.resolution.assign(3, 8);
    tiled.jitter_scale = 0.0;

    const double theta = 30.0 / kDeg;
    const Vec start = vec3(0, -0.5, -0.5 * std::tan(theta));
    const Vec dir = classical_incident(scene, start, theta);
    const Trajectory cont = trace(scene, start, dir);
    const Trajectory disc = trace_discretized(tiled, start, dir);
    double bend_dev = -1.0;
    std::string tiled_case, cont_case = cont.events[0].refraction->case_label();
    for (const auto& ev : disc.events) {
        if (euclidean_angle(ev.chosen_direction().dir, ev.crossing.incoming) > 1e-9) {
            bend_dev = euclidean_angle(ev.chosen_direction().dir,
                                       cont.events[0].chosen_direction().dir);
            tiled_case = ev.refraction->case_label();
        }
    }
    const bool tiling_ok = bend_dev >= 0.0 && bend_dev <= 1e-6 && tiled_case == cont_case;

    // (b) bundle-mean endpoint errors decrease monotonically on a smooth
    // gradient-index scene
    Vec a = Vec::Zero(3);
    a(1) = 0.25;
    a(2) = 0.1;
    const Metric grin = Metric::product_isotropic(3, ScalarField::affine(1.2, a));
    SceneConfig smooth;
    smooth.dim = 3;
    smooth.metric1 = grin;
    smooth.metric2 = grin;
    smooth.chart = Box(Vec::Constant(3, -1.5), Vec::Constant(3, 1.5));
    smooth.metric1.set_chart(smooth.chart);
    smooth.metric2.set_chart(smooth.chart);
    smooth.interface_spec = InterfaceSpec::plane(vec3(0, 1, 0), 0.6);
    smooth.integrator.step = 2e-4 * smooth.chart.diameter();

    GridScene g;
    g.metric1 = grin;
    g.metric2 = grin;
    g.box = smooth.chart;
    g.resolution.assign(3, 8);

    std::vector<double> means;
    for (int res : {8, 16, 32, 64}) {
        double mean = 0.0;
        for (int k = 0; k < 5; ++k) {
            const Vec s = vec3(-1.2, -0.55, 0.02 * k - 0.04);
            const Vec d = project_to_cone(grin, s, vec3(1, 1, 0.1 + 0.07 * k));
            GridScene gk = g;
            const ConvergenceTable t =
                convergence_study(gk, smooth, s, d, {res, 2 * res, 4 * res}, 1, 0.6);
            mean += t.rows[0].error;
        }
        means.push_back(mean / 5.0);
    }
    const bool monotone = means[0] > means[1] && means[1] > means[2] && means[2] > means[3];

    char buf[160];
    std::snprintf(buf, sizeof buf, "tiling dev %.3g rad; bundle errors %.3g>%.3g>%.3g>%.3g",
                  bend_dev, means[0], means[1], means[2], means[3]);
    detail = buf;
    return tiling_ok && monotone;
}

bool criterion10(std::string& detail) {
    std::mt19937_64 rng(101010);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> boost(-0.05, 0.5);
    const Vec x = vec3(0.1, -0.2, 0.05);

    std::vector<Metric> families;
    families.push_back(Metric::quadratic(minkowski(3)));
    {
        Vec b = Vec::Zero(3);
        b(1) = 2.0;
        families.push_back(Metric::quadratic(minkowski(3), ScalarField::exponential(1.0, b)));
    }
    {
        Vec a = Vec::Zero(3);
        a(1) = 0.1;
        families.push_back(Metric::product_isotropic(3, ScalarField::affine(1.2, a)));
    }
    {
        Vec wg = Vec::Zero(3);
        wg(2) = 0.05;
        std::vector<ScalarField> wind = {ScalarField::constant(0.3),
                                         ScalarField::affine(0.0, wg)};
        families.push_back(Metric::product(SpatialNorm::randers(Mat::Identity(2, 2), wind)));
    }
    families.push_back(Metric::custom(3, [](const Vec& x_, const Vec& y) {
        const double w = 0.2 + 0.05 * x_(1);
        return sqr(y(0)) - (sqr(y(1) - w * y(0)) + sqr(y(2)));
    }));

    long evals = 0;
    for (const auto& m : families) {
        const ConeTriple triple = m.cone_triple_at(x);
        for (int trial = 0; trial < 1000; ++trial) {
            Vec c(2);
            c << gauss(rng), gauss(rng);
            c.normalize();
            const Vec z = triple.spatial_basis() * c;
            const double f = triple.norm(z);
            const Vec v = (f * (1.0 + boost(rng))) * triple.timelike() + z;
            const double lv = m.eval(x, v);
            const double scale = std::max(1.0, m.quadratic_scale(x, v));

            for (double lam : {0.5, 2.0, 10.0}) {
                if (std::abs(m.eval(x, (lam * v).eval()) - lam * lam * lv) >
                    1e-9 * std::max(1.0, std::abs(lam * lam * lv))) {
                    detail = "2-homogeneity violated";
                    return false;
                }
            }
            const Mat g = m.fundamental_tensor(x, v);
            if (std::abs(v.dot(g * v) - lv) > 1e-8 * scale) {
                detail = "tensor identity violated";
                return false;
            }
            const Mat g2 = m.fundamental_tensor(x, (2.0 * v).eval());
            if ((g2 - g).norm() > 1e-8 * std::max(1.0, g.norm())) {
                detail = "0-homogeneity violated";
                return false;
            }
            Vec w(3);
            w << gauss(rng), gauss(rng), gauss(rng);
            const Vec dl = m.grad(x, v);
            if (std::abs(dl.dot(w) - 2.0 * w.dot(g * v)) > 1e-8 * scale * w.norm()) {
                detail = "covector-tensor consistency violated";
                return false;
            }
            const Vec vl = triple.lift(z);
            const Vec dll = m.grad(x, vl);
            if (std::abs(dll.dot(vl)) > 1e-10 * dll.norm() * vl.norm()) {
                detail = "radial direction not in the cone tangent plane";
                return false;
            }
            ++evals;
        }
    }
    detail = std::to_string(evals) + " evaluations across " +
             std::to_string(families.size()) + " families";
    return evals == 5000;
}

}  // namespace

int main() {
    std::vector<double> times;
    auto timed = [&](int idx, const char* name, bool (*fn)(std::string&), double budget) {
        const auto t0 = std::chrono::steady_clock::now();
        run(idx, name, fn);
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (budget > 0.0 && secs > budget) {
            std::printf("FAIL criterion %2d: runtime %.1f s exceeds %.0f s budget\n", idx, secs,
                        budget);
            ++failures;
        }
    };

    timed(1, "classical refraction sweep", criterion1, 10.0);
    timed(2, "law of reflection and coplanarity", criterion2, 0.0);
    timed(3, "critical angle flip", criterion3, 0.0);
    timed(4, "case-table exhaustiveness", criterion4, 60.0);
    timed(5, "brute-force arrival-time oracle", criterion5, 0.0);
    timed(6, "orientation vs timelike connector", criterion6, 0.0);
    timed(7, "double refraction minimizing branch", criterion7, 0.0);
    timed(8, "geodesic integrity", criterion8, 0.0);
    timed(9, "discretization consistency", criterion9, 120.0);
    timed(10, "homogeneity and tensor identities", criterion10, 10.0);

    if (failures == 0) {
        std::printf("acceptance: all criteria passed\n");
        return 0;
    }
    std::printf("acceptance: %d failure(s)\n", failures);
    return 1;
}
