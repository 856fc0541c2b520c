#include <benchmark/benchmark.h>

#include "lfray/grid.hpp"
#include "lfray/snell.hpp"
#include "lfray/tracer.hpp"

using namespace lfray;

namespace {

Vec vec3(double a, double b, double c) {
    Vec v(3);
    v << a, b, c;
    return v;
}

Mat minkowski3() {
    Mat g = -Mat::Identity(3, 3);
    g(0, 0) = 1.0;
    return g;
}

Metric randers_metric() {
    std::vector<ScalarField> wind = {ScalarField::constant(0.3), ScalarField::constant(0.0)};
    return Metric::product(SpatialNorm::randers(Mat::Identity(2, 2), wind));
}

SceneConfig classical() {
    SceneConfig scene;
    scene.dim = 3;
    scene.metric1 = Metric::product_isotropic(3, ScalarField::constant(1.5));
    scene.metric2 = Metric::product_isotropic(3, ScalarField::constant(1.0));
    scene.chart = Box(Vec::Constant(3, -2.0), Vec::Constant(3, 2.0));
    scene.metric1.set_chart(scene.chart);
    scene.metric2.set_chart(scene.chart);
    scene.interface_spec = InterfaceSpec::plane(Vec::Unit(3, 1), 0.0);
    scene.integrator.step = 1e-3 * scene.chart.diameter();
    return scene;
}

void BM_eval_quadratic(benchmark::State& state) {
    const Metric m = Metric::quadratic(minkowski3());
    const Vec x = vec3(0, 0, 0), v = vec3(1, 0.6, 0.3);
    for (auto _ : state) benchmark::DoNotOptimize(m.eval(x, v));
}
BENCHMARK(BM_eval_quadratic);

void BM_eval_randers(benchmark::State& state) {
    const Metric m = randers_metric();
    const Vec x = vec3(0, 0, 0), v = vec3(1, 0.6, 0.3);
    for (auto _ : state) benchmark::DoNotOptimize(m.eval(x, v));
}
BENCHMARK(BM_eval_randers);

void BM_fundamental_tensor_randers(benchmark::State& state) {
    const Metric m = randers_metric();
    const Vec x = vec3(0, 0, 0), v = vec3(1, 0.6, 0.3);
    for (auto _ : state) benchmark::DoNotOptimize(m.fundamental_tensor(x, v));
}
BENCHMARK(BM_fundamental_tensor_randers);

void BM_christoffel_gradient_index(benchmark::State& state) {
    Vec a = Vec::Zero(3);
    a(1) = 0.25;
    const Metric m = Metric::product_isotropic(3, ScalarField::affine(1.2, a));
    const Vec x = vec3(0, 0.1, 0);
    const Vec v = project_to_cone(m, x, vec3(1, 0.7, 0.3));
    for (auto _ : state) benchmark::DoNotOptimize(formal_christoffel(m, x, v));
}
BENCHMARK(BM_christoffel_gradient_index);

void BM_snell_solve_quadratic(benchmark::State& state) {
    const Metric m1 = Metric::quadratic(minkowski3());
    Mat g2 = minkowski3();
    g2(0, 0) = 1.3;
    const Metric m2 = Metric::quadratic(g2);
    const InterfaceSpec eta = InterfaceSpec::plane(Vec::Unit(3, 1), 0.0);
    const Vec p = vec3(0, 0, 0);
    const Vec u = vec3(1, std::cos(0.5), std::sin(0.5));
    for (auto _ : state) {
        const IncidentData inc = incident_data(m1, m2, eta, p, u);
        benchmark::DoNotOptimize(solve_refraction(m1, m2, eta, inc));
    }
}
BENCHMARK(BM_snell_solve_quadratic);

void BM_snell_solve_isotropic(benchmark::State& state) {
    const SceneConfig scene = classical();
    const Vec p = vec3(0, 0, 0);
    const Vec u = vec3(1.5, std::cos(0.5), std::sin(0.5));
    for (auto _ : state) {
        const IncidentData inc =
            incident_data(scene.metric1, scene.metric2, scene.interface_spec, p, u);
        benchmark::DoNotOptimize(
            solve_refraction(scene.metric1, scene.metric2, scene.interface_spec, inc));
    }
}
BENCHMARK(BM_snell_solve_isotropic);

void BM_trace_classical(benchmark::State& state) {
    const SceneConfig scene = classical();
    const Vec start = vec3(0, -0.5, -0.2887);
    const Vec dir = vec3(1.5, std::cos(0.5236), std::sin(0.5236));
    for (auto _ : state) benchmark::DoNotOptimize(trace(scene, start, dir));
}
BENCHMARK(BM_trace_classical);

void BM_trace_discretized(benchmark::State& state) {
    const SceneConfig scene = classical();
    GridScene g;
    g.metric1 = scene.metric1;
    g.metric2 = scene.metric2;
    g.interface_spec = scene.interface_spec;
    g.box = scene.chart;
    g.resolution.assign(3, static_cast<int>(state.range(0)));
    const Vec start = vec3(0, -0.5, -0.2887);
    const Vec dir = vec3(1.5, std::cos(0.5236), std::sin(0.5236));
    for (auto _ : state) benchmark::DoNotOptimize(trace_discretized(g, start, dir));
}
BENCHMARK(BM_trace_discretized)->Arg(8)->Arg(32);

}  // namespace

BENCHMARK_MAIN();
