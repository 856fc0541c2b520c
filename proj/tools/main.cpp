// lfray: command line front end for the cone-structure ray tracer.
//
// Subcommands: classify, snell, trace, grid, verify-classical. Every command
// reads a JSON scene file and prints a machine-readable run report to stdout;
// trace and grid additionally write CSV/JSON/SVG artifacts into --out.

#include <CLI11.hpp>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>

#include "lfray/json_io.hpp"

namespace fs = std::filesystem;
using namespace lfray;

namespace {

constexpr double kDeg = 180.0 / M_PI;

constexpr int kExitSchema = 2;
constexpr int kExitSolver = 3;
constexpr int kExitNoArrival = 4;
constexpr int kExitTrapped = 5;

int exit_code_for(ErrorCode code) {
    switch (code) {
        case ErrorCode::Schema:
            return kExitSchema;
        case ErrorCode::NoArrival:
            return kExitNoArrival;
        case ErrorCode::Trapped:
            return kExitTrapped;
        case ErrorCode::SolverFailure:
        case ErrorCode::InternalConsistency:
        case ErrorCode::DegenerateTensor:
        case ErrorCode::NonTransverse:
        case ErrorCode::GrazingContact:
        case ErrorCode::ConeExit:
        case ErrorCode::ProjectionFailure:
        case ErrorCode::NoCrossing:
            return kExitSolver;
        default:
            return 1;
    }
}

struct Cmd {
    std::string scene_path;
    std::string out_dir = ".";
    std::vector<double> point;
    std::vector<double> start;
    std::vector<double> dir;
    std::vector<int> resolution = {8, 16, 32};
    std::vector<std::string> formats = {"csv", "json"};
    std::string branch_policy;
    std::string proj = "0,1";
    int max_events = -1;
    int stop_axis = -1;
    double stop_value = 0.0;
    long seed = -1;
    bool reflect = false;
};

Json load_scene_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw SchemaError("cannot open scene file " + path);
    Json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw SchemaError(std::string("scene file is not valid JSON: ") + e.what());
    }
    return j;
}

Vec to_vec(const std::vector<double>& v, int dim, const std::string& what) {
    if (static_cast<int>(v.size()) != dim)
        throw SchemaError(what + ": expected " + std::to_string(dim) + " components");
    Vec out(dim);
    for (int i = 0; i < dim; ++i) out(i) = v[i];
    return out;
}

double angle_from_normal_deg(const SceneConfig& scene, const Vec& p, const Vec& v) {
    const Vec grad = scene.interface_spec.gradient(p);
    if (scene.metric1.family() == Metric::Family::Product) {
        const int n = scene.dim - 1;
        const Vec sv = v.tail(n);
        const Vec sn = grad.tail(n);
        if (sn.norm() < 1e-12) return euclidean_angle(v, grad) * kDeg;
        const double along = std::abs(sv.dot(sn)) / sn.norm();
        const Vec transverse = sv - sv.dot(sn) / sn.squaredNorm() * sn;
        return std::atan2(transverse.norm(), along) * kDeg;
    }
    return euclidean_angle(v, grad) * kDeg;
}

Json base_report(const std::string& command, const Json& scene_echo) {
    Json rep;
    rep["command"] = command;
    rep["scene"] = scene_echo;
    rep["scene_hash"] = scene_hash(scene_echo);
    rep["warnings"] = Json::array();
    return rep;
}

void emit(Json& rep, std::chrono::steady_clock::time_point t0) {
    const auto dt = std::chrono::steady_clock::now() - t0;
    rep["timing_ms"] = std::chrono::duration<double, std::milli>(dt).count();
    std::cout << rep.dump(2) << "\n";
}

void collect_outcome_warnings(Json& rep, const SnellOutcome& out) {
    if (out.borderline)
        rep["warnings"].push_back(
            "causal classification within the lightlike tolerance band (borderline row)");
    for (const auto& d : out.directions)
        if (d.exceptional) {
            rep["warnings"].push_back(
                "exceptional interface-tangent direction (arrival-time criticality not "
                "guaranteed)");
            break;
        }
}

int cmd_classify(const Cmd& cmd) {
    const auto t0 = std::chrono::steady_clock::now();
    const Json scene_json = load_scene_json(cmd.scene_path);
    const SceneConfig scene = scene_from_json(scene_json);
    const Vec p = to_vec(cmd.point, scene.dim, "--point");

    if (std::abs(scene.interface_spec.level(p)) >
        1e-6 * scene.interface_spec.local_scale(p))
        throw InvalidInputError("classify: point is not on the interface");

    Json rep = base_report("classify", scene_to_json(scene));
    Json out;
    const auto c1 = classify_interface(scene.interface_spec, scene.metric1, p, scene.tol);
    const auto c2 = classify_interface(scene.interface_spec, scene.metric2, p, scene.tol);
    out["point"] = vector_to_json(p);
    out["interface_char_medium1"] = to_string(c1.character);
    out["interface_char_medium2"] = to_string(c2.character);
    if (c1.borderline || c2.borderline)
        rep["warnings"].push_back("interface causal character is borderline lightlike");

    if (!cmd.dir.empty()) {
        const Vec u0 = to_vec(cmd.dir, scene.dim, "--dir");
        const Vec u = project_to_cone(scene.metric1, p, u0, scene.tol);
        const IncidentData inc =
            incident_data(scene.metric1, scene.metric2, scene.interface_spec, p, u, scene.tol);
        out["incident"] = incident_data_to_json(inc);
        out["predicted_refraction_case"] = to_string(classify_refraction_case(inc));
        out["predicted_reflection_case"] = to_string(classify_reflection_case(inc));
        if (inc.eta_char_1.character == CausalChar::Timelike &&
            inc.eta_char_2.character == CausalChar::Timelike)
            out["total_reflection"] = total_reflection_check(inc);
    }
    rep["outcome"] = std::move(out);
    emit(rep, t0);
    return 0;
}

int cmd_snell(const Cmd& cmd) {
    const auto t0 = std::chrono::steady_clock::now();
    const Json scene_json = load_scene_json(cmd.scene_path);
    const SceneConfig scene = scene_from_json(scene_json);
    const Vec p = to_vec(cmd.point, scene.dim, "--point");
    const Vec u = project_to_cone(scene.metric1, p,
                                  to_vec(cmd.dir, scene.dim, "--dir"), scene.tol);

    const IncidentData inc =
        incident_data(scene.metric1, scene.metric2, scene.interface_spec, p, u, scene.tol);
    const SnellOutcome out =
        cmd.reflect
            ? solve_reflection(scene.metric1, scene.metric2, scene.interface_spec, inc, scene.tol)
            : solve_refraction(scene.metric1, scene.metric2, scene.interface_spec, inc, scene.tol);

    Json rep = base_report(cmd.reflect ? "snell --reflect" : "snell", scene_to_json(scene));
    Json jout = snell_outcome_to_json(out);
    jout["incident"] = incident_data_to_json(inc);
    jout["incident_angle_deg"] = angle_from_normal_deg(scene, p, u);
    for (size_t i = 0; i < out.directions.size(); ++i)
        jout["directions"][i]["angle_deg"] =
            angle_from_normal_deg(scene, p, out.directions[i].dir);
    collect_outcome_warnings(rep, out);
    rep["outcome"] = std::move(jout);
    emit(rep, t0);
    return 0;
}

int cmd_trace(const Cmd& cmd) {
    const auto t0 = std::chrono::steady_clock::now();
    const Json scene_json = load_scene_json(cmd.scene_path);
    SceneConfig scene = scene_from_json(scene_json);
    if (!cmd.branch_policy.empty()) {
        if (cmd.branch_policy == "snell")
            scene.branch_policy = BranchPolicy::SnellConeGeodesicOnly;
        else if (cmd.branch_policy == "all")
            scene.branch_policy = BranchPolicy::AllBranches;
        else if (cmd.branch_policy == "reflect")
            scene.branch_policy = BranchPolicy::ReflectOnly;
        else
            throw SchemaError("--branch-policy: expected snell|all|reflect");
    }
    if (cmd.seed >= 0) scene.seed = static_cast<unsigned>(cmd.seed);

    Vec start = cmd.start.empty() ? scene.source.point
                                  : to_vec(cmd.start, scene.dim, "--start");
    if (start.size() != scene.dim) throw SchemaError("trace: no start point (scene or --start)");
    const Vec dir = to_vec(cmd.dir, scene.dim, "--dir");
    const int max_events = cmd.max_events > 0 ? cmd.max_events : scene.max_events;

    std::vector<Trajectory> trajs;
    if (scene.branch_policy == BranchPolicy::AllBranches)
        trajs = trace_all(scene, start, dir, max_events);
    else
        trajs.push_back(trace(scene, start, dir, max_events));

    Json rep = base_report("trace", scene_to_json(scene));
    Json jout;
    jout["trajectories"] = Json::array();
    for (const auto& traj : trajs) {
        Json jt = trajectory_to_json(traj);
        jt["source_orthogonality"] = source_orthogonality_check(scene, traj);
        if (scene.receiver && traj.status == TraceStatus::ReceiverHit) {
            const auto& term = traj.terminal();
            const Metric& m_arr = scene.metric_for_side(
                traj.segments.back().medium == 2 ? Side::Medium2 : Side::Medium1);
            if (scene.receiver->kind == ReceiverSpec::Kind::Curve) {
                const auto chk = receiver_check_curve(m_arr, term.x, term.y,
                                                      scene.receiver->tangent(*traj.arrival));
                jt["receiver_check"] =
                    Json{{"non_orthogonal", chk.ok}, {"residual", chk.residual}};
            } else {
                const auto chk = receiver_check_submanifold(
                    m_arr, term.x, term.y, scene.receiver->temporal_kernel_basis());
                jt["receiver_check"] =
                    Json{{"kernel_orthogonal", chk.ok}, {"residual", chk.residual}};
            }
        }
        if (!traj.events.empty()) {
            if (traj.events.back().chosen_branch >= 0) {
                try {
                    jt["criticality"] = criticality_to_json(fermat_criticality_check(scene, traj));
                } catch (const Error&) {
                    jt["criticality"] = Json{{"inconclusive", true}};
                }
            }
            for (const auto& ev : traj.events) {
                if (ev.refraction) collect_outcome_warnings(rep, *ev.refraction);
                if (ev.reflection) collect_outcome_warnings(rep, *ev.reflection);
                if (ev.total_reflection) rep["warnings"].push_back("total reflection event");
            }
        }
        jout["trajectories"].push_back(std::move(jt));
    }

    fs::create_directories(cmd.out_dir);
    const auto wants = [&](const std::string& f) {
        return std::find(cmd.formats.begin(), cmd.formats.end(), f) != cmd.formats.end();
    };
    Json files = Json::array();
    if (wants("csv")) {
        for (size_t i = 0; i < trajs.size(); ++i) {
            const std::string name =
                trajs.size() == 1 ? "trajectory.csv" : "trajectory_" + std::to_string(i) + ".csv";
            std::ofstream os(fs::path(cmd.out_dir) / name);
            if (!os) throw Error(ErrorCode::Generic, "cannot write to " + cmd.out_dir);
            write_trajectory_csv(os, trajs[i]);
            files.push_back(name);
        }
    }
    if (wants("json")) {
        Json doc{{"scene", rep["scene"]}, {"result", jout}};
        std::ofstream os(fs::path(cmd.out_dir) / "trajectory.json");
        if (!os) throw Error(ErrorCode::Generic, "cannot write to " + cmd.out_dir);
        os << doc.dump(2) << "\n";
        files.push_back("trajectory.json");
    }
    if (wants("svg")) {
        int px = 0, py = 1;
        if (std::sscanf(cmd.proj.c_str(), "%d,%d", &px, &py) != 2 || px < 0 || py < 0 ||
            px >= scene.dim || py >= scene.dim)
            throw SchemaError("--proj: expected two coordinate indices i,j");
        std::ofstream os(fs::path(cmd.out_dir) / "trajectory.svg");
        os << trajectory_svg(scene, trajs, px, py);
        files.push_back("trajectory.svg");
    }
    jout["files"] = std::move(files);
    rep["outcome"] = std::move(jout);

    emit(rep, t0);
    for (const auto& traj : trajs)
        if (traj.status == TraceStatus::Unresolvable) return kExitTrapped;
    if (scene.receiver) {
        bool any_arrival = false;
        for (const auto& traj : trajs) any_arrival = any_arrival || traj.arrival.has_value();
        if (!any_arrival) return kExitNoArrival;
    }
    return 0;
}

int cmd_grid(const Cmd& cmd) {
    const auto t0 = std::chrono::steady_clock::now();
    const Json scene_json = load_scene_json(cmd.scene_path);
    SceneConfig scene = scene_from_json(scene_json);
    GridScene grid = grid_from_scene(scene, scene_json);
    if (cmd.seed >= 0) grid.seed = static_cast<unsigned>(cmd.seed);

    Vec start = cmd.start.empty() ? scene.source.point
                                  : to_vec(cmd.start, scene.dim, "--start");
    const Vec dir = to_vec(cmd.dir, scene.dim, "--dir");
    int stop_axis = cmd.stop_axis;
    double stop_value = cmd.stop_value;
    if (stop_axis < 0) {
        // default: a plane at three quarters of the chart along axis 1
        stop_axis = 1;
        stop_value = scene.chart.lo(1) + 0.75 * (scene.chart.hi(1) - scene.chart.lo(1));
    }

    const ConvergenceTable table =
        convergence_study(grid, scene, start, dir, cmd.resolution, stop_axis, stop_value);

    Json rep = base_report("grid", scene_to_json(scene));
    Json jout = convergence_to_json(table);
    jout["stop_axis"] = stop_axis;
    jout["stop_value"] = stop_value;

    fs::create_directories(cmd.out_dir);
    std::ofstream os(fs::path(cmd.out_dir) / "convergence.csv");
    if (!os) throw Error(ErrorCode::Generic, "cannot write to " + cmd.out_dir);
    write_convergence_csv(os, table);
    jout["files"] = Json::array({"convergence.csv"});
    rep["outcome"] = std::move(jout);
    emit(rep, t0);
    return 0;
}

int cmd_verify_classical(const Cmd& cmd) {
    const auto t0 = std::chrono::steady_clock::now();
    const Json scene_json = load_scene_json(cmd.scene_path);
    const SceneConfig scene = scene_from_json(scene_json);

    const auto* f1 = scene.metric1.spatial_norm();
    const auto* f2 = scene.metric2.spatial_norm();
    if (!f1 || !f2 || f1->kind() != SpatialNorm::Kind::Isotropic ||
        f2->kind() != SpatialNorm::Kind::Isotropic || !scene.metric1.constant_coefficients() ||
        !scene.metric2.constant_coefficients())
        throw InvalidInputError(
            "verify-classical: scene must use constant isotropic media");
    if (scene.interface_spec.kind() != InterfaceSpec::Kind::Plane ||
        std::abs(scene.interface_spec.plane_normal()(0)) > 1e-12)
        throw InvalidInputError("verify-classical: interface must be a static spatial plane");

    const Vec normal = scene.interface_spec.plane_normal();
    const Vec p = (scene.interface_spec.plane_offset() / normal.squaredNorm()) * normal;
    const double n1 = f1->index_field().value(p) / f1->index_c0();
    const double n2 = f2->index_field().value(p) / f2->index_c0();

    const int n = scene.dim - 1;
    const Vec sn = normal.tail(n).normalized();
    const Mat tangents = kernel_basis(sn);
    const Vec st = tangents.col(0);

    Json rows = Json::array();
    double max_dev = 0.0;
    for (int deg = 5; deg <= 85; deg += 5) {
        const double th = deg / kDeg;
        Vec spatial = std::cos(th) * sn + std::sin(th) * st;
        Vec u(scene.dim);
        u(0) = f1->value(p, spatial);
        u.tail(n) = spatial;

        Json row{{"incidence_deg", static_cast<double>(deg)}};
        const double s = n1 * std::sin(th) / n2;
        const IncidentData inc =
            incident_data(scene.metric1, scene.metric2, scene.interface_spec, p, u, scene.tol);
        if (s < 1.0) {
            const SnellOutcome out = solve_refraction(scene.metric1, scene.metric2,
                                                      scene.interface_spec, inc, scene.tol);
            const double expect = std::asin(s) * kDeg;
            const double got = angle_from_normal_deg(scene, p, out.directions.at(0).dir);
            row["expected_deg"] = expect;
            row["solver_deg"] = got;
            row["deviation_deg"] = std::abs(got - expect);
            max_dev = std::max(max_dev, std::abs(got - expect));
        } else {
            row["total_reflection"] = total_reflection_check(inc);
            const SnellOutcome refl = solve_reflection(scene.metric1, scene.metric2,
                                                       scene.interface_spec, inc, scene.tol);
            row["reflection_case"] = refl.case_label();
        }
        rows.push_back(std::move(row));
    }

    Json rep = base_report("verify-classical", scene_to_json(scene));
    rep["outcome"] = Json{{"n1", n1},
                          {"n2", n2},
                          {"critical_angle_deg",
                           critical_angle(n1, n2) ? Json(*critical_angle(n1, n2) * kDeg) : Json()},
                          {"rows", std::move(rows)},
                          {"max_deviation_deg", max_dev}};
    emit(rep, t0);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"lightlike ray tracing through piecewise cone structures"};
    app.require_subcommand(1);

    Cmd cmd;
    auto add_common = [&](CLI::App* sub, bool needs_scene = true) {
        sub->add_option("--scene", cmd.scene_path, "scene config JSON")->required(needs_scene);
        sub->add_option("--out", cmd.out_dir, "output directory");
        sub->add_option("--seed", cmd.seed, "override the scene seed");
    };

    CLI::App* classify = app.add_subcommand("classify", "causal characters at an interface point");
    add_common(classify);
    classify->add_option("--point", cmd.point, "interface point coordinates")->required()->delimiter(',');
    classify->add_option("--dir", cmd.dir, "optional incident direction")->delimiter(',');

    CLI::App* snell = app.add_subcommand("snell", "solve one interface event");
    add_common(snell);
    snell->add_option("--point", cmd.point, "interface point coordinates")->required()->delimiter(',');
    snell->add_option("--dir", cmd.dir, "incident direction")->required()->delimiter(',');
    snell->add_flag("--reflect", cmd.reflect, "solve the reflection law instead");

    CLI::App* trace = app.add_subcommand("trace", "trace a ray through the scene");
    add_common(trace);
    trace->add_option("--start", cmd.start, "start point (defaults to the scene source)")->delimiter(',');
    trace->add_option("--dir", cmd.dir, "launch direction")->required()->delimiter(',');
    trace->add_option("--branch-policy", cmd.branch_policy, "snell|all|reflect");
    trace->add_option("--max-events", cmd.max_events, "interface event budget");
    trace->add_option("--format", cmd.formats, "csv,json,svg")->delimiter(',');
    trace->add_option("--proj", cmd.proj, "SVG projection axes i,j");

    CLI::App* grid = app.add_subcommand("grid", "discretized-spacetime convergence study");
    add_common(grid);
    grid->add_option("--start", cmd.start, "start point (defaults to the scene source)")->delimiter(',');
    grid->add_option("--dir", cmd.dir, "launch direction")->required()->delimiter(',');
    grid->add_option("--resolution", cmd.resolution, "resolutions to sweep")->delimiter(',');
    grid->add_option("--stop-axis", cmd.stop_axis, "endpoint comparison axis");
    grid->add_option("--stop-value", cmd.stop_value, "endpoint comparison plane value");

    CLI::App* verify = app.add_subcommand("verify-classical",
                                          "sweep incidence angles against the closed form");
    add_common(verify);

    CLI11_PARSE(app, argc, argv);

    try {
        if (classify->parsed()) return cmd_classify(cmd);
        if (snell->parsed()) return cmd_snell(cmd);
        if (trace->parsed()) return cmd_trace(cmd);
        if (grid->parsed()) return cmd_grid(cmd);
        if (verify->parsed()) return cmd_verify_classical(cmd);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code_for(e.code());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
