#include "lfray/json_io.hpp"

#include <nlohmann/json.hpp>
#include <sstream>

namespace lfray {

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
    throw SchemaError(path + ": " + what);
}

const Json& field(const Json& j, const std::string& key, const std::string& path) {
    if (!j.is_object()) fail(path, "expected an object");
    auto it = j.find(key);
    if (it == j.end()) fail(path + "." + key, "missing field");
    return *it;
}

double number(const Json& j, const std::string& path) {
    if (!j.is_number()) fail(path, "expected a number");
    return j.get<double>();
}

double number_or(const Json& j, const std::string& key, double fallback) {
    if (!j.is_object()) return fallback;
    auto it = j.find(key);
    return it == j.end() ? fallback : it->get<double>();
}

ScalarField scalar_field_from_json(const Json& j, int dim, const std::string& path) {
    if (j.is_number()) return ScalarField::constant(j.get<double>());
    const std::string type = field(j, "type", path).get<std::string>();
    if (type == "constant") return ScalarField::constant(number(field(j, "value", path), path));
    if (type == "affine")
        return ScalarField::affine(number_or(j, "c0", 0.0),
                                   vector_from_json(field(j, "a", path), dim, path + ".a"));
    if (type == "exp")
        return ScalarField::exponential(number_or(j, "scale", 1.0),
                                        vector_from_json(field(j, "b", path), dim, path + ".b"));
    fail(path + ".type", "unknown field type '" + type + "'");
}

Json scalar_field_to_json(const ScalarField& f) {
    switch (f.kind()) {
        case ScalarField::Kind::Constant:
            return Json{{"type", "constant"}, {"value", f.scale()}};
        case ScalarField::Kind::Affine:
            return Json{{"type", "affine"}, {"c0", f.scale()}, {"a", vector_to_json(f.coeffs())}};
        case ScalarField::Kind::Exponential:
            return Json{{"type", "exp"}, {"scale", f.scale()}, {"b", vector_to_json(f.coeffs())}};
    }
    return Json();
}

Mat matrix_from_json(const Json& j, int rows, int cols, const std::string& path) {
    if (!j.is_array() || static_cast<int>(j.size()) != rows) fail(path, "expected a matrix");
    Mat m(rows, cols);
    for (int i = 0; i < rows; ++i) {
        const Json& row = j[i];
        if (!row.is_array() || static_cast<int>(row.size()) != cols)
            fail(path, "row size mismatch");
        for (int k = 0; k < cols; ++k) m(i, k) = row[k].get<double>();
    }
    return m;
}

Json matrix_to_json(const Mat& m) {
    Json rows = Json::array();
    for (int i = 0; i < m.rows(); ++i) {
        Json row = Json::array();
        for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

Metric metric_from_json(const Json& j, int dim, const std::string& path) {
    const std::string family = field(j, "family", path).get<std::string>();
    if (family == "quadratic") {
        Mat g = matrix_from_json(field(j, "matrix", path), dim, dim, path + ".matrix");
        ScalarField conf = j.contains("conformal")
                               ? scalar_field_from_json(j["conformal"], dim, path + ".conformal")
                               : ScalarField::constant(1.0);
        Vec tref = j.contains("time_orientation")
                       ? vector_from_json(j["time_orientation"], dim, path + ".time_orientation")
                       : Vec::Unit(dim, 0).eval();
        try {
            return Metric::quadratic(std::move(g), std::move(conf), std::move(tref));
        } catch (const Error& e) {
            fail(path, e.what());
        }
    }
    if (family == "isotropic") {
        ScalarField index = scalar_field_from_json(field(j, "index", path), dim, path + ".index");
        return Metric::product_isotropic(dim, std::move(index), number_or(j, "c0", 1.0));
    }
    if (family == "randers") {
        Mat h = matrix_from_json(field(j, "h", path), dim - 1, dim - 1, path + ".h");
        const Json& jw = field(j, "wind", path);
        if (!jw.is_array() || static_cast<int>(jw.size()) != dim - 1)
            fail(path + ".wind", "expected one field per spatial axis");
        std::vector<ScalarField> wind;
        for (int i = 0; i < dim - 1; ++i)
            wind.push_back(scalar_field_from_json(jw[i], dim, path + ".wind"));
        try {
            return Metric::product(SpatialNorm::randers(std::move(h), std::move(wind)));
        } catch (const Error& e) {
            fail(path, e.what());
        }
    }
    fail(path + ".family", "unknown metric family '" + family + "'");
}

Json metric_to_json(const Metric& m) {
    Json j;
    switch (m.family()) {
        case Metric::Family::Quadratic:
            j["family"] = "quadratic";
            j["matrix"] = matrix_to_json(m.quadratic_matrix());
            j["conformal"] = scalar_field_to_json(m.conformal_factor());
            j["time_orientation"] = vector_to_json(m.time_reference());
            break;
        case Metric::Family::Product: {
            const SpatialNorm* f = m.spatial_norm();
            if (f->kind() == SpatialNorm::Kind::Isotropic) {
                j["family"] = "isotropic";
                j["index"] = scalar_field_to_json(f->index_field());
                j["c0"] = f->index_c0();
            } else if (f->kind() == SpatialNorm::Kind::Randers) {
                j["family"] = "randers";
                j["h"] = matrix_to_json(f->randers_h());
                Json wind = Json::array();
                // wind fields are reconstructed from frozen values only when
                // constant; config-loaded scenes round-trip through the full
                // field representation below
                for (int i = 0; i < f->spatial_dim(); ++i)
                    wind.push_back(scalar_field_to_json(f->wind_field(i)));
                j["wind"] = std::move(wind);
            } else {
                j["family"] = "custom_norm";
            }
            break;
        }
        case Metric::Family::CustomL:
            j["family"] = "custom";
            break;
    }
    return j;
}

InterfaceSpec interface_from_json(const Json& j, int dim, const std::string& path) {
    const std::string type = field(j, "type", path).get<std::string>();
    if (type == "plane")
        return InterfaceSpec::plane(
            vector_from_json(field(j, "normal", path), dim, path + ".normal"),
            number_or(j, "offset", 0.0));
    if (type == "graph") {
        const int coord = field(j, "coord", path).get<int>();
        if (coord < 0 || coord >= dim) fail(path + ".coord", "coordinate index out of range");
        return InterfaceSpec::graph(coord,
                                    scalar_field_from_json(field(j, "height", path), dim,
                                                           path + ".height"));
    }
    if (type == "cylinder") {
        std::vector<int> axes = field(j, "axes", path).get<std::vector<int>>();
        for (int a : axes)
            if (a < 0 || a >= dim) fail(path + ".axes", "axis index out of range");
        return InterfaceSpec::cylinder(std::move(axes),
                                       vector_from_json(field(j, "center", path), dim,
                                                        path + ".center"),
                                       number(field(j, "radius", path), path + ".radius"));
    }
    fail(path + ".type", "unknown interface builtin '" + type + "'");
}

Json interface_to_json(const InterfaceSpec& s) {
    switch (s.kind()) {
        case InterfaceSpec::Kind::Plane:
            return Json{{"type", "plane"},
                        {"normal", vector_to_json(s.plane_normal())},
                        {"offset", s.plane_offset()}};
        case InterfaceSpec::Kind::Graph:
            return Json{{"type", "graph"},
                        {"coord", s.graph_coord()},
                        {"height", scalar_field_to_json(s.graph_height())}};
        case InterfaceSpec::Kind::Cylinder:
            return Json{{"type", "cylinder"},
                        {"axes", s.cylinder_axes()},
                        {"center", vector_to_json(s.cylinder_center())},
                        {"radius", s.cylinder_radius()}};
        case InterfaceSpec::Kind::Custom:
            return Json{{"type", "custom"}};
    }
    return Json();
}

ReceiverSpec receiver_from_json(const Json& j, int dim, const std::string& path) {
    ReceiverSpec rec;
    const std::string type = field(j, "type", path).get<std::string>();
    if (type == "curve") {
        rec.kind = ReceiverSpec::Kind::Curve;
        rec.origin = vector_from_json(field(j, "origin", path), dim, path + ".origin");
        rec.velocity = vector_from_json(field(j, "velocity", path), dim, path + ".velocity");
        rec.param_min = number_or(j, "param_min", -1e6);
        rec.param_max = number_or(j, "param_max", 1e6);
        return rec;
    }
    if (type == "submanifold") {
        rec.kind = ReceiverSpec::Kind::Submanifold;
        rec.point = vector_from_json(field(j, "point", path), dim, path + ".point");
        const Json& jb = field(j, "basis", path);
        rec.basis = Mat(dim, jb.size());
        for (size_t i = 0; i < jb.size(); ++i)
            rec.basis.col(i) = vector_from_json(jb[i], dim, path + ".basis");
        rec.tB_gradient =
            vector_from_json(field(j, "temporal_gradient", path), dim, path + ".temporal_gradient");
        return rec;
    }
    fail(path + ".type", "unknown receiver type '" + type + "'");
}

Json receiver_to_json(const ReceiverSpec& rec) {
    if (rec.kind == ReceiverSpec::Kind::Curve) {
        return Json{{"type", "curve"},
                    {"origin", vector_to_json(rec.origin)},
                    {"velocity", vector_to_json(rec.velocity)},
                    {"param_min", rec.param_min},
                    {"param_max", rec.param_max}};
    }
    Json basis = Json::array();
    for (int i = 0; i < rec.basis.cols(); ++i)
        basis.push_back(vector_to_json(rec.basis.col(i)));
    return Json{{"type", "submanifold"},
                {"point", vector_to_json(rec.point)},
                {"basis", std::move(basis)},
                {"temporal_gradient", vector_to_json(rec.tB_gradient)}};
}

}  // namespace

Json vector_to_json(const Vec& v) {
    Json arr = Json::array();
    for (int i = 0; i < v.size(); ++i) arr.push_back(v(i));
    return arr;
}

Vec vector_from_json(const Json& j, int expect_size, const std::string& path) {
    if (!j.is_array()) fail(path, "expected an array");
    if (expect_size >= 0 && static_cast<int>(j.size()) != expect_size) {
        std::ostringstream os;
        os << "expected " << expect_size << " entries, got " << j.size();
        fail(path, os.str());
    }
    Vec v(j.size());
    for (size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_number()) fail(path, "expected numeric entries");
        v(i) = j[i].get<double>();
    }
    return v;
}

SceneConfig scene_from_json(const Json& j) {
    SceneConfig scene;
    scene.dim = static_cast<int>(number(field(j, "dimension", "scene"), "scene.dimension"));
    if (scene.dim < 3) fail("scene.dimension", "needs at least 3 (one time, two space)");

    const Json& chart = field(j, "chart", "scene");
    scene.chart = Box(vector_from_json(field(chart, "min", "scene.chart"), scene.dim,
                                       "scene.chart.min"),
                      vector_from_json(field(chart, "max", "scene.chart"), scene.dim,
                                       "scene.chart.max"));

    scene.metric1 = metric_from_json(field(j, "metric1", "scene"), scene.dim, "scene.metric1");
    scene.metric2 = metric_from_json(field(j, "metric2", "scene"), scene.dim, "scene.metric2");
    scene.metric1.set_chart(scene.chart);
    scene.metric2.set_chart(scene.chart);

    scene.interface_spec =
        interface_from_json(field(j, "interface", "scene"), scene.dim, "scene.interface");

    if (j.contains("source")) {
        const Json& js = j["source"];
        scene.source.point =
            vector_from_json(field(js, "point", "scene.source"), scene.dim, "scene.source.point");
        if (js.contains("basis")) {
            const Json& jb = js["basis"];
            scene.source.basis = Mat(scene.dim, jb.size());
            for (size_t i = 0; i < jb.size(); ++i)
                scene.source.basis.col(i) =
                    vector_from_json(jb[i], scene.dim, "scene.source.basis");
        }
    }
    if (j.contains("receiver"))
        scene.receiver = receiver_from_json(j["receiver"], scene.dim, "scene.receiver");

    if (j.contains("tolerances")) {
        const Json& jt = j["tolerances"];
        scene.tol.lightlike = number_or(jt, "lightlike", scene.tol.lightlike);
        scene.tol.newton_residual = number_or(jt, "newton_residual", scene.tol.newton_residual);
        scene.tol.receiver_tube = number_or(jt, "receiver_tube", scene.tol.receiver_tube);
    }
    const Json jint = j.contains("integrator") ? j["integrator"] : Json::object();
    const double frac = number_or(jint, "step_fraction", 1e-3);
    scene.integrator.step = frac * scene.chart.diameter();
    scene.integrator.max_steps =
        static_cast<int>(number_or(jint, "max_steps", scene.integrator.max_steps));

    if (j.contains("branch_policy")) {
        const std::string p = j["branch_policy"].get<std::string>();
        if (p == "snell")
            scene.branch_policy = BranchPolicy::SnellConeGeodesicOnly;
        else if (p == "all")
            scene.branch_policy = BranchPolicy::AllBranches;
        else if (p == "reflect")
            scene.branch_policy = BranchPolicy::ReflectOnly;
        else
            fail("scene.branch_policy", "expected snell|all|reflect");
    }
    scene.max_events = static_cast<int>(number_or(j, "max_events", scene.max_events));
    scene.seed = static_cast<unsigned>(number_or(j, "seed", scene.seed));

    try {
        scene.metric1.validate_probabilistic();
        scene.metric2.validate_probabilistic();
    } catch (const Error& e) {
        fail("scene.metrics", e.what());
    }
    return scene;
}

Json scene_to_json(const SceneConfig& scene) {
    Json j;
    j["dimension"] = scene.dim;
    j["chart"] = Json{{"min", vector_to_json(scene.chart.lo)},
                      {"max", vector_to_json(scene.chart.hi)}};
    j["metric1"] = metric_to_json(scene.metric1);
    j["metric2"] = metric_to_json(scene.metric2);
    j["interface"] = interface_to_json(scene.interface_spec);
    if (scene.source.point.size() > 0) {
        Json js{{"point", vector_to_json(scene.source.point)}};
        if (scene.source.basis.cols() > 0) {
            Json jb = Json::array();
            for (int i = 0; i < scene.source.basis.cols(); ++i)
                jb.push_back(vector_to_json(scene.source.basis.col(i)));
            js["basis"] = std::move(jb);
        }
        j["source"] = std::move(js);
    }
    if (scene.receiver) j["receiver"] = receiver_to_json(*scene.receiver);
    j["tolerances"] = Json{{"lightlike", scene.tol.lightlike},
                           {"newton_residual", scene.tol.newton_residual},
                           {"receiver_tube", scene.tol.receiver_tube}};
    j["integrator"] = Json{{"step_fraction", scene.integrator.step / scene.chart.diameter()},
                           {"max_steps", scene.integrator.max_steps}};
    j["branch_policy"] = to_string(scene.branch_policy);
    j["max_events"] = scene.max_events;
    j["seed"] = scene.seed;
    return j;
}

GridScene grid_from_scene(const SceneConfig& scene, const Json& scene_json) {
    GridScene g;
    g.metric1 = scene.metric1;
    g.metric2 = scene.metric2;
    g.interface_spec = scene.interface_spec;
    g.box = scene.chart;
    g.resolution.assign(scene.dim, 8);
    g.seed = scene.seed;
    if (scene_json.contains("grid")) {
        const Json& jg = scene_json["grid"];
        if (jg.contains("resolution")) {
            const auto res = jg["resolution"].get<std::vector<int>>();
            if (static_cast<int>(res.size()) == 1)
                g.resolution.assign(scene.dim, res[0]);
            else if (static_cast<int>(res.size()) == scene.dim)
                g.resolution = res;
            else
                fail("scene.grid.resolution", "expected 1 or dimension entries");
        }
        g.seed = static_cast<unsigned>(number_or(jg, "seed", g.seed));
        g.jitter_scale = number_or(jg, "jitter", g.jitter_scale);
    }
    return g;
}

std::string scene_hash(const Json& canonical_scene) {
    const std::string dump = canonical_scene.dump();
    unsigned long long h = 1469598103934665603ULL;
    for (unsigned char c : dump) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    std::ostringstream os;
    os << std::hex << h;
    return os.str();
}

Json snell_outcome_to_json(const SnellOutcome& out) {
    Json dirs = Json::array();
    for (const auto& d : out.directions) {
        dirs.push_back(Json{{"direction", vector_to_json(d.dir)},
                            {"tangent_to_interface", d.tangent_to_eta},
                            {"straight_oriented", d.straight_oriented},
                            {"exceptional", d.exceptional},
                            {"lambda", d.lambda},
                            {"residual", d.residual}});
    }
    return Json{{"kind", out.is_reflection ? "reflection" : "refraction"},
                {"case", out.case_label()},
                {"borderline", out.borderline},
                {"directions", std::move(dirs)}};
}

Json incident_data_to_json(const IncidentData& inc) {
    return Json{{"point", vector_to_json(inc.p)},
                {"direction", vector_to_json(inc.u)},
                {"interface_char_medium1", to_string(inc.eta_char_1.character)},
                {"interface_char_medium2", to_string(inc.eta_char_2.character)},
                {"trace_char_medium1", to_string(inc.pi_char_1.character)},
                {"trace_char_medium2", to_string(inc.pi_char_2.character)},
                {"tangent_incident", inc.u_tangent},
                {"cone2_crosses", inc.cone2_crosses},
                {"cone1_returns", inc.cone1_returns}};
}

Json trace_event_to_json(const TraceEvent& ev) {
    Json j{{"tau", ev.crossing.tau},
           {"point", vector_to_json(ev.crossing.point)},
           {"incoming", vector_to_json(ev.crossing.incoming)},
           {"from_medium", ev.from_medium},
           {"to_medium", ev.to_medium},
           {"chose_reflection", ev.chose_reflection},
           {"total_reflection", ev.total_reflection},
           {"chosen_branch", ev.chosen_branch}};
    if (ev.refraction) j["refraction"] = snell_outcome_to_json(*ev.refraction);
    if (ev.reflection) j["reflection"] = snell_outcome_to_json(*ev.reflection);
    return j;
}

Json trajectory_to_json(const Trajectory& traj) {
    Json segs = Json::array();
    for (const auto& seg : traj.segments) {
        segs.push_back(Json{{"medium", seg.medium},
                            {"samples", seg.samples.size()},
                            {"stop_reason", to_string(seg.stop_reason)},
                            {"first", vector_to_json(seg.samples.front().x)},
                            {"last", vector_to_json(seg.samples.back().x)}});
    }
    Json evs = Json::array();
    for (const auto& ev : traj.events) evs.push_back(trace_event_to_json(ev));
    Json j{{"status", to_string(traj.status)},
           {"segments", std::move(segs)},
           {"events", std::move(evs)}};
    if (traj.arrival) j["arrival"] = *traj.arrival;
    return j;
}

Json criticality_to_json(const CriticalityReport& rep) {
    const char* sig = "flat";
    switch (rep.signature) {
        case CriticalityReport::Signature::Minimum:
            sig = "minimum";
            break;
        case CriticalityReport::Signature::Saddle:
            sig = "saddle";
            break;
        case CriticalityReport::Signature::Maximum:
            sig = "maximum";
            break;
        case CriticalityReport::Signature::Flat:
            sig = "flat";
            break;
    }
    return Json{{"gradient_norm", rep.gradient_norm},
                {"critical", rep.critical},
                {"signature", sig},
                {"not_minimizing", rep.not_minimizing},
                {"inconclusive", rep.inconclusive},
                {"first_order_only", true}};
}

Json convergence_to_json(const ConvergenceTable& table) {
    Json rows = Json::array();
    for (const auto& r : table.rows)
        rows.push_back(Json{{"resolution", r.resolution}, {"error", r.error}});
    return Json{{"rows", std::move(rows)}, {"fitted_order", table.fitted_order}};
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
    os << "s";
    const int dim = static_cast<int>(traj.segments.front().samples.front().x.size());
    for (int i = 0; i < dim; ++i) os << ",x" << i;
    for (int i = 0; i < dim; ++i) os << ",y" << i;
    os << ",segment\n";
    os.precision(17);
    for (size_t k = 0; k < traj.segments.size(); ++k) {
        for (const auto& st : traj.segments[k].samples) {
            os << st.s;
            for (int i = 0; i < dim; ++i) os << "," << st.x(i);
            for (int i = 0; i < dim; ++i) os << "," << st.y(i);
            os << "," << k << "\n";
        }
    }
}

void write_convergence_csv(std::ostream& os, const ConvergenceTable& table) {
    os << "resolution,endpoint_error\n";
    os.precision(17);
    for (const auto& r : table.rows) os << r.resolution << "," << r.error << "\n";
    os << "# fitted_order," << table.fitted_order << "\n";
}

}  // namespace lfray
