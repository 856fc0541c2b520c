#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>

#include "support.hpp"

// Drives the installed binary end to end: schema diagnostics and exit codes,
// the classical sweep, artifact emission and the report round trip.

namespace fs = std::filesystem;
using Json = nlohmann::json;
using namespace lfray;

namespace {

struct CliRunner {
    fs::path exe;
    fs::path tmp;

    CliRunner() {
        const char* e = std::getenv("LFRAY_CLI");
        const char* t = std::getenv("LFRAY_TMP");
        REQUIRE(e != nullptr);
        exe = e;
        tmp = t ? fs::path(t) : fs::temp_directory_path() / "lfray_cli_test";
        fs::create_directories(tmp);
    }

    std::pair<int, Json> run(const std::string& args, bool expect_json = true) const {
        const fs::path out = tmp / "stdout.json";
        const fs::path err = tmp / "stderr.txt";
        const std::string cmdline =
            exe.string() + " " + args + " > " + out.string() + " 2> " + err.string();
        const int rc = std::system(cmdline.c_str());
        const int code = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
        Json j;
        if (expect_json && code == 0) {
            std::ifstream in(out);
            in >> j;
        }
        return {code, j};
    }

    std::string stderr_text() const {
        std::ifstream in(tmp / "stderr.txt");
        return std::string(std::istreambuf_iterator<char>(in), {});
    }

    fs::path write_scene(const std::string& name, const Json& j) const {
        const fs::path p = tmp / name;
        std::ofstream os(p);
        os << j.dump(2);
        return p;
    }
};

Json classical_scene_json(double n1, double n2) {
    return Json{
        {"dimension", 3},
        {"chart", {{"min", {-2, -2, -2}}, {"max", {2, 2, 2}}}},
        {"metric1", {{"family", "isotropic"}, {"index", n1}}},
        {"metric2", {{"family", "isotropic"}, {"index", n2}}},
        {"interface", {{"type", "plane"}, {"normal", {0, 1, 0}}, {"offset", 0.0}}},
        {"source", {{"point", {0, -0.5, -0.28867513459481287}}}},
        {"receiver",
         {{"type", "curve"},
          {"origin", {0, 0.2645751311064591, 0.3}},
          {"velocity", {1, 0, 0}},
          {"param_min", 0.0},
          {"param_max", 4.0}}},
        {"branch_policy", "snell"},
        {"max_events", 8},
    };
}

Json strip_timing(Json j) {
    j.erase("timing_ms");
    return j;
}

}  // namespace

TEST_CASE("schema errors carry the field path and a distinct exit code") {
    CliRunner cli;
    Json bad = classical_scene_json(1.5, 1.0);
    bad["metric1"]["family"] = "warp";
    const fs::path scene = cli.write_scene("bad.json", bad);
    const auto [code, rep] = cli.run("classify --scene " + scene.string() + " --point 0,0,0");
    CHECK(code == 2);
    CHECK(cli.stderr_text().find("scene.metric1.family") != std::string::npos);

    Json bad2 = classical_scene_json(1.5, 1.0);
    bad2["interface"]["normal"] = {0, 1};
    const fs::path scene2 = cli.write_scene("bad2.json", bad2);
    CHECK(cli.run("classify --scene " + scene2.string() + " --point 0,0,0").first == 2);
}

TEST_CASE("classify reports both causal characters and the predicted rows") {
    CliRunner cli;
    const fs::path scene = cli.write_scene("classical.json", classical_scene_json(1.5, 1.0));
    const auto [code, rep] =
        cli.run("classify --scene " + scene.string() +
                " --point 0,0,0 --dir 1.5,0.8660254037844387,0.5");
    REQUIRE(code == 0);
    CHECK(rep["outcome"]["interface_char_medium1"] == "timelike");
    CHECK(rep["outcome"]["interface_char_medium2"] == "timelike");
    CHECK(rep["outcome"]["predicted_refraction_case"] == "A_i");
    CHECK(rep["outcome"]["predicted_reflection_case"] == "Astar_i");
    CHECK(rep["outcome"]["total_reflection"] == false);
}

TEST_CASE("snell subcommand solves refraction and reflection") {
    CliRunner cli;
    const fs::path scene = cli.write_scene("classical.json", classical_scene_json(1.5, 1.0));
    const std::string base =
        " --scene " + scene.string() + " --point 0,0,0 --dir 1.5,0.8660254037844387,0.5";

    const auto [code, rep] = cli.run("snell" + base);
    REQUIRE(code == 0);
    CHECK(rep["outcome"]["case"] == "A_i");
    const double deg = rep["outcome"]["directions"][0]["angle_deg"].get<double>();
    CHECK(std::abs(deg - 48.590377890729144) < 1e-6);
    CHECK(rep["outcome"]["directions"][0]["straight_oriented"] == true);

    const auto [rcode, rrep] = cli.run("snell --reflect" + base);
    REQUIRE(rcode == 0);
    CHECK(rrep["outcome"]["case"] == "Astar_i");
    const double rdeg = rrep["outcome"]["directions"][0]["angle_deg"].get<double>();
    CHECK(std::abs(rdeg - 30.0) < 1e-6);
    CHECK(rrep["outcome"]["directions"][0]["straight_oriented"] == false);

    // beyond the critical angle: refraction reports no critical points,
    // reflection stays unique
    const std::string steep =
        " --scene " + scene.string() + " --point 0,0,0 --dir 1.5,0.5,0.8660254037844387";
    const auto [c2, rep2] = cli.run("snell" + steep);
    REQUIRE(c2 == 0);
    CHECK(rep2["outcome"]["case"] == "A_iii_NoCriticalPoints");
    CHECK(rep2["outcome"]["directions"].empty());
    const auto [c3, rep3] = cli.run("snell --reflect" + steep);
    REQUIRE(c3 == 0);
    CHECK(rep3["outcome"]["case"] == "Astar_i");
    CHECK(rep3["outcome"]["directions"].size() == 1);
}

TEST_CASE("verify-classical sweeps the closed form") {
    CliRunner cli;
    const fs::path scene = cli.write_scene("classical.json", classical_scene_json(1.5, 1.0));
    const auto [code, rep] = cli.run("verify-classical --scene " + scene.string());
    REQUIRE(code == 0);
    CHECK(rep["outcome"]["max_deviation_deg"].get<double>() <= 1e-4);
    CHECK(std::abs(rep["outcome"]["critical_angle_deg"].get<double>() - 41.810314895778596) <
          1e-9);
    bool saw_total = false;
    for (const auto& row : rep["outcome"]["rows"])
        if (row.contains("total_reflection")) saw_total = row["total_reflection"].get<bool>();
    CHECK(saw_total);
}

TEST_CASE("trace writes artifacts and the report round-trips") {
    CliRunner cli;
    const fs::path scene = cli.write_scene("classical.json", classical_scene_json(1.5, 1.0));
    const fs::path out = cli.tmp / "trace_out";
    const std::string flags = " --dir 1.5,0.8660254037844387,0.5 --out " + out.string() +
                              " --format csv,json,svg";

    const auto [code, rep] = cli.run("trace --scene " + scene.string() + flags);
    REQUIRE(code == 0);
    CHECK(fs::exists(out / "trajectory.csv"));
    CHECK(fs::exists(out / "trajectory.json"));
    CHECK(fs::exists(out / "trajectory.svg"));
    const auto& traj = rep["outcome"]["trajectories"][0];
    CHECK(traj["status"] == "receiver_hit");
    CHECK(std::abs(traj["arrival"].get<double>() - 1.2660254037844386) < 1e-5);
    CHECK(traj["criticality"]["critical"] == true);
    CHECK(traj["criticality"]["signature"] == "minimum");

    // CSV has one row per sample with the documented header
    std::ifstream csv(out / "trajectory.csv");
    std::string header;
    std::getline(csv, header);
    CHECK(header == "s,x0,x1,x2,y0,y1,y2,segment");

    // round trip: re-ingesting the scene echo reproduces the report verbatim
    const fs::path echo = cli.write_scene("echo.json", rep["scene"]);
    const auto [code2, rep2] = cli.run("trace --scene " + echo.string() + flags);
    REQUIRE(code2 == 0);
    CHECK(strip_timing(rep) == strip_timing(rep2));
    CHECK(rep["scene_hash"] == rep2["scene_hash"]);
}

TEST_CASE("all-branch tracing emits one polyline per refraction") {
    CliRunner cli;
    Json scene = Json{
        {"dimension", 3},
        {"chart", {{"min", {-2, -2, -2}}, {"max", {2, 2, 2}}}},
        {"metric1",
         {{"family", "quadratic"},
          {"matrix", {{1, 0, 0}, {0, -1, 0}, {0, 0, -1}}}}},
        {"metric2",
         {{"family", "quadratic"},
          {"matrix", {{4, 0, 0}, {0, -1, 0}, {0, 0, -1}}}}},
        {"interface", {{"type", "plane"}, {"normal", {1, 0, 0}}, {"offset", 0.5}}},
        {"source", {{"point", {0, -0.2, 0}}}},
    };
    const fs::path sp = cli.write_scene("spacelike.json", scene);
    const fs::path out = cli.tmp / "branches";
    const auto [code, rep] =
        cli.run("trace --scene " + sp.string() +
                " --dir 1,0.7648421872844885,0.6442176872376911 --branch-policy all --out " +
                out.string());
    REQUIRE(code == 0);
    const auto& trajs = rep["outcome"]["trajectories"];
    REQUIRE(trajs.size() == 2);
    CHECK(fs::exists(out / "trajectory_0.csv"));
    CHECK(fs::exists(out / "trajectory_1.csv"));
    int straight = 0;
    for (const auto& t : trajs) {
        const auto& ev = t["events"][0];
        CHECK(ev["refraction"]["case"] == "C_Two");
        const int branch = ev["chosen_branch"].get<int>();
        straight += ev["refraction"]["directions"][branch]["straight_oriented"].get<bool>();
    }
    CHECK(straight == 1);
}

TEST_CASE("missing receivers and trapped rays exit with distinct codes") {
    CliRunner cli;
    Json scene = classical_scene_json(1.5, 1.0);
    scene["receiver"]["origin"] = {0, 1.5, 1.9};  // far off the refracted ray
    const fs::path sp = cli.write_scene("noarrival.json", scene);
    const auto [code, rep] = cli.run(
        "trace --scene " + sp.string() + " --dir 1.5,0.8660254037844387,0.5", false);
    CHECK(code == 4);

    // medium-2 cone tilted entirely onto the incoming side of an interface
    // that is lightlike for the incoming cone: no crossing, no returning
    Json trapped = Json{
        {"dimension", 3},
        {"chart", {{"min", {-2, -2, -2}}, {"max", {2, 2, 2}}}},
        {"metric1",
         {{"family", "quadratic"},
          {"matrix", {{1, 0, 0}, {0, -1, 0}, {0, 0, -1}}}}},
        {"metric2",
         {{"family", "quadratic"},
          {"matrix", {{-99, 50, 0}, {50, -25, 0}, {0, 0, -25}}},
          {"time_orientation", {1, 2, 0}}}},
        {"interface", {{"type", "plane"}, {"normal", {1, -1, 0}}, {"offset", 0.0}}},
        {"source", {{"point", {0, 0.5, 0}}}},
    };
    const fs::path tp = cli.write_scene("trapped.json", trapped);
    const auto [tcode, trep] =
        cli.run("trace --scene " + tp.string() + " --dir 1,-0.8,0.6", false);
    CHECK(tcode == 5);

    // non-transverse incident direction: solver-category exit code
    Json lightlike = classical_scene_json(1.5, 1.0);
    lightlike["metric1"] = {{"family", "quadratic"},
                            {"matrix", {{1, 0, 0}, {0, -1, 0}, {0, 0, -1}}}};
    lightlike["metric2"] = lightlike["metric1"];
    lightlike["interface"] = {{"type", "plane"}, {"normal", {1, -1, 0}}, {"offset", 0.0}};
    lightlike.erase("receiver");
    const fs::path lp = cli.write_scene("lightlike.json", lightlike);
    const auto [scode, srep] =
        cli.run("snell --scene " + lp.string() + " --point 0,0,0 --dir 1,1,0", false);
    CHECK(scode == 3);
}

TEST_CASE("grid subcommand emits the convergence table") {
    CliRunner cli;
    Json scene = Json{
        {"dimension", 3},
        {"chart", {{"min", {-1.5, -1.5, -1.5}}, {"max", {1.5, 1.5, 1.5}}}},
        {"metric1",
         {{"family", "isotropic"},
          {"index", {{"type", "affine"}, {"c0", 1.2}, {"a", {0, 0.25, 0.1}}}}}},
        {"metric2",
         {{"family", "isotropic"},
          {"index", {{"type", "affine"}, {"c0", 1.2}, {"a", {0, 0.25, 0.1}}}}}},
        {"interface", {{"type", "plane"}, {"normal", {0, 1, 0}}, {"offset", 0.6}}},
        {"source", {{"point", {-1.2, -0.55, 0}}}},
        {"integrator", {{"step_fraction", 2e-4}}},
        {"grid", {{"resolution", {8}}, {"seed", 3}}},
    };
    const fs::path sp = cli.write_scene("grid.json", scene);
    const fs::path out = cli.tmp / "grid_out";
    const auto [code, rep] =
        cli.run("grid --scene " + sp.string() +
                " --dir 1,1,0.12 --resolution 8,16,32 --stop-axis 1 --stop-value 0.6 --out " +
                out.string());
    REQUIRE(code == 0);
    REQUIRE(rep["outcome"]["rows"].size() == 3);
    CHECK(rep["outcome"]["rows"][0]["error"].get<double>() >
          rep["outcome"]["rows"][2]["error"].get<double>());
    CHECK(fs::exists(out / "convergence.csv"));
}
