#include <catch2/catch.hpp>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <numbers>
#include <string>

#include <json.hpp>

#include "g2flow/checkpoint.hpp"
#include "g2flow/initial_data.hpp"

using namespace g2flow;

namespace {

std::string binary_path() {
    const char* env = std::getenv("G2FLOW_BIN");
    REQUIRE(env != nullptr);
    return env;
}

int run_command(const std::string& args, const std::string& redirect = "> /dev/null 2>&1") {
    std::string cmd = binary_path() + " " + args + " " + redirect;
    int status = std::system(cmd.c_str());
    REQUIRE(status != -1);
    return WEXITSTATUS(status);
}

void write_json(const std::string& path, const nlohmann::json& j) {
    std::ofstream out(path);
    out << j.dump(2) << '\n';
}

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

}  // namespace

TEST_CASE("run with a constant init produces an all-zero energy column") {
    std::string cfg_path = "/tmp/g2flow_cli_const.json";
    std::string csv_path = "/tmp/g2flow_cli_const.csv";
    nlohmann::json j = {
        {"lattice", {{"active_axes", {1}}, {"n", 16}, {"L", 1.0}}},
        {"background", {{"kind", "torsion_free"}}},
        {"init", {{"kind", "constant"}}},
        {"flow", {{"integrator", "euler"}, {"cfl_factor", 0.25}, {"t_end", 0.05}}},
        {"diagnostics", {{"stride", 10}}},
        {"output", {{"csv", csv_path}}},
    };
    write_json(cfg_path, j);
    CHECK(run_command("run " + cfg_path) == 0);

    std::ifstream csv(csv_path);
    std::string line;
    std::getline(csv, line);  // header
    int rows = 0;
    while (std::getline(csv, line)) {
        std::istringstream ss(line);
        std::string field;
        std::getline(ss, field, ',');  // step
        std::getline(ss, field, ',');  // t
        std::getline(ss, field, ',');  // E
        CHECK(field == "0");
        ++rows;
    }
    CHECK(rows > 3);
    std::remove(cfg_path.c_str());
    std::remove(csv_path.c_str());
}

TEST_CASE("run with a winding init keeps the energy column constant") {
    std::string cfg_path = "/tmp/g2flow_cli_wind.json";
    std::string csv_path = "/tmp/g2flow_cli_wind.csv";
    nlohmann::json j = {
        {"lattice", {{"active_axes", {1}}, {"n", 128}, {"L", 1.0}}},
        {"background", {{"kind", "torsion_free"}}},
        {"init", {{"kind", "winding"}, {"axis", 1}, {"twists", 1}}},
        {"flow", {{"integrator", "rk4"}, {"cfl_factor", 0.25}, {"t_end", 0.0015}}},
        {"diagnostics", {{"stride", 20}}},
        {"output", {{"csv", csv_path}}},
    };
    write_json(cfg_path, j);
    CHECK(run_command("run " + cfg_path) == 0);

    std::ifstream csv(csv_path);
    std::string line;
    std::getline(csv, line);
    double e_first = -1.0;
    int rows = 0;
    while (std::getline(csv, line)) {
        std::istringstream ss(line);
        std::string field;
        for (int k = 0; k < 3; ++k) std::getline(ss, field, ',');
        double e = std::stod(field);
        if (e_first < 0.0) e_first = e;
        CHECK(std::abs(e - e_first) <= 1e-6 * e_first);
        ++rows;
    }
    CHECK(rows >= 5);
    std::remove(cfg_path.c_str());
    std::remove(csv_path.c_str());
}

TEST_CASE("a perturbation run decays in E without losing the minimum of f^2") {
    std::string cfg_path = "/tmp/g2flow_cli_pert.json";
    std::string csv_path = "/tmp/g2flow_cli_pert.csv";
    nlohmann::json j = {
        {"lattice", {{"active_axes", {1}}, {"n", 64}, {"L", 1.0}}},
        {"background", {{"kind", "torsion_free"}}},
        {"init", {{"kind", "perturbation"}, {"amplitude", 0.1}, {"seed", 4242}}},
        {"flow", {{"integrator", "rk4"}, {"cfl_factor", 0.25}, {"t_end", 0.01}}},
        {"diagnostics", {{"stride", 10}}},
        {"output", {{"csv", csv_path}}},
    };
    write_json(cfg_path, j);
    CHECK(run_command("run " + cfg_path) == 0);

    std::ifstream csv(csv_path);
    std::string line;
    std::getline(csv, line);
    double prev_e = 1e300, prev_inf = -1.0, first_e = -1.0;
    int rows = 0;
    while (std::getline(csv, line)) {
        std::istringstream ss(line);
        std::vector<std::string> fields;
        std::string field;
        while (std::getline(ss, field, ',')) fields.push_back(field);
        double e = std::stod(fields[2]);
        double inf_f_sq = std::stod(fields[6]);
        if (first_e < 0.0) first_e = e;
        CHECK(e <= prev_e + 1e-10 * first_e);
        CHECK(inf_f_sq >= prev_inf - 1e-8);
        prev_e = e;
        prev_inf = inf_f_sq;
        ++rows;
    }
    CHECK(rows >= 5);
    CHECK(prev_e < 0.9 * first_e);
    std::remove(cfg_path.c_str());
    std::remove(csv_path.c_str());
}

TEST_CASE("invalid configs exit with the usage status") {
    std::string cfg_path = "/tmp/g2flow_cli_bad.json";
    {
        std::ofstream out(cfg_path);
        out << "{ not json";
    }
    CHECK(run_command("run " + cfg_path) == 2);

    write_json(cfg_path, nlohmann::json{{"lattice", {{"active_axes", {1}}, {"n", 16}, {"L", 1.0}}}});
    CHECK(run_command("run " + cfg_path) == 2);
    CHECK(run_command("run /tmp/g2flow_no_such_config.json") == 2);
    std::remove(cfg_path.c_str());
}

TEST_CASE("verify passes normally and fails under fault injection") {
    std::string cfg_path = "/tmp/g2flow_cli_verify.json";
    nlohmann::json j = {
        {"lattice", {{"active_axes", {1}}, {"n", 32}, {"L", 1.0}}},
        {"background", {{"kind", "torsion_free"}}},
        {"init", {{"kind", "constant"}}},
        {"flow", {{"t_end", 0.01}}},
    };
    write_json(cfg_path, j);

    std::string out_path = "/tmp/g2flow_cli_verify.out";
    CHECK(run_command("verify " + cfg_path, "> " + out_path + " 2>&1") == 0);
    std::string out = read_file(out_path);
    CHECK(out.find("PASS") != std::string::npos);
    CHECK(out.find("FAIL") == std::string::npos);

    CHECK(run_command("verify " + cfg_path + " --inject-phi-fault", "> " + out_path + " 2>&1") == 4);
    out = read_file(out_path);
    CHECK(out.find("FAIL phi_contraction_identity") != std::string::npos);
    std::remove(cfg_path.c_str());
    std::remove(out_path.c_str());
}

TEST_CASE("inspect prints the checkpoint header") {
    LatticeSpec spec({2}, 8, 1.0);
    std::string ck_path = "/tmp/g2flow_cli_inspect.ck";
    save_checkpoint(ck_path, constant_section(spec), 0.75, 99);

    std::string out_path = "/tmp/g2flow_cli_inspect.out";
    CHECK(run_command("inspect " + ck_path, "> " + out_path + " 2>&1") == 0);
    std::string out = read_file(out_path);
    CHECK(out.find("time: 0.75") != std::string::npos);
    CHECK(out.find("step: 99") != std::string::npos);
    CHECK(out.find("n: 8") != std::string::npos);

    CHECK(run_command("inspect /tmp/g2flow_no_such.ck") == 2);
    std::remove(ck_path.c_str());
    std::remove(out_path.c_str());
}

TEST_CASE("a run that blows up exits with the blow-up status and reports a fit") {
    // Degree-one hedgehog on the {1,2} face: no harmonic representative
    // exists, so the flow concentrates; with renormalization disabled the
    // concentrating core ends the run through the NaN detector.
    LatticeSpec spec({1, 2}, 48, 1.0);
    OctonionField init(spec);
    const double radius = 0.45;
    for (std::size_t p = 0; p < spec.point_count(); ++p) {
        double x = spec.position(p, 0) - 0.5;
        double y = spec.position(p, 1) - 0.5;
        double r = std::sqrt(x * x + y * y);
        double theta = (r < radius) ? std::numbers::pi * (1.0 - r / radius) : 0.0;
        double phi = std::atan2(y, x);
        init.values[p].im[0] = std::sin(theta) * std::cos(phi);
        init.values[p].im[1] = std::sin(theta) * std::sin(phi);
        init.values[p].im[2] = std::cos(theta);
    }
    std::string ck_path = "/tmp/g2flow_cli_blowup_init.ck";
    save_checkpoint(ck_path, init, 0.0, 0);

    std::string cfg_path = "/tmp/g2flow_cli_blowup.json";
    nlohmann::json j = {
        {"lattice", {{"active_axes", {1, 2}}, {"n", 48}, {"L", 1.0}}},
        {"background", {{"kind", "torsion_free"}}},
        {"init", {{"kind", "file"}, {"path", ck_path}}},
        {"flow",
         {{"integrator", "euler"},
          {"cfl_factor", 0.5},
          {"t_end", 0.2},
          {"renormalize_stride", 1000000000}}},
        {"diagnostics", {{"stride", 20}}},
        {"output", nlohmann::json::object()},
    };
    write_json(cfg_path, j);

    std::string out_path = "/tmp/g2flow_cli_blowup.out";
    int code = run_command("run " + cfg_path, "> " + out_path + " 2>&1");
    CHECK(code == 3);
    std::string out = read_file(out_path);
    CHECK(out.find("blow-up detected") != std::string::npos);
    CHECK(out.find("C = ") != std::string::npos);
    std::remove(cfg_path.c_str());
    std::remove(ck_path.c_str());
    std::remove(out_path.c_str());
}
