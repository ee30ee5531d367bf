#include "plasthom/config.hpp"
#include "plasthom/errors.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>

using namespace plasthom;

TEST_CASE("full configuration round") {
    const auto dir = std::filesystem::temp_directory_path() / "plasthom_config_test";
    std::filesystem::create_directories(dir);
    {
        std::ofstream os(dir / "xi.csv");
        os << "t,xi_1,xi_2,xi_3\n0,0,0,0\n0.5,0.02,-0.01,0\n1,0.01,0,0.02\n";
    }
    {
        std::ofstream os(dir / "run.json");
        os << R"({
          "domain": {"type": "simplex", "vertices": [[0,0],[1,0],[1,1]]},
          "mesh": {"h": 0.25}, "epsilon": 0.125, "delta": 0.002, "flow": "norm",
          "time": {"T": 1.0, "steps": 4},
          "law": {"E": {"discrete": {"values": [1, 2], "weights": [1, 1]}}, "nu": {"point": 0.3},
                  "sigma_y": {"uniform": [0.004, 0.008]}, "H": 0.1},
          "rve": {"N": 2, "r": 1, "M": 3},
          "bc": {"xi": "xi.csv", "a": [1, 0]},
          "load": [0, -0.01], "seed": 17, "threads": 2,
          "experiment": {"epsilons": [0.5, 0.25], "seeds": 3, "korn_samples": 10}
        })";
    }
    const RunConfig c = load_run_config((dir / "run.json").string());
    CHECK(c.dim == 2);
    CHECK(c.effective_delta() == 0.002);
    CHECK(c.flow == FlowKind::NormType);
    CHECK(c.law->E().kind() == ParameterDistribution::Kind::Discrete);
    CHECK(c.law->yield_stress().mean() == doctest::Approx(0.006));
    CHECK(c.xi.knots().size() == 3);
    CHECK(c.xi.at(1.0).comps()[2] == 0.02);
    CHECK(c.seed == 17);
    const EpsProblemConfig eps = c.eps_config();
    CHECK(eps.mesh->h() < 0.25);
    CHECK(eps.time_grid.size() == 5);
    CHECK(eps.dirichlet.translation(0.5)[0] == 0.5);
    CHECK(eps.load(1.0, SmallVector::Zero(2))[1] == -0.01);
    CHECK(c.rve_config().M == 3);
    CHECK(c.averaging_spec().seeds.size() == 3);
    CHECK(c.korn_spec().samples == 10);
    CHECK(c.macro_config().threads == 2);
    std::filesystem::remove_all(dir);
}

TEST_CASE("defaults and inline strain paths") {
    const RunConfig c = parse_run_config(R"({"bc": {"xi": {"knots": [0, 1], "values": [[0,0,0],[0.01,0,0]]}}})");
    CHECK(c.domain_type == "simplex");
    CHECK(c.simplex.size() == 3);
    CHECK(c.effective_delta() == doctest::Approx(1e-4));
    CHECK(c.xi.at(0.5).comps()[0] == doctest::Approx(0.005));
    const RunConfig b = parse_run_config(R"({"domain": {"type": "box", "lower": [0,0,0], "upper": [1,1,1]}, "mesh": {"h": 0.9}})");
    CHECK(b.dim == 3);
    CHECK(b.build_mesh()->h() <= 0.9);
}

TEST_CASE("configuration errors name the key") {
    auto msg = [](const std::string& text) {
        try {
            parse_run_config(text);
        } catch (const ConfigError& e) {
            return std::string(e.what());
        }
        return std::string();
    };
    CHECK(msg("{").find("invalid JSON") != std::string::npos);
    CHECK(msg(R"({"mesh": {"h": -1}})").find("mesh.h") != std::string::npos);
    CHECK(msg(R"({"law": {"E": {"uniform": [2, 1]}}})").find("law.E") != std::string::npos);
    CHECK(msg(R"({"law": {"K": 1}})").find("law.K") != std::string::npos);
    CHECK(msg(R"({"time": {"steps": 0}})").find("time.steps") != std::string::npos);
    CHECK(msg(R"({"bc": {"xi": "missing.csv"}})").find("missing.csv") != std::string::npos);
    CHECK(msg(R"({"rve": {"N": 0}})").find("rve") != std::string::npos);
    CHECK(msg(R"({"domain": "cube"})").find("domain") != std::string::npos);
    CHECK(msg(R"({"experiment": {"foo": 1}})").find("experiment.foo") != std::string::npos);
    CHECK_THROWS_AS(load_run_config("/nonexistent/run.json"), ConfigError);
    CHECK(parse_distribution(R"({"point": 2})").mean() == 2.0);
}
