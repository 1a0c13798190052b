#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "helpers.hpp"
#include "slowfast/config.hpp"

using namespace slowfast;
using nlohmann::json;

namespace {

std::string config_error(const json& doc, const json& over = json::object())
{
    try {
        parse_config(doc, over);
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::config);
        return e.what();
    }
    FAIL("expected a config error");
    return {};
}

bool mentions(const std::string& msg, const std::string& what) { return msg.find(what) != std::string::npos; }

}  // namespace

TEST_SUITE("config")
{
    TEST_CASE("minimal documents")
    {
        const RunConfig c = parse_config({{"command", "simulate"}, {"preset", "fhn"}}, json::object());
        CHECK(c.command == Command::simulate);
        CHECK(c.preset == "fhn");
        CHECK_FALSE(c.integrator_given);

        const RunConfig p = parse_config({{"command", "passage"}, {"preset", "fhn_hopf"}}, json::object());
        CHECK(p.command == Command::passage);
        const RunConfig all = parse_config({{"command", "preset"}, {"all", true}}, json::object());
        CHECK(all.all);
        CHECK(all.output_dir.filename() == "presets");
    }

    TEST_CASE("errors name the offending key")
    {
        CHECK(mentions(config_error({{"preset", "fhn"}}), "command"));
        CHECK(mentions(config_error({{"command", "simulate"}, {"preset", "fhn"}, {"colour", 1}}), "colour"));
        CHECK(mentions(config_error({{"command", "simulate"}, {"preset", "fhn"}, {"grid", {{"n_pts", 8}}}}), "grid.n_pts"));
        CHECK(mentions(config_error({{"command", "simulate"}, {"preset", "fhn"}, {"eps", "small"}}), "eps"));
        CHECK(mentions(config_error({{"command", "simulate"}, {"preset", "fhn"}, {"grid", {{"n_points", 2}}}}),
                       "grid.n_points"));
        CHECK(mentions(config_error({{"command", "simulate"}, {"preset", "fhn"}, {"params", {{"zeta", 1.0}}}}),
                       "params.zeta"));
        CHECK(mentions(config_error({{"command", "simulate"}, {"preset", "fhn"}, {"integrator", {{"method", "rk4"}}}}),
                       "integrator.method"));
        CHECK(mentions(config_error({{"command", "fly"}}), "command"));
        CHECK(mentions(config_error({{"command", "simulate"}, {"preset", "nope"}}), "preset"));
        CHECK(mentions(config_error({{"command", "simulate"}, {"preset", "dde"}, {"grid", {{"n_points", 16}}}}), "grid"));
        CHECK(mentions(config_error({{"command", "spectrum"}, {"preset", "schnakenberg"}, {"spectrum", {{"a", 0.1}}}}),
                       "spectrum.a"));
        CHECK(mentions(config_error({{"command", "spectrum"}, {"preset", "fhn"}, {"spectrum", {{"a", 1.5}}}}),
                       "spectrum.a"));
    }

    TEST_CASE("command specific rules")
    {
        CHECK(mentions(config_error({{"command", "gspt-classify"}, {"gspt", {{"j11", 1.0}}}}), "gspt"));
        CHECK(mentions(config_error({{"command", "preset"}, {"preset", "fhn_hopf"}, {"all", true}}), "preset"));
        CHECK(mentions(config_error({{"command", "simulate"}, {"preset", "fhn"}, {"all", true}}), "all"));
        CHECK(mentions(config_error({{"command", "passage"}, {"preset", "fhn"}}), "preset"));
        CHECK(mentions(config_error({{"command", "passage"}}), "preset"));
        const RunConfig g =
            parse_config({{"command", "gspt-classify"}, {"gspt", {{"j11", 1.0}, {"j12", 1.0}, {"j21", 1.0}}}}, json::object());
        CHECK(*g.j12 == 1.0);
    }

    TEST_CASE("overrides win and are echoed")
    {
        const json file{{"command", "simulate"}, {"preset", "fhn"}, {"eps", 0.01}, {"integrator", {{"rel_tol", 1e-6}}}};
        const RunConfig c = parse_config(file, {{"eps", 1e-4}, {"integrator", {{"max_step", 0.1}}}});
        CHECK(*c.eps == 1e-4);
        CHECK(c.integrator.rel_tol == 1e-6);
        CHECK(c.integrator.max_step == 0.1);
        CHECK(c.integrator_given);
        const json j = to_json(c);
        CHECK(j["eps"] == 1e-4);
        CHECK(j["integrator"]["max_step"] == 0.1);
        CHECK(j["command"] == "simulate");
    }

    TEST_CASE("default output directory follows SLOWFAST_OUT")
    {
        ::setenv("SLOWFAST_OUT", "/tmp/sf_root", 1);
        const RunConfig c = parse_config({{"command", "simulate"}, {"preset", "fhn"}}, json::object());
        CHECK(c.output_dir == std::filesystem::path("/tmp/sf_root/fhn"));
        ::unsetenv("SLOWFAST_OUT");
        CHECK(default_output_root() == std::filesystem::path("slowfast_out"));
        const RunConfig d =
            parse_config({{"command", "simulate"}, {"preset", "fhn"}, {"output_dir", "/tmp/elsewhere"}}, json::object());
        CHECK(d.output_dir == std::filesystem::path("/tmp/elsewhere"));
    }

    TEST_CASE("dispatch writes the run files")
    {
        namespace fs = std::filesystem;
        const fs::path dir = fs::temp_directory_path() / "slowfast_unit_config";
        fs::remove_all(dir);
        const RunConfig c = parse_config({{"command", "gspt-classify"},
                                          {"gspt", {{"j11", 0.0}, {"j12", 1.0}, {"j21", -1.0}}},
                                          {"output_dir", dir.string()}},
                                         json::object());
        dispatch(c);
        for (const char* f : {"config.resolved.json", "report.json", "meta.json"}) CHECK(fs::exists(dir / f));
        std::ifstream in(dir / "report.json");
        const json rep = json::parse(in);
        CHECK(rep["command"] == "gspt-classify");
        CHECK(rep["label"] == "folded_focus");
        fs::remove_all(dir);
    }
}
