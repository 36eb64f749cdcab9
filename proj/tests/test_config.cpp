#include <catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "dampsq/config.hpp"
#include "dampsq/experiment.hpp"

using namespace dampsq;

namespace {

std::string message_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const ConfigError& e) {
        return e.what();
    }
    return {};
}

std::filesystem::path scratch(const std::string& name) {
    auto p = std::filesystem::temp_directory_path() / ("dampsq_cfg_" + name);
    std::filesystem::remove_all(p);
    return p;
}

}  // namespace

TEST_CASE("config parser", "[config]") {
    const ConfigFile c = parse_config(
        "# leading comment\n"
        "chi = 12   # trailing\n"
        "\n"
        "[run]\n"
        "jobs = 2\r\n"
        "[readout-mono]\n"
        "photons=3\n"
        "delta_kappas = 0.1, 0.2 ,0.3\n");
    CHECK(c.sections.at("").at("chi") == "12");
    CHECK(c.sections.at("run").at("jobs") == "2");
    CHECK(c.sections.at("readout-mono").at("photons") == "3");

    CHECK_THROWS_AS(parse_config("[run\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("[]\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("just words\n"), ConfigError);
    CHECK_THROWS_AS(parse_config(" = 3\n"), ConfigError);
    CHECK(message_of([] { parse_config("a = 1\na = 2\n"); }).find("duplicate key 'a'") != std::string::npos);
    CHECK_THROWS_AS(load_config("/nonexistent/dampsq.ini"), ConfigError);
}

TEST_CASE("typed parameter reader", "[config]") {
    ParamReader p("demo", {{"x", "2.5"}, {"n", "4"}, {"f", "false"}, {"c", "fock"}, {"l", "1, 2,3"}, {"bad", "1e"}});
    CHECK(p.number("x", 0.0) == 2.5);
    CHECK(p.number("missing", 7.0) == 7.0);
    CHECK(p.integer("n", 0) == 4);
    CHECK_FALSE(p.flag("f", true));
    CHECK(p.choice("c", "gaussian", {"gaussian", "fock"}) == "fock");
    CHECK(p.numbers("l", {}) == std::vector<double>{1.0, 2.0, 3.0});
    CHECK_THROWS_AS(p.number("bad", 0.0), ConfigError);
    p.finish();
    CHECK(p.effective().at("missing") == "7");

    ParamReader q("demo", {{"xi", "2"}});
    q.number("chi", 10.0);
    CHECK(message_of([&] { q.finish(); }).find("xi") != std::string::npos);

    ParamReader r("demo", {{"n", "2.5"}, {"c", "other"}, {"f", "maybe"}});
    CHECK_THROWS_AS(r.integer("n", 0), ConfigError);
    CHECK_THROWS_AS(r.choice("c", "a", {"a", "b"}), ConfigError);
    CHECK_THROWS_AS(r.flag("f", true), ConfigError);
}

TEST_CASE("experiments reject unknown keys, sections and names", "[config]") {
    ExperimentOptions o;
    o.experiment = "readout-mono";
    o.config = parse_config("xi = 2\n");
    CHECK(message_of([&] { run_experiment(o); }).find("xi") != std::string::npos);

    o.config = parse_config("[readout-moon]\nchi = 2\n");
    CHECK(message_of([&] { run_experiment(o); }).find("readout-moon") != std::string::npos);

    o.config = parse_config("chi = 10\n[readout-mono]\nchi = 12\n");
    CHECK_THROWS_AS(run_experiment(o), ConfigError);

    o.experiment = "nope";
    o.config = {};
    CHECK_THROWS_AS(run_experiment(o), ConfigError);

    o.experiment = "squeeze-sweep";
    o.config = parse_config("delta_kappa_max = 1.5\n");
    CHECK_THROWS(run_experiment(o));
}

TEST_CASE("run section", "[config]") {
    const RunOverrides r = read_run_section(parse_config("[run]\nout = here\njobs = 3\nengine = fock\nformat = json\n"));
    CHECK(r.out_dir->string() == "here");
    CHECK(*r.jobs == 3);
    CHECK(*r.engine == Engine::fock);
    CHECK(*r.format == OutputFormat::json);
    CHECK_THROWS_AS(read_run_section(parse_config("[run]\nthreads = 3\n")), ConfigError);
    CHECK_THROWS_AS(read_run_section(parse_config("[run]\nengine = exact\n")), ConfigError);
    CHECK_THROWS_AS(parse_format("xml"), ConfigError);
}

TEST_CASE("every experiment runs with its defaults", "[config]") {
    for (const auto& name : experiment_names()) {
        if (name == "oracle-check") continue;
        ExperimentOptions o;
        o.experiment = name;
        o.jobs = 1;
        const ExperimentResult r = run_experiment(o);
        CHECK_FALSE(r.tables.empty());
        for (const auto& t : r.tables) {
            CHECK_FALSE(t.rows.empty());
            for (const auto& row : t.rows) CHECK(row.size() == t.columns.size());
        }
    }
}

TEST_CASE("squeeze sweep spot value and output formats", "[config]") {
    ExperimentOptions o;
    o.experiment = "squeeze-sweep";
    const ExperimentResult r = run_experiment(o);
    const Table& t = r.tables.front();
    CHECK(t.columns == std::vector<std::string>{"delta_kappa", "var_x", "var_y", "gamma_over_kappa"});
    bool found = false;
    for (const auto& row : t.rows) {
        if (std::abs(row[0] - 0.5) < 1e-12) {
            CHECK(std::abs(row[1] - 0.171572875253810) < 1e-12);
            found = true;
        }
    }
    CHECK(found);

    const auto dir = scratch("formats");
    const auto csv = write_tables(r, dir / "csv", OutputFormat::csv);
    const auto json = write_tables(r, dir / "json", OutputFormat::json);
    REQUIRE(csv.size() == json.size());
    std::ifstream in(dir / "json" / json.front());
    const nlohmann::json j = nlohmann::json::parse(in);
    CHECK(j["columns"].size() == 4);
    CHECK(j["rows"].size() == t.rows.size());
    CHECK(j["rows"][0][1].get<double>() == t.rows[0][1]);

    write_manifest(r, o, csv, 0.5, dir / "csv");
    std::ifstream mf(dir / "csv" / "manifest.json");
    const nlohmann::json m = nlohmann::json::parse(mf);
    CHECK(m["experiment"] == "squeeze-sweep");
    CHECK(m["files"].size() == csv.size());
    CHECK(m.contains("wall_time_seconds"));
    CHECK(m.contains("version"));
    std::filesystem::remove_all(dir);
}
