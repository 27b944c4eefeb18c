#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "atlas/io.hpp"
#include "atlas/synth.hpp"

namespace fs = std::filesystem;

namespace {

std::string atlas_bin() {
    const char* bin = std::getenv("ATLAS_BIN");
    REQUIRE_MESSAGE(bin != nullptr, "ATLAS_BIN must point at the atlas binary");
    return bin;
}

fs::path fresh_dir(const std::string& tag) {
    static int counter = 0;
    const fs::path dir =
        fs::temp_directory_path() / ("atlas_cli_" + tag + "_" + std::to_string(counter++));
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

struct CommandResult {
    int exit_code;
    std::string output;
};

CommandResult run_command(const std::string& args) {
    const fs::path out = fs::temp_directory_path() / "atlas_cli_out.txt";
    const std::string cmd = atlas_bin() + " " + args + " > " + out.string() + " 2>&1";
    const int raw = std::system(cmd.c_str());
    CommandResult r;
    r.exit_code = WEXITSTATUS(raw);
    r.output = atlas::io::read_file(out);
    return r;
}

}  // namespace

TEST_CASE("synth then run produces the staged outputs; rerun is byte-identical") {
    const fs::path fixture = fresh_dir("fixture");
    const fs::path ws = fresh_dir("ws");
    auto synth = run_command("synth -o " + fixture.string() +
                             " --seed 7 --neighborhoods 4 --listings 80");
    CHECK(synth.exit_code == 0);

    auto run = run_command("run -c " + (fixture / "config.json").string() + " -w " + ws.string());
    REQUIRE_MESSAGE(run.exit_code == 0, run.output);
    for (const auto& name : {"manifest.json", "assignments.csv", "pairs.csv", "resolution.csv",
                             "metrics.csv", "network.csv", "network.dot", "hulls.geojson",
                             "correlations.csv"})
        CHECK(fs::exists(ws / name));

    const std::string metrics_before = atlas::io::read_file(ws / "metrics.csv");
    auto rerun = run_command("run -c " + (fixture / "config.json").string() + " -w " + ws.string());
    CHECK(rerun.exit_code == 0);
    CHECK(rerun.output.find("cached") != std::string::npos);
    CHECK(atlas::io::read_file(ws / "metrics.csv") == metrics_before);
}

TEST_CASE("a missing embeddings file exits 2 and names the path") {
    const fs::path fixture = fresh_dir("missing");
    const fs::path ws = fresh_dir("missing_ws");
    auto synth = run_command("synth -o " + fixture.string() + " --listings 40");
    REQUIRE(synth.exit_code == 0);
    fs::remove(fixture / "embeddings_b.txt");
    auto run = run_command("run -c " + (fixture / "config.json").string() + " -w " + ws.string());
    CHECK(run.exit_code == 2);
    CHECK(run.output.find("embeddings_b.txt") != std::string::npos);
}

TEST_CASE("eval against fixture gold reports perfect scores") {
    const fs::path fixture = fresh_dir("eval");
    const fs::path ws = fresh_dir("eval_ws");
    REQUIRE(run_command("synth -o " + fixture.string() + " --seed 7 --listings 80").exit_code == 0);
    REQUIRE(run_command("run -c " + (fixture / "config.json").string() + " -w " + ws.string())
                .exit_code == 0);

    auto eval = run_command("eval -c " + (fixture / "config.json").string() + " -w " + ws.string() +
                            " --gold-resolution " + (fixture / "gold_resolution.csv").string() +
                            " --gold-spans " + (fixture / "gold_spans.csv").string());
    REQUIRE_MESSAGE(eval.exit_code == 0, eval.output);
    CHECK(eval.output.find("precision=1 ") != std::string::npos);
    CHECK(eval.output.find("recall=1 ") != std::string::npos);
    CHECK(eval.output.find("weighted_f1=1") != std::string::npos);

    auto no_gold = run_command("eval -c " + (fixture / "config.json").string() + " -w " +
                               ws.string());
    CHECK(no_gold.exit_code == 2);
}

TEST_CASE("subcommands stop at their stage") {
    const fs::path fixture = fresh_dir("stage");
    const fs::path ws = fresh_dir("stage_ws");
    REQUIRE(run_command("synth -o " + fixture.string() + " --listings 40").exit_code == 0);
    auto ingest =
        run_command("ingest -c " + (fixture / "config.json").string() + " -w " + ws.string());
    CHECK(ingest.exit_code == 0);
    CHECK(fs::exists(ws / "assignments.csv"));
    CHECK_FALSE(fs::exists(ws / "pairs.csv"));

    auto link = run_command("link -c " + (fixture / "config.json").string() + " -w " + ws.string());
    CHECK(link.exit_code == 0);
    CHECK(fs::exists(ws / "pairs.csv"));
    CHECK_FALSE(fs::exists(ws / "resolution.csv"));

    auto stats =
        run_command("stats -c " + (fixture / "config.json").string() + " -w " + ws.string());
    CHECK(stats.exit_code == 0);
    CHECK(stats.output.find("metric,pairs,r") != std::string::npos);
}

TEST_CASE("usage errors exit 2") {
    CHECK(run_command("definitely-not-a-command").exit_code == 2);
    CHECK(run_command("run").exit_code == 2);  // missing required flags
}

TEST_CASE("parameter overrides change behavior from the command line") {
    const fs::path fixture = fresh_dir("flags");
    const fs::path ws = fresh_dir("flags_ws");
    REQUIRE(run_command("synth -o " + fixture.string() + " --listings 60").exit_code == 0);
    // An absurd min-hull-points leaves every surface unresolved.
    auto run = run_command("run -c " + (fixture / "config.json").string() + " -w " + ws.string() +
                           " --min-hull-points 10000");
    REQUIRE_MESSAGE(run.exit_code == 0, run.output);
    const std::string resolution = atlas::io::read_file(ws / "resolution.csv");
    CHECK(resolution == "surface,assigned,score,centroid_rank,embedA_rank,embedB_rank,jw_rank,jw_sim\n");
    const std::string unresolved = atlas::io::read_file(ws / "unresolved.csv");
    CHECK(unresolved.find("insufficient support") != std::string::npos);
}
