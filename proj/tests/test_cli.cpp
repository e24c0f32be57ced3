#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "dualex/image_io.hpp"
#include "dualex/pipeline.hpp"
#include "support/synth.hpp"

using namespace dualex;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& name) {
    fs::path dir = fs::temp_directory_path() / ("dualex_test_cli_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

int run_tool(const std::string& args, const fs::path& stdout_file = {}) {
    std::string cmd = std::string(DUALEX_CLI_PATH) + " " + args;
    if (!stdout_file.empty()) cmd += " > " + stdout_file.string();
    cmd += " 2> /dev/null";
    int rc = std::system(cmd.c_str());
    REQUIRE(WIFEXITED(rc));
    return WEXITSTATUS(rc);
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("defaults match the published parameter set") {
    PipelineConfig c = parse_args({"--input", "in.png", "--output", "out.png"});
    CHECK(c.illum.lambda == 0.15);
    CHECK(c.illum.gamma == 0.6);
    CHECK(c.illum.sigma == 3.0);
    CHECK(c.illum.window == 15);
    CHECK(c.illum.eps == 1e-3);
    CHECK(c.illum.squared_affinity == false);
    CHECK(c.solver.tolerance == 1e-5);
    CHECK(c.solver.max_iterations == 5000);
    CHECK(c.fusion.levels == 0);  // auto
    CHECK(c.fusion.mode == MapMode::winner_take_all);
    CHECK(c.save_intermediates == false);
}

TEST_CASE("flag values land in the config") {
    PipelineConfig c = parse_args({"--input", "a.png", "--output", "b.png", "--lambda", "0.3",
                                   "--gamma", "0.8", "--window", "9", "--levels", "3",
                                   "--fusion-mode", "normalized", "--save-intermediates",
                                   "--cg-tol", "1e-7", "--cg-max-iter", "100",
                                   "--squared-affinity"});
    CHECK(c.illum.lambda == 0.3);
    CHECK(c.illum.gamma == 0.8);
    CHECK(c.illum.window == 9);
    CHECK(c.fusion.levels == 3);
    CHECK(c.fusion.mode == MapMode::normalized);
    CHECK(c.save_intermediates == true);
    CHECK(c.solver.tolerance == 1e-7);
    CHECK(c.solver.max_iterations == 100);
    CHECK(c.illum.squared_affinity == true);
}

TEST_CASE("invalid flags are rejected with the flag name") {
    auto expect_error = [](std::vector<std::string> args, const std::string& needle) {
        args.insert(args.begin(), {"--input", "a.png", "--output", "b.png"});
        try {
            parse_args(args);
            FAIL("expected ArgumentError for " << needle);
        } catch (const ArgumentError& e) {
            CHECK(std::string(e.what()).find(needle) != std::string::npos);
        }
    };
    expect_error({"--window", "14"}, "--window");
    expect_error({"--lambda", "-0.5"}, "--lambda");
    expect_error({"--gamma", "0"}, "--gamma");
    expect_error({"--gamma", "1.5"}, "--gamma");
    expect_error({"--levels", "x"}, "--levels");
    expect_error({"--fusion-mode", "blend"}, "--fusion-mode");
    expect_error({"--cg-tol", "0"}, "--cg-tol");

    CHECK_THROWS_AS(parse_args({"--input", "a.png"}), ArgumentError);      // missing output
    CHECK_THROWS_AS(parse_args({"--input", "a.png", "--output", "b.png", "--bogus"}),
                    ArgumentError);  // unknown flag
}

TEST_CASE("run_single writes the output and a sane report") {
    fs::path dir = temp_dir("single");
    RasterImage img = testsupport::synth_photo(40, 30, 3000, testsupport::Exposure::under);
    save(img, dir / "in.png");

    PipelineConfig c = parse_args({"--input", (dir / "in.png").string(), "--output",
                                   (dir / "sub" / "out.png").string()});
    RunReport r = run_single(c);
    CHECK(fs::exists(dir / "sub" / "out.png"));
    CHECK(r.ok);
    CHECK(r.width == 40);
    CHECK(r.height == 30);
    CHECK(r.total_seconds >= 0.0);
    CHECK(r.forward.residual <= c.solver.tolerance);
    CHECK(r.reverse.residual <= c.solver.tolerance);

    nlohmann::json j = nlohmann::json::parse(r.to_json(c));
    CHECK(j["width"] == 40);
    CHECK(j["config"]["lambda"] == 0.15);
    CHECK(j["solver"]["forward"]["iterations"].is_number_integer());
}

TEST_CASE("run_single with intermediates writes the full artifact set") {
    fs::path dir = temp_dir("intermediates");
    RasterImage img = testsupport::synth_photo(32, 24, 3001, testsupport::Exposure::mixed);
    save(img, dir / "in.png");

    PipelineConfig c = parse_args({"--input", (dir / "in.png").string(), "--output",
                                   (dir / "out.png").string(), "--save-intermediates"});
    run_single(c);
    for (const char* suffix : {"_lf", "_lr", "_under", "_over", "_w0", "_w1", "_w2"})
        CHECK(fs::exists(dir / ("out" + std::string(suffix) + ".png")));

    // the dumped corrections respect the exposure ordering after quantization
    RasterImage under = load(dir / "out_under.png");
    RasterImage over = load(dir / "out_over.png");
    for (std::size_t i = 0; i < img.data.size(); ++i) {
        CHECK(under.data[i] >= img.data[i] - 1.5 / 255.0);
        CHECK(over.data[i] <= img.data[i] + 1.5 / 255.0);
    }
}

TEST_CASE("batch processes every good file and records the bad one") {
    fs::path dir = temp_dir("batch");
    fs::create_directories(dir / "in");
    save(testsupport::synth_photo(24, 20, 3002, testsupport::Exposure::under), dir / "in" / "a.png");
    save(testsupport::synth_photo(20, 24, 3003, testsupport::Exposure::over), dir / "in" / "b.png");
    std::ofstream(dir / "in" / "corrupt.png") << "not a png";
    std::ofstream(dir / "in" / "ignored.txt") << "not an image";

    PipelineConfig c = parse_args({"--input", (dir / "in").string(), "--output",
                                   (dir / "out").string()});
    BatchReport batch = run_batch(c);
    CHECK(batch.succeeded == 2);
    CHECK(batch.failed == 1);
    CHECK(batch.reports.size() == 3);
    CHECK(fs::exists(dir / "out" / "a.png"));
    CHECK(fs::exists(dir / "out" / "b.png"));
    CHECK(!fs::exists(dir / "out" / "corrupt.png"));

    nlohmann::json j = nlohmann::json::parse(batch.summary_json());
    CHECK(j["processed"] == 3);
    CHECK(j["failed"] == 1);
    CHECK(j["failures"].size() == 1);
}

TEST_CASE("batch on an empty directory is a usage error") {
    fs::path dir = temp_dir("batch_empty");
    fs::create_directories(dir / "in");
    PipelineConfig c = parse_args({"--input", (dir / "in").string(), "--output",
                                   (dir / "out").string()});
    CHECK_THROWS_AS(run_batch(c), ArgumentError);
}

TEST_CASE("batch outputs are deterministic under concurrency") {
    fs::path dir = temp_dir("batch_det");
    fs::create_directories(dir / "in");
    RasterImage img = testsupport::synth_photo(28, 22, 3004, testsupport::Exposure::mixed);
    for (const char* name : {"c1.png", "c2.png", "c3.png", "c4.png"}) save(img, dir / "in" / name);

    PipelineConfig c = parse_args({"--input", (dir / "in").string(), "--output",
                                   (dir / "out").string()});
    BatchReport batch = run_batch(c);
    CHECK(batch.failed == 0);
    std::string first = read_file(dir / "out" / "c1.png");
    CHECK(!first.empty());
    for (const char* name : {"c2.png", "c3.png", "c4.png"})
        CHECK(read_file(dir / "out" / name) == first);
}

TEST_CASE("cli exit codes map the outcome classes") {
    fs::path dir = temp_dir("exit_codes");
    RasterImage img = testsupport::synth_photo(30, 26, 3005, testsupport::Exposure::under);
    save(img, dir / "in.png");

    SUBCASE("success is 0 and prints a json report") {
        fs::path out_json = dir / "report.json";
        int code = run_tool("--input " + (dir / "in.png").string() + " --output " +
                                (dir / "out.png").string(),
                            out_json);
        CHECK(code == 0);
        CHECK(fs::exists(dir / "out.png"));
        nlohmann::json j = nlohmann::json::parse(read_file(out_json));
        CHECK(j["ok"] == true);
        CHECK(j["timings"]["total_s"].is_number());
    }

    SUBCASE("usage errors are 1") {
        CHECK(run_tool("--input a.png") == 1);
        CHECK(run_tool("--input a.png --output b.png --window 14") == 1);
        CHECK(run_tool("--input a.png --output b.png --unknown-flag") == 1);
    }

    SUBCASE("missing input is 2, and no output is written") {
        int code = run_tool("--input " + (dir / "missing.png").string() + " --output " +
                            (dir / "never.png").string());
        CHECK(code == 2);
        CHECK(!fs::exists(dir / "never.png"));
    }

    SUBCASE("solver non-convergence is 3") {
        int code = run_tool("--input " + (dir / "in.png").string() + " --output " +
                            (dir / "out3.png").string() + " --cg-max-iter 1 --cg-tol 1e-15");
        CHECK(code == 3);
    }

    SUBCASE("batch with a per-file failure still exits 0") {
        fs::create_directories(dir / "bdir");
        fs::copy_file(dir / "in.png", dir / "bdir" / "ok.png");
        std::ofstream(dir / "bdir" / "bad.png") << "junk";
        fs::path out_json = dir / "batch.json";
        int code = run_tool("--input " + (dir / "bdir").string() + " --output " +
                                (dir / "bout").string(),
                            out_json);
        CHECK(code == 0);
        CHECK(fs::exists(dir / "bout" / "ok.png"));
        std::istringstream lines(read_file(out_json));
        std::string line, last;
        while (std::getline(lines, line))
            if (!line.empty()) last = line;
        nlohmann::json summary = nlohmann::json::parse(last);
        CHECK(summary["processed"] == 2);
        CHECK(summary["failed"] == 1);
    }

    SUBCASE("batch of an empty directory exits 1") {
        fs::create_directories(dir / "empty");
        CHECK(run_tool("--input " + (dir / "empty").string() + " --output " +
                       (dir / "eout").string()) == 1);
    }
}

TEST_CASE("an all-white input is a fixed point of the whole pipeline") {
    fs::path dir = temp_dir("white");
    save(testsupport::constant_image(24, 16, 1, 1, 1), dir / "white.png");
    PipelineConfig c = parse_args({"--input", (dir / "white.png").string(), "--output",
                                   (dir / "white_out.png").string()});
    run_single(c);
    RasterImage out = load(dir / "white_out.png");
    for (double v : out.data) CHECK(v >= 1.0 - 1.0 / 255.0);
}

TEST_CASE("tiny images run through the whole pipeline") {
    fs::path dir = temp_dir("tiny");
    save(testsupport::constant_image(1, 1, 0.3, 0.5, 0.7), dir / "one.png");
    save(testsupport::random_image(3, 2, 3100), dir / "three.png");
    for (const char* name : {"one", "three"}) {
        PipelineConfig c = parse_args({"--input", (dir / (name + std::string(".png"))).string(),
                                       "--output", (dir / (name + std::string("_out.png"))).string()});
        RunReport r = run_single(c);
        CHECK(r.ok);
        CHECK(fs::exists(c.output));
    }
}

TEST_CASE("help exits cleanly") {
    CHECK(run_tool("--help") == 0);
    CHECK_THROWS_AS(parse_args({"--help"}), HelpRequested);
}
