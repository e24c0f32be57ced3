#include "dualex/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <iostream>
#include <mutex>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "dualex/image_io.hpp"

namespace dualex {

namespace {

using json = nlohmann::ordered_json;
using clock_type = std::chrono::steady_clock;

double seconds_since(clock_type::time_point t0) {
    return std::chrono::duration<double>(clock_type::now() - t0).count();
}

json config_json(const PipelineConfig& c) {
    json j;
    j["lambda"] = c.illum.lambda;
    j["gamma"] = c.illum.gamma;
    j["sigma"] = c.illum.sigma;
    j["window"] = c.illum.window;
    j["eps"] = c.illum.eps;
    j["squared_affinity"] = c.illum.squared_affinity;
    j["cg_tol"] = c.solver.tolerance;
    j["cg_max_iter"] = c.solver.max_iterations;
    if (c.fusion.levels == 0)
        j["levels"] = "auto";
    else
        j["levels"] = c.fusion.levels;
    j["fusion_mode"] =
        c.fusion.mode == MapMode::winner_take_all ? "winner_take_all" : "normalized";
    j["save_intermediates"] = c.save_intermediates;
    return j;
}

std::filesystem::path with_suffix(const std::filesystem::path& base, const std::string& suffix) {
    std::filesystem::path p = base;
    p.replace_filename(base.stem().string() + suffix + ".png");
    return p;
}

bool supported_extension(const std::filesystem::path& p) {
    std::string ext = p.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return ext == ".png" || ext == ".jpg" || ext == ".jpeg";
}

void ensure_parent_dir(const std::filesystem::path& file) {
    std::filesystem::path dir = file.parent_path();
    if (dir.empty()) return;
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
}

}  // namespace

void PipelineConfig::validate() const {
    illum.validate();
    fusion.validate();
    if (solver.tolerance <= 0.0) throw ArgumentError("--cg-tol must be > 0");
    if (solver.max_iterations < 1) throw ArgumentError("--cg-max-iter must be >= 1");
    if (input.empty()) throw ArgumentError("--input is required");
    if (output.empty()) throw ArgumentError("--output is required");
}

std::string RunReport::to_json(const PipelineConfig& config) const {
    json j;
    j["input"] = input.string();
    j["output"] = output.string();
    j["ok"] = ok;
    if (!ok) j["error"] = error;
    j["width"] = width;
    j["height"] = height;
    json t;
    t["illumination_forward_s"] = illum_forward_seconds;
    t["illumination_reverse_s"] = illum_reverse_seconds;
    t["fusion_s"] = fusion_seconds;
    t["total_s"] = total_seconds;
    j["timings"] = t;
    json s;
    s["forward"] = {{"iterations", forward.iterations}, {"residual", forward.residual}};
    s["reverse"] = {{"iterations", reverse.iterations}, {"residual", reverse.residual}};
    j["solver"] = s;
    j["config"] = config_json(config);
    return j.dump();
}

std::string BatchReport::summary_json() const {
    json j;
    j["processed"] = static_cast<int>(reports.size());
    j["succeeded"] = succeeded;
    j["failed"] = failed;
    json fl = json::array();
    for (const RunReport& r : reports)
        if (!r.ok) fl.push_back({{"input", r.input.string()}, {"error", r.error}});
    j["failures"] = fl;
    return j.dump();
}

RunReport run_single(const PipelineConfig& config) {
    config.validate();
    auto t_total = clock_type::now();

    RunReport report;
    report.input = config.input;
    report.output = config.output;

    RasterImage img = load(config.input);
    report.width = img.width;
    report.height = img.height;

    DualStats dual_stats;
    ScalarField forward_illum, reverse_illum;
    ExposureTriplet triplet =
        make_triplet(img, config.illum, config.solver, &dual_stats,
                     config.save_intermediates ? &forward_illum : nullptr,
                     config.save_intermediates ? &reverse_illum : nullptr);

    auto t_fuse = clock_type::now();
    std::vector<RasterImage> sequence{triplet.underexposure_corrected,
                                      triplet.overexposure_corrected, triplet.original};
    std::vector<ScalarField> quality;
    for (const RasterImage& im : sequence) quality.push_back(visual_quality(im, config.fusion));
    QualityMaps maps = config.fusion.mode == MapMode::winner_take_all ? winner_take_all(quality)
                                                                      : normalize_maps(quality);
    RasterImage fused = blend_with_maps(sequence, maps, config.fusion.levels);
    report.fusion_seconds = seconds_since(t_fuse);

    ensure_parent_dir(config.output);
    save(fused, config.output);

    if (config.save_intermediates) {
        save_gray(forward_illum, with_suffix(config.output, "_lf"));
        save_gray(reverse_illum, with_suffix(config.output, "_lr"));
        save(triplet.underexposure_corrected, with_suffix(config.output, "_under"));
        save(triplet.overexposure_corrected, with_suffix(config.output, "_over"));
        for (std::size_t k = 0; k < maps.maps.size(); ++k)
            save_gray(maps.maps[k], with_suffix(config.output, "_w" + std::to_string(k)));
    }

    report.illum_forward_seconds = dual_stats.forward_seconds;
    report.illum_reverse_seconds = dual_stats.reverse_seconds;
    report.forward = dual_stats.forward;
    report.reverse = dual_stats.reverse;
    report.total_seconds = seconds_since(t_total);
    return report;
}

BatchReport run_batch(const PipelineConfig& config, void (*emit)(const std::string&)) {
    config.validate();
    if (!std::filesystem::is_directory(config.input))
        throw ArgumentError("batch input must be a directory: " + config.input.string());

    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(config.input))
        if (entry.is_regular_file() && supported_extension(entry.path()))
            files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    if (files.empty())
        throw ArgumentError("no supported images (.png, .jpg, .jpeg) in " + config.input.string());

    std::error_code ec;
    std::filesystem::create_directories(config.output, ec);
    if (ec)
        throw IoError("cannot create output directory " + config.output.string() + ": " +
                      ec.message());

    BatchReport batch;
    batch.reports.resize(files.size());

    std::atomic<std::size_t> next{0};
    std::mutex emit_mutex;
    auto worker = [&]() {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= files.size()) return;
            PipelineConfig per = config;
            per.input = files[i];
            per.output = config.output / files[i].filename().replace_extension(".png");
            RunReport r;
            try {
                r = run_single(per);
            } catch (const Error& e) {
                r.input = per.input;
                r.output = per.output;
                r.ok = false;
                r.error = e.what();
            }
            if (emit) {
                std::lock_guard<std::mutex> lock(emit_mutex);
                emit(r.to_json(per));
            }
            batch.reports[i] = std::move(r);
        }
    };

    unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    unsigned threads = std::min<unsigned>(hw, static_cast<unsigned>(files.size()));
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();

    for (const RunReport& r : batch.reports) (r.ok ? batch.succeeded : batch.failed)++;
    return batch;
}

PipelineConfig parse_args(const std::vector<std::string>& args) {
    PipelineConfig config;
    std::string levels_str = "auto";
    std::string mode_str = "wta";

    CLI::App app{"dualex - automatic exposure correction by dual illumination estimation"};
    app.add_option("--input,-i", config.input, "input image (PNG/JPEG) or directory")->required();
    app.add_option("--output,-o", config.output, "output PNG path, or directory for batch runs")
        ->required();
    app.add_option("--lambda", config.illum.lambda, "smoothness weight");
    app.add_option("--gamma", config.illum.gamma, "illumination gamma, in (0,1]");
    app.add_option("--sigma", config.illum.sigma, "Gaussian affinity std-dev, pixels");
    app.add_option("--window", config.illum.window, "affinity window side, odd");
    app.add_option("--eps", config.illum.eps, "weight stabilizer");
    app.add_option("--levels", levels_str, "pyramid depth, or 'auto'");
    app.add_option("--fusion-mode", mode_str, "wta | normalized");
    app.add_flag("--save-intermediates", config.save_intermediates,
                 "also write illuminations, intermediate corrections, and weight maps");
    app.add_option("--cg-tol", config.solver.tolerance, "CG relative residual tolerance");
    app.add_option("--cg-max-iter", config.solver.max_iterations, "CG iteration cap");
    app.add_flag("--squared-affinity", config.illum.squared_affinity,
                 "use the squared-distance Gaussian affinity");

    std::vector<const char*> argv;
    argv.push_back("dualex");
    for (const std::string& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        throw HelpRequested{app.help()};
    } catch (const CLI::ParseError& e) {
        throw ArgumentError(e.what());
    }

    if (levels_str == "auto") {
        config.fusion.levels = 0;
    } else {
        int levels = 0;
        auto [ptr, errc] = std::from_chars(levels_str.data(), levels_str.data() + levels_str.size(), levels);
        if (errc != std::errc{} || ptr != levels_str.data() + levels_str.size() || levels < 1)
            throw ArgumentError("--levels must be a positive integer or 'auto'");
        config.fusion.levels = levels;
    }

    if (mode_str == "wta" || mode_str == "winner_take_all")
        config.fusion.mode = MapMode::winner_take_all;
    else if (mode_str == "normalized")
        config.fusion.mode = MapMode::normalized;
    else
        throw ArgumentError("--fusion-mode must be 'wta' or 'normalized'");

    // re-validate with flag-oriented messages
    if (config.illum.lambda < 0.0) throw ArgumentError("--lambda must be >= 0");
    if (!(config.illum.gamma > 0.0 && config.illum.gamma <= 1.0))
        throw ArgumentError("--gamma must be in (0, 1]");
    if (config.illum.sigma <= 0.0) throw ArgumentError("--sigma must be > 0");
    if (config.illum.window < 3 || config.illum.window % 2 == 0)
        throw ArgumentError("--window must be an odd integer >= 3");
    if (config.illum.eps <= 0.0) throw ArgumentError("--eps must be > 0");
    if (config.solver.tolerance <= 0.0) throw ArgumentError("--cg-tol must be > 0");
    if (config.solver.max_iterations < 1) throw ArgumentError("--cg-max-iter must be >= 1");
    return config;
}

int run_cli(int argc, const char* const* argv) {
    PipelineConfig config;
    try {
        std::vector<std::string> args(argv + 1, argv + argc);
        config = parse_args(args);
    } catch (const HelpRequested& h) {
        std::cout << h.text;
        return 0;
    } catch (const ArgumentError& e) {
        std::cerr << e.what() << "\n";
        return 1;
    }

    try {
        if (std::filesystem::is_directory(config.input)) {
            BatchReport batch =
                run_batch(config, [](const std::string& line) { std::cout << line << "\n"; });
            std::cout << batch.summary_json() << std::endl;
            return 0;
        }
        RunReport report = run_single(config);
        std::cout << report.to_json(config) << std::endl;
        return 0;
    } catch (const ConvergenceError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const ArgumentError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace dualex
