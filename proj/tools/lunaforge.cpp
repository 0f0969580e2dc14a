// lunaforge: command-line front end for the terrain pipeline.
//
// Exit codes: 0 success, 2 config or usage error, 3 pipeline error, 4 I/O error.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "lunaforge/annotate.hpp"
#include "lunaforge/crater.hpp"
#include "lunaforge/error.hpp"
#include "lunaforge/forge.hpp"
#include "lunaforge/image_io.hpp"
#include "lunaforge/json_io.hpp"
#include "lunaforge/mesh.hpp"
#include "lunaforge/text_io.hpp"
#include "lunaforge/threads.hpp"

namespace fs = std::filesystem;
using namespace lunaforge;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitPipeline = 3;
constexpr int kExitIo = 4;
constexpr double kPi = 3.141592653589793238462643383279502884;

struct Options {
    std::string config_path;
    std::string out_dir = ".";
    std::optional<std::uint64_t> seed;
    std::string heightmap_format = "raw-f32";
    std::string mesh_format = "obj";
    std::string dem_path;
    std::string manifest_path;
    double azimuth_deg = 315.0;
    double elevation_deg = 45.0;
    int cycles = 10;
    std::size_t stamps = 2000;
    double stamp_resolution = 0.04;
};

ForgeConfig load(const Options& o) {
    ForgeConfig config = load_config(o.config_path);
    if (o.seed) config.master_seed = *o.seed;
    return config;
}

fs::path output_dir(const Options& o) {
    const fs::path dir(o.out_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) fail(ErrorKind::io, "cannot create output directory '" + dir.string() + "': " + ec.message());
    return dir;
}

std::string stem(const char* name, std::uint64_t seed) { return std::string(name) + "_" + std::to_string(seed); }

void announce(const fs::path& p) { std::cout << "wrote " << p.string() << "\n"; }

HeightmapFormat heightmap_format(const std::string& name) {
    return name == "png16" ? HeightmapFormat::png16 : HeightmapFormat::raw_f32;
}

// The terrain for a run: loaded from --dem when given, else forged.
Dem terrain_for(const ForgeConfig& config, const Options& o) {
    if (!o.dem_path.empty()) {
        const fs::path p(o.dem_path);
        return load_dem(p, p.extension() == ".png" ? HeightmapFormat::png16 : HeightmapFormat::raw_f32);
    }
    return forge_terrain(config).dem;
}

int cmd_generate(const Options& o) {
    const ForgeConfig config = load(o);
    const ForgeResult result = forge_terrain(config);
    const fs::path dir = output_dir(o);
    const HeightmapFormat format = heightmap_format(o.heightmap_format);
    const fs::path dem_path =
        dir / (stem("terrain", config.master_seed) + (format == HeightmapFormat::png16 ? ".png" : ".f32"));
    save_dem(result.dem, dem_path, format);
    announce(dem_path);
    const fs::path craters_path = dir / (stem("craters", config.master_seed) + ".json");
    save_craters(result.craters, craters_path);
    announce(craters_path);
    std::cout << result.craters.size() << " craters on " << result.dem.width() << "x" << result.dem.height()
              << " grid\n";
    return 0;
}

int cmd_scatter(const Options& o) {
    const ForgeConfig config = load(o);
    const Dem dem = terrain_for(config, o);
    const PlacementManifest manifest = scatter_assets(config, dem);
    const fs::path path = output_dir(o) / (stem("manifest", config.master_seed) + ".json");
    save_manifest(manifest, path);
    announce(path);
    std::cout << manifest.instances.size() << " instances\n";
    return 0;
}

int cmd_mesh(const Options& o) {
    const ForgeConfig config = load(o);
    const Dem dem = terrain_for(config, o);
    const fs::path dir = output_dir(o);
    const bool ply = o.mesh_format == "ply";
    const MeshFormat format = ply ? MeshFormat::ply : MeshFormat::obj;
    const char* ext = ply ? ".ply" : ".obj";
    MeshBuffers visual = dem_to_mesh(dem, config.mesh.uv_scale);
    if (ply) visual = triangulate(visual);
    const fs::path visual_path = dir / (stem("terrain", config.master_seed) + ext);
    export_mesh(visual, visual_path, format);
    announce(visual_path);
    const fs::path collision_path = dir / (stem("collision", config.master_seed) + ext);
    export_mesh(collision_mesh(dem, config.mesh.collision_factor, config.mesh.uv_scale), collision_path, format);
    announce(collision_path);
    return 0;
}

int cmd_annotate(const Options& o) {
    const ForgeConfig config = load(o);
    const Dem dem = terrain_for(config, o);
    const PlacementManifest manifest =
        o.manifest_path.empty() ? scatter_assets(config, dem) : load_manifest(o.manifest_path);
    const Rasterization r = rasterize_instances(dem, manifest, footprints_from_config(config));
    const fs::path dir = output_dir(o);
    const fs::path raster_path = dir / (stem("instances", config.master_seed) + ".u32");
    save_instance_raster(r.raster, raster_path);
    announce(raster_path);
    const fs::path ann_path = dir / (stem("annotations", config.master_seed) + ".json");
    save_annotations(r.raster, r.annotations, ann_path);
    announce(ann_path);
    return 0;
}

int cmd_preview(const Options& o) {
    const ForgeConfig config = load(o);
    const Dem dem = terrain_for(config, o);
    const auto image = hillshade(dem, o.azimuth_deg * kPi / 180.0, o.elevation_deg * kPi / 180.0);
    const fs::path path = output_dir(o) / (stem("hillshade", config.master_seed) + ".png");
    write_png_gray8(path, image);
    announce(path);
    return 0;
}

struct StageStats {
    double mean = 0.0;
    double p95 = 0.0;
    double max = 0.0;
};

// Nearest-rank percentile.
StageStats summarize(std::vector<double> v) {
    StageStats s;
    if (v.empty()) return s;
    std::sort(v.begin(), v.end());
    for (double x : v) s.mean += x;
    s.mean /= static_cast<double>(v.size());
    const auto rank = static_cast<std::size_t>(std::ceil(0.95 * static_cast<double>(v.size())));
    s.p95 = v[std::max<std::size_t>(rank, 1) - 1];
    s.max = v.back();
    return s;
}

int cmd_bench(const Options& o) {
    const ForgeConfig config = load(o);
    if (o.cycles < 1) fail(ErrorKind::config, "--cycles must be >= 1");
    nlohmann::json report;
    report["schema"] = "lunaforge.bench";
    report["schema_version"] = kSchemaVersion;
    report["threads"] = default_thread_count();
    report["master_seed"] = config.master_seed;

    std::map<std::string, std::vector<double>> stages;
    std::vector<std::string> order;
    std::vector<double> totals;
    int grid_w = 0, grid_h = 0;
    std::size_t craters = 0;
    for (int c = 0; c < o.cycles; ++c) {
        const RandomizeResult r = randomize(config, config.master_seed + static_cast<std::uint64_t>(c));
        grid_w = r.dem.width();
        grid_h = r.dem.height();
        craters += r.craters.size();
        for (const StageTiming& t : r.timing.stages) {
            if (!stages.count(t.stage)) order.push_back(t.stage);
            stages[t.stage].push_back(t.seconds);
        }
        totals.push_back(r.timing.total_seconds);
    }

    std::cout << "randomize: " << o.cycles << " cycles on " << grid_w << "x" << grid_h << " grid, "
              << default_thread_count() << " thread(s), mean " << craters / static_cast<std::size_t>(o.cycles)
              << " craters\n";
    std::cout << "  stage            mean_s     p95_s      max_s\n";
    nlohmann::json stage_json = nlohmann::json::array();
    auto print_row = [](const std::string& name, const StageStats& s) {
        char line[128];
        std::snprintf(line, sizeof line, "  %-14s %9.4f %9.4f %9.4f\n", name.c_str(), s.mean, s.p95, s.max);
        std::cout << line;
    };
    for (const std::string& name : order) {
        const StageStats s = summarize(stages[name]);
        print_row(name, s);
        stage_json.push_back({{"stage", name}, {"mean_s", s.mean}, {"p95_s", s.p95}, {"max_s", s.max}});
    }
    const StageStats total = summarize(totals);
    print_row("total", total);
    report["randomize"] = {{"cycles", o.cycles},
                           {"grid", {grid_w, grid_h}},
                           {"stages", stage_json},
                           {"total", {{"mean_s", total.mean}, {"p95_s", total.p95}, {"max_s", total.max}}}};

    if (o.stamps > 0) {
        const StampThroughput t = measure_stamp_throughput(o.stamps, o.stamp_resolution, 0.5, 10.0,
                                                           config.master_seed, config.distortion, config.pixel_budget);
        std::cout << "stamps: " << t.stamps << " craters (radii 0.5-10 m, " << o.stamp_resolution << " m/px), "
                  << t.cells << " cells in " << t.seconds << " s\n";
        report["stamps"] = {{"count", t.stamps},
                            {"resolution_m_per_px", o.stamp_resolution},
                            {"radius_range_m", {0.5, 10.0}},
                            {"cells", t.cells},
                            {"seconds", t.seconds}};
    }
    const fs::path path = output_dir(o) / (stem("bench", config.master_seed) + ".json");
    write_file(path, report.dump(2) + "\n");
    announce(path);
    return 0;
}

int cmd_profiles(const Options& o) {
    const fs::path path = output_dir(o) / "profiles_builtin.csv";
    write_file(path, builtin_profile_csv());
    announce(path);
    return 0;
}

int exit_code(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::config: return kExitConfig;
        case ErrorKind::io: return kExitIo;
        default: return kExitPipeline;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"lunaforge: seeded lunar terrain generation"};
    app.require_subcommand(1);
    Options o;

    auto common = [&](CLI::App* sub, bool needs_config = true) {
        if (needs_config) sub->add_option("-c,--config", o.config_path, "Config JSON")->required();
        sub->add_option("-o,--out", o.out_dir, "Output directory")->capture_default_str();
        if (needs_config) sub->add_option("-s,--seed", o.seed, "Replace the config master_seed");
    };
    auto terrain_source = [&](CLI::App* sub) {
        sub->add_option("--dem", o.dem_path, "Use this heightmap (.f32 or .png with .hdr) instead of forging");
    };

    CLI::App* generate = app.add_subcommand("generate", "Forge a heightmap and crater list");
    common(generate);
    generate->add_option("--format", o.heightmap_format, "Heightmap format")
        ->check(CLI::IsMember({"raw-f32", "png16"}))
        ->capture_default_str();

    CLI::App* scatter = app.add_subcommand("scatter", "Write the placement manifest");
    common(scatter);
    terrain_source(scatter);

    CLI::App* mesh = app.add_subcommand("mesh", "Export visual and collision meshes");
    common(mesh);
    terrain_source(mesh);
    mesh->add_option("--format", o.mesh_format, "Mesh format")
        ->check(CLI::IsMember({"obj", "ply"}))
        ->capture_default_str();

    CLI::App* annotate = app.add_subcommand("annotate", "Write instance raster and annotations");
    common(annotate);
    terrain_source(annotate);
    annotate->add_option("--manifest", o.manifest_path, "Use this manifest instead of scattering");

    CLI::App* preview = app.add_subcommand("preview", "Render a hillshade PNG");
    common(preview);
    terrain_source(preview);
    preview->add_option("--azimuth", o.azimuth_deg, "Sun azimuth in degrees, 0 = north, clockwise")
        ->capture_default_str();
    preview->add_option("--elevation", o.elevation_deg, "Sun elevation in degrees, (0, 90]")
        ->capture_default_str();

    CLI::App* bench = app.add_subcommand("bench", "Time randomize() cycles and crater stamp synthesis");
    common(bench);
    bench->add_option("--cycles", o.cycles, "randomize() cycles")->capture_default_str();
    bench->add_option("--stamps", o.stamps, "Stamps for the throughput run (0 skips it)")->capture_default_str();
    bench->add_option("--stamp-resolution", o.stamp_resolution, "Stamp resolution in m/px")->capture_default_str();

    CLI::App* profiles = app.add_subcommand("profiles", "Write the built-in crater profile CSV");
    common(profiles, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }

    try {
        if (*generate) return cmd_generate(o);
        if (*scatter) return cmd_scatter(o);
        if (*mesh) return cmd_mesh(o);
        if (*annotate) return cmd_annotate(o);
        if (*preview) return cmd_preview(o);
        if (*bench) return cmd_bench(o);
        if (*profiles) return cmd_profiles(o);
    } catch (const Error& e) {
        std::cerr << "lunaforge: " << to_string(e.kind()) << " error: " << e.what() << "\n";
        return exit_code(e.kind());
    } catch (const std::exception& e) {
        std::cerr << "lunaforge: error: " << e.what() << "\n";
        return kExitPipeline;
    }
    return kExitPipeline;
}
