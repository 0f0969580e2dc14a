#include "lunaforge/forge.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "lunaforge/error.hpp"
#include "lunaforge/text_io.hpp"
#include "lunaforge/threads.hpp"

namespace lunaforge {
namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

void require(bool ok, const std::string& what) {
    if (!ok) fail(ErrorKind::config, what);
}

std::string tier_label(std::size_t tier, const std::string& rest) {
    return "tier/" + std::to_string(tier) + "/" + rest;
}

std::string scatter_label(std::size_t rule, const char* rest) {
    return "scatter/" + std::to_string(rule) + "/" + rest;
}

// Rectangle spanned by the cell centers of a width x height grid.
SampleDomain terrain_rectangle(int width, int height, double resolution) {
    return SampleDomain::rectangle((width - 1) * resolution, (height - 1) * resolution);
}

PointSet run_process(const ProcessSpec& p, const SampleDomain& domain, Point2 center, RngStream rng) {
    switch (p.kind) {
        case ProcessKind::poisson: return sample_poisson(domain, p.intensity, rng);
        case ProcessKind::hardcore_poisson: return sample_hardcore_poisson(domain, p.intensity, p.hardcore, rng);
        case ProcessKind::thomas: return sample_thomas(domain, p.parent_intensity, p.mean_offspring, p.sigma, rng);
        case ProcessKind::matern:
            return sample_matern(domain, p.parent_intensity, p.mean_offspring, p.cluster_radius, rng);
        case ProcessKind::uniform: return sample_uniform(domain, p.count, rng);
        case ProcessKind::normal: return sample_normal(domain, p.count, p.mean.value_or(center), p.sigma, rng);
    }
    fail(ErrorKind::config, "unknown process kind");
}

// Per-crater attributes, each from its own substream "<prefix>{profile,rotation,distortion}".
CraterSpec draw_crater(std::uint64_t seed, const std::string& prefix, Point2 center, double radius,
                       std::size_t profile_count, const DistortionSettings& distortion) {
    CraterSpec spec;
    spec.center_x = center.x;
    spec.center_y = center.y;
    spec.radius = radius;

    RngStream profile_rng(seed, prefix + "profile");
    spec.profile_index = static_cast<std::size_t>(profile_rng.uniform_index(profile_count));

    RngStream rotation_rng(seed, prefix + "rotation");
    spec.rotation = kTwoPi * rotation_rng.uniform01();

    // Amplitudes: a random total below the cap, split with weights that
    // favour low frequencies. Frequencies start at 2 (1 would only shift
    // the crater).
    RngStream distortion_rng(seed, prefix + "distortion");
    const int harmonics = distortion.harmonics;
    if (harmonics > 0 && distortion.max_total_amplitude > 0.0) {
        const double total = distortion.max_total_amplitude * distortion_rng.uniform01();
        std::vector<double> weights(static_cast<std::size_t>(harmonics));
        double sum = 0.0;
        for (int k = 0; k < harmonics; ++k) {
            weights[static_cast<std::size_t>(k)] = distortion_rng.uniform01_open() / (k + 1);
            sum += weights[static_cast<std::size_t>(k)];
        }
        for (int k = 0; k < harmonics; ++k) {
            spec.distortion.push_back(
                {total * weights[static_cast<std::size_t>(k)] / sum, k + 2, kTwoPi * distortion_rng.uniform01()});
        }
    }
    return spec;
}

template <typename Fn>
auto timed(TimingReport& report, const char* stage, Fn&& fn) {
    const auto start = std::chrono::steady_clock::now();
    try {
        auto value = fn();
        report.stages.push_back(
            {stage, std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count()});
        return value;
    } catch (const Error& e) {
        throw Error(e.kind(), std::string("stage '") + stage + "': " + e.what());
    }
}

}  // namespace

std::vector<CraterTier> default_crater_tiers() {
    return {
        {5.0e-4, 5.0, 10.0, 100},
        {2.0e-3, 1.5, 5.0, 100},
        {8.0e-3, 0.5, 1.5, 100},
    };
}

void validate_config(const ForgeConfig& config) {
    require(config.resolution > 0.0 && std::isfinite(config.resolution), "resolution must be positive");
    require(config.pixel_budget >= 4, "pixel_budget must be at least 4");
    if (const auto* flat = std::get_if<FlatBase>(&config.base)) {
        require(flat->width_m > 0.0 && flat->height_m > 0.0, "flat base needs positive width and height");
        require(std::isfinite(flat->elevation_m), "flat base elevation must be finite");
        const double w = std::round(flat->width_m / config.resolution);
        const double h = std::round(flat->height_m / config.resolution);
        require(w >= 2 && h >= 2, "flat base must span at least 2x2 cells");
        require(w * h <= static_cast<double>(config.pixel_budget), "flat base exceeds pixel_budget");
    } else {
        require(!std::get<DemBase>(config.base).path.empty(), "dem base needs a path");
    }
    for (std::size_t i = 0; i < config.tiers.size(); ++i) {
        const auto& t = config.tiers[i];
        const std::string where = "tier " + std::to_string(i) + ": ";
        require(t.density >= 0.0 && std::isfinite(t.density), where + "density must be >= 0");
        require(t.radius_min > 0.0 && t.radius_min < t.radius_max && std::isfinite(t.radius_max),
                where + "radius range must satisfy 0 < min < max");
        require(t.max_attempts >= 1, where + "max_attempts must be >= 1");
    }
    require(config.distortion.harmonics >= 0 && config.distortion.harmonics <= 32,
            "distortion harmonics must be in [0, 32]");
    require(config.distortion.max_total_amplitude >= 0.0 && config.distortion.max_total_amplitude < 1.0,
            "distortion max_total_amplitude must be in [0, 1)");
    require(config.smoothing.window >= 1 && config.smoothing.window % 2 == 1, "smoothing window must be odd");
    require(config.smoothing.degree >= 0 && config.smoothing.degree < config.smoothing.window,
            "smoothing degree must be in [0, window)");
    require(config.mesh.collision_factor >= 1, "collision_factor must be >= 1");
    require(std::isfinite(config.mesh.uv_scale), "uv_scale must be finite");
    for (std::size_t i = 0; i < config.assets.size(); ++i) {
        const auto& r = config.assets[i];
        const std::string where = "asset rule " + std::to_string(i) + ": ";
        require(!r.asset_id.empty(), where + "asset_id must not be empty");
        require(r.scale_min > 0.0 && r.scale_min <= r.scale_max, where + "scale range must satisfy 0 < min <= max");
        require(std::isfinite(r.z_offset), where + "z_offset must be finite");
        require(r.footprint_radius > 0.0, where + "footprint_radius must be > 0");
    }
}

Dem build_base(const ForgeConfig& config) {
    if (const auto* flat = std::get_if<FlatBase>(&config.base)) {
        const int w = static_cast<int>(std::lround(flat->width_m / config.resolution));
        const int h = static_cast<int>(std::lround(flat->height_m / config.resolution));
        return Dem(w, h, config.resolution, flat->elevation_m);
    }
    const auto& src = std::get<DemBase>(config.base);
    Dem dem = load_dem(src.path, src.format);
    if (dem.has_holes()) dem = fill_holes(dem);
    if (std::fabs(dem.resolution() - config.resolution) > 1e-12 * config.resolution) {
        dem = resample(dem, config.resolution, config.pixel_budget);
    }
    if (dem.size() > config.pixel_budget) fail(ErrorKind::budget_exceeded, "base DEM exceeds pixel_budget");
    return dem;
}

ProfileLibrary resolve_profiles(const ForgeConfig& config) {
    if (config.profiles == "builtin") {
        const auto& defaults = SmoothingOptions{};
        if (config.smoothing.window == defaults.window && config.smoothing.degree == defaults.degree &&
            config.smoothing.u_max == defaults.u_max) {
            return builtin_profiles();
        }
        return parse_profiles(builtin_profile_csv(), config.smoothing);
    }
    return load_profiles(config.profiles, config.smoothing);
}

std::vector<std::size_t> tier_order(const ForgeConfig& config) {
    std::vector<std::size_t> order(config.tiers.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return config.tiers[a].radius_max > config.tiers[b].radius_max;
    });
    return order;
}

std::vector<CraterSpec> plan_tier(const ForgeConfig& config, std::size_t tier_index, int grid_width,
                                  int grid_height, std::size_t profile_count) {
    if (profile_count == 0) fail(ErrorKind::invalid_argument, "profile library is empty");
    const CraterTier& tier = config.tiers.at(tier_index);
    const SampleDomain domain = terrain_rectangle(grid_width, grid_height, config.resolution);
    const HardcoreParams hardcore{tier.radius_min, tier.radius_max, HardcoreMode::per_mark, tier.max_attempts};
    const PointSet centers = sample_hardcore_poisson(domain, tier.density, hardcore,
                                                     RngStream(config.master_seed, tier_label(tier_index, "centers")));

    std::vector<CraterSpec> specs;
    specs.reserve(centers.size());
    for (std::size_t j = 0; j < centers.size(); ++j) {
        specs.push_back(draw_crater(config.master_seed, tier_label(tier_index, "crater/" + std::to_string(j) + "/"),
                                    centers.points[j], centers.marks[j], profile_count, config.distortion));
    }
    return specs;
}

ForgeResult forge_terrain(const ForgeConfig& config) {
    validate_config(config);
    ForgeResult result{build_base(config), {}};
    const ProfileLibrary library = resolve_profiles(config);
    Dem& dem = result.dem;

    const std::size_t threads = default_thread_count();
    const std::size_t batch = std::max<std::size_t>(1, 2 * threads);
    std::vector<CraterStamp> stamps(batch);
    for (std::size_t tier : tier_order(config)) {
        const auto specs = plan_tier(config, tier, dem.width(), dem.height(), library.size());
        for (std::size_t start = 0; start < specs.size(); start += batch) {
            const std::size_t count = std::min(batch, specs.size() - start);
            parallel_for(
                count,
                [&](std::size_t k) {
                    const CraterSpec& spec = specs[start + k];
                    stamps[k] = make_stamp(spec, library[spec.profile_index], dem.resolution(), config.pixel_budget);
                },
                threads);
            // Composition order is fixed, so float sums are reproducible.
            for (std::size_t k = 0; k < count; ++k) stamp_into(dem, stamps[k]);
        }
        for (const auto& spec : specs) result.craters.push_back({tier, spec});
    }
    std::stable_sort(result.craters.begin(), result.craters.end(),
                     [](const PlacedCrater& a, const PlacedCrater& b) { return a.tier < b.tier; });
    return result;
}

StampThroughput measure_stamp_throughput(std::size_t count, double resolution, double r_min, double r_max,
                                         std::uint64_t seed, const DistortionSettings& distortion,
                                         std::size_t pixel_budget) {
    if (!(r_min > 0.0 && r_min <= r_max)) fail(ErrorKind::invalid_argument, "radius range must satisfy 0 < min <= max");
    const ProfileLibrary& library = builtin_profiles();
    std::vector<CraterSpec> specs;
    specs.reserve(count);
    for (std::size_t j = 0; j < count; ++j) {
        const std::string prefix = "bench/" + std::to_string(j) + "/";
        RngStream radius_rng(seed, prefix + "radius");
        specs.push_back(draw_crater(seed, prefix, {0.0, 0.0}, radius_rng.uniform(r_min, r_max), library.size(),
                                    distortion));
    }
    std::vector<std::size_t> cells(count, 0);
    const auto start = std::chrono::steady_clock::now();
    parallel_for(count, [&](std::size_t j) {
        const CraterStamp stamp = make_stamp(specs[j], library[specs[j].profile_index], resolution, pixel_budget);
        cells[j] = stamp.offsets.size();
    });
    StampThroughput out;
    out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    out.stamps = count;
    out.cells = std::accumulate(cells.begin(), cells.end(), std::size_t{0});
    return out;
}

PlacementManifest scatter_assets(const ForgeConfig& config, const Dem& dem) {
    validate_config(config);
    if (dem.has_holes()) fail(ErrorKind::hole, "scatter_assets needs a hole-free DEM");
    PlacementManifest manifest;
    manifest.seed_record.master_seed = config.master_seed;

    const SampleDomain domain = terrain_rectangle(dem.width(), dem.height(), dem.resolution());
    const Point2 center{0.5 * (dem.width() - 1) * dem.resolution(), 0.5 * (dem.height() - 1) * dem.resolution()};
    const double max_gx = dem.width() - 1, max_gy = dem.height() - 1;

    for (std::size_t r = 0; r < config.assets.size(); ++r) {
        const ScatterRule& rule = config.assets[r];
        for (const char* stage : {"points", "yaw", "scale"}) manifest.seed_record.stage_labels.push_back(scatter_label(r, stage));

        const PointSet points =
            run_process(rule.process, domain, center, RngStream(config.master_seed, scatter_label(r, "points")));
        RngStream yaw_rng(config.master_seed, scatter_label(r, "yaw"));
        RngStream scale_rng(config.master_seed, scatter_label(r, "scale"));
        for (const Point2& p : points.points) {
            Instance inst;
            inst.asset_id = rule.asset_id;
            inst.x = p.x;
            inst.y = p.y;
            const GridCoord g{std::min(p.x / dem.resolution(), max_gx), std::min(p.y / dem.resolution(), max_gy)};
            inst.z = bilinear_sample(dem, g) + rule.z_offset;
            inst.yaw = rule.fixed_yaw ? *rule.fixed_yaw : kTwoPi * yaw_rng.uniform01();
            inst.scale = rule.scale_min == rule.scale_max ? rule.scale_min
                                                          : scale_rng.uniform(rule.scale_min, rule.scale_max);
            manifest.instances.push_back(std::move(inst));
        }
    }
    return manifest;
}

RandomizeResult randomize(const ForgeConfig& config, std::uint64_t new_seed) {
    ForgeConfig cfg = config;
    cfg.master_seed = new_seed;
    RandomizeResult out;
    const auto start = std::chrono::steady_clock::now();
    auto forged = timed(out.timing, "dem", [&] { return forge_terrain(cfg); });
    out.dem = std::move(forged.dem);
    out.craters = std::move(forged.craters);
    out.visual_mesh = timed(out.timing, "visual_mesh", [&] { return dem_to_mesh(out.dem, cfg.mesh.uv_scale); });
    out.collision_mesh = timed(out.timing, "collision_mesh", [&] {
        return collision_mesh(out.dem, cfg.mesh.collision_factor, cfg.mesh.uv_scale);
    });
    out.manifest = timed(out.timing, "scatter", [&] { return scatter_assets(cfg, out.dem); });
    out.timing.total_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return out;
}

}  // namespace lunaforge
