#pragma once
// Seeded end-to-end terrain randomization: base DEM, crater tiers, asset
// scattering, meshes.
//
// Random substreams are keyed by stage label:
//   tier/<i>/centers
//   tier/<i>/crater/<j>/{profile,rotation,distortion}
//   scatter/<r>/{points,yaw,scale}
// so changing one stage's parameters never perturbs another stage.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "lunaforge/crater.hpp"
#include "lunaforge/dem.hpp"
#include "lunaforge/mesh.hpp"
#include "lunaforge/point_process.hpp"

namespace lunaforge {

struct CraterTier {
    double density = 0.0;  // craters per m^2
    double radius_min = 0.5;
    double radius_max = 1.0;
    int max_attempts = 100;
};

/// The three default tiers spanning 0.5-10 m radii. Densities are
/// illustrative defaults, not calibrated against lunar crater counts.
std::vector<CraterTier> default_crater_tiers();

struct DistortionSettings {
    int harmonics = 4;
    double max_total_amplitude = 0.08;
};

struct FlatBase {
    double width_m = 10.0;
    double height_m = 10.0;
    float elevation_m = 0.0f;
};

struct DemBase {
    std::filesystem::path path;
    HeightmapFormat format = HeightmapFormat::raw_f32;
};

enum class ProcessKind { poisson, hardcore_poisson, thomas, matern, uniform, normal };

struct ProcessSpec {
    ProcessKind kind = ProcessKind::poisson;
    double intensity = 0.0;         // poisson, hardcore_poisson
    HardcoreParams hardcore;        // hardcore_poisson
    double parent_intensity = 0.0;  // thomas, matern
    double mean_offspring = 0.0;    // thomas, matern
    double sigma = 1.0;             // thomas, normal
    double cluster_radius = 1.0;    // matern
    std::size_t count = 0;          // uniform, normal
    std::optional<Point2> mean;     // normal; terrain center when unset
};

struct ScatterRule {
    std::string asset_id;
    ProcessSpec process;
    double scale_min = 1.0;
    double scale_max = 1.0;
    /// Unset: yaw uniform in [0, 2*pi). Set: that fixed yaw in radians.
    std::optional<double> fixed_yaw;
    double z_offset = 0.0;
    /// Top-down footprint radius at scale 1, used by the annotator.
    double footprint_radius = 0.25;
};

struct MeshSettings {
    double uv_scale = 1.0;
    int collision_factor = 4;
};

struct ForgeConfig {
    std::variant<FlatBase, DemBase> base = FlatBase{};
    double resolution = 0.05;
    std::vector<CraterTier> tiers = default_crater_tiers();
    std::uint64_t master_seed = 0;
    std::vector<ScatterRule> assets;
    std::size_t pixel_budget = kDefaultPixelBudget;
    /// "builtin" or a path to a profile CSV.
    std::string profiles = "builtin";
    SmoothingOptions smoothing;
    DistortionSettings distortion;
    MeshSettings mesh;
};

/// Throws Error(config) describing the first violated constraint.
void validate_config(const ForgeConfig& config);

struct PlacedCrater {
    std::size_t tier = 0;
    CraterSpec spec;
    friend bool operator==(const PlacedCrater&, const PlacedCrater&) = default;
};

struct ForgeResult {
    Dem dem;
    /// Sorted by tier index, insertion order within a tier.
    std::vector<PlacedCrater> craters;
};

/// Base grid for a config: a flat plane, or the loaded DEM with holes filled
/// and resampled to config.resolution when the resolutions differ.
Dem build_base(const ForgeConfig& config);

/// Profile library named by config.profiles.
ProfileLibrary resolve_profiles(const ForgeConfig& config);

/// Order in which tiers are stamped: descending radius_max, ties by index.
std::vector<std::size_t> tier_order(const ForgeConfig& config);

/// Crater specs of one tier on a terrain of the given grid size, in
/// insertion order.
std::vector<CraterSpec> plan_tier(const ForgeConfig& config, std::size_t tier_index, int grid_width,
                                  int grid_height, std::size_t profile_count);

ForgeResult forge_terrain(const ForgeConfig& config);

struct StampThroughput {
    std::size_t stamps = 0;
    std::size_t cells = 0;  // total stamp cells synthesized
    double seconds = 0.0;   // wall time of synthesis only
};

/// Synthesizes `count` stamps with radii uniform in [r_min, r_max] and the
/// given distortion, drawn from substreams "bench/<j>/...", across
/// default_thread_count() workers. The profile library is built before the
/// clock starts.
StampThroughput measure_stamp_throughput(std::size_t count, double resolution, double r_min, double r_max,
                                         std::uint64_t seed, const DistortionSettings& distortion = {},
                                         std::size_t pixel_budget = kDefaultPixelBudget);

struct Instance {
    std::string asset_id;
    double x = 0.0, y = 0.0, z = 0.0;
    double yaw = 0.0;
    double scale = 1.0;
    friend bool operator==(const Instance&, const Instance&) = default;
};

struct SeedRecord {
    std::uint64_t master_seed = 0;
    std::vector<std::string> stage_labels;
    friend bool operator==(const SeedRecord&, const SeedRecord&) = default;
};

struct PlacementManifest {
    std::vector<Instance> instances;
    SeedRecord seed_record;
    friend bool operator==(const PlacementManifest&, const PlacementManifest&) = default;
};

PlacementManifest scatter_assets(const ForgeConfig& config, const Dem& dem);

struct StageTiming {
    std::string stage;
    double seconds = 0.0;
};

struct TimingReport {
    std::vector<StageTiming> stages;  // dem, visual_mesh, collision_mesh, scatter
    double total_seconds = 0.0;
};

struct RandomizeResult {
    Dem dem;
    std::vector<PlacedCrater> craters;
    PlacementManifest manifest;
    MeshBuffers visual_mesh;
    MeshBuffers collision_mesh;
    TimingReport timing;
};

/// Re-runs the whole pipeline with master_seed replaced by new_seed. Errors
/// are rethrown with the failing stage name prefixed.
RandomizeResult randomize(const ForgeConfig& config, std::uint64_t new_seed);

}  // namespace lunaforge
