#pragma once
// Versioned JSON documents: forge configs, placement manifests, crater lists
// and annotation sets. Every document carries "schema" and "schema_version".

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "lunaforge/annotate.hpp"
#include "lunaforge/forge.hpp"

namespace lunaforge {

inline constexpr int kSchemaVersion = 1;

/// Parses a config document. Relative base-DEM and profile paths resolve
/// against base_dir. Throws Error(config) on any schema violation, including
/// unknown keys.
ForgeConfig parse_config(std::string_view json_text, const std::filesystem::path& base_dir = {});
ForgeConfig load_config(const std::filesystem::path& path);
std::string config_to_json(const ForgeConfig& config);

std::string manifest_to_json(const PlacementManifest& manifest);
PlacementManifest parse_manifest(std::string_view json_text);
void save_manifest(const PlacementManifest& manifest, const std::filesystem::path& path);
PlacementManifest load_manifest(const std::filesystem::path& path);

std::string craters_to_json(const std::vector<PlacedCrater>& craters);
std::vector<PlacedCrater> parse_craters(std::string_view json_text);
void save_craters(const std::vector<PlacedCrater>& craters, const std::filesystem::path& path);
std::vector<PlacedCrater> load_craters(const std::filesystem::path& path);

std::string annotations_to_json(const InstanceRaster& raster, const AnnotationSet& set);
void save_annotations(const InstanceRaster& raster, const AnnotationSet& set, const std::filesystem::path& path);

}  // namespace lunaforge
