#include <gtest/gtest.h>

#include <sstream>
#include <string>

#include "lunaforge/error.hpp"
#include "lunaforge/json_io.hpp"
#include "lunaforge/text_io.hpp"
#include "support.hpp"

using namespace lunaforge;
using lunaforge::testing::ScratchDir;

namespace {

template <typename Fn>
ErrorKind kind_of(Fn&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.kind();
    }
    ADD_FAILURE() << "expected lunaforge::Error";
    return ErrorKind::io;
}

const char* kMinimal = R"({
  "schema": "lunaforge.config",
  "schema_version": 1,
  "master_seed": 3,
  "resolution_m_per_px": 0.1,
  "base": {"kind": "flat", "width_m": 4, "height_m": 3}
})";

std::string with(const std::string& key_value) {
    std::string s = kMinimal;
    s.insert(s.rfind('}'), ",\n  " + key_value + "\n");
    return s;
}

}  // namespace

TEST(ConfigJson, MinimalDocumentUsesDefaults) {
    const ForgeConfig c = parse_config(kMinimal);
    EXPECT_EQ(c.master_seed, 3u);
    EXPECT_EQ(c.resolution, 0.1);
    ASSERT_TRUE(std::holds_alternative<FlatBase>(c.base));
    EXPECT_EQ(std::get<FlatBase>(c.base).width_m, 4.0);
    EXPECT_EQ(c.tiers.size(), 3u);
    EXPECT_EQ(c.profiles, "builtin");
    EXPECT_TRUE(c.assets.empty());
}

TEST(ConfigJson, RepoConfigsParse) {
    for (const char* name : {"lunalab.json", "bench_1024.json", "golden.json"}) {
        const auto path = std::string(LUNAFORGE_CONFIG_DIR) + "/" + name;
        EXPECT_NO_THROW(load_config(path)) << name;
    }
    const auto golden = load_config(std::string(LUNAFORGE_CONFIG_DIR) + "/golden.json");
    EXPECT_EQ(golden.master_seed, 20240501u);
    ASSERT_EQ(golden.assets.size(), 2u);
    EXPECT_EQ(golden.assets[0].process.kind, ProcessKind::hardcore_poisson);
    EXPECT_EQ(golden.assets[0].process.hardcore.mode, HardcoreMode::per_mark);
    EXPECT_FALSE(golden.assets[0].fixed_yaw.has_value());
    EXPECT_EQ(golden.assets[1].fixed_yaw, 0.5);
    EXPECT_EQ(golden.mesh.collision_factor, 3);
}

TEST(ConfigJson, RoundTripsThroughText) {
    const auto c = load_config(std::string(LUNAFORGE_CONFIG_DIR) + "/lunalab.json");
    const std::string text = config_to_json(c);
    EXPECT_EQ(config_to_json(parse_config(text)), text);
}

TEST(ConfigJson, SchemaViolationsAreConfigErrors) {
    EXPECT_EQ(kind_of([] { parse_config(with("\"colour\": 1")); }), ErrorKind::config);
    EXPECT_EQ(kind_of([] { parse_config("{not json"); }), ErrorKind::config);
    std::string wrong_version = kMinimal;
    wrong_version.replace(wrong_version.find("\"schema_version\": 1"), 19, "\"schema_version\": 2");
    EXPECT_EQ(kind_of([&] { parse_config(wrong_version); }), ErrorKind::config);
    std::string wrong_schema = kMinimal;
    wrong_schema.replace(wrong_schema.find("lunaforge.config"), 16, "lunaforge.other!");
    EXPECT_EQ(kind_of([&] { parse_config(wrong_schema); }), ErrorKind::config);
    EXPECT_EQ(kind_of([] { parse_config(with("\"mesh\": {\"uv\": 1}")); }), ErrorKind::config);
    EXPECT_EQ(kind_of([] { parse_config(with("\"master_seed\": -1")); }), ErrorKind::config);
    EXPECT_EQ(kind_of([] {
                  parse_config(with(R"("assets": [{"asset_id": "a", "process": {"kind": "poisson", "intensity": 1, "sigma": 2}}])"));
              }),
              ErrorKind::config);
    EXPECT_EQ(kind_of([] {
                  parse_config(with(R"("assets": [{"asset_id": "a", "process": {"kind": "levy"}}])"));
              }),
              ErrorKind::config);
    EXPECT_EQ(kind_of([] { parse_config(with(R"("craters": {"tiers": [{"density": 1, "radius_min": 2, "radius_max": 1}]})")); }),
              ErrorKind::config);
}

TEST(ConfigJson, RelativePathsResolveAgainstConfigDir) {
    ScratchDir dir("cfg");
    write_file(dir / "c.json", with(R"("profiles": "p.csv")"));
    const auto c = load_config(dir / "c.json");
    EXPECT_EQ(c.profiles, (dir / "p.csv").string());
    EXPECT_EQ(kind_of([&] { load_config(dir / "missing.json"); }), ErrorKind::io);
}

TEST(ManifestJson, RoundTripIsExact) {
    PlacementManifest m;
    m.seed_record = {42, {"scatter/0/points", "scatter/0/yaw", "scatter/0/scale"}};
    m.instances.push_back({"rock", 0.1, 2.0 / 3.0, -1e-7, 6.283185307179586, 1.25});
    m.instances.push_back({"boulder", 5.5, 1e-300, 3.0, 0.0, 0.5});
    const std::string text = manifest_to_json(m);
    EXPECT_EQ(parse_manifest(text), m);
    EXPECT_NE(text.find("\"lunaforge.manifest\""), std::string::npos);
    // One record per line.
    std::istringstream lines(text);
    int records = 0;
    for (std::string line; std::getline(lines, line);) records += line.find("\"asset_id\"") != std::string::npos;
    EXPECT_EQ(records, 2);

    ScratchDir dir("manifest");
    save_manifest(m, dir / "m.json");
    EXPECT_EQ(load_manifest(dir / "m.json"), m);
    EXPECT_EQ(kind_of([] { parse_manifest("{\"schema\": \"lunaforge.manifest\"}"); }), ErrorKind::validation);
}

TEST(CratersJson, RoundTripIsExact) {
    std::vector<PlacedCrater> craters;
    craters.push_back({0, {1.5, 2.25, 7.1, 0.3, {{0.01, 2, 0.5}, {0.02, 3, 1.25}}, 4}});
    craters.push_back({2, {0.1, 0.2, 0.7, 6.0, {}, 15}});
    EXPECT_EQ(parse_craters(craters_to_json(craters)), craters);
    ScratchDir dir("craters");
    save_craters(craters, dir / "c.json");
    EXPECT_EQ(load_craters(dir / "c.json"), craters);
    EXPECT_EQ(kind_of([] { parse_craters("[]"); }), ErrorKind::validation);
}

TEST(AnnotationsJson, CarriesSchemaAndRecords) {
    InstanceRaster raster{4, 3, 0.1, std::vector<std::uint32_t>(12, 0)};
    AnnotationSet set;
    set.annotations.push_back({1, "rock", {1, 0, 2, 2}, 3, {{1.0, 2.0}, {2.0, 2.0}, {1.5, 3.0}}});
    const std::string text = annotations_to_json(raster, set);
    EXPECT_NE(text.find("\"lunaforge.annotations\""), std::string::npos);
    EXPECT_NE(text.find("\"schema_version\": 1"), std::string::npos);
    EXPECT_NE(text.find("\"rock\""), std::string::npos);
}
