#include "lunaforge/json_io.hpp"

#include <algorithm>
#include <climits>
#include <initializer_list>
#include <set>

#include "json.hpp"
#include "lunaforge/error.hpp"
#include "lunaforge/text_io.hpp"

namespace lunaforge {
namespace {

using nlohmann::json;

json parse_text(std::string_view text, ErrorKind kind) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        fail(kind, std::string("invalid JSON: ") + e.what());
    }
}

// Checked reader over one JSON object: typed getters and rejection of keys
// nobody asked for.
class Reader {
public:
    Reader(const json& j, std::string where, ErrorKind kind = ErrorKind::config)
        : j_(j), where_(std::move(where)), kind_(kind) {
        if (!j_.is_object()) error("expected an object");
    }

    bool has(const char* key) {
        seen_.insert(key);
        return j_.contains(key);
    }
    const json& raw(const char* key) {
        if (!has(key)) error(std::string("missing key '") + key + "'");
        return j_.at(key);
    }
    double number(const char* key) {
        const json& v = raw(key);
        if (!v.is_number()) error(std::string("'") + key + "' must be a number");
        return v.get<double>();
    }
    double number(const char* key, double fallback) { return has(key) ? number(key) : fallback; }
    long long integer(const char* key) {
        const json& v = raw(key);
        if (!v.is_number_integer()) error(std::string("'") + key + "' must be an integer");
        if (v.is_number_unsigned() && v.get<std::uint64_t>() > static_cast<std::uint64_t>(LLONG_MAX)) {
            error(std::string("'") + key + "' is out of range");
        }
        return v.get<long long>();
    }
    long long integer(const char* key, long long fallback) { return has(key) ? integer(key) : fallback; }
    std::uint64_t unsigned64(const char* key) {
        const json& v = raw(key);
        if (!v.is_number_unsigned()) error(std::string("'") + key + "' must be a non-negative integer");
        return v.get<std::uint64_t>();
    }
    std::string text(const char* key) {
        const json& v = raw(key);
        if (!v.is_string()) error(std::string("'") + key + "' must be a string");
        return v.get<std::string>();
    }
    std::string text(const char* key, const std::string& fallback) { return has(key) ? text(key) : fallback; }
    const json& array(const char* key) {
        const json& v = raw(key);
        if (!v.is_array()) error(std::string("'") + key + "' must be an array");
        return v;
    }

    void finish() const {
        for (const auto& item : j_.items()) {
            if (!seen_.count(item.key())) error("unknown key '" + item.key() + "'");
        }
    }
    [[noreturn]] void error(const std::string& what) const { fail(kind_, where_ + ": " + what); }
    const std::string& where() const { return where_; }

private:
    const json& j_;
    std::string where_;
    ErrorKind kind_;
    std::set<std::string> seen_;
};

void check_header(Reader& r, const char* schema) {
    if (r.has("schema") && r.text("schema") != schema) r.error(std::string("schema must be '") + schema + "'");
    const long long version = r.integer("schema_version");
    if (version != kSchemaVersion) r.error("unsupported schema_version " + std::to_string(version));
}

HeightmapFormat parse_format(const std::string& name, Reader& r) {
    if (name == "raw-f32") return HeightmapFormat::raw_f32;
    if (name == "png16") return HeightmapFormat::png16;
    r.error("format must be 'raw-f32' or 'png16'");
}

const char* format_name(HeightmapFormat f) { return f == HeightmapFormat::raw_f32 ? "raw-f32" : "png16"; }

struct KindName {
    ProcessKind kind;
    const char* name;
};
constexpr KindName kKinds[] = {
    {ProcessKind::poisson, "poisson"}, {ProcessKind::hardcore_poisson, "hardcore_poisson"},
    {ProcessKind::thomas, "thomas"},   {ProcessKind::matern, "matern"},
    {ProcessKind::uniform, "uniform"}, {ProcessKind::normal, "normal"},
};

const char* kind_name(ProcessKind k) {
    for (const auto& e : kKinds) {
        if (e.kind == k) return e.name;
    }
    return "poisson";
}

std::filesystem::path resolve(const std::filesystem::path& base_dir, const std::string& p) {
    const std::filesystem::path path(p);
    return path.is_relative() && !base_dir.empty() ? base_dir / path : path;
}

ProcessSpec parse_process(const json& j, const std::string& where) {
    Reader r(j, where);
    ProcessSpec p;
    const std::string kind = r.text("kind");
    bool found = false;
    for (const auto& e : kKinds) {
        if (kind == e.name) {
            p.kind = e.kind;
            found = true;
        }
    }
    if (!found) r.error("unknown process kind '" + kind + "'");
    switch (p.kind) {
        case ProcessKind::poisson: p.intensity = r.number("intensity"); break;
        case ProcessKind::hardcore_poisson: {
            p.intensity = r.number("intensity");
            p.hardcore.r_min = r.number("r_min");
            p.hardcore.r_max = r.number("r_max", p.hardcore.r_min);
            const std::string mode = r.text("mode", "fixed");
            if (mode == "fixed") {
                p.hardcore.mode = HardcoreMode::fixed;
            } else if (mode == "per_mark") {
                p.hardcore.mode = HardcoreMode::per_mark;
            } else {
                r.error("mode must be 'fixed' or 'per_mark'");
            }
            p.hardcore.max_attempts = static_cast<int>(r.integer("max_attempts", p.hardcore.max_attempts));
            break;
        }
        case ProcessKind::thomas:
            p.parent_intensity = r.number("parent_intensity");
            p.mean_offspring = r.number("mean_offspring");
            p.sigma = r.number("sigma");
            break;
        case ProcessKind::matern:
            p.parent_intensity = r.number("parent_intensity");
            p.mean_offspring = r.number("mean_offspring");
            p.cluster_radius = r.number("cluster_radius");
            break;
        case ProcessKind::uniform:
        case ProcessKind::normal: {
            const long long count = r.integer("count");
            if (count < 0) r.error("count must be >= 0");
            p.count = static_cast<std::size_t>(count);
            if (p.kind == ProcessKind::uniform) break;
            p.sigma = r.number("sigma");
            if (r.has("mean")) {
                const json& m = r.array("mean");
                if (m.size() != 2 || !m[0].is_number() || !m[1].is_number()) r.error("mean must be [x, y]");
                p.mean = Point2{m[0].get<double>(), m[1].get<double>()};
            }
            break;
        }
    }
    r.finish();
    return p;
}

json process_to_json(const ProcessSpec& p) {
    json j;
    j["kind"] = kind_name(p.kind);
    switch (p.kind) {
        case ProcessKind::poisson: j["intensity"] = p.intensity; break;
        case ProcessKind::hardcore_poisson:
            j["intensity"] = p.intensity;
            j["r_min"] = p.hardcore.r_min;
            j["r_max"] = p.hardcore.r_max;
            j["mode"] = p.hardcore.mode == HardcoreMode::fixed ? "fixed" : "per_mark";
            j["max_attempts"] = p.hardcore.max_attempts;
            break;
        case ProcessKind::thomas:
            j["parent_intensity"] = p.parent_intensity;
            j["mean_offspring"] = p.mean_offspring;
            j["sigma"] = p.sigma;
            break;
        case ProcessKind::matern:
            j["parent_intensity"] = p.parent_intensity;
            j["mean_offspring"] = p.mean_offspring;
            j["cluster_radius"] = p.cluster_radius;
            break;
        case ProcessKind::uniform: j["count"] = p.count; break;
        case ProcessKind::normal:
            j["count"] = p.count;
            j["sigma"] = p.sigma;
            if (p.mean) j["mean"] = {p.mean->x, p.mean->y};
            break;
    }
    return j;
}

std::string one_record_per_line(json doc, const char* array_key) {
    json records = std::move(doc[array_key]);
    doc.erase(array_key);
    std::string out = doc.dump(2);
    out.pop_back();  // closing brace
    while (!out.empty() && out.back() == '\n') out.pop_back();
    out += out.size() > 1 ? ",\n" : "\n";
    out += "  \"" + std::string(array_key) + "\": [";
    for (std::size_t i = 0; i < records.size(); ++i) {
        out += i == 0 ? "\n    " : ",\n    ";
        out += records[i].dump();
    }
    out += records.empty() ? "]\n}\n" : "\n  ]\n}\n";
    return out;
}

}  // namespace

ForgeConfig parse_config(std::string_view json_text, const std::filesystem::path& base_dir) {
    const json doc = parse_text(json_text, ErrorKind::config);
    Reader r(doc, "config");
    check_header(r, "lunaforge.config");
    ForgeConfig c;
    c.master_seed = r.unsigned64("master_seed");
    c.resolution = r.number("resolution_m_per_px");
    if (r.has("pixel_budget")) {
        const long long budget = r.integer("pixel_budget");
        if (budget < 1) r.error("pixel_budget must be positive");
        c.pixel_budget = static_cast<std::size_t>(budget);
    }

    {
        Reader b(r.raw("base"), "config.base");
        const std::string kind = b.text("kind");
        if (kind == "flat") {
            FlatBase flat;
            flat.width_m = b.number("width_m");
            flat.height_m = b.number("height_m");
            flat.elevation_m = static_cast<float>(b.number("elevation_m", 0.0));
            c.base = flat;
        } else if (kind == "dem") {
            DemBase dem;
            dem.path = resolve(base_dir, b.text("path"));
            dem.format = parse_format(b.text("format", "raw-f32"), b);
            c.base = dem;
        } else {
            b.error("kind must be 'flat' or 'dem'");
        }
        b.finish();
    }

    const std::string profiles = r.text("profiles", "builtin");
    c.profiles = profiles == "builtin" ? profiles : resolve(base_dir, profiles).string();
    if (r.has("smoothing")) {
        Reader s(r.raw("smoothing"), "config.smoothing");
        c.smoothing.window = static_cast<int>(s.integer("window", c.smoothing.window));
        c.smoothing.degree = static_cast<int>(s.integer("degree", c.smoothing.degree));
        s.finish();
    }

    if (r.has("craters")) {
        Reader cr(r.raw("craters"), "config.craters");
        if (cr.has("tiers")) {
            c.tiers.clear();
            const json& tiers = cr.array("tiers");
            for (std::size_t i = 0; i < tiers.size(); ++i) {
                Reader t(tiers[i], "config.craters.tiers[" + std::to_string(i) + "]");
                CraterTier tier;
                tier.density = t.number("density");
                tier.radius_min = t.number("radius_min");
                tier.radius_max = t.number("radius_max");
                tier.max_attempts = static_cast<int>(t.integer("max_attempts", tier.max_attempts));
                t.finish();
                c.tiers.push_back(tier);
            }
        }
        if (cr.has("distortion")) {
            Reader d(cr.raw("distortion"), "config.craters.distortion");
            c.distortion.harmonics = static_cast<int>(d.integer("harmonics", c.distortion.harmonics));
            c.distortion.max_total_amplitude = d.number("max_total_amplitude", c.distortion.max_total_amplitude);
            d.finish();
        }
        cr.finish();
    }

    if (r.has("assets")) {
        const json& assets = r.array("assets");
        for (std::size_t i = 0; i < assets.size(); ++i) {
            const std::string where = "config.assets[" + std::to_string(i) + "]";
            Reader a(assets[i], where);
            ScatterRule rule;
            rule.asset_id = a.text("asset_id");
            rule.process = parse_process(a.raw("process"), where + ".process");
            if (a.has("scale_range")) {
                const json& s = a.array("scale_range");
                if (s.size() != 2 || !s[0].is_number() || !s[1].is_number()) a.error("scale_range must be [min, max]");
                rule.scale_min = s[0].get<double>();
                rule.scale_max = s[1].get<double>();
            }
            if (a.has("yaw")) {
                const json& y = a.raw("yaw");
                if (y.is_number()) {
                    rule.fixed_yaw = y.get<double>();
                } else if (!(y.is_string() && y.get<std::string>() == "uniform")) {
                    a.error("yaw must be \"uniform\" or a number of radians");
                }
            }
            rule.z_offset = a.number("z_offset_m", 0.0);
            rule.footprint_radius = a.number("footprint_radius_m", rule.footprint_radius);
            a.finish();
            c.assets.push_back(std::move(rule));
        }
    }

    if (r.has("mesh")) {
        Reader m(r.raw("mesh"), "config.mesh");
        c.mesh.uv_scale = m.number("uv_scale", c.mesh.uv_scale);
        c.mesh.collision_factor = static_cast<int>(m.integer("collision_factor", c.mesh.collision_factor));
        m.finish();
    }
    r.finish();
    validate_config(c);
    return c;
}

ForgeConfig load_config(const std::filesystem::path& path) {
    return parse_config(read_file(path), path.parent_path());
}

std::string config_to_json(const ForgeConfig& c) {
    json j;
    j["schema"] = "lunaforge.config";
    j["schema_version"] = kSchemaVersion;
    j["master_seed"] = c.master_seed;
    j["resolution_m_per_px"] = c.resolution;
    j["pixel_budget"] = c.pixel_budget;
    if (const auto* flat = std::get_if<FlatBase>(&c.base)) {
        j["base"] = {{"kind", "flat"},
                     {"width_m", flat->width_m},
                     {"height_m", flat->height_m},
                     {"elevation_m", flat->elevation_m}};
    } else {
        const auto& dem = std::get<DemBase>(c.base);
        j["base"] = {{"kind", "dem"}, {"path", dem.path.generic_string()}, {"format", format_name(dem.format)}};
    }
    j["profiles"] = c.profiles;
    j["smoothing"] = {{"window", c.smoothing.window}, {"degree", c.smoothing.degree}};
    json tiers = json::array();
    for (const auto& t : c.tiers) {
        tiers.push_back({{"density", t.density},
                         {"radius_min", t.radius_min},
                         {"radius_max", t.radius_max},
                         {"max_attempts", t.max_attempts}});
    }
    j["craters"] = {{"tiers", tiers},
                    {"distortion",
                     {{"harmonics", c.distortion.harmonics},
                      {"max_total_amplitude", c.distortion.max_total_amplitude}}}};
    json assets = json::array();
    for (const auto& a : c.assets) {
        json rule = {{"asset_id", a.asset_id},
                     {"process", process_to_json(a.process)},
                     {"scale_range", {a.scale_min, a.scale_max}},
                     {"z_offset_m", a.z_offset},
                     {"footprint_radius_m", a.footprint_radius}};
        if (a.fixed_yaw) {
            rule["yaw"] = *a.fixed_yaw;
        } else {
            rule["yaw"] = "uniform";
        }
        assets.push_back(std::move(rule));
    }
    j["assets"] = assets;
    j["mesh"] = {{"uv_scale", c.mesh.uv_scale}, {"collision_factor", c.mesh.collision_factor}};
    return j.dump(2) + "\n";
}

std::string manifest_to_json(const PlacementManifest& m) {
    json doc;
    doc["schema"] = "lunaforge.manifest";
    doc["schema_version"] = kSchemaVersion;
    doc["seed_record"] = {{"master_seed", m.seed_record.master_seed}, {"stage_labels", m.seed_record.stage_labels}};
    json instances = json::array();
    for (const Instance& i : m.instances) {
        instances.push_back(
            {{"asset_id", i.asset_id}, {"x", i.x}, {"y", i.y}, {"z", i.z}, {"yaw", i.yaw}, {"scale", i.scale}});
    }
    doc["instances"] = std::move(instances);
    return one_record_per_line(std::move(doc), "instances");
}

PlacementManifest parse_manifest(std::string_view json_text) {
    const json doc = parse_text(json_text, ErrorKind::validation);
    Reader r(doc, "manifest", ErrorKind::validation);
    check_header(r, "lunaforge.manifest");
    PlacementManifest m;
    Reader s(r.raw("seed_record"), "manifest.seed_record", ErrorKind::validation);
    m.seed_record.master_seed = s.unsigned64("master_seed");
    for (const json& label : s.array("stage_labels")) {
        if (!label.is_string()) s.error("stage labels must be strings");
        m.seed_record.stage_labels.push_back(label.get<std::string>());
    }
    s.finish();
    const json& instances = r.array("instances");
    for (std::size_t k = 0; k < instances.size(); ++k) {
        Reader i(instances[k], "manifest.instances[" + std::to_string(k) + "]", ErrorKind::validation);
        m.instances.push_back(
            {i.text("asset_id"), i.number("x"), i.number("y"), i.number("z"), i.number("yaw"), i.number("scale")});
        i.finish();
    }
    r.finish();
    return m;
}

void save_manifest(const PlacementManifest& manifest, const std::filesystem::path& path) {
    write_file(path, manifest_to_json(manifest));
}

PlacementManifest load_manifest(const std::filesystem::path& path) { return parse_manifest(read_file(path)); }

std::string craters_to_json(const std::vector<PlacedCrater>& craters) {
    json doc;
    doc["schema"] = "lunaforge.craters";
    doc["schema_version"] = kSchemaVersion;
    json list = json::array();
    for (const PlacedCrater& c : craters) {
        json distortion = json::array();
        for (const Distortion& d : c.spec.distortion) {
            distortion.push_back({{"amplitude", d.amplitude}, {"frequency", d.frequency}, {"phase", d.phase}});
        }
        list.push_back({{"tier", c.tier},
                        {"x", c.spec.center_x},
                        {"y", c.spec.center_y},
                        {"radius", c.spec.radius},
                        {"rotation", c.spec.rotation},
                        {"profile_index", c.spec.profile_index},
                        {"distortion", std::move(distortion)}});
    }
    doc["craters"] = std::move(list);
    return one_record_per_line(std::move(doc), "craters");
}

std::vector<PlacedCrater> parse_craters(std::string_view json_text) {
    const json doc = parse_text(json_text, ErrorKind::validation);
    Reader r(doc, "craters", ErrorKind::validation);
    check_header(r, "lunaforge.craters");
    std::vector<PlacedCrater> out;
    const json& list = r.array("craters");
    for (std::size_t k = 0; k < list.size(); ++k) {
        const std::string where = "craters[" + std::to_string(k) + "]";
        Reader c(list[k], where, ErrorKind::validation);
        PlacedCrater placed;
        const long long tier = c.integer("tier");
        const long long profile = c.integer("profile_index");
        if (tier < 0 || profile < 0) c.error("tier and profile_index must be >= 0");
        placed.tier = static_cast<std::size_t>(tier);
        placed.spec.center_x = c.number("x");
        placed.spec.center_y = c.number("y");
        placed.spec.radius = c.number("radius");
        placed.spec.rotation = c.number("rotation");
        placed.spec.profile_index = static_cast<std::size_t>(profile);
        const json& distortion = c.array("distortion");
        for (std::size_t h = 0; h < distortion.size(); ++h) {
            Reader d(distortion[h], where + ".distortion[" + std::to_string(h) + "]", ErrorKind::validation);
            placed.spec.distortion.push_back(
                {d.number("amplitude"), static_cast<int>(d.integer("frequency")), d.number("phase")});
            d.finish();
        }
        c.finish();
        out.push_back(std::move(placed));
    }
    r.finish();
    return out;
}

void save_craters(const std::vector<PlacedCrater>& craters, const std::filesystem::path& path) {
    write_file(path, craters_to_json(craters));
}

std::vector<PlacedCrater> load_craters(const std::filesystem::path& path) { return parse_craters(read_file(path)); }

std::string annotations_to_json(const InstanceRaster& raster, const AnnotationSet& set) {
    json doc;
    doc["schema"] = "lunaforge.annotations";
    doc["schema_version"] = kSchemaVersion;
    doc["raster"] = {{"width", raster.width}, {"height", raster.height}, {"resolution_m_per_px", raster.resolution}};
    json list = json::array();
    for (const Annotation& a : set.annotations) {
        json polygon = json::array();
        for (const Point2& p : a.footprint) polygon.push_back({p.x, p.y});
        list.push_back({{"id", a.id},
                        {"asset_id", a.asset_id},
                        {"bbox", {a.bbox.x, a.bbox.y, a.bbox.w, a.bbox.h}},
                        {"pixel_count", a.pixel_count},
                        {"footprint", std::move(polygon)}});
    }
    doc["annotations"] = std::move(list);
    return one_record_per_line(std::move(doc), "annotations");
}

void save_annotations(const InstanceRaster& raster, const AnnotationSet& set, const std::filesystem::path& path) {
    write_file(path, annotations_to_json(raster, set));
}

}  // namespace lunaforge
