#include "lunaforge/annotate.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <limits>

#include "lunaforge/error.hpp"
#include "lunaforge/text_io.hpp"

namespace lunaforge {
namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

static_assert(std::endian::native == std::endian::little, "raster I/O assumes a little-endian host");

}  // namespace

Rasterization rasterize_instances(const Dem& dem, const PlacementManifest& manifest,
                                  const std::map<std::string, double>& footprints) {
    if (manifest.instances.size() >= std::numeric_limits<std::uint32_t>::max()) {
        fail(ErrorKind::invalid_argument, "too many instances for 32-bit ids");
    }
    Rasterization out;
    InstanceRaster& raster = out.raster;
    raster.width = dem.width();
    raster.height = dem.height();
    raster.resolution = dem.resolution();
    raster.ids.assign(static_cast<std::size_t>(raster.width) * raster.height, 0);
    const double res = raster.resolution;

    std::vector<double> radii(manifest.instances.size());
    for (std::size_t i = 0; i < manifest.instances.size(); ++i) {
        const Instance& inst = manifest.instances[i];
        const auto it = footprints.find(inst.asset_id);
        if (it == footprints.end()) fail(ErrorKind::invalid_argument, "no footprint for asset '" + inst.asset_id + "'");
        radii[i] = it->second * inst.scale;
    }

    for (std::size_t i = 0; i < manifest.instances.size(); ++i) {
        const Instance& inst = manifest.instances[i];
        const double r = radii[i];
        const double r2 = r * r;
        const auto id = static_cast<std::uint32_t>(i + 1);
        const int y0 = std::max(0, static_cast<int>(std::ceil((inst.y - r) / res)));
        const int y1 = std::min(raster.height - 1, static_cast<int>(std::floor((inst.y + r) / res)));
        const int x0 = std::max(0, static_cast<int>(std::ceil((inst.x - r) / res)));
        const int x1 = std::min(raster.width - 1, static_cast<int>(std::floor((inst.x + r) / res)));
        for (int y = y0; y <= y1; ++y) {
            const double dy = y * res - inst.y;
            for (int x = x0; x <= x1; ++x) {
                const double dx = x * res - inst.x;
                if (dx * dx + dy * dy <= r2) raster.ids[static_cast<std::size_t>(y) * raster.width + x] = id;
            }
        }
    }

    struct Tally {
        int x0 = std::numeric_limits<int>::max(), y0 = std::numeric_limits<int>::max(), x1 = -1, y1 = -1;
        std::size_t count = 0;
    };
    std::vector<Tally> tally(manifest.instances.size());
    for (int y = 0; y < raster.height; ++y) {
        for (int x = 0; x < raster.width; ++x) {
            const std::uint32_t id = raster.at(x, y);
            if (id == 0) continue;
            Tally& t = tally[id - 1];
            t.x0 = std::min(t.x0, x);
            t.x1 = std::max(t.x1, x);
            t.y0 = std::min(t.y0, y);
            t.y1 = std::max(t.y1, y);
            ++t.count;
        }
    }

    out.annotations.annotations.reserve(manifest.instances.size());
    for (std::size_t i = 0; i < manifest.instances.size(); ++i) {
        const Instance& inst = manifest.instances[i];
        Annotation a;
        a.id = static_cast<std::uint32_t>(i + 1);
        a.asset_id = inst.asset_id;
        a.pixel_count = tally[i].count;
        if (tally[i].count > 0) {
            a.bbox = {tally[i].x0, tally[i].y0, tally[i].x1 - tally[i].x0 + 1, tally[i].y1 - tally[i].y0 + 1};
        }
        a.footprint.reserve(kFootprintPolygonSides);
        for (int k = 0; k < kFootprintPolygonSides; ++k) {
            const double t = 2.0 * kPi * k / kFootprintPolygonSides;
            a.footprint.push_back({(inst.x + radii[i] * std::cos(t)) / res, (inst.y + radii[i] * std::sin(t)) / res});
        }
        out.annotations.annotations.push_back(std::move(a));
    }
    return out;
}

std::map<std::string, double> footprints_from_config(const ForgeConfig& config) {
    std::map<std::string, double> out;
    for (const ScatterRule& rule : config.assets) out.emplace(rule.asset_id, rule.footprint_radius);
    return out;
}

GrayImage<std::uint8_t> hillshade(const Dem& dem, double sun_azimuth, double sun_elevation) {
    if (!(sun_elevation > 0.0 && sun_elevation <= kPi / 2)) {
        fail(ErrorKind::invalid_argument, "sun elevation must lie in (0, pi/2]");
    }
    const double lx = std::sin(sun_azimuth) * std::cos(sun_elevation);
    const double ly = std::cos(sun_azimuth) * std::cos(sun_elevation);
    const double lz = std::sin(sun_elevation);
    const int w = dem.width(), h = dem.height();
    const double res = dem.resolution();

    // Central differences inside, one-sided at borders and next to holes.
    auto slope = [&](int x, int y, int sx, int sy) {
        const int xa = x - sx, ya = y - sy, xb = x + sx, yb = y + sy;
        const bool a_ok = xa >= 0 && ya >= 0 && !dem.is_hole(xa, ya);
        const bool b_ok = xb < w && yb < h && !dem.is_hole(xb, yb);
        if (a_ok && b_ok) return (static_cast<double>(dem.at(xb, yb)) - dem.at(xa, ya)) / (2.0 * res);
        if (b_ok) return (static_cast<double>(dem.at(xb, yb)) - dem.at(x, y)) / res;
        if (a_ok) return (static_cast<double>(dem.at(x, y)) - dem.at(xa, ya)) / res;
        return 0.0;
    };

    GrayImage<std::uint8_t> image{w, h, std::vector<std::uint8_t>(static_cast<std::size_t>(w) * h, 0)};
    for (int y = 0; y < h; ++y) {
        const std::size_t row = static_cast<std::size_t>(h - 1 - y) * w;
        for (int x = 0; x < w; ++x) {
            if (dem.is_hole(x, y)) continue;
            const double gx = slope(x, y, 1, 0);
            const double gy = slope(x, y, 0, 1);
            const double shade = (-gx * lx - gy * ly + lz) / std::sqrt(gx * gx + gy * gy + 1.0);
            image.pixels[row + x] = static_cast<std::uint8_t>(std::lround(255.0 * std::clamp(shade, 0.0, 1.0)));
        }
    }
    return image;
}

void save_instance_raster(const InstanceRaster& raster, const std::filesystem::path& path) {
    if (raster.ids.size() != static_cast<std::size_t>(raster.width) * raster.height) {
        fail(ErrorKind::dimension_mismatch, "instance raster size does not match its dimensions");
    }
    std::string bytes(raster.ids.size() * sizeof(std::uint32_t), '\0');
    std::memcpy(bytes.data(), raster.ids.data(), bytes.size());
    write_file(path, bytes);
    KeyValueHeader header;
    header.set("format", std::string("raw-u32"));
    header.set("width", static_cast<long long>(raster.width));
    header.set("height", static_cast<long long>(raster.height));
    header.set("resolution_m_per_px", raster.resolution);
    header.write(header_path(path));
}

InstanceRaster load_instance_raster(const std::filesystem::path& path) {
    const KeyValueHeader header = KeyValueHeader::read(header_path(path));
    if (header.get("format") != "raw-u32") fail(ErrorKind::malformed_header, "instance raster format must be raw-u32");
    InstanceRaster raster;
    raster.width = static_cast<int>(header.get_int("width"));
    raster.height = static_cast<int>(header.get_int("height"));
    raster.resolution = header.get_double("resolution_m_per_px");
    if (raster.width < 1 || raster.height < 1 || !(raster.resolution > 0.0)) {
        fail(ErrorKind::malformed_header, "instance raster header has invalid dimensions");
    }
    const std::string bytes = read_file(path);
    const std::size_t n = static_cast<std::size_t>(raster.width) * raster.height;
    if (bytes.size() != n * sizeof(std::uint32_t)) {
        fail(ErrorKind::dimension_mismatch, "instance raster payload size does not match header");
    }
    raster.ids.resize(n);
    std::memcpy(raster.ids.data(), bytes.data(), bytes.size());
    return raster;
}

}  // namespace lunaforge
