#include "lunaforge/dem.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstring>
#include <limits>
#include <string>

#include "lunaforge/error.hpp"
#include "lunaforge/image_io.hpp"
#include "lunaforge/text_io.hpp"

namespace lunaforge {
namespace {

void check_shape(int width, int height, double resolution) {
    if (width < 2 || height < 2) {
        fail(ErrorKind::invalid_argument, "DEM must be at least 2x2, got " + std::to_string(width) +
                                              "x" + std::to_string(height));
    }
    if (!(resolution > 0.0) || !std::isfinite(resolution)) {
        fail(ErrorKind::invalid_argument, "DEM resolution must be positive");
    }
}

std::string format_name(HeightmapFormat format) {
    return format == HeightmapFormat::raw_f32 ? "raw-f32" : "png16";
}

void check_format_tag(const KeyValueHeader& header, HeightmapFormat format) {
    if (header.contains("format") && header.get("format") != format_name(format)) {
        fail(ErrorKind::malformed_header, "header declares format '" + header.get("format") +
                                              "', expected '" + format_name(format) + "'");
    }
}

void read_dims(const KeyValueHeader& header, int& width, int& height, double& resolution) {
    const long long w = header.get_int("width");
    const long long h = header.get_int("height");
    resolution = header.get_double("resolution_m_per_px");
    if (w < 2 || h < 2 || w > std::numeric_limits<int>::max() ||
        h > std::numeric_limits<int>::max()) {
        fail(ErrorKind::malformed_header, "header dimensions must be >= 2");
    }
    if (!(resolution > 0.0) || !std::isfinite(resolution)) {
        fail(ErrorKind::malformed_header, "header resolution must be positive");
    }
    width = static_cast<int>(w);
    height = static_cast<int>(h);
}

}  // namespace

Dem::Dem(int width, int height, double resolution, float fill)
    : width_(width), height_(height), resolution_(resolution) {
    check_shape(width, height, resolution);
    if (!std::isfinite(fill)) fail(ErrorKind::invalid_argument, "DEM fill value must be finite");
    elevations_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
}

Dem::Dem(int width, int height, double resolution, std::vector<float> elevations,
         std::vector<std::uint8_t> nodata_mask)
    : width_(width),
      height_(height),
      resolution_(resolution),
      elevations_(std::move(elevations)),
      mask_(std::move(nodata_mask)) {
    check_shape(width, height, resolution);
    const std::size_t n = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
    if (elevations_.size() != n) {
        fail(ErrorKind::dimension_mismatch, "DEM expects " + std::to_string(n) +
                                                " elevations, got " + std::to_string(elevations_.size()));
    }
    if (!mask_.empty() && mask_.size() != n) {
        fail(ErrorKind::dimension_mismatch, "no-data mask length does not match the grid");
    }
    bool any_hole = false;
    for (std::size_t i = 0; i < n; ++i) {
        if (!mask_.empty() && mask_[i] != 0) {
            mask_[i] = 1;
            elevations_[i] = kNodataSentinel;
            any_hole = true;
        } else if (!std::isfinite(elevations_[i])) {
            fail(ErrorKind::validation, "non-finite elevation outside the no-data mask at index " +
                                            std::to_string(i));
        }
    }
    if (!any_hole) mask_.clear();
}

bool Dem::has_holes() const noexcept {
    return std::any_of(mask_.begin(), mask_.end(), [](std::uint8_t m) { return m != 0; });
}

void Dem::set_hole(int x, int y, bool hole) {
    if (x < 0 || y < 0 || x >= width_ || y >= height_) {
        fail(ErrorKind::out_of_bounds, "set_hole outside the grid");
    }
    if (hole) {
        if (mask_.empty()) mask_.assign(elevations_.size(), 0);
        mask_[index(x, y)] = 1;
        elevations_[index(x, y)] = kNodataSentinel;
    } else if (!mask_.empty()) {
        if (mask_[index(x, y)] != 0) {
            fail(ErrorKind::invalid_argument, "clearing a hole requires assigning an elevation; use fill_holes");
        }
    }
}

std::filesystem::path header_path(const std::filesystem::path& payload) {
    std::filesystem::path p = payload;
    p += ".hdr";
    return p;
}

// ---------------------------------------------------------------------------
// File I/O
//
// raw-f32: little-endian float32 payload, row-major from y = 0. Holes carry
//          the sentinel recorded in the header.
// png16:   16-bit gray, top image row is the northern-most grid row (y = H-1);
//          elevation = min_m + code / 65535 * (max_m - min_m).

Dem load_dem(const std::filesystem::path& path, HeightmapFormat format) {
    const KeyValueHeader header = KeyValueHeader::read(header_path(path));
    check_format_tag(header, format);
    int width = 0, height = 0;
    double resolution = 0.0;
    read_dims(header, width, height, resolution);
    const std::size_t n = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);

    if (format == HeightmapFormat::raw_f32) {
        const double sentinel_d = header.contains("nodata_sentinel")
                                      ? header.get_double("nodata_sentinel")
                                      : static_cast<double>(kNodataSentinel);
        const auto sentinel = static_cast<float>(sentinel_d);
        const std::string bytes = read_file(path);
        if (bytes.size() != n * 4) {
            fail(ErrorKind::dimension_mismatch, "'" + path.string() + "' holds " +
                                                    std::to_string(bytes.size()) + " bytes, header implies " +
                                                    std::to_string(n * 4));
        }
        std::vector<float> values(n);
        std::vector<std::uint8_t> mask;
        for (std::size_t i = 0; i < n; ++i) {
            const auto* b = reinterpret_cast<const unsigned char*>(bytes.data() + 4 * i);
            const std::uint32_t bits = std::uint32_t{b[0]} | (std::uint32_t{b[1]} << 8) |
                                       (std::uint32_t{b[2]} << 16) | (std::uint32_t{b[3]} << 24);
            std::memcpy(&values[i], &bits, 4);
            if (values[i] == sentinel || !std::isfinite(values[i])) {
                if (mask.empty()) mask.assign(n, 0);
                mask[i] = 1;
            }
        }
        return Dem(width, height, resolution, std::move(values), std::move(mask));
    }

    const double lo = header.get_double("min_m");
    const double hi = header.get_double("max_m");
    if (!(hi > lo)) fail(ErrorKind::malformed_header, "png16 header needs max_m > min_m");
    const auto image = read_png_gray16(path);
    if (image.width != width || image.height != height) {
        fail(ErrorKind::dimension_mismatch, "PNG is " + std::to_string(image.width) + "x" +
                                                std::to_string(image.height) + ", header says " +
                                                std::to_string(width) + "x" + std::to_string(height));
    }
    std::vector<float> values(n);
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            const double code = image.at(x, height - 1 - y);
            values[static_cast<std::size_t>(y) * width + x] =
                static_cast<float>(lo + code / 65535.0 * (hi - lo));
        }
    }
    return Dem(width, height, resolution, std::move(values));
}

void save_dem(const Dem& dem, const std::filesystem::path& path, HeightmapFormat format,
              std::optional<Png16Range> range) {
    KeyValueHeader header;
    header.set("format", format_name(format));
    header.set("width", static_cast<long long>(dem.width()));
    header.set("height", static_cast<long long>(dem.height()));
    header.set("resolution_m_per_px", dem.resolution());

    if (format == HeightmapFormat::raw_f32) {
        header.set("nodata_sentinel", static_cast<double>(kNodataSentinel));
        std::string bytes(dem.size() * 4, '\0');
        const auto elev = dem.elevations();
        const auto mask = dem.nodata_mask();
        for (std::size_t i = 0; i < elev.size(); ++i) {
            const float v = (!mask.empty() && mask[i]) ? kNodataSentinel : elev[i];
            std::uint32_t bits = 0;
            std::memcpy(&bits, &v, 4);
            for (int k = 0; k < 4; ++k) bytes[4 * i + k] = static_cast<char>((bits >> (8 * k)) & 0xFF);
        }
        write_file(path, bytes);
        header.write(header_path(path));
        return;
    }

    if (dem.has_holes()) {
        fail(ErrorKind::invalid_argument, "png16 cannot store no-data cells; fill holes first");
    }
    const auto elev = dem.elevations();
    Png16Range r;
    if (range) {
        r = *range;
    } else {
        const auto [mn, mx] = std::minmax_element(elev.begin(), elev.end());
        r = {*mn, *mx};
        if (!(r.max_m > r.min_m)) r.max_m = r.min_m + 1.0;
    }
    if (!(r.max_m > r.min_m)) fail(ErrorKind::invalid_argument, "png16 range needs max_m > min_m");
    header.set("min_m", r.min_m);
    header.set("max_m", r.max_m);

    GrayImage<std::uint16_t> image{dem.width(), dem.height(), std::vector<std::uint16_t>(dem.size())};
    const double scale = 65535.0 / (r.max_m - r.min_m);
    for (int y = 0; y < dem.height(); ++y) {
        for (int x = 0; x < dem.width(); ++x) {
            const double code = std::clamp(std::round((dem.at(x, y) - r.min_m) * scale), 0.0, 65535.0);
            image.pixels[static_cast<std::size_t>(dem.height() - 1 - y) * dem.width() + x] =
                static_cast<std::uint16_t>(code);
        }
    }
    write_png_gray16(path, image);
    header.write(header_path(path));
}

// ---------------------------------------------------------------------------

double bilinear_sample(const Dem& dem, GridCoord at) {
    const double max_x = dem.width() - 1;
    const double max_y = dem.height() - 1;
    if (!(at.x >= 0.0 && at.x <= max_x && at.y >= 0.0 && at.y <= max_y)) {
        fail(ErrorKind::out_of_bounds, "bilinear_sample at (" + format_double(at.x) + ", " +
                                           format_double(at.y) + ") is outside the grid");
    }
    const int x0 = std::min(static_cast<int>(std::floor(at.x)), dem.width() - 2);
    const int y0 = std::min(static_cast<int>(std::floor(at.y)), dem.height() - 2);
    const double fx = at.x - x0;
    const double fy = at.y - y0;

    const std::array<double, 4> w = {(1.0 - fx) * (1.0 - fy), fx * (1.0 - fy), (1.0 - fx) * fy, fx * fy};
    const std::array<std::array<int, 2>, 4> cells = {{{x0, y0}, {x0 + 1, y0}, {x0, y0 + 1}, {x0 + 1, y0 + 1}}};
    std::array<double, 4> v{};
    for (int k = 0; k < 4; ++k) {
        if (w[k] == 0.0) continue;
        const auto [cx, cy] = cells[k];
        if (dem.is_hole(cx, cy)) {
            fail(ErrorKind::hole, "bilinear_sample touches no-data cell (" + std::to_string(cx) + ", " +
                                      std::to_string(cy) + ")");
        }
        v[k] = dem.at(cx, cy);
    }
    // Nested lerps: exact at nodes and on constant data.
    const double bottom = fx == 0.0 ? v[0] : fx == 1.0 ? v[1] : v[0] + fx * (v[1] - v[0]);
    if (fy == 0.0) return bottom;
    const double top = fx == 0.0 ? v[2] : fx == 1.0 ? v[3] : v[2] + fx * (v[3] - v[2]);
    return fy == 1.0 ? top : bottom + fy * (top - bottom);
}

// ---------------------------------------------------------------------------
// Hole filling
//
// Holes are filled layer by layer from the boundary inward. Each cell of the
// current front is estimated from the known cells around it with a weighted
// least-squares polynomial (tricube weights): a full quadratic when known
// data surrounds the cell, otherwise a plane, otherwise a weighted mean.
// All cells of a layer are estimated from the state before that layer, so the
// result does not depend on scan order. Estimates are clamped to the range of
// the original data in the 5x5 neighbourhood widened by 10%.

namespace {

constexpr int kMaxFillRadius = 6;

// Gaussian elimination with partial pivoting on a small dense system.
template <std::size_t N>
bool solve(std::array<std::array<double, N>, N> a, std::array<double, N> b, std::array<double, N>& x) {
    double scale = 0.0;
    for (std::size_t i = 0; i < N; ++i) scale = std::max(scale, std::fabs(a[i][i]));
    if (scale == 0.0) return false;
    for (std::size_t col = 0; col < N; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < N; ++r) {
            if (std::fabs(a[r][col]) > std::fabs(a[piv][col])) piv = r;
        }
        if (std::fabs(a[piv][col]) < 1e-10 * scale) return false;
        std::swap(a[piv], a[col]);
        std::swap(b[piv], b[col]);
        for (std::size_t r = col + 1; r < N; ++r) {
            const double f = a[r][col] / a[col][col];
            for (std::size_t c = col; c < N; ++c) a[r][c] -= f * a[col][c];
            b[r] -= f * b[col];
        }
    }
    for (std::size_t i = N; i-- > 0;) {
        double s = b[i];
        for (std::size_t c = i + 1; c < N; ++c) s -= a[i][c] * x[c];
        x[i] = s / a[i][i];
    }
    return true;
}

struct Neighbor {
    double dx, dy, value, weight;
};

template <std::size_t N, typename Basis>
bool fit_at_origin(const std::vector<Neighbor>& pts, Basis basis, double& value) {
    std::array<std::array<double, N>, N> ata{};
    std::array<double, N> atb{};
    for (const auto& p : pts) {
        const std::array<double, N> phi = basis(p.dx, p.dy);
        for (std::size_t i = 0; i < N; ++i) {
            atb[i] += p.weight * phi[i] * p.value;
            for (std::size_t j = 0; j < N; ++j) ata[i][j] += p.weight * phi[i] * phi[j];
        }
    }
    std::array<double, N> coef{};
    if (!solve<N>(ata, atb, coef)) return false;
    value = coef[0];
    return std::isfinite(value);
}

double estimate_cell(const std::vector<double>& values, const std::vector<std::uint8_t>& known,
                     int width, int height, int cx, int cy) {
    std::vector<Neighbor> pts;
    for (int radius = 2; radius <= kMaxFillRadius; ++radius) {
        pts.clear();
        bool left = false, right = false, below = false, above = false;
        const double support = radius + 1.0;
        for (int y = std::max(0, cy - radius); y <= std::min(height - 1, cy + radius); ++y) {
            for (int x = std::max(0, cx - radius); x <= std::min(width - 1, cx + radius); ++x) {
                const std::size_t i = static_cast<std::size_t>(y) * width + x;
                if (!known[i]) continue;
                const double dx = x - cx, dy = y - cy;
                const double t = std::sqrt(dx * dx + dy * dy) / support;
                const double w = t >= 1.0 ? 0.0 : std::pow(1.0 - t * t * t, 3);
                if (w <= 0.0) continue;
                pts.push_back({dx, dy, values[i], w});
                left |= dx < 0;
                right |= dx > 0;
                below |= dy < 0;
                above |= dy > 0;
            }
        }
        const bool surrounded = left && right && below && above;
        double v = 0.0;
        if (surrounded && pts.size() >= 10 &&
            fit_at_origin<6>(pts, [](double x, double y) { return std::array<double, 6>{1, x, y, x * x, x * y, y * y}; }, v)) {
            return v;
        }
        if (pts.size() >= 6 || radius == kMaxFillRadius) {
            if (pts.size() >= 3 &&
                fit_at_origin<3>(pts, [](double x, double y) { return std::array<double, 3>{1, x, y}; }, v)) {
                return v;
            }
            if (radius == kMaxFillRadius && !pts.empty()) {
                double sw = 0.0, sv = 0.0;
                for (const auto& p : pts) {
                    sw += p.weight;
                    sv += p.weight * p.value;
                }
                return sv / sw;
            }
        }
    }
    // Front cells always have a known 8-neighbour, so this is unreachable in
    // practice; fall back to that neighbour's mean.
    double sum = 0.0;
    int count = 0;
    for (int y = std::max(0, cy - 1); y <= std::min(height - 1, cy + 1); ++y) {
        for (int x = std::max(0, cx - 1); x <= std::min(width - 1, cx + 1); ++x) {
            const std::size_t i = static_cast<std::size_t>(y) * width + x;
            if (known[i]) {
                sum += values[i];
                ++count;
            }
        }
    }
    return count ? sum / count : 0.0;
}

}  // namespace

Dem fill_holes(const Dem& dem) {
    if (!dem.has_holes()) return dem;
    const int w = dem.width(), h = dem.height();
    const std::size_t n = dem.size();
    const auto mask = dem.nodata_mask();
    const auto elev = dem.elevations();

    std::vector<std::uint8_t> original(n), known(n);
    std::vector<double> values(n, 0.0);
    std::size_t remaining = 0;
    for (std::size_t i = 0; i < n; ++i) {
        original[i] = known[i] = mask[i] ? 0 : 1;
        if (known[i]) values[i] = elev[i];
        else ++remaining;
    }
    if (remaining == n) fail(ErrorKind::hole, "fill_holes: every cell is no-data");

    std::vector<float> out(elev.begin(), elev.end());
    std::vector<std::size_t> front;
    std::vector<double> estimates;
    while (remaining > 0) {
        front.clear();
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                const std::size_t i = static_cast<std::size_t>(y) * w + x;
                if (known[i]) continue;
                bool touches = false;
                for (int dy = -1; dy <= 1 && !touches; ++dy) {
                    for (int dx = -1; dx <= 1 && !touches; ++dx) {
                        const int nx = x + dx, ny = y + dy;
                        if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
                        touches = known[static_cast<std::size_t>(ny) * w + nx] != 0;
                    }
                }
                if (touches) front.push_back(i);
            }
        }
        estimates.resize(front.size());
        for (std::size_t k = 0; k < front.size(); ++k) {
            const int x = static_cast<int>(front[k] % w), y = static_cast<int>(front[k] / w);
            double v = estimate_cell(values, known, w, h, x, y);

            double lo = std::numeric_limits<double>::infinity(), hi = -lo;
            for (int yy = std::max(0, y - 2); yy <= std::min(h - 1, y + 2); ++yy) {
                for (int xx = std::max(0, x - 2); xx <= std::min(w - 1, x + 2); ++xx) {
                    const std::size_t i = static_cast<std::size_t>(yy) * w + xx;
                    if (!original[i]) continue;
                    lo = std::min(lo, values[i]);
                    hi = std::max(hi, values[i]);
                }
            }
            if (lo <= hi) {
                const double margin = 0.1 * (hi - lo);
                v = std::clamp(v, lo - margin, hi + margin);
            }
            estimates[k] = v;
        }
        for (std::size_t k = 0; k < front.size(); ++k) {
            // Round through float so later layers see what is stored.
            const auto f = static_cast<float>(estimates[k]);
            values[front[k]] = f;
            out[front[k]] = f;
            known[front[k]] = 1;
        }
        remaining -= front.size();
    }
    return Dem(w, h, dem.resolution(), std::move(out));
}

// ---------------------------------------------------------------------------
// Resampling

namespace {

// Catmull-Rom weights for taps at offsets -1, 0, +1, +2. Exact (0,1,0,0) at t = 0.
std::array<double, 4> catmull_rom(double t) {
    const double t2 = t * t, t3 = t2 * t;
    return {-0.5 * t3 + t2 - 0.5 * t, 1.5 * t3 - 2.5 * t2 + 1.0, -1.5 * t3 + 2.0 * t2 + 0.5 * t,
            0.5 * t3 - 0.5 * t2};
}

// Resample one line. Ghost taps beyond either end are linearly extrapolated,
// which keeps affine data exact up to the borders.
void resample_line(const double* src, int n, std::size_t stride, double* dst, std::int64_t m,
                   std::size_t dst_stride, double ratio, bool integral_ratio, double inv_step) {
    auto tap = [&](int i) {
        if (i < 0) return 2.0 * src[0] - src[stride];
        if (i >= n) return 2.0 * src[(n - 1) * stride] - src[(n - 2) * stride];
        return src[i * stride];
    };
    for (std::int64_t j = 0; j < m; ++j) {
        double s = integral_ratio ? static_cast<double>(j) / ratio : static_cast<double>(j) * inv_step;
        s = std::clamp(s, 0.0, static_cast<double>(n - 1));
        int i0 = std::min(static_cast<int>(std::floor(s)), n - 2);
        const double t = s - i0;
        const auto w = catmull_rom(t);
        dst[j * dst_stride] = w[0] * tap(i0 - 1) + w[1] * tap(i0) + w[2] * tap(i0 + 1) + w[3] * tap(i0 + 2);
    }
}

}  // namespace

std::int64_t resampled_length(int length, double source_res, double target_res) {
    const double steps = std::round((length - 1) * source_res / target_res);
    if (!(steps >= 1.0) || steps > 9.0e15) return steps >= 1.0 ? std::numeric_limits<std::int64_t>::max() : 2;
    return static_cast<std::int64_t>(steps) + 1;
}

Dem resample(const Dem& dem, double target_resolution, std::size_t pixel_budget) {
    if (!(target_resolution > 0.0) || !std::isfinite(target_resolution)) {
        fail(ErrorKind::invalid_argument, "resample target resolution must be positive");
    }
    if (dem.has_holes()) fail(ErrorKind::hole, "resample requires a hole-free DEM; run fill_holes first");

    const std::int64_t out_w = resampled_length(dem.width(), dem.resolution(), target_resolution);
    const std::int64_t out_h = resampled_length(dem.height(), dem.resolution(), target_resolution);
    const double cells = static_cast<double>(out_w) * static_cast<double>(out_h);
    const double intermediate = static_cast<double>(out_w) * dem.height();
    if (cells > static_cast<double>(pixel_budget) || intermediate > static_cast<double>(pixel_budget) ||
        out_w > std::numeric_limits<int>::max() || out_h > std::numeric_limits<int>::max()) {
        fail(ErrorKind::budget_exceeded, "resample to " + format_double(target_resolution) +
                                             " m/px needs " + format_double(cells) +
                                             " cells, budget is " + std::to_string(pixel_budget));
    }

    // Source index of output cell j is j * target / source. When the source
    // spacing is an integer multiple of the target spacing, divide by that
    // integer so that every source node is hit exactly.
    const double ratio = dem.resolution() / target_resolution;
    const bool integral_ratio = ratio >= 1.0 && std::fabs(ratio - std::round(ratio)) < 1e-9;
    const double ratio_used = integral_ratio ? std::round(ratio) : ratio;
    const double inv_step = target_resolution / dem.resolution();

    const int w = dem.width(), h = dem.height();
    const auto ow = static_cast<std::size_t>(out_w), oh = static_cast<std::size_t>(out_h);
    std::vector<double> src(dem.elevations().begin(), dem.elevations().end());
    std::vector<double> rows(ow * static_cast<std::size_t>(h));
    for (int y = 0; y < h; ++y) {
        resample_line(src.data() + static_cast<std::size_t>(y) * w, w, 1, rows.data() + y * ow, out_w, 1,
                      ratio_used, integral_ratio, inv_step);
    }
    std::vector<double> full(ow * oh);
    for (std::size_t x = 0; x < ow; ++x) {
        resample_line(rows.data() + x, h, ow, full.data() + x, out_h, ow, ratio_used, integral_ratio,
                      inv_step);
    }
    std::vector<float> out(full.size());
    std::transform(full.begin(), full.end(), out.begin(), [](double v) { return static_cast<float>(v); });
    return Dem(static_cast<int>(out_w), static_cast<int>(out_h), target_resolution, std::move(out));
}

}  // namespace lunaforge
