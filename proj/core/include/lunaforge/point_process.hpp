#pragma once
// Seeded spatial point processes over rectangles, disks and density masks.
//
// Every sampler takes its RngStream by value: the caller's stream is never
// advanced, and identical arguments always give the identical PointSet.

#include <array>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <variant>
#include <vector>

#include "lunaforge/rng.hpp"

namespace lunaforge {

struct Point2 {
    double x = 0.0;
    double y = 0.0;

    friend bool operator==(const Point2&, const Point2&) = default;
};

struct PointSet {
    std::vector<Point2> points;
    /// Empty, or one mark per point (crater radius, exclusion radius, ...).
    std::vector<double> marks;

    std::size_t size() const noexcept { return points.size(); }
    bool empty() const noexcept { return points.empty(); }
    friend bool operator==(const PointSet&, const PointSet&) = default;
};

/// [0, width] x [0, height].
struct RectangleDomain {
    double width = 0.0;
    double height = 0.0;
};

/// Disk of the given radius centered on the origin.
struct DiskDomain {
    double radius = 0.0;
};

/// Grid of non-negative relative intensities; cell (i, j) is centered at
/// (i * resolution, j * resolution) and covers +/- resolution / 2.
struct DensityMaskDomain {
    int width = 0;
    int height = 0;
    double resolution = 1.0;
    std::vector<double> weights;
};

class SampleDomain {
public:
    static SampleDomain rectangle(double width, double height);
    static SampleDomain disk(double radius);
    static SampleDomain density_mask(DensityMaskDomain mask);

    bool contains(Point2 p) const noexcept;
    /// Integral of the intensity multiplier over the domain, in m^2. Equals
    /// the geometric area for rectangles and disks.
    double measure() const noexcept;
    /// Axis-aligned bounds: {min_x, min_y, max_x, max_y}.
    std::array<double, 4> bounds() const noexcept;
    /// One location drawn from the (weighted) uniform distribution.
    Point2 sample(RngStream& rng) const;

    const auto& shape() const noexcept { return shape_; }

private:
    struct AliasTable {
        std::vector<double> probability;
        std::vector<std::uint32_t> alias;
    };

    std::variant<RectangleDomain, DiskDomain, DensityMaskDomain> shape_;
    std::shared_ptr<const AliasTable> alias_;
    double mask_measure_ = 0.0;
};

enum class HardcoreMode {
    fixed,     // minimum distance r_min between every pair
    per_mark,  // minimum distance mark_i + mark_j, marks uniform in [r_min, r_max]
};

struct HardcoreParams {
    double r_min = 1.0;
    double r_max = 1.0;
    HardcoreMode mode = HardcoreMode::fixed;
    int max_attempts = 100;
};

PointSet sample_poisson(const SampleDomain& domain, double intensity, RngStream rng);

/// Dart throwing. The target count is Poisson(intensity * measure); each
/// point gets up to max_attempts candidate positions. In per-mark mode
/// points are inserted largest mark first and the returned marks are in
/// insertion order. Under-fill is reported only through the returned size.
PointSet sample_hardcore_poisson(const SampleDomain& domain, double intensity, const HardcoreParams& params,
                                 RngStream rng);

struct ClusterSample {
    PointSet children;
    std::vector<Point2> parents;
    /// For each child, the index of its parent.
    std::vector<std::size_t> parent_of;
};

ClusterSample sample_thomas_clusters(const SampleDomain& domain, double parent_intensity, double mean_offspring,
                                     double sigma, RngStream rng);
ClusterSample sample_matern_clusters(const SampleDomain& domain, double parent_intensity, double mean_offspring,
                                     double cluster_radius, RngStream rng);

/// Children only; offspring that fall outside the domain are dropped.
PointSet sample_thomas(const SampleDomain& domain, double parent_intensity, double mean_offspring, double sigma,
                       RngStream rng);
PointSet sample_matern(const SampleDomain& domain, double parent_intensity, double mean_offspring,
                       double cluster_radius, RngStream rng);

PointSet sample_uniform(const SampleDomain& domain, std::size_t count, RngStream rng);

/// Isotropic normal, rejecting draws outside the domain. Throws
/// Error(budget_exceeded) when a point needs more than max_attempts_per_point.
PointSet sample_normal(const SampleDomain& domain, std::size_t count, Point2 mean, double sigma, RngStream rng,
                       std::size_t max_attempts_per_point = 10000);

}  // namespace lunaforge
