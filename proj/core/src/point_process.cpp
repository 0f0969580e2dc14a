#include "lunaforge/point_process.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "lunaforge/error.hpp"

namespace lunaforge {
namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void require(bool ok, const std::string& what) {
    if (!ok) fail(ErrorKind::invalid_argument, what);
}

// Uniform grid over the domain bounds holding indices of accepted points.
class NeighborGrid {
public:
    NeighborGrid(const std::array<double, 4>& bounds, double cell) : min_x_(bounds[0]), min_y_(bounds[1]) {
        const double w = std::max(bounds[2] - bounds[0], 1e-12);
        const double h = std::max(bounds[3] - bounds[1], 1e-12);
        // Keep the table at a few million buckets at most.
        cell = std::max(cell, std::sqrt(w * h / 4.0e6));
        cell_ = cell;
        nx_ = std::max(1, static_cast<int>(std::ceil(w / cell)));
        ny_ = std::max(1, static_cast<int>(std::ceil(h / cell)));
        buckets_.resize(static_cast<std::size_t>(nx_) * static_cast<std::size_t>(ny_));
    }

    void insert(Point2 p, std::size_t index) { buckets_[bucket(cx(p.x), cy(p.y))].push_back(index); }

    template <typename Fn>
    bool any_within(Point2 p, double reach, Fn&& conflicts) const {
        const int x0 = cx(p.x - reach), x1 = cx(p.x + reach);
        const int y0 = cy(p.y - reach), y1 = cy(p.y + reach);
        for (int y = y0; y <= y1; ++y) {
            for (int x = x0; x <= x1; ++x) {
                for (std::size_t idx : buckets_[bucket(x, y)]) {
                    if (conflicts(idx)) return true;
                }
            }
        }
        return false;
    }

private:
    int cx(double x) const { return std::clamp(static_cast<int>(std::floor((x - min_x_) / cell_)), 0, nx_ - 1); }
    int cy(double y) const { return std::clamp(static_cast<int>(std::floor((y - min_y_) / cell_)), 0, ny_ - 1); }
    std::size_t bucket(int x, int y) const { return static_cast<std::size_t>(y) * nx_ + x; }

    double min_x_, min_y_, cell_ = 1.0;
    int nx_ = 1, ny_ = 1;
    std::vector<std::vector<std::size_t>> buckets_;
};

void poisson_into(const SampleDomain& domain, double intensity, RngStream& rng, PointSet& out) {
    const std::uint64_t n = rng.poisson(intensity * domain.measure());
    out.points.reserve(out.points.size() + n);
    for (std::uint64_t i = 0; i < n; ++i) out.points.push_back(domain.sample(rng));
}

void check_cluster_args(double parent_intensity, double mean_offspring, double spread, const char* name) {
    require(parent_intensity >= 0.0 && std::isfinite(parent_intensity), "parent intensity must be >= 0");
    require(mean_offspring >= 0.0 && std::isfinite(mean_offspring), "mean offspring must be >= 0");
    require(spread > 0.0 && std::isfinite(spread), std::string(name) + " must be > 0");
}

template <typename Scatter>
ClusterSample sample_clusters(const SampleDomain& domain, double parent_intensity, double mean_offspring,
                              RngStream& rng, Scatter&& scatter) {
    ClusterSample out;
    PointSet parents;
    poisson_into(domain, parent_intensity, rng, parents);
    out.parents = std::move(parents.points);
    for (std::size_t p = 0; p < out.parents.size(); ++p) {
        const std::uint64_t n = rng.poisson(mean_offspring);
        for (std::uint64_t c = 0; c < n; ++c) {
            const Point2 child = scatter(out.parents[p], rng);
            if (!domain.contains(child)) continue;
            out.children.points.push_back(child);
            out.parent_of.push_back(p);
        }
    }
    return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// SampleDomain

SampleDomain SampleDomain::rectangle(double width, double height) {
    require(width > 0.0 && height > 0.0 && std::isfinite(width) && std::isfinite(height),
            "rectangle domain needs positive width and height");
    SampleDomain d;
    d.shape_ = RectangleDomain{width, height};
    return d;
}

SampleDomain SampleDomain::disk(double radius) {
    require(radius > 0.0 && std::isfinite(radius), "disk domain needs a positive radius");
    SampleDomain d;
    d.shape_ = DiskDomain{radius};
    return d;
}

SampleDomain SampleDomain::density_mask(DensityMaskDomain mask) {
    require(mask.width >= 1 && mask.height >= 1, "density mask needs positive dimensions");
    require(mask.resolution > 0.0 && std::isfinite(mask.resolution), "density mask needs a positive resolution");
    const std::size_t n = static_cast<std::size_t>(mask.width) * static_cast<std::size_t>(mask.height);
    require(mask.weights.size() == n, "density mask weight count does not match its dimensions");
    require(n <= 0xFFFFFFFFu, "density mask too large");
    double total = 0.0;
    for (double w : mask.weights) {
        require(w >= 0.0 && std::isfinite(w), "density mask weights must be finite and >= 0");
        total += w;
    }
    require(total > 0.0, "density mask needs at least one positive weight");

    // Vose's alias method.
    auto table = std::make_shared<AliasTable>();
    table->probability.resize(n);
    table->alias.resize(n);
    std::vector<double> scaled(n);
    std::vector<std::uint32_t> small, large;
    for (std::size_t i = 0; i < n; ++i) {
        scaled[i] = mask.weights[i] * static_cast<double>(n) / total;
        (scaled[i] < 1.0 ? small : large).push_back(static_cast<std::uint32_t>(i));
    }
    while (!small.empty() && !large.empty()) {
        const std::uint32_t s = small.back(), l = large.back();
        small.pop_back();
        table->probability[s] = scaled[s];
        table->alias[s] = l;
        scaled[l] = (scaled[l] + scaled[s]) - 1.0;
        if (scaled[l] < 1.0) {
            large.pop_back();
            small.push_back(l);
        }
    }
    for (std::uint32_t i : large) {
        table->probability[i] = 1.0;
        table->alias[i] = i;
    }
    // Leftovers in `small` only come from rounding and sit at ~1.
    for (std::uint32_t i : small) {
        table->probability[i] = 1.0;
        table->alias[i] = i;
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (mask.weights[i] <= 0.0 && table->probability[i] > 0.0) {
            fail(ErrorKind::invalid_argument, "density mask weights span too many orders of magnitude");
        }
    }

    SampleDomain d;
    d.mask_measure_ = total * mask.resolution * mask.resolution;
    d.shape_ = std::move(mask);
    d.alias_ = std::move(table);
    return d;
}

bool SampleDomain::contains(Point2 p) const noexcept {
    return std::visit(overloaded{
                          [&](const RectangleDomain& r) {
                              return p.x >= 0.0 && p.x <= r.width && p.y >= 0.0 && p.y <= r.height;
                          },
                          [&](const DiskDomain& d) { return p.x * p.x + p.y * p.y <= d.radius * d.radius; },
                          [&](const DensityMaskDomain& m) {
                              const double fx = std::floor(p.x / m.resolution + 0.5);
                              const double fy = std::floor(p.y / m.resolution + 0.5);
                              if (!(fx >= 0.0 && fy >= 0.0 && fx < m.width && fy < m.height)) return false;
                              const auto i = static_cast<std::size_t>(fy) * m.width + static_cast<std::size_t>(fx);
                              return m.weights[i] > 0.0;
                          },
                      },
                      shape_);
}

double SampleDomain::measure() const noexcept {
    return std::visit(overloaded{
                          [](const RectangleDomain& r) { return r.width * r.height; },
                          [](const DiskDomain& d) { return 0.5 * kTwoPi * d.radius * d.radius; },
                          [this](const DensityMaskDomain&) { return mask_measure_; },
                      },
                      shape_);
}

std::array<double, 4> SampleDomain::bounds() const noexcept {
    return std::visit(overloaded{
                          [](const RectangleDomain& r) { return std::array<double, 4>{0.0, 0.0, r.width, r.height}; },
                          [](const DiskDomain& d) {
                              return std::array<double, 4>{-d.radius, -d.radius, d.radius, d.radius};
                          },
                          [](const DensityMaskDomain& m) {
                              return std::array<double, 4>{-0.5 * m.resolution, -0.5 * m.resolution,
                                                           (m.width - 0.5) * m.resolution,
                                                           (m.height - 0.5) * m.resolution};
                          },
                      },
                      shape_);
}

Point2 SampleDomain::sample(RngStream& rng) const {
    return std::visit(overloaded{
                          [&](const RectangleDomain& r) {
                              const double x = r.width * rng.uniform01();
                              const double y = r.height * rng.uniform01();
                              return Point2{x, y};
                          },
                          [&](const DiskDomain& d) {
                              for (;;) {
                                  const double x = d.radius * (2.0 * rng.uniform01() - 1.0);
                                  const double y = d.radius * (2.0 * rng.uniform01() - 1.0);
                                  if (x * x + y * y <= d.radius * d.radius) return Point2{x, y};
                              }
                          },
                          [&](const DensityMaskDomain& m) {
                              const auto n = alias_->probability.size();
                              std::size_t cell = rng.uniform_index(n);
                              if (rng.uniform01() >= alias_->probability[cell]) cell = alias_->alias[cell];
                              const auto i = static_cast<double>(cell % static_cast<std::size_t>(m.width));
                              const auto j = static_cast<double>(cell / static_cast<std::size_t>(m.width));
                              const double x = (i - 0.5 + rng.uniform01_open()) * m.resolution;
                              const double y = (j - 0.5 + rng.uniform01_open()) * m.resolution;
                              return Point2{x, y};
                          },
                      },
                      shape_);
}

// ---------------------------------------------------------------------------
// Samplers

PointSet sample_poisson(const SampleDomain& domain, double intensity, RngStream rng) {
    require(intensity >= 0.0 && std::isfinite(intensity), "Poisson intensity must be >= 0");
    PointSet out;
    poisson_into(domain, intensity, rng, out);
    return out;
}

PointSet sample_hardcore_poisson(const SampleDomain& domain, double intensity, const HardcoreParams& params,
                                 RngStream rng) {
    require(intensity >= 0.0 && std::isfinite(intensity), "hardcore intensity must be >= 0");
    require(params.r_min > 0.0 && std::isfinite(params.r_min), "hardcore r_min must be > 0");
    require(params.max_attempts >= 1, "hardcore max_attempts must be >= 1");
    const bool per_mark = params.mode == HardcoreMode::per_mark;
    if (per_mark) {
        require(params.r_max >= params.r_min && std::isfinite(params.r_max), "hardcore r_max must be >= r_min");
    }

    const std::uint64_t target = rng.poisson(intensity * domain.measure());
    std::vector<double> marks;
    if (per_mark) {
        marks.resize(target);
        for (auto& m : marks) m = rng.uniform(params.r_min, params.r_max);
        std::stable_sort(marks.begin(), marks.end(), std::greater<>());
    }

    PointSet out;
    const double max_mark = per_mark ? params.r_max : 0.0;
    NeighborGrid grid(domain.bounds(), per_mark ? 2.0 * params.r_max : params.r_min);
    for (std::uint64_t i = 0; i < target; ++i) {
        const double mark = per_mark ? marks[i] : 0.0;
        const double reach = per_mark ? mark + max_mark : params.r_min;
        for (int attempt = 0; attempt < params.max_attempts; ++attempt) {
            const Point2 c = domain.sample(rng);
            const bool blocked = grid.any_within(c, reach, [&](std::size_t idx) {
                const double dx = out.points[idx].x - c.x, dy = out.points[idx].y - c.y;
                const double need = per_mark ? mark + out.marks[idx] : params.r_min;
                return dx * dx + dy * dy < need * need;
            });
            if (blocked) continue;
            grid.insert(c, out.points.size());
            out.points.push_back(c);
            if (per_mark) out.marks.push_back(mark);
            break;
        }
    }
    return out;
}

ClusterSample sample_thomas_clusters(const SampleDomain& domain, double parent_intensity, double mean_offspring,
                                     double sigma, RngStream rng) {
    check_cluster_args(parent_intensity, mean_offspring, sigma, "Thomas sigma");
    return sample_clusters(domain, parent_intensity, mean_offspring, rng, [sigma](Point2 parent, RngStream& r) {
        const double dx = r.normal(0.0, sigma);
        const double dy = r.normal(0.0, sigma);
        return Point2{parent.x + dx, parent.y + dy};
    });
}

ClusterSample sample_matern_clusters(const SampleDomain& domain, double parent_intensity, double mean_offspring,
                                     double cluster_radius, RngStream rng) {
    check_cluster_args(parent_intensity, mean_offspring, cluster_radius, "Matern cluster radius");
    return sample_clusters(domain, parent_intensity, mean_offspring, rng,
                           [cluster_radius](Point2 parent, RngStream& r) {
                               for (;;) {
                                   const double dx = cluster_radius * (2.0 * r.uniform01() - 1.0);
                                   const double dy = cluster_radius * (2.0 * r.uniform01() - 1.0);
                                   if (dx * dx + dy * dy <= cluster_radius * cluster_radius) {
                                       return Point2{parent.x + dx, parent.y + dy};
                                   }
                               }
                           });
}

PointSet sample_thomas(const SampleDomain& domain, double parent_intensity, double mean_offspring, double sigma,
                       RngStream rng) {
    return sample_thomas_clusters(domain, parent_intensity, mean_offspring, sigma, rng).children;
}

PointSet sample_matern(const SampleDomain& domain, double parent_intensity, double mean_offspring,
                       double cluster_radius, RngStream rng) {
    return sample_matern_clusters(domain, parent_intensity, mean_offspring, cluster_radius, rng).children;
}

PointSet sample_uniform(const SampleDomain& domain, std::size_t count, RngStream rng) {
    PointSet out;
    out.points.reserve(count);
    for (std::size_t i = 0; i < count; ++i) out.points.push_back(domain.sample(rng));
    return out;
}

PointSet sample_normal(const SampleDomain& domain, std::size_t count, Point2 mean, double sigma, RngStream rng,
                       std::size_t max_attempts_per_point) {
    require(sigma > 0.0 && std::isfinite(sigma), "normal sigma must be > 0");
    require(max_attempts_per_point >= 1, "normal sampler needs at least one attempt per point");
    PointSet out;
    out.points.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        std::size_t attempt = 0;
        for (;; ++attempt) {
            if (attempt == max_attempts_per_point) {
                fail(ErrorKind::budget_exceeded,
                     "normal sampler exceeded " + std::to_string(max_attempts_per_point) +
                         " attempts for one point; is the mean outside the domain?");
            }
            const Point2 p{rng.normal(mean.x, sigma), rng.normal(mean.y, sigma)};
            if (domain.contains(p)) {
                out.points.push_back(p);
                break;
            }
        }
    }
    return out;
}

}  // namespace lunaforge
