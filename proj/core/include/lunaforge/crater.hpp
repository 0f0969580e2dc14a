#pragma once
// Crater synthesis: radial profile library, spline fitting and elevation
// stamps.
//
// A profile h(u) gives the elevation offset (in crater radii) at normalized
// distance u (in crater radii) from the center, over u in [0, u_max]. A stamp
// for a crater of radius N covers a square of side 4N meters and evaluates
//
//   u      = d / N * (1 + sum_k a_k * sin(f_k * (theta - rotation) + phase_k))
//   offset = N * h(u)          (0 for u >= u_max)
//
// for every cell at distance d and bearing theta from the crater center.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lunaforge/dem.hpp"

namespace lunaforge {

inline constexpr double kDefaultProfileSupport = 2.0;

/// Natural cubic spline (zero second derivative at both ends).
class CubicSpline {
public:
    CubicSpline() = default;
    CubicSpline(std::span<const double> x, std::span<const double> y);

    /// Value at x; x is clamped into the knot range.
    double operator()(double x) const noexcept;
    double derivative(double x) const noexcept;
    /// out[i] = (*this)(x[i]); both spans have the same length.
    void evaluate(std::span<const double> x, std::span<double> out) const noexcept;

    double x_min() const noexcept { return x_.front(); }
    double x_max() const noexcept { return x_.back(); }
    std::size_t knot_count() const noexcept { return x_.size(); }

private:
    std::size_t interval(double x) const noexcept;

    std::vector<double> x_;
    // Per interval: s(t) = a + t * (b + t * (c + t * d)), t = x - x_i.
    std::vector<double> a_, b_, c_, d_;
    bool uniform_ = false;
    double inv_step_ = 0.0;
};

struct ProfileSample {
    double u = 0.0;
    double h = 0.0;
};

class CraterProfile {
public:
    /// Fits a natural spline through the samples. Requires u[0] = 0, strictly
    /// ascending u, at least 4 samples, |h(u_max)| <= 1e-3 (snapped to 0) and
    /// a flat end |h'(u_max)| <= 1e-6. Throws Error(validation) otherwise.
    static CraterProfile fit(std::vector<ProfileSample> samples);

    /// Elevation offset in radii; exactly 0 for u >= u_max.
    double operator()(double u) const noexcept { return u >= u_max_ ? 0.0 : spline_(u < 0.0 ? 0.0 : u); }

    /// out[i] = (*this)(u[i]).
    void evaluate(std::span<const double> u, std::span<double> out) const noexcept;
    double u_max() const noexcept { return u_max_; }
    const std::vector<ProfileSample>& samples() const noexcept { return samples_; }
    const CubicSpline& spline() const noexcept { return spline_; }

private:
    std::vector<ProfileSample> samples_;
    CubicSpline spline_;
    double u_max_ = kDefaultProfileSupport;
};

using ProfileLibrary = std::vector<CraterProfile>;

struct SmoothingOptions {
    int window = 5;
    int degree = 2;
    double u_max = kDefaultProfileSupport;
};

/// Moving least-squares polynomial smoothing (Savitzky-Golay). Near the ends
/// the window keeps its length and slides inward so every output comes from
/// a full-length fit. u values are kept; only h is smoothed.
std::vector<ProfileSample> smooth_profile(std::span<const ProfileSample> samples, int window, int degree);

/// Parses the profile CSV format: one `u,h` pair per line, profiles separated
/// by blank lines, `#` starts a comment. Each profile is rescaled so its last
/// u equals options.u_max (h scaled by the same factor), smoothed and fitted.
ProfileLibrary parse_profiles(std::string_view csv, const SmoothingOptions& options = {});
ProfileLibrary load_profiles(const std::filesystem::path& path, const SmoothingOptions& options = {});

/// CSV text of the bundled analytic library (16 profiles x 64 knots).
const std::string& builtin_profile_csv();
const ProfileLibrary& builtin_profiles();

struct Distortion {
    double amplitude = 0.0;
    int frequency = 1;
    double phase = 0.0;

    friend bool operator==(const Distortion&, const Distortion&) = default;
};

struct CraterSpec {
    double center_x = 0.0;
    double center_y = 0.0;
    double radius = 1.0;
    double rotation = 0.0;
    std::vector<Distortion> distortion;
    std::size_t profile_index = 0;

    friend bool operator==(const CraterSpec&, const CraterSpec&) = default;
};

/// Throws Error(invalid_argument) when radius <= 0 or sum|amplitude| >= 1.
void validate_crater(const CraterSpec& spec);

struct CraterStamp {
    /// Signed offsets in meters; same resolution as the target terrain.
    Dem offsets;
    /// Terrain cell index of stamp cell (0, 0).
    int origin_x = 0;
    int origin_y = 0;

    /// Lower-left corner of the stamp footprint in terrain meters.
    double anchor_x() const noexcept { return (origin_x - 0.5) * offsets.resolution(); }
    double anchor_y() const noexcept { return (origin_y - 0.5) * offsets.resolution(); }
};

/// Stamp side in pixels: max(2, round(4 * radius / resolution)).
std::int64_t stamp_side(double radius, double resolution);

CraterStamp make_stamp(const CraterSpec& spec, const CraterProfile& profile, double resolution,
                       std::size_t pixel_budget = kDefaultPixelBudget);

/// Adds the stamp offsets into the overlapping part of the DEM; the rest of
/// the stamp is clipped. Hole cells are left untouched.
void stamp_into(Dem& dem, const CraterStamp& stamp);
Dem stamp_into(const Dem& dem, const CraterStamp& stamp);

}  // namespace lunaforge
