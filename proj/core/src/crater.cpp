#include "lunaforge/crater.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <sstream>

#include "lunaforge/error.hpp"
#include "lunaforge/text_io.hpp"

// Hot loops get an AVX2 clone picked at load time. Contraction is disabled
// for the library, so every clone rounds identically.
#if defined(__x86_64__) && defined(__has_attribute)
#if __has_attribute(target_clones) && !defined(__clang__)
#define LUNAFORGE_SIMD_CLONES __attribute__((target_clones("avx2", "default")))
#endif
#endif
#ifndef LUNAFORGE_SIMD_CLONES
#define LUNAFORGE_SIMD_CLONES
#endif

#if defined(__x86_64__) && (defined(__GNUC__) || defined(__clang__))
#define LUNAFORGE_X86_GATHER 1
#include <immintrin.h>
#endif

namespace lunaforge {

// ---------------------------------------------------------------------------
// CubicSpline

CubicSpline::CubicSpline(std::span<const double> x, std::span<const double> y) : x_(x.begin(), x.end()) {
    const std::size_t n = x.size();
    if (n < 2 || y.size() != n) fail(ErrorKind::invalid_argument, "spline needs >= 2 matching knots");
    for (std::size_t i = 1; i < n; ++i) {
        if (!(x[i] > x[i - 1])) fail(ErrorKind::validation, "spline knots must be strictly ascending");
    }

    // Second derivatives M at the knots; natural ends M_0 = M_{n-1} = 0.
    std::vector<double> m(n, 0.0);
    if (n > 2) {
        const std::size_t k = n - 2;
        std::vector<double> diag(k), upper(k), rhs(k);
        for (std::size_t i = 1; i + 1 < n; ++i) {
            const double h0 = x[i] - x[i - 1], h1 = x[i + 1] - x[i];
            diag[i - 1] = 2.0 * (h0 + h1);
            upper[i - 1] = h1;
            rhs[i - 1] = 6.0 * ((y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0);
        }
        // Thomas algorithm; the sub-diagonal entry of row r is x[r+1] - x[r].
        for (std::size_t r = 1; r < k; ++r) {
            const double sub = x[r + 1] - x[r];
            const double f = sub / diag[r - 1];
            diag[r] -= f * upper[r - 1];
            rhs[r] -= f * rhs[r - 1];
        }
        m[k] = rhs[k - 1] / diag[k - 1];
        for (std::size_t r = k - 1; r-- > 0;) m[r + 1] = (rhs[r] - upper[r] * m[r + 2]) / diag[r];
    }

    a_.resize(n - 1);
    b_.resize(n - 1);
    c_.resize(n - 1);
    d_.resize(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double h = x[i + 1] - x[i];
        a_[i] = y[i];
        b_[i] = (y[i + 1] - y[i]) / h - h * (2.0 * m[i] + m[i + 1]) / 6.0;
        c_[i] = 0.5 * m[i];
        d_[i] = (m[i + 1] - m[i]) / (6.0 * h);
    }

    const double step = (x_.back() - x_.front()) / static_cast<double>(n - 1);
    uniform_ = true;
    for (std::size_t i = 0; i < n && uniform_; ++i) {
        uniform_ = std::fabs(x_[i] - (x_.front() + step * static_cast<double>(i))) <= 1e-9 * step;
    }
    inv_step_ = 1.0 / step;
}

std::size_t CubicSpline::interval(double x) const noexcept {
    const std::size_t last = x_.size() - 2;
    if (uniform_) {
        // x is already clamped, so g lies in [0, n - 1]. Rounding can put x a
        // hair outside the chosen interval; the cubic pieces agree there.
        const double g = (x - x_.front()) * inv_step_;
        const auto i = static_cast<std::size_t>(static_cast<std::int32_t>(g));
        return i < last ? i : last;
    }
    const auto it = std::upper_bound(x_.begin(), x_.end(), x);
    const auto i = static_cast<std::size_t>(std::max<std::ptrdiff_t>(0, (it - x_.begin()) - 1));
    return std::min(i, last);
}

double CubicSpline::operator()(double x) const noexcept {
    x = std::clamp(x, x_.front(), x_.back());
    const std::size_t i = interval(x);
    const double t = x - x_[i];
    return a_[i] + t * (b_[i] + t * (c_[i] + t * d_[i]));
}

namespace {

struct Coefficients {
    const double *x, *a, *b, *c, *d;
};

// dst[k] = a + t * (b + t * (c + t * d)) with t = v[k] - x, coefficients of
// interval idx[k]. Returns how many leading entries were done.
#ifdef LUNAFORGE_X86_GATHER
__attribute__((target("avx2"))) std::size_t horner_gather_avx2(const double* v, const std::int32_t* idx,
                                                                std::size_t n, Coefficients co, double* dst) {
    std::size_t k = 0;
    for (; k + 4 <= n; k += 4) {
        const __m128i i = _mm_loadu_si128(reinterpret_cast<const __m128i*>(idx + k));
        const __m256d t = _mm256_sub_pd(_mm256_loadu_pd(v + k), _mm256_i32gather_pd(co.x, i, 8));
        __m256d r = _mm256_mul_pd(t, _mm256_i32gather_pd(co.d, i, 8));
        r = _mm256_mul_pd(t, _mm256_add_pd(_mm256_i32gather_pd(co.c, i, 8), r));
        r = _mm256_mul_pd(t, _mm256_add_pd(_mm256_i32gather_pd(co.b, i, 8), r));
        r = _mm256_add_pd(_mm256_i32gather_pd(co.a, i, 8), r);
        _mm256_storeu_pd(dst + k, r);
    }
    return k;
}

const bool kHasAvx2 = __builtin_cpu_supports("avx2");
#endif

std::size_t horner_gather(const double* v, const std::int32_t* idx, std::size_t n, Coefficients co, double* dst) {
#ifdef LUNAFORGE_X86_GATHER
    if (kHasAvx2) return horner_gather_avx2(v, idx, n, co, dst);
#else
    (void)v, (void)idx, (void)n, (void)co, (void)dst;
#endif
    return 0;
}

}  // namespace

LUNAFORGE_SIMD_CLONES
void CubicSpline::evaluate(std::span<const double> x, std::span<double> out) const noexcept {
    if (!uniform_) {
        for (std::size_t k = 0; k < x.size(); ++k) out[k] = (*this)(x[k]);
        return;
    }
    const double lo = x_.front(), hi = x_.back(), inv_step = inv_step_;
    const std::int32_t last = static_cast<std::int32_t>(a_.size()) - 1;
    const double *xs = x_.data(), *as = a_.data(), *bs = b_.data(), *cs = c_.data(), *ds = d_.data();
    constexpr std::size_t kChunk = 256;
    double v[kChunk];
    std::int32_t idx[kChunk];
    for (std::size_t base = 0; base < x.size(); base += kChunk) {
        const std::size_t n = std::min(kChunk, x.size() - base);
        const double* in = x.data() + base;
        double* dst = out.data() + base;
        // Interval lookup first (vectorizes), then the gathered Horner step.
        for (std::size_t k = 0; k < n; ++k) {
            const double c = std::min(std::max(in[k], lo), hi);
            const auto i = static_cast<std::int32_t>((c - lo) * inv_step);
            v[k] = c;
            idx[k] = i < last ? i : last;
        }
        const std::size_t done = horner_gather(v, idx, n, {xs, as, bs, cs, ds}, dst);
        for (std::size_t k = done; k < n; ++k) {
            const std::int32_t i = idx[k];
            const double t = v[k] - xs[i];
            dst[k] = as[i] + t * (bs[i] + t * (cs[i] + t * ds[i]));
        }
    }
}

double CubicSpline::derivative(double x) const noexcept {
    x = std::clamp(x, x_.front(), x_.back());
    const std::size_t i = interval(x);
    const double t = x - x_[i];
    return b_[i] + t * (2.0 * c_[i] + 3.0 * t * d_[i]);
}

// ---------------------------------------------------------------------------
// CraterProfile

void CraterProfile::evaluate(std::span<const double> u, std::span<double> out) const noexcept {
    spline_.evaluate(u, out);
    for (std::size_t k = 0; k < u.size(); ++k) {
        if (u[k] >= u_max_) out[k] = 0.0;
    }
}

CraterProfile CraterProfile::fit(std::vector<ProfileSample> samples) {
    if (samples.size() < 4) fail(ErrorKind::validation, "crater profile needs at least 4 samples");
    if (samples.front().u != 0.0) fail(ErrorKind::validation, "crater profile must start at u = 0");
    for (std::size_t i = 1; i < samples.size(); ++i) {
        if (!(samples[i].u > samples[i - 1].u)) {
            fail(ErrorKind::validation, "crater profile u values must be strictly ascending (sample " +
                                            std::to_string(i) + ")");
        }
    }
    for (const auto& s : samples) {
        if (!std::isfinite(s.u) || !std::isfinite(s.h)) fail(ErrorKind::validation, "non-finite profile sample");
    }
    if (std::fabs(samples.back().h) > 1e-3) {
        fail(ErrorKind::validation, "crater profile must return to 0 at u_max (h = " +
                                        format_double(samples.back().h) + ")");
    }
    samples.back().h = 0.0;

    std::vector<double> u(samples.size()), h(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        u[i] = samples[i].u;
        h[i] = samples[i].h;
    }
    CraterProfile p;
    p.spline_ = CubicSpline(u, h);
    p.u_max_ = u.back();
    const double slope = p.spline_.derivative(p.u_max_);
    if (std::fabs(slope) > 1e-6) {
        fail(ErrorKind::validation, "crater profile must be flat at u_max (h' = " + format_double(slope) + ")");
    }
    p.samples_ = std::move(samples);
    return p;
}

// ---------------------------------------------------------------------------
// Smoothing

namespace {

// Solves the (dense, small) normal equations in place; returns false if singular.
bool solve_dense(std::vector<std::vector<double>>& a, std::vector<double>& b) {
    const std::size_t n = b.size();
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < n; ++r) {
            if (std::fabs(a[r][col]) > std::fabs(a[piv][col])) piv = r;
        }
        if (std::fabs(a[piv][col]) < 1e-300) return false;
        std::swap(a[piv], a[col]);
        std::swap(b[piv], b[col]);
        for (std::size_t r = col + 1; r < n; ++r) {
            const double f = a[r][col] / a[col][col];
            for (std::size_t c = col; c < n; ++c) a[r][c] -= f * a[col][c];
            b[r] -= f * b[col];
        }
    }
    for (std::size_t i = n; i-- > 0;) {
        double s = b[i];
        for (std::size_t c = i + 1; c < n; ++c) s -= a[i][c] * b[c];
        b[i] = s / a[i][i];
    }
    return true;
}

}  // namespace

std::vector<ProfileSample> smooth_profile(std::span<const ProfileSample> samples, int window, int degree) {
    if (window < 1 || window % 2 == 0) {
        fail(ErrorKind::invalid_argument, "smoothing window must be a positive odd integer, got " +
                                              std::to_string(window));
    }
    if (degree < 0 || degree >= window) {
        fail(ErrorKind::invalid_argument, "smoothing degree must be in [0, window), got " + std::to_string(degree));
    }
    if (samples.size() < static_cast<std::size_t>(window)) {
        fail(ErrorKind::invalid_argument, "smoothing needs at least `window` samples");
    }
    const std::size_t n = samples.size();
    const auto w = static_cast<std::size_t>(window);
    const std::size_t half = w / 2;
    const std::size_t terms = static_cast<std::size_t>(degree) + 1;

    std::vector<ProfileSample> out(samples.begin(), samples.end());
    std::vector<std::vector<double>> ata(terms, std::vector<double>(terms));
    std::vector<double> atb(terms), phi(terms);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t start = std::min(i >= half ? i - half : 0, n - w);
        const double scale = std::max(samples[start + w - 1].u - samples[start].u, 1e-300);
        for (auto& row : ata) std::fill(row.begin(), row.end(), 0.0);
        std::fill(atb.begin(), atb.end(), 0.0);
        for (std::size_t k = start; k < start + w; ++k) {
            const double t = (samples[k].u - samples[i].u) / scale;
            phi[0] = 1.0;
            for (std::size_t p = 1; p < terms; ++p) phi[p] = phi[p - 1] * t;
            for (std::size_t r = 0; r < terms; ++r) {
                atb[r] += phi[r] * samples[k].h;
                for (std::size_t c = 0; c < terms; ++c) ata[r][c] += phi[r] * phi[c];
            }
        }
        if (!solve_dense(ata, atb)) fail(ErrorKind::validation, "degenerate smoothing window");
        out[i].h = atb[0];
    }
    return out;
}

// ---------------------------------------------------------------------------
// Profile CSV

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

CraterProfile build_profile(std::vector<ProfileSample> raw, const SmoothingOptions& options, std::size_t index) {
    const std::string where = "profile " + std::to_string(index);
    if (raw.size() < 4) fail(ErrorKind::validation, where + " has fewer than 4 samples");
    if (raw.front().u != 0.0) fail(ErrorKind::validation, where + " must start at u = 0");
    for (std::size_t i = 1; i < raw.size(); ++i) {
        if (!(raw[i].u > raw[i - 1].u)) fail(ErrorKind::validation, where + " has non-monotonic u at sample " + std::to_string(i));
    }
    const double scale = options.u_max / raw.back().u;
    for (auto& s : raw) {
        s.u *= scale;
        s.h *= scale;
    }
    raw.back().u = options.u_max;
    if (std::fabs(raw.back().h) > 1e-3) {
        fail(ErrorKind::validation, where + " does not return to 0 at u_max (h = " + format_double(raw.back().h) + ")");
    }
    if (raw.size() < static_cast<std::size_t>(options.window)) {
        fail(ErrorKind::validation, where + " has fewer samples than the smoothing window");
    }
    auto smoothed = options.window > 1 ? smooth_profile(raw, options.window, options.degree) : raw;
    try {
        return CraterProfile::fit(std::move(smoothed));
    } catch (const Error& e) {
        fail(ErrorKind::validation, where + ": " + e.what());
    }
}

}  // namespace

ProfileLibrary parse_profiles(std::string_view csv, const SmoothingOptions& options) {
    if (!(options.u_max > 0.0)) fail(ErrorKind::invalid_argument, "u_max must be positive");
    ProfileLibrary library;
    std::vector<ProfileSample> block;
    std::size_t line_no = 0;
    auto flush = [&] {
        if (block.empty()) return;
        library.push_back(build_profile(std::move(block), options, library.size()));
        block.clear();
    };
    while (true) {
        const auto nl = csv.find('\n');
        std::string_view line = csv.substr(0, nl);
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string_view::npos) {
            line = line.substr(0, hash);
            // A pure comment line does not terminate a block.
            if (trim(line).empty()) {
                if (nl == std::string_view::npos) break;
                csv = csv.substr(nl + 1);
                continue;
            }
        }
        line = trim(line);
        if (line.empty()) {
            flush();
        } else {
            const auto comma = line.find(',');
            if (comma == std::string_view::npos) {
                fail(ErrorKind::validation, "profile CSV line " + std::to_string(line_no) + " is not `u,h`");
            }
            try {
                block.push_back({parse_double(line.substr(0, comma), "u"), parse_double(line.substr(comma + 1), "h")});
            } catch (const Error& e) {
                fail(ErrorKind::validation, "profile CSV line " + std::to_string(line_no) + ": " + e.what());
            }
        }
        if (nl == std::string_view::npos) break;
        csv = csv.substr(nl + 1);
    }
    flush();
    if (library.empty()) fail(ErrorKind::validation, "profile CSV contains no profiles");
    return library;
}

ProfileLibrary load_profiles(const std::filesystem::path& path, const SmoothingOptions& options) {
    return parse_profiles(read_file(path), options);
}

// Analytic stand-in library: 4 depth levels x 4 rim heights. Depth/diameter
// runs 0.20 (fresh) to 0.10 (degraded); rim height 0.06 to 0.02 diameters.
// Interior: h = -D + (D + H) u^k; exterior: cubic falloff to 0 at u = 1.6.
const std::string& builtin_profile_csv() {
    static const std::string csv = [] {
        constexpr int kKnots = 64;
        std::string text = "# lunaforge analytic crater profiles: u,h in crater radii\n";
        for (int p = 0; p < 16; ++p) {
            const int depth_level = p / 4, rim_level = p % 4;
            const double depth_ratio = 0.20 - 0.10 * depth_level / 3.0;
            const double rim_ratio = 0.06 - 0.04 * rim_level / 3.0;
            const double depth = 2.0 * depth_ratio;  // radii
            const double rim = 2.0 * rim_ratio;
            const double exponent = 2.0 + 0.5 * depth_level;
            if (p > 0) text += "\n";
            for (int i = 0; i < kKnots; ++i) {
                const double u = 2.0 * i / (kKnots - 1);
                double h = 0.0;
                if (u <= 1.0) {
                    h = -depth + (depth + rim) * std::pow(u, exponent);
                } else if (u < 1.6) {
                    const double t = 1.0 - (u - 1.0) / 0.6;
                    h = rim * t * t * t;
                }
                text += format_double(u) + "," + format_double(h) + "\n";
            }
        }
        return text;
    }();
    return csv;
}

const ProfileLibrary& builtin_profiles() {
    static const ProfileLibrary library = parse_profiles(builtin_profile_csv());
    return library;
}

// ---------------------------------------------------------------------------
// Stamps

void validate_crater(const CraterSpec& spec) {
    if (!(spec.radius > 0.0) || !std::isfinite(spec.radius)) {
        fail(ErrorKind::invalid_argument, "crater radius must be positive");
    }
    double total = 0.0;
    for (const auto& d : spec.distortion) {
        if (d.frequency < 1 || d.frequency > 64) {
            fail(ErrorKind::invalid_argument, "distortion frequency must be in [1, 64]");
        }
        total += std::fabs(d.amplitude);
    }
    if (!(total < 1.0)) fail(ErrorKind::invalid_argument, "sum of distortion amplitudes must be < 1");
}

std::int64_t stamp_side(double radius, double resolution) {
    const double side = std::round(4.0 * radius / resolution);
    if (!(side < 9.0e15)) return std::numeric_limits<std::int64_t>::max();
    return std::max<std::int64_t>(2, static_cast<std::int64_t>(side));
}

namespace {

struct Harmonic {
    int frequency;
    double amplitude;
    double shift_re, shift_im;  // exp(i (phase - f * rotation))
};

// factor[k] = 1 + sum_h a_h * sin(f_h * theta_k + phase_h - f_h * rotation),
// theta_k the direction of (fx[k], fy) and d[k] its length. Harmonics sorted
// by frequency. inv is scratch of n floats.
#if defined(__GNUC__)
typedef float Lanes8 __attribute__((vector_size(32)));

LUNAFORGE_SIMD_CLONES
void angular_factor(const float* __restrict fx, float fy, const double* __restrict d, std::size_t n,
                    const std::vector<Harmonic>& harmonics, float* __restrict inv, float* __restrict factor) {
    // At the center fx = fy = 0, so the clamped inverse still yields 0.
    for (std::size_t k = 0; k < n; ++k) inv[k] = static_cast<float>(1.0 / (d[k] > 1e-30 ? d[k] : 1e-30));
    constexpr std::size_t kLanes = 8;
    const Lanes8 y = {fy, fy, fy, fy, fy, fy, fy, fy};
    for (std::size_t base = 0; base < n; base += kLanes) {
        const std::size_t m = std::min(kLanes, n - base);
        Lanes8 x = {}, r = {};
        if (m == kLanes) {
            std::memcpy(&x, fx + base, sizeof(x));
            std::memcpy(&r, inv + base, sizeof(r));
        } else {
            for (std::size_t l = 0; l < m; ++l) {
                x[l] = fx[base + l];
                r[l] = inv[base + l];
            }
        }
        const Lanes8 c1 = x * r, s1 = y * r;
        Lanes8 pc = c1, ps = s1, acc = {1, 1, 1, 1, 1, 1, 1, 1};
        int f = 1;
        for (const Harmonic& hm : harmonics) {
            for (; f < hm.frequency; ++f) {
                const Lanes8 re = pc * c1 - ps * s1;
                ps = pc * s1 + ps * c1;
                pc = re;
            }
            const auto sr = static_cast<float>(hm.amplitude * hm.shift_re);
            const auto si = static_cast<float>(hm.amplitude * hm.shift_im);
            acc += ps * sr + pc * si;
        }
        if (m == kLanes) {
            std::memcpy(factor + base, &acc, sizeof(acc));
        } else {
            for (std::size_t l = 0; l < m; ++l) factor[base + l] = acc[l];
        }
    }
}
#else
void angular_factor(const float* fx, float fy, const double* d, std::size_t n,
                    const std::vector<Harmonic>& harmonics, float* inv, float* factor) {
    for (std::size_t k = 0; k < n; ++k) {
        inv[k] = static_cast<float>(1.0 / std::max(d[k], 1e-30));
        const float c1 = fx[k] * inv[k], s1 = fy * inv[k];
        float pc = c1, ps = s1, acc = 1.0f;
        int f = 1;
        for (const Harmonic& hm : harmonics) {
            for (; f < hm.frequency; ++f) {
                const float re = pc * c1 - ps * s1;
                ps = pc * s1 + ps * c1;
                pc = re;
            }
            acc += ps * static_cast<float>(hm.amplitude * hm.shift_re) +
                   pc * static_cast<float>(hm.amplitude * hm.shift_im);
        }
        factor[k] = acc;
    }
}
#endif

}  // namespace

CraterStamp make_stamp(const CraterSpec& spec, const CraterProfile& profile, double resolution,
                       std::size_t pixel_budget) {
    validate_crater(spec);
    if (!(resolution > 0.0) || !std::isfinite(resolution)) {
        fail(ErrorKind::invalid_argument, "stamp resolution must be positive");
    }
    const std::int64_t n = stamp_side(spec.radius, resolution);
    if (static_cast<double>(n) * static_cast<double>(n) > static_cast<double>(pixel_budget)) {
        fail(ErrorKind::budget_exceeded, "crater stamp of radius " + format_double(spec.radius) + " m needs " +
                                             std::to_string(n) + "^2 cells, budget is " +
                                             std::to_string(pixel_budget));
    }
    const int side = static_cast<int>(n);

    CraterStamp stamp;
    stamp.origin_x = static_cast<int>(std::lround(spec.center_x / resolution - (side - 1) / 2.0));
    stamp.origin_y = static_cast<int>(std::lround(spec.center_y / resolution - (side - 1) / 2.0));
    stamp.offsets = Dem(side, side, resolution, 0.0f);

    std::vector<Harmonic> harmonics;
    double total_amp = 0.0;
    for (const auto& d : spec.distortion) {
        if (d.amplitude == 0.0) continue;
        const double shift = d.phase - d.frequency * spec.rotation;
        harmonics.push_back({d.frequency, d.amplitude, std::cos(shift), std::sin(shift)});
        total_amp += std::fabs(d.amplitude);
    }
    std::sort(harmonics.begin(), harmonics.end(),
              [](const Harmonic& a, const Harmonic& b) { return a.frequency < b.frequency; });

    const double radius = spec.radius;
    const double inv_radius = 1.0 / radius;
    const double u_max = profile.u_max();
    const CubicSpline& spline = profile.spline();
    // The distortion factor is >= 1 - total_amp, so nothing beyond `reach`
    // can land inside the profile support.
    const double reach = u_max * radius / (1.0 - total_amp);
    const double reach2 = reach * reach;

    // Row scratch. The angular factor is computed in single precision; its
    // rounding (~1e-7 * amplitude) stays below the float offsets' own.
    const auto n_side = static_cast<std::size_t>(side);
    std::vector<double> u(n_side), h(n_side);
    std::vector<float> inv(n_side), factor(n_side);
    std::vector<double> xs(n_side);
    std::vector<float> xs_f(n_side);
    for (std::size_t k = 0; k < n_side; ++k) {
        xs[k] = (stamp.origin_x + static_cast<int>(k)) * resolution - spec.center_x;
        xs_f[k] = static_cast<float>(xs[k]);
    }

    auto elev = stamp.offsets.elevations();
    for (int j = 0; j < side; ++j) {
        const double wy = (stamp.origin_y + j) * resolution - spec.center_y;
        const double wy2 = wy * wy;
        if (wy2 >= reach2) continue;
        const double span = std::sqrt(reach2 - wy2);
        const int k0 = std::max(0, static_cast<int>(std::floor((spec.center_x - span) / resolution)) - stamp.origin_x);
        const int k1 = std::min(side - 1, static_cast<int>(std::ceil((spec.center_x + span) / resolution)) - stamp.origin_x);
        if (k0 > k1) continue;
        const auto count = static_cast<std::size_t>(k1 - k0 + 1);
        const double* wx = xs.data() + k0;

        if (!harmonics.empty()) {
            for (std::size_t k = 0; k < count; ++k) u[k] = std::sqrt(wx[k] * wx[k] + wy2);
            angular_factor(xs_f.data() + k0, static_cast<float>(wy), u.data(), count, harmonics, inv.data(),
                           factor.data());
            for (std::size_t k = 0; k < count; ++k) u[k] *= inv_radius * static_cast<double>(factor[k]);
        } else {
            for (std::size_t k = 0; k < count; ++k) u[k] = std::sqrt(wx[k] * wx[k] + wy2) * inv_radius;
        }
        spline.evaluate(std::span<const double>(u.data(), count), std::span<double>(h.data(), count));
        float* row = elev.data() + static_cast<std::size_t>(j) * n_side + k0;
        for (std::size_t k = 0; k < count; ++k) row[k] = u[k] < u_max ? static_cast<float>(radius * h[k]) : 0.0f;
    }
    return stamp;
}

void stamp_into(Dem& dem, const CraterStamp& stamp) {
    const double rel = std::fabs(dem.resolution() - stamp.offsets.resolution()) / dem.resolution();
    if (rel > 1e-12) {
        fail(ErrorKind::invalid_argument, "stamp resolution " + format_double(stamp.offsets.resolution()) +
                                              " differs from DEM resolution " + format_double(dem.resolution()));
    }
    const int side_x = stamp.offsets.width(), side_y = stamp.offsets.height();
    const int x_begin = std::max(0, stamp.origin_x), x_end = std::min(dem.width(), stamp.origin_x + side_x);
    const int y_begin = std::max(0, stamp.origin_y), y_end = std::min(dem.height(), stamp.origin_y + side_y);
    if (x_begin >= x_end || y_begin >= y_end) return;
    const bool holes = dem.has_holes();
    for (int y = y_begin; y < y_end; ++y) {
        for (int x = x_begin; x < x_end; ++x) {
            if (holes && dem.is_hole(x, y)) continue;
            dem.at(x, y) += stamp.offsets.at(x - stamp.origin_x, y - stamp.origin_y);
        }
    }
}

Dem stamp_into(const Dem& dem, const CraterStamp& stamp) {
    Dem out = dem;
    stamp_into(out, stamp);
    return out;
}

}  // namespace lunaforge
