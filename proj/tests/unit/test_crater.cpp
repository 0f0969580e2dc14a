#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "lunaforge/crater.hpp"
#include "lunaforge/error.hpp"
#include "lunaforge/rng.hpp"
#include "lunaforge/text_io.hpp"
#include "support.hpp"

using namespace lunaforge;

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

/// Natural cubic spline by the textbook second-derivative tridiagonal system.
struct ReferenceSpline {
    std::vector<double> x, y, m;

    ReferenceSpline(std::vector<double> xs, std::vector<double> ys) : x(std::move(xs)), y(std::move(ys)) {
        const std::size_t n = x.size();
        m.assign(n, 0.0);
        std::vector<double> a(n, 0.0), b(n, 1.0), c(n, 0.0), r(n, 0.0);
        for (std::size_t i = 1; i + 1 < n; ++i) {
            const double h0 = x[i] - x[i - 1], h1 = x[i + 1] - x[i];
            a[i] = h0;
            b[i] = 2.0 * (h0 + h1);
            c[i] = h1;
            r[i] = 6.0 * ((y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0);
        }
        for (std::size_t i = 1; i < n; ++i) {
            const double w = a[i] / b[i - 1];
            b[i] -= w * c[i - 1];
            r[i] -= w * r[i - 1];
        }
        m[n - 1] = r[n - 1] / b[n - 1];
        for (std::size_t i = n - 1; i-- > 0;) m[i] = (r[i] - c[i] * m[i + 1]) / b[i];
    }

    double operator()(double t) const {
        t = std::clamp(t, x.front(), x.back());
        std::size_t i = std::upper_bound(x.begin(), x.end(), t) - x.begin();
        i = std::clamp<std::size_t>(i, 1, x.size() - 1) - 1;
        const double h = x[i + 1] - x[i];
        const double A = (x[i + 1] - t) / h, B = (t - x[i]) / h;
        return A * y[i] + B * y[i + 1] + ((A * A * A - A) * m[i] + (B * B * B - B) * m[i + 1]) * h * h / 6.0;
    }
};

std::vector<ProfileSample> bowl_samples(int knots = 65) {
    std::vector<ProfileSample> s;
    for (int i = 0; i < knots; ++i) {
        const double u = 2.0 * i / (knots - 1);
        s.push_back({u, u <= 1.0 ? 0.2 * (u * u - 1.0) : 0.0});
    }
    return s;
}

std::string to_csv(const std::vector<ProfileSample>& samples) {
    std::string out;
    for (const auto& s : samples) out += format_double(s.u) + "," + format_double(s.h) + "\n";
    return out;
}

CraterProfile bowl() { return CraterProfile::fit(bowl_samples()); }

double cell_distance(const CraterStamp& st, int k, int j, const CraterSpec& spec) {
    const double r = st.offsets.resolution();
    return std::hypot((st.origin_x + k) * r - spec.center_x, (st.origin_y + j) * r - spec.center_y);
}

}  // namespace

TEST(CubicSpline, MatchesReferenceNaturalSpline) {
    RngStream rng(2, "test/spline");
    std::vector<double> x{0.0}, y{rng.uniform(-1, 1)};
    for (int i = 1; i < 30; ++i) {
        x.push_back(x.back() + rng.uniform(0.05, 0.5));
        y.push_back(rng.uniform(-1, 1));
    }
    const CubicSpline spline(x, y);
    const ReferenceSpline ref(x, y);
    for (std::size_t i = 0; i < x.size(); ++i) ASSERT_NEAR(spline(x[i]), y[i], 1e-9);
    for (int i = 0; i <= 2000; ++i) {
        const double t = x.front() + (x.back() - x.front()) * i / 2000.0;
        ASSERT_NEAR(spline(t), ref(t), 1e-9) << t;
    }
    EXPECT_EQ(spline(-5.0), spline(x.front()));
    EXPECT_EQ(spline(1e3), spline(x.back()));
}

TEST(CubicSpline, NaturalEndConditions) {
    const std::vector<double> x{0, 1, 2, 3, 4}, y{0, 2, -1, 3, 1};
    const CubicSpline s(x, y);
    const double e = 1e-5;
    EXPECT_NEAR((s.derivative(e) - s.derivative(0.0)) / e, 0.0, 1e-3);
    EXPECT_NEAR((s.derivative(4.0) - s.derivative(4.0 - e)) / e, 0.0, 1e-3);
}

TEST(CubicSpline, BatchEvaluationMatchesScalarBitExactly) {
    const auto& spline = builtin_profiles()[3].spline();
    RngStream rng(8, "test/batch");
    std::vector<double> u(1037), out(u.size());
    for (auto& v : u) v = rng.uniform(-0.5, 2.5);
    spline.evaluate(u, out);
    for (std::size_t i = 0; i < u.size(); ++i) ASSERT_EQ(out[i], spline(u[i])) << u[i];
}

TEST(CubicSpline, RejectsBadKnots) {
    const std::vector<double> x{0, 1, 1, 2}, y{0, 0, 0, 0};
    EXPECT_EQ(kind_of([&] { CubicSpline(x, y); }), ErrorKind::validation);
}

TEST(Profiles, SingleBowlLoadsAndReproducesKnots) {
    const ProfileLibrary lib = parse_profiles("# bowl\n" + to_csv(bowl_samples()));
    ASSERT_EQ(lib.size(), 1u);
    const auto& p = lib[0];
    EXPECT_EQ(p.u_max(), 2.0);
    for (const auto& s : p.samples()) ASSERT_NEAR(p.spline()(s.u), s.h, 1e-9);
    EXPECT_EQ(p.samples().back().h, 0.0);
    EXPECT_LE(std::fabs(p.spline().derivative(p.u_max())), 1e-6);
}

TEST(Profiles, RescalesUToSupport) {
    std::vector<ProfileSample> s;
    for (int i = 0; i < 33; ++i) {
        const double u = 4.0 * i / 32;
        s.push_back({u, u <= 2.0 ? 0.4 * (u * u / 4.0 - 1.0) : 0.0});
    }
    const auto lib = parse_profiles(to_csv(s), SmoothingOptions{1, 0, 2.0});
    ASSERT_EQ(lib.size(), 1u);
    EXPECT_EQ(lib[0].samples().back().u, 2.0);
    EXPECT_NEAR(lib[0](0.0), -0.2, 1e-12);
}

TEST(Profiles, RejectsInvalidProfiles) {
    auto lifted = bowl_samples();
    lifted.back().h = 2e-3;
    EXPECT_EQ(kind_of([&] { parse_profiles(to_csv(lifted)); }), ErrorKind::validation);
    EXPECT_EQ(kind_of([&] { CraterProfile::fit(lifted); }), ErrorKind::validation);

    auto unsorted = bowl_samples();
    std::swap(unsorted[3], unsorted[4]);
    EXPECT_EQ(kind_of([&] { parse_profiles(to_csv(unsorted)); }), ErrorKind::validation);

    EXPECT_EQ(kind_of([&] { parse_profiles("0,-0.1\n1,0\n2,0\n"); }), ErrorKind::validation);
    EXPECT_EQ(kind_of([&] { parse_profiles("# nothing\n\n"); }), ErrorKind::validation);
    EXPECT_EQ(kind_of([&] { parse_profiles("0,-0.1\n0.5;0\n"); }), ErrorKind::validation);

    // Steep end: the spline slope at u_max is far from flat.
    std::vector<ProfileSample> steep;
    for (int i = 0; i < 9; ++i) steep.push_back({i * 0.25, 0.1 * (i * 0.25 - 2.0)});
    EXPECT_EQ(kind_of([&] { CraterProfile::fit(steep); }), ErrorKind::validation);
}

TEST(Profiles, AcceptsSmallEndResidualAndSnapsIt) {
    auto s = bowl_samples();
    s.back().h = 5e-4;
    const auto p = CraterProfile::fit(s);
    EXPECT_EQ(p.samples().back().h, 0.0);
}

TEST(Profiles, BuiltinLibraryHasSixteenProfiles) {
    const auto& lib = builtin_profiles();
    ASSERT_EQ(lib.size(), 16u);
    for (const auto& p : lib) {
        EXPECT_EQ(p.samples().size(), 64u);
        EXPECT_EQ(p.u_max(), 2.0);
        EXPECT_LT(p(0.0), 0.0);
        EXPECT_LE(std::fabs(p.spline().derivative(2.0)), 1e-6);
    }
}

TEST(Profiles, ShippedDataFileMatchesBuiltin) {
    const std::string path = std::string(LUNAFORGE_DATA_DIR) + "/profiles_builtin.csv";
    EXPECT_EQ(read_file(path), builtin_profile_csv());
    const auto lib = load_profiles(path);
    ASSERT_EQ(lib.size(), builtin_profiles().size());
    for (std::size_t i = 0; i < lib.size(); ++i) {
        ASSERT_EQ(lib[i].samples().size(), builtin_profiles()[i].samples().size());
        for (std::size_t k = 0; k < lib[i].samples().size(); ++k)
            ASSERT_EQ(lib[i].samples()[k].h, builtin_profiles()[i].samples()[k].h);
    }
}

TEST(Profiles, EvaluationBeyondSupportIsExactlyZero) {
    for (const auto& p : builtin_profiles()) {
        for (double u : {2.0, 2.0000001, 3.0, 1e9}) ASSERT_EQ(p(u), 0.0);
        std::vector<double> u{1.9, 2.0, 2.5}, out(3);
        p.evaluate(u, out);
        EXPECT_EQ(out[0], p(1.9));
        EXPECT_EQ(out[1], 0.0);
        EXPECT_EQ(out[2], 0.0);
    }
}

TEST(Smoothing, ReproducesQuadratics) {
    std::vector<ProfileSample> s;
    for (int i = 0; i < 40; ++i) {
        const double u = 0.1 * i + 0.01 * i * i;
        s.push_back({u, 3.0 - 2.0 * u + 0.7 * u * u});
    }
    const auto out = smooth_profile(s, 7, 2);
    ASSERT_EQ(out.size(), s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        ASSERT_EQ(out[i].u, s[i].u);
        ASSERT_NEAR(out[i].h, s[i].h, 1e-9);
    }
}

TEST(Smoothing, AlternatingNoiseIsDamped) {
    const double eps = 0.01;
    std::vector<ProfileSample> s;
    for (int i = 0; i < 30; ++i) s.push_back({double(i), 1.0 + (i % 2 ? eps : -eps)});
    const auto out = smooth_profile(s, 5, 2);
    double worst = 0.0;
    for (const auto& o : out) worst = std::max(worst, std::fabs(o.h - 1.0));
    EXPECT_LT(worst, eps);
}

TEST(Smoothing, InteriorMatchesClassicCoefficients) {
    // Window 5, degree 2: (-3, 12, 17, 12, -3) / 35 on uniform spacing.
    RngStream rng(6, "test/sg");
    std::vector<ProfileSample> s;
    for (int i = 0; i < 25; ++i) s.push_back({0.5 * i, rng.uniform(-1, 1)});
    const auto out = smooth_profile(s, 5, 2);
    for (std::size_t i = 2; i + 2 < s.size(); ++i) {
        const double expected =
            (-3 * s[i - 2].h + 12 * s[i - 1].h + 17 * s[i].h + 12 * s[i + 1].h - 3 * s[i + 2].h) / 35.0;
        ASSERT_NEAR(out[i].h, expected, 1e-12);
    }
}

TEST(Smoothing, RejectsInvalidWindows) {
    const auto s = bowl_samples();
    EXPECT_EQ(kind_of([&] { smooth_profile(s, 4, 2); }), ErrorKind::invalid_argument);
    EXPECT_EQ(kind_of([&] { smooth_profile(s, 5, 5); }), ErrorKind::invalid_argument);
    EXPECT_EQ(kind_of([&] { smooth_profile(std::span(s).first(3), 5, 2); }), ErrorKind::invalid_argument);
}

TEST(Stamp, SideFollowsFourRadiiRule) {
    EXPECT_EQ(stamp_side(1.0, 0.05), 80);
    EXPECT_EQ(stamp_side(10.0, 0.04), 1000);
    EXPECT_EQ(stamp_side(0.5, 0.04), 50);
    EXPECT_EQ(stamp_side(0.01, 1.0), 2);
    const auto st = make_stamp({0.0, 0.0, 1.0}, bowl(), 0.05);
    EXPECT_EQ(st.offsets.width(), 80);
    EXPECT_EQ(st.offsets.height(), 80);
}

TEST(Stamp, BowlCenterDepthMatchesClosedForm) {
    const auto profile = bowl();
    const CraterSpec spec{0.0, 0.0, 1.0};
    EXPECT_NEAR(spec.radius * profile(0.0), -0.2, 1e-9);
    const auto st = make_stamp(spec, profile, 0.05);
    const int k = -st.origin_x, j = -st.origin_y;
    ASSERT_EQ(cell_distance(st, k, j, spec), 0.0);
    EXPECT_EQ(st.offsets.at(k, j), static_cast<float>(spec.radius * profile(0.0)));
    EXPECT_EQ(st.offsets.at(k, j), -0.2f);
}

TEST(Stamp, ZeroDistortionIsRadiallySymmetric) {
    for (double rotation : {0.0, 1.3, 4.0}) {
        const CraterSpec spec{1.025, 2.5, 1.7, rotation, {}, 0};
        const auto& profile = builtin_profiles()[5];
        const auto st = make_stamp(spec, profile, 0.05);
        std::vector<std::pair<double, float>> cells;
        for (int j = 0; j < st.offsets.height(); ++j)
            for (int k = 0; k < st.offsets.width(); ++k)
                cells.push_back({cell_distance(st, k, j, spec), st.offsets.at(k, j)});
        std::sort(cells.begin(), cells.end(), [](auto a, auto b) { return a.first < b.first; });
        for (std::size_t i = 1; i < cells.size(); ++i) {
            if (cells[i].first - cells[i - 1].first < 1e-9)
                ASSERT_LT(std::fabs(cells[i].second - cells[i - 1].second), 1e-6 * spec.radius);
        }
        for (const auto& [d, v] : cells)
            ASSERT_NEAR(v, static_cast<float>(spec.radius * profile(d / spec.radius)), 1e-6 * spec.radius);
    }
}

TEST(Stamp, OffsetsVanishBeyondSupport) {
    RngStream rng(12, "test/support");
    for (int trial = 0; trial < 20; ++trial) {
        CraterSpec spec{rng.uniform(0, 5), rng.uniform(0, 5), rng.uniform(0.3, 3.0), rng.uniform(0, 6.28), {}, 0};
        double total = 0.0;
        if (trial % 2) {
            for (int f = 2; f <= 5; ++f) {
                spec.distortion.push_back({rng.uniform(0.0, 0.03), f, rng.uniform(0, 6.28)});
                total += spec.distortion.back().amplitude;
            }
        }
        spec.profile_index = rng.uniform_index(16);
        const auto& profile = builtin_profiles()[spec.profile_index];
        const auto st = make_stamp(spec, profile, 0.05);
        for (int j = 0; j < st.offsets.height(); ++j) {
            for (int k = 0; k < st.offsets.width(); ++k) {
                const double d = cell_distance(st, k, j, spec);
                if (d * (1.0 - total) >= profile.u_max() * spec.radius) ASSERT_EQ(st.offsets.at(k, j), 0.0f);
            }
        }
        const int n = st.offsets.width();
        for (int i = 0; i < n; ++i) {
            for (float v : {st.offsets.at(i, 0), st.offsets.at(i, n - 1), st.offsets.at(0, i), st.offsets.at(n - 1, i)})
                ASSERT_LE(std::fabs(v), 1e-6 * spec.radius);
        }
    }
}

TEST(Stamp, DistortionMatchesDirectFormula) {
    const CraterSpec spec{0.0, 0.0, 2.0, 0.7, {{0.03, 2, 0.4}, {0.02, 3, 1.1}, {0.015, 5, 2.0}}, 2};
    const auto& profile = builtin_profiles()[2];
    const auto st = make_stamp(spec, profile, 0.05);
    for (int j = 0; j < st.offsets.height(); j += 3) {
        for (int k = 0; k < st.offsets.width(); k += 3) {
            const double x = (st.origin_x + k) * 0.05, y = (st.origin_y + j) * 0.05;
            const double d = std::hypot(x, y), theta = std::atan2(y, x);
            double factor = 1.0;
            for (const auto& h : spec.distortion) factor += h.amplitude * std::sin(h.frequency * (theta - spec.rotation) + h.phase);
            const double expected = spec.radius * profile(d / spec.radius * factor);
            ASSERT_NEAR(st.offsets.at(k, j), expected, 2e-6 * spec.radius) << k << "," << j;
        }
    }
}

TEST(Stamp, RotationPreservesVolume) {
    const std::vector<Distortion> distortion{{0.04, 2, 0.3}, {0.02, 3, 1.9}, {0.015, 4, 0.2}};
    const auto& profile = builtin_profiles()[7];
    const auto volume = [&](double rotation) {
        const auto st = make_stamp({0.0, 0.0, 2.0, rotation, distortion, 7}, profile, 0.02);
        double sum = 0.0;
        for (float v : st.offsets.elevations()) sum += v;
        return sum * 0.02 * 0.02;
    };
    const double v1 = volume(0.2), v2 = volume(2.9);
    EXPECT_LT(std::fabs(v1 - v2), 0.005 * std::fabs(v1));

    // Rotation by a quarter turn maps the pattern onto the rotated grid.
    const auto a = make_stamp({0.0, 0.0, 1.0, 0.0, distortion, 7}, profile, 0.05);
    const auto b = make_stamp({0.0, 0.0, 1.0, std::numbers::pi / 2, distortion, 7}, profile, 0.05);
    const int n = a.offsets.width(), c = -a.origin_x;
    for (int j = 0; j < n; ++j) {
        for (int k = 0; k < n; ++k) {
            const int x = k - c, y = j - c;
            const int rk = -y + c, rj = x + c;
            if (rk < 0 || rj < 0 || rk >= n || rj >= n) continue;
            ASSERT_NEAR(b.offsets.at(rk, rj), a.offsets.at(k, j), 1e-5);
        }
    }
}

TEST(Stamp, IsDeterministicAndValidated) {
    const CraterSpec spec{1.0, 1.0, 1.5, 0.5, {{0.05, 2, 0.1}, {0.02, 4, 3.0}}, 1};
    const auto a = make_stamp(spec, builtin_profiles()[1], 0.04);
    const auto b = make_stamp(spec, builtin_profiles()[1], 0.04);
    EXPECT_EQ(a.offsets, b.offsets);
    EXPECT_EQ(a.origin_x, b.origin_x);

    EXPECT_EQ(kind_of([&] { validate_crater({0, 0, 0.0}); }), ErrorKind::invalid_argument);
    EXPECT_EQ(kind_of([&] { validate_crater({0, 0, 1.0, 0, {{0.6, 2, 0}, {-0.4, 3, 0}}}); }),
              ErrorKind::invalid_argument);
    EXPECT_EQ(kind_of([&] { make_stamp({0, 0, 10.0}, bowl(), 0.04, 1000); }), ErrorKind::budget_exceeded);
}

TEST(StampInto, FlatDemTakesStampOffsets) {
    const CraterSpec spec{2.0, 2.0, 1.0};
    const auto st = make_stamp(spec, bowl(), 0.05);
    const Dem out = stamp_into(Dem(81, 81, 0.05), st);
    for (int y = 0; y < 81; ++y) {
        for (int x = 0; x < 81; ++x) {
            const int k = x - st.origin_x, j = y - st.origin_y;
            const bool inside = k >= 0 && j >= 0 && k < st.offsets.width() && j < st.offsets.height();
            ASSERT_EQ(out.at(x, y), inside ? st.offsets.at(k, j) : 0.0f);
        }
    }
    const Dem twice = stamp_into(out, st);
    for (int y = 0; y < 81; ++y)
        for (int x = 0; x < 81; ++x) ASSERT_EQ(twice.at(x, y), 2.0f * out.at(x, y));
}

TEST(StampInto, ClipsAtGridEdgesAndKeepsSumRule) {
    RngStream rng(4, "test/clip");
    Dem base(40, 30, 0.1);
    for (auto& v : base.elevations()) v = static_cast<float>(rng.uniform(0.0, 1.0));
    // Centers one pixel outside each edge.
    for (auto [cx, cy] : {std::pair{-0.1, 1.5}, {4.0, 1.5}, {2.0, -0.1}, {2.0, 3.0}}) {
        const auto st = make_stamp({cx, cy, 0.6, 0.0, {{0.05, 3, 0.2}}, 4}, builtin_profiles()[4], 0.1);
        const Dem out = stamp_into(std::as_const(base), st);
        double in_sum = 0.0, out_sum = 0.0, clipped = 0.0;
        for (int y = 0; y < 30; ++y) {
            for (int x = 0; x < 40; ++x) {
                const int k = x - st.origin_x, j = y - st.origin_y;
                const bool inside = k >= 0 && j >= 0 && k < st.offsets.width() && j < st.offsets.height();
                const float off = inside ? st.offsets.at(k, j) : 0.0f;
                ASSERT_EQ(out.at(x, y), inside ? base.at(x, y) + off : base.at(x, y));
                in_sum += base.at(x, y);
                out_sum += out.at(x, y);
                clipped += off;
            }
        }
        EXPECT_NEAR(out_sum, in_sum + clipped, 1e-4);
    }
}

TEST(StampInto, SkipsHolesAndChecksResolution) {
    Dem dem(50, 50, 0.05);
    dem.set_hole(20, 20, true);
    const auto st = make_stamp({1.0, 1.0, 1.0}, bowl(), 0.05);
    const Dem out = stamp_into(std::as_const(dem), st);
    EXPECT_TRUE(out.is_hole(20, 20));
    EXPECT_EQ(out.at(20, 20), dem.at(20, 20));
    EXPECT_EQ(kind_of([&] { stamp_into(Dem(50, 50, 0.1), st); }), ErrorKind::invalid_argument);
}
