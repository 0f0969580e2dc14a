#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "lunaforge/error.hpp"
#include "lunaforge/point_process.hpp"

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

double min_pair_slack(const PointSet& s, bool per_mark, double r_min) {
    double worst = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < s.size(); ++i) {
        for (std::size_t j = i + 1; j < s.size(); ++j) {
            const double d = std::hypot(s.points[i].x - s.points[j].x, s.points[i].y - s.points[j].y);
            const double need = per_mark ? s.marks[i] + s.marks[j] : r_min;
            worst = std::min(worst, d - need);
        }
    }
    return worst;
}

struct MeanCount {
    double mean = 0.0;
    double runs = 0.0;
};

template <typename Fn>
MeanCount mean_count(int runs, Fn&& fn) {
    double sum = 0.0;
    for (int i = 0; i < runs; ++i) sum += static_cast<double>(fn(RngStream(2024, "test/stats", i)).size());
    return {sum / runs, double(runs)};
}

}  // namespace

TEST(Domain, MeasuresBoundsAndContainment) {
    const auto rect = SampleDomain::rectangle(4, 3);
    EXPECT_EQ(rect.measure(), 12.0);
    EXPECT_TRUE(rect.contains({0, 0}));
    EXPECT_TRUE(rect.contains({4, 3}));
    EXPECT_FALSE(rect.contains({4.01, 1}));
    const auto disk = SampleDomain::disk(2);
    EXPECT_NEAR(disk.measure(), 4 * std::numbers::pi, 1e-12);
    EXPECT_FALSE(disk.contains({1.5, 1.5}));
    const auto mask = SampleDomain::density_mask({2, 2, 0.5, {0.0, 1.0, 2.0, 0.5}});
    EXPECT_NEAR(mask.measure(), 3.5 * 0.25, 1e-12);
    EXPECT_EQ(mask.bounds(), (std::array<double, 4>{-0.25, -0.25, 0.75, 0.75}));
    EXPECT_FALSE(mask.contains({0.0, 0.0}));
    EXPECT_TRUE(mask.contains({0.5, 0.0}));
}

TEST(Domain, RejectsInvalidShapes) {
    EXPECT_EQ(kind_of([] { SampleDomain::rectangle(0, 1); }), ErrorKind::invalid_argument);
    EXPECT_EQ(kind_of([] { SampleDomain::disk(-1); }), ErrorKind::invalid_argument);
    EXPECT_EQ(kind_of([] { SampleDomain::density_mask({2, 1, 1.0, {0.0, 0.0}}); }), ErrorKind::invalid_argument);
    EXPECT_EQ(kind_of([] { SampleDomain::density_mask({2, 1, 1.0, {1.0}}); }), ErrorKind::invalid_argument);
    EXPECT_EQ(kind_of([] { SampleDomain::density_mask({2, 1, 1.0, {1.0, -1.0}}); }), ErrorKind::invalid_argument);
}

TEST(Domain, MaskSamplingFollowsWeights) {
    // Oracle: cell frequencies proportional to weights.
    const std::vector<double> w{1.0, 0.0, 3.0, 4.0};
    const auto mask = SampleDomain::density_mask({2, 2, 1.0, w});
    RngStream rng(3, "test/mask");
    std::vector<double> hits(4, 0.0);
    const int n = 80000;
    for (int i = 0; i < n; ++i) {
        const Point2 p = mask.sample(rng);
        const int cx = static_cast<int>(std::floor(p.x + 0.5)), cy = static_cast<int>(std::floor(p.y + 0.5));
        ASSERT_TRUE(cx >= 0 && cx < 2 && cy >= 0 && cy < 2);
        hits[cy * 2 + cx] += 1.0;
    }
    for (int c = 0; c < 4; ++c) {
        const double p = w[c] / 8.0;
        EXPECT_NEAR(hits[c] / n, p, 5.0 * std::sqrt(p * (1 - p) / n) + 1e-12) << c;
    }
}

TEST(Poisson, ZeroIntensityIsEmpty) {
    EXPECT_TRUE(sample_poisson(SampleDomain::rectangle(10, 10), 0.0, RngStream(1, "p")).empty());
    EXPECT_EQ(kind_of([] { sample_poisson(SampleDomain::rectangle(1, 1), -1.0, RngStream(1, "p")); }),
              ErrorKind::invalid_argument);
}

TEST(Poisson, MeanCountWithinThreeSigma) {
    const auto domain = SampleDomain::rectangle(100, 100);
    const auto m = mean_count(200, [&](RngStream r) { return sample_poisson(domain, 0.01, r); });
    EXPECT_LE(std::fabs(m.mean - 100.0), 3.0 * std::sqrt(100.0) / std::sqrt(200.0));
}

TEST(Poisson, MaskSupportRestriction) {
    std::vector<double> w(100, 0.0);
    for (int y = 0; y < 10; ++y)
        for (int x = 0; x < 5; ++x) w[y * 10 + x] = 1.0;
    const auto domain = SampleDomain::density_mask({10, 10, 1.0, w});
    for (int s = 0; s < 20; ++s) {
        const auto pts = sample_poisson(domain, 2.0, RngStream(s, "mask"));
        ASSERT_FALSE(pts.empty());
        // The mask spans x in [-0.5, 9.5]; its left half ends at 4.5.
        for (const auto& p : pts.points) ASSERT_LT(p.x, 4.5);
    }
}

TEST(Poisson, PointsStayInsideEveryDomainKind) {
    std::vector<double> w(64, 0.0);
    for (int i = 0; i < 64; i += 3) w[i] = 1.0 + i;
    const std::vector<SampleDomain> domains{SampleDomain::rectangle(7, 3), SampleDomain::disk(4),
                                            SampleDomain::density_mask({8, 8, 0.5, w})};
    for (const auto& d : domains) {
        for (int s = 0; s < 30; ++s) {
            const auto pts = sample_poisson(d, 3.0, RngStream(s, "inside"));
            for (const auto& p : pts.points) ASSERT_TRUE(d.contains(p));
        }
    }
}

TEST(Poisson, DeterministicAndDoesNotAdvanceCallerStream) {
    const auto domain = SampleDomain::disk(5);
    RngStream rng(9, "det");
    const auto a = sample_poisson(domain, 1.0, rng);
    const auto b = sample_poisson(domain, 1.0, rng);
    EXPECT_EQ(a, b);
    RngStream fresh(9, "det");
    EXPECT_EQ(rng.next_u64(), fresh.next_u64());
    EXPECT_NE(a, sample_poisson(domain, 1.0, RngStream(9, "det2")));
}

TEST(Hardcore, FixedModeSaturatedKeepsMinimumDistance) {
    const auto domain = SampleDomain::rectangle(10, 10);
    for (int s = 0; s < 10; ++s) {
        const auto pts = sample_hardcore_poisson(domain, 5.0, {1.0, 1.0, HardcoreMode::fixed, 50}, RngStream(s, "hc"));
        ASSERT_GT(pts.size(), 40u);
        EXPECT_TRUE(pts.marks.empty());
        EXPECT_GE(min_pair_slack(pts, false, 1.0), 0.0);
    }
}

TEST(Hardcore, SingleTargetAlwaysSucceeds) {
    const auto domain = SampleDomain::rectangle(10, 10);
    int singles = 0;
    for (int s = 0; s < 200; ++s) {
        RngStream rng(s, "single");
        const std::uint64_t target = RngStream(rng).poisson(0.01 * 100.0);
        const auto pts = sample_hardcore_poisson(domain, 0.01, {100.0, 100.0, HardcoreMode::fixed, 1}, rng);
        ASSERT_EQ(pts.size(), std::min<std::uint64_t>(target, 1));
        singles += target == 1;
    }
    EXPECT_GT(singles, 0);
}

TEST(Hardcore, PerMarkPairsNeverOverlap) {
    const auto domain = SampleDomain::rectangle(100, 100);
    for (int s = 0; s < 20; ++s) {
        const auto pts =
            sample_hardcore_poisson(domain, 0.02, {0.25, 5.0, HardcoreMode::per_mark, 100}, RngStream(s, "pm"));
        ASSERT_EQ(pts.marks.size(), pts.size());
        for (double m : pts.marks) {
            ASSERT_GE(m, 0.25);
            ASSERT_LE(m, 5.0);
        }
        ASSERT_TRUE(std::is_sorted(pts.marks.rbegin(), pts.marks.rend()));
        EXPECT_GE(min_pair_slack(pts, true, 0.0), 0.0);
    }
}

TEST(Hardcore, RejectsInvalidParameters) {
    const auto d = SampleDomain::rectangle(1, 1);
    EXPECT_EQ(kind_of([&] { sample_hardcore_poisson(d, 1, {0.0, 1.0}, RngStream(1, "x")); }),
              ErrorKind::invalid_argument);
    EXPECT_EQ(kind_of([&] { sample_hardcore_poisson(d, 1, {1.0, 1.0, HardcoreMode::fixed, 0}, RngStream(1, "x")); }),
              ErrorKind::invalid_argument);
    EXPECT_EQ(kind_of([&] { sample_hardcore_poisson(d, 1, {2.0, 1.0, HardcoreMode::per_mark}, RngStream(1, "x")); }),
              ErrorKind::invalid_argument);
}

TEST(Thomas, ZeroOffspringIsEmpty) {
    EXPECT_TRUE(sample_thomas(SampleDomain::rectangle(100, 100), 0.01, 0.0, 1.0, RngStream(1, "t")).empty());
}

TEST(Thomas, MeanCountMatchesCompoundPoisson) {
    const double lambda = 0.001, mu = 10.0, sigma = 0.5, side = 100.0;
    const auto domain = SampleDomain::rectangle(side, side);
    const auto m = mean_count(200, [&](RngStream r) { return sample_thomas(domain, lambda, mu, sigma, r); });
    // Parents inside the window; offspring leaking over the edges are lost.
    const double edge = side - 2.0 * sigma / std::sqrt(2.0 * std::numbers::pi);
    const double expected = lambda * mu * edge * edge;
    const double sd = std::sqrt(lambda * side * side * (mu + mu * mu));
    EXPECT_LE(std::fabs(m.mean - expected), 3.0 * sd / std::sqrt(m.runs)) << m.mean << " vs " << expected;
    EXPECT_NEAR(expected, 100.0, 1.0);
}

TEST(Thomas, NearestParentDistanceIsRayleigh) {
    const double sigma = 0.5;
    const auto domain = SampleDomain::rectangle(100, 100);
    double sum = 0.0;
    std::size_t n = 0;
    for (int s = 0; s < 200; ++s) {
        const auto c = sample_thomas_clusters(domain, 0.001, 10.0, sigma, RngStream(s, "rayleigh"));
        ASSERT_EQ(c.parent_of.size(), c.children.size());
        for (const auto& child : c.children.points) {
            double best = std::numeric_limits<double>::infinity();
            for (const auto& p : c.parents) best = std::min(best, std::hypot(child.x - p.x, child.y - p.y));
            sum += best;
            ++n;
        }
    }
    ASSERT_GT(n, 1000u);
    EXPECT_NEAR(sum / n, sigma * std::sqrt(std::numbers::pi / 2.0), 0.05 * sigma * std::sqrt(std::numbers::pi / 2.0));
}

TEST(Matern, ChildrenStayInTheirClusterDisk) {
    const auto domain = SampleDomain::rectangle(50, 50);
    for (int s = 0; s < 20; ++s) {
        const auto c = sample_matern_clusters(domain, 0.01, 8.0, 1.5, RngStream(s, "matern"));
        for (std::size_t i = 0; i < c.children.size(); ++i) {
            const Point2 p = c.children.points[i], q = c.parents[c.parent_of[i]];
            ASSERT_LE(std::hypot(p.x - q.x, p.y - q.y), 1.5);
            ASSERT_TRUE(domain.contains(p));
        }
    }
    EXPECT_TRUE(sample_matern(domain, 0.01, 0.0, 1.0, RngStream(1, "m")).empty());
}

TEST(Matern, MeanCountMatchesCompoundPoisson) {
    const double lambda = 0.001, mu = 10.0, radius = 1.0, side = 100.0;
    const auto domain = SampleDomain::rectangle(side, side);
    const auto m = mean_count(200, [&](RngStream r) { return sample_matern(domain, lambda, mu, radius, r); });
    // Mean area of the disk beyond one edge, integrated over parent offset: 2R^3/3.
    const double edge = side - 2.0 * (2.0 * radius / (3.0 * std::numbers::pi));
    const double expected = lambda * mu * edge * edge;
    const double sd = std::sqrt(lambda * side * side * (mu + mu * mu));
    EXPECT_LE(std::fabs(m.mean - expected), 3.0 * sd / std::sqrt(m.runs)) << m.mean << " vs " << expected;
}

TEST(Uniform, ExactCountAndCentredMean) {
    EXPECT_TRUE(sample_uniform(SampleDomain::rectangle(10, 10), 0, RngStream(1, "u")).empty());
    const auto pts = sample_uniform(SampleDomain::rectangle(10, 10), 10000, RngStream(1, "u"));
    ASSERT_EQ(pts.size(), 10000u);
    double sx = 0, sy = 0;
    for (const auto& p : pts.points) sx += p.x, sy += p.y;
    const double sd = 10.0 / std::sqrt(12.0) / std::sqrt(10000.0);
    EXPECT_LE(std::fabs(sx / 1e4 - 5.0), 3.0 * sd);
    EXPECT_LE(std::fabs(sy / 1e4 - 5.0), 3.0 * sd);
}

TEST(Normal, SmallSigmaStaysWithinSixSigma) {
    const double sigma = 0.01;
    const auto pts = sample_normal(SampleDomain::rectangle(10, 10), 5000, {5, 5}, sigma, RngStream(4, "n"));
    ASSERT_EQ(pts.size(), 5000u);
    for (const auto& p : pts.points) ASSERT_LE(std::hypot(p.x - 5, p.y - 5), 6 * sigma);
}

TEST(Normal, ClippedByRejectionAndBudgeted) {
    const auto domain = SampleDomain::disk(1.0);
    const auto pts = sample_normal(domain, 2000, {0.9, 0.0}, 0.5, RngStream(4, "clip"));
    ASSERT_EQ(pts.size(), 2000u);
    for (const auto& p : pts.points) ASSERT_TRUE(domain.contains(p));
    EXPECT_EQ(kind_of([&] { sample_normal(domain, 1, {50.0, 0.0}, 1e-3, RngStream(4, "far"), 100); }),
              ErrorKind::budget_exceeded);
}
