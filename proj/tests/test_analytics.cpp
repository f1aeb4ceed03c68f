#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "blockcorr/analytics.hpp"
#include "oracles.hpp"

using namespace blockcorr;

namespace {

const Scenario& fig2() {
    static const Scenario s = Scenario::mobile(reference_network());
    return s;
}

NetworkConfig fig3_network(int speed) {
    auto c = reference_network();
    c.mobility = {50, speed, 0};
    return c;
}

double plain_sum(const NetworkConfig& cfg, std::span<const double> pdf, double y, int power) {
    double s = 0.0;
    for (int n = 1; n <= cfg.lattice_size(); ++n)
        s += std::pow(cfg.pathloss.gain(std::abs(n - y)), power) * pdf[static_cast<std::size_t>(n - 1)];
    return s;
}

} // namespace

TEST(Pathloss, PositiveNonIncreasing) {
    const PathlossSpec g{2.0, 0.5};
    EXPECT_DOUBLE_EQ(g.gain(0.0), 2.0);
    double prev = g.gain(0.0);
    for (double d = 0.1; d < 50; d += 0.1) {
        EXPECT_GT(g.gain(d), 0.0);
        EXPECT_LE(g.gain(d), prev);
        prev = g.gain(d);
    }
}

TEST(MeasurementPoint, Validation) {
    EXPECT_NO_THROW((MeasurementPoint{25, 0.5}.validate(50)));
    EXPECT_THROW((MeasurementPoint{0, 0.5}.validate(50)), DomainError);
    EXPECT_THROW((MeasurementPoint{26, 0.5}.validate(50)), DomainError);
    EXPECT_THROW((MeasurementPoint{3, 0.0}.validate(50)), DomainError);
    EXPECT_THROW((MeasurementPoint{3, 1.0}.validate(50)), DomainError);
    EXPECT_EQ(measurement_grid(50).size(), 25u);
}

// ---------------------------------------------------------------------------
// First and second moments
// ---------------------------------------------------------------------------

TEST(MeanInterference, NoBlockageIsPlainSum) {
    const auto cfg = reference_network().with_obstacles(0.0);
    const auto pdf = steady_state_pdf(cfg.mobility);
    for (const auto& p : measurement_grid(50))
        EXPECT_NEAR(mean_interference(cfg, p), 50.0 * plain_sum(cfg, pdf, p.location(), 1), 1e-12);
}

TEST(MeanInterference, ScalesAndVanishes) {
    const auto cfg = reference_network();
    const MeasurementPoint p{10, 0.5};
    const double base = mean_interference(cfg, p);
    EXPECT_NEAR(mean_interference(cfg.with_users(100), p), 2 * base, 1e-12);
    EXPECT_NEAR(mean_interference(cfg.with_activity(0.25), p), 0.25 * base, 1e-12);
    EXPECT_EQ(mean_interference(cfg.with_users(0), p), 0.0);
    EXPECT_EQ(mean_interference(cfg.with_activity(0), p), 0.0);
    EXPECT_EQ(second_moment_interference(cfg.with_users(0), p), 0.0);
    double prev = mean_interference(cfg.with_obstacles(0), p);
    for (double no : {1.0, 5.0, 10.0, 40.0}) {
        const double m = mean_interference(cfg.with_obstacles(no), p);
        EXPECT_LT(m, prev);
        prev = m;
    }
}

TEST(MeanInterference, NoBlockageMaximalAtCenter) {
    const auto cfg = reference_network().with_obstacles(0.0);
    double prev = 0.0;
    for (const auto& p : measurement_grid(50)) {
        const double m = mean_interference(cfg, p);
        EXPECT_GT(m, prev);
        prev = m;
    }
}

TEST(MeanInterference, BlockageSuppressesCenterMore) {
    const auto cfg = reference_network();
    // Absolute reduction; relative reduction is in fact larger at the edge.
    auto drop = [&](MeasurementPoint p) {
        return mean_interference(cfg.with_obstacles(0), p) - mean_interference(cfg.with_obstacles(40), p);
    };
    EXPECT_GT(drop({25, 0.5}), drop({1, 0.5}));
}

TEST(SecondMoment, ExceedsSquaredMean) {
    for (double no : {0.0, 10.0, 40.0})
        for (const auto& p : measurement_grid(50)) {
            const auto m = fig2().with_obstacles(no).moments(p);
            EXPECT_GT(m.variance(), 0.0);
            EXPECT_GE(m.second_moment, m.mean * m.mean);
        }
}

TEST(SigmaSpatial, NoBlockageIsSquaredMeanPerUser) {
    const auto s = fig2().with_obstacles(0.0).with_activity(0.5);
    for (const auto& p : measurement_grid(50)) {
        const auto m = s.moments(p);
        const double kx = 50 * 0.5;
        EXPECT_NEAR(m.sigma, m.mean * m.mean / (kx * kx), 1e-12 * m.sigma);
    }
}

TEST(SigmaSpatial, PositiveCorrelationBetweenUsers) {
    for (double no : {10.0, 40.0})
        for (const auto& p : measurement_grid(50)) {
            const auto m = fig2().with_obstacles(no).moments(p);
            EXPECT_GT(m.sigma, m.first_sum * m.first_sum);
        }
}

TEST(SigmaSpatial, SurrogateUnderestimatesCenterStd) {
    const auto m = fig2().with_obstacles(40).moments({25, 0.5});
    EXPECT_LT(m.uncorrelated_stddev(), m.stddev());
}

// ---------------------------------------------------------------------------
// Temporal term
// ---------------------------------------------------------------------------

TEST(SigmaTemporal, NoBlockageIsPlainDoubleSum) {
    const auto s = fig2().with_obstacles(0.0);
    const auto& law = s.law(2);
    const auto pdf = s.pdf();
    for (const auto& p : measurement_grid(50)) {
        const double y = p.location();
        double expected = 0.0;
        for (int n = 1; n <= 50; ++n)
            for (int m = 1; m <= 50; ++m)
                expected += s.config().pathloss.gain(std::abs(n - y)) * s.config().pathloss.gain(std::abs(m - y)) *
                            law.transition(n, m) * pdf[static_cast<std::size_t>(n - 1)];
        EXPECT_NEAR(s.sigma_temporal(p, 2), expected, 1e-12 * expected);
    }
}

TEST(SigmaTemporal, StaticKernelGivesHalfOfC3) {
    for (double no : {0.0, 10.0, 40.0}) {
        const auto s = Scenario::static_steady_state(reference_network().with_obstacles(no));
        for (const auto& p : measurement_grid(50)) {
            const auto c = s.coefficients(p, 1);
            EXPECT_NEAR(s.sigma_temporal(p, 1), c.c3 / 2, 1e-12 * c.c3);
        }
    }
}

TEST(SigmaTemporal, StaticNoBlockageRhoIsHalf) {
    const auto s = Scenario::static_uniform(reference_network().with_obstacles(0.0));
    for (const auto& p : measurement_grid(50)) EXPECT_NEAR(s.rho(p, 1), 0.5, 1e-12);
}

TEST(SigmaTemporal, CasesMatchGenericSum) {
    for (double no : {0.0, 10.0, 40.0})
        for (double gamma : {0.0, 0.5, 1.0})
            for (double offset : {0.25, 0.5, 0.75}) {
                auto cfg = reference_network().with_obstacles(no);
                cfg.blockage.gamma = gamma;
                const auto s = fig2().with_obstacles(no);
                const auto pdf = s.pdf();
                for (const auto& p : measurement_grid(50, offset)) {
                    const double generic = sigma_l_generic(cfg, pdf, p, s.law(1));
                    EXPECT_NEAR(sigma_1_cases(cfg, pdf, p, s.law(1)), generic, 1e-12 * generic);
                }
            }
}

TEST(SigmaTemporal, CasesCollapseWithoutBlockage) {
    const auto s = fig2().with_obstacles(0.0);
    const auto& law = s.law(1);
    const auto pdf = s.pdf();
    for (const auto& p : measurement_grid(50)) {
        const double y = p.location();
        auto g = [&](int n) { return s.config().pathloss.gain(std::abs(n - y)); };
        double expected = 0.0;
        for (int n = 1; n <= 50; ++n)
            for (int k = -1; k <= 1; ++k)
                if (n + k >= 1 && n + k <= 50)
                    expected += g(n) * g(n + k) * law.probability(n, k) * pdf[static_cast<std::size_t>(n - 1)];
        EXPECT_NEAR(s.sigma_temporal_cases(p), expected, 1e-12 * expected);
    }
}

TEST(SigmaTemporal, CasesRejectFasterUsers) {
    auto cfg = reference_network();
    cfg.mobility.speed = 2;
    const auto s = Scenario::mobile(cfg);
    EXPECT_THROW(s.sigma_temporal_cases({5, 0.5}), UnsupportedConfiguration);
    EXPECT_THROW(sigma_1_cases(reference_network(), steady_state_pdf(reference_network().mobility), {5, 0.5},
                               fig2().law(2)),
                 UnsupportedConfiguration);
}

TEST(SigmaTemporal, PassOverTermIndependentOfOffset) {
    const auto spec = reference_network().blockage;
    const double expected = std::exp(-spec.alpha() * (1 - spec.gamma / 2));
    for (double c : {0.1, 0.5, 0.9}) {
        const double y = 7 + c;
        EXPECT_NEAR(link_pair_moment(7, 8, y, spec), expected, 1e-15);
        EXPECT_NEAR(link_pair_moment(8, 7, y, spec), expected, 1e-15);
    }
}

// ---------------------------------------------------------------------------
// Correlation coefficient
// ---------------------------------------------------------------------------

TEST(PearsonRho, NoBlockageIndependentOfUsers) {
    for (double xi : {0.25, 0.5, 1.0})
        for (int lag : {1, 2}) {
            const auto s = fig2().with_obstacles(0.0).with_activity(xi);
            for (const auto& p : measurement_grid(50)) {
                const double r1 = s.with_users(1).rho(p, lag);
                EXPECT_NEAR(s.with_users(10).rho(p, lag), r1, 1e-12);
                EXPECT_NEAR(s.with_users(100).rho(p, lag), r1, 1e-12);
                EXPECT_LE(r1, xi / 2 + 1e-12);
                EXPECT_GE(r1, 0.0);
            }
        }
}

TEST(PearsonRho, NoBlockageHigherNearBoundary) {
    const auto s = fig2().with_obstacles(0.0);
    for (int lag : {1, 2}) EXPECT_GT(s.rho({1, 0.5}, lag), s.rho({25, 0.5}, lag));
}

TEST(PearsonRho, RationalFormMatchesDirect) {
    for (double no : {10.0, 40.0})
        for (int lag : {1, 2})
            for (const auto& p : measurement_grid(50)) {
                const auto s = fig2().with_obstacles(no);
                const auto c = s.coefficients(p, lag);
                for (double K : {2.0, 5.0, 50.0, 500.0}) EXPECT_NEAR(s.with_users(K).rho(p, lag), c.rho(K), 1e-10);
            }
}

TEST(PearsonRho, IncreasesWithUsers) {
    for (int u : {1, 2, 5})
        for (double no : {10.0, 40.0}) {
            const auto s = Scenario::mobile(fig3_network(u).with_obstacles(no));
            for (const auto& p : measurement_grid(50)) {
                const auto c = s.coefficients(p, 1);
                EXPECT_GT(c.c1, 0.0);
                EXPECT_GT(c.c2, 0.0);
                EXPECT_GE(c.c3, c.c1);
                for (int K = 2; K < 500; ++K) ASSERT_LT(c.rho(K), c.rho(K + 1)) << "u=" << u << " y=" << p.location();
            }
        }
}

TEST(PearsonRho, LargePopulationExpansion) {
    for (const auto& p : measurement_grid(50)) {
        const auto c = fig2().coefficients(p, 1);
        const double K = 1e6;
        EXPECT_NEAR(fig2().with_users(K).rho(p, 1), 1 - (c.c3 - c.c1) / (K * c.c2), 1e-5);
    }
}

TEST(PearsonRho, InUnitInterval) {
    for (double no : {0.0, 10.0, 40.0})
        for (double K : {1.0, 30.0, 300.0})
            for (int lag : {1, 2})
                for (const auto& p : measurement_grid(50)) {
                    const double r = fig2().with_obstacles(no).with_users(K).rho(p, lag);
                    EXPECT_GE(r, 0.0);
                    EXPECT_LE(r, 1.0);
                }
}

TEST(PearsonRho, SparseLimitBelowBaseline) {
    for (const auto& p : measurement_grid(50))
        EXPECT_LE(fig2().coefficients(p, 1).sparse_limit(), fig2().with_obstacles(0.0).rho(p, 1));
}

TEST(PearsonRho, ZeroVarianceIsUndefined) {
    EXPECT_THROW(fig2().with_users(0).rho({5, 0.5}, 1), UndefinedCorrelation);
    EXPECT_THROW(fig2().with_activity(0).rho({5, 0.5}, 1), UndefinedCorrelation);
}

// ---------------------------------------------------------------------------
// Crossover
// ---------------------------------------------------------------------------

TEST(Crossover, SignChangeAroundRoot) {
    for (double no : {10.0, 40.0})
        for (int lag : {1, 2})
            for (const auto& p : measurement_grid(50)) {
                const auto s = fig2().with_obstacles(no);
                const auto x = s.crossover(p, lag);
                ASSERT_TRUE(x.exists) << x.reason;
                EXPECT_GT(x.users, 1.0);
                EXPECT_NEAR(s.coefficients(p, lag).rho(x.users), x.baseline_rho, 1e-12);
                EXPECT_LT(s.with_users(x.users * 0.95).rho(p, lag), x.baseline_rho);
                EXPECT_GT(s.with_users(x.users * 1.05).rho(p, lag), x.baseline_rho);
            }
}

TEST(Crossover, DependsOnLocation) {
    const auto center = fig2().crossover({25, 0.5}, 1);
    const auto edge = fig2().crossover({1, 0.5}, 1);
    ASSERT_TRUE(center.exists && edge.exists);
    EXPECT_GT(std::abs(center.users - edge.users), 1.0);
}

TEST(Crossover, ReferencePopulationStraddlesRoot) {
    // K = 50: above the root at the center, below it at the boundary.
    const auto s = fig2();
    EXPECT_GT(s.rho({25, 0.5}, 1), s.with_obstacles(0).rho({25, 0.5}, 1));
    EXPECT_LT(s.rho({1, 0.5}, 1), s.with_obstacles(0).rho({1, 0.5}, 1));
}

TEST(Crossover, NoneWithoutBlockage) {
    for (const auto& p : measurement_grid(50)) {
        const auto x = fig2().with_obstacles(0.0).crossover(p, 1);
        EXPECT_FALSE(x.exists);
        EXPECT_FALSE(x.reason.empty());
    }
}

// ---------------------------------------------------------------------------
// Independent sampling oracle for the lag-1 cross moment on a small network
// ---------------------------------------------------------------------------

TEST(Oracle, SampledMomentsMatchClosedForm) {
    NetworkConfig cfg;
    cfg.mobility = {12, 1, 2};
    cfg.blockage = {3.0, 0.6, 12};
    cfg.pathloss = {2.0, 0.5};
    cfg.population = {3.0, 0.7};
    const auto s = Scenario::mobile(cfg);
    const MeasurementPoint p{4, 0.3};
    const double y = p.location();
    const auto& law = s.law(1);
    const auto pdf = s.pdf();

    std::mt19937_64 engine(99);
    std::discrete_distribution<int> start(pdf.begin(), pdf.end());
    std::vector<std::discrete_distribution<int>> step;
    for (int n = 1; n <= 12; ++n) {
        std::vector<double> row;
        for (int m = 1; m <= 12; ++m) row.push_back(law.transition(n, m));
        step.emplace_back(row.begin(), row.end());
    }
    std::poisson_distribution<int> users(cfg.population.mean_users);
    std::bernoulli_distribution active(cfg.population.activity);
    std::exponential_distribution<double> fading(1.0);

    oracle::Running now, later, cross, sq;
    for (int r = 0; r < 400000; ++r) {
        const auto field = sample_field(cfg.blockage, engine);
        double a = 0.0, b = 0.0;
        for (int k = users(engine); k > 0; --k) {
            const int x0 = start(engine) + 1;
            const int x1 = step[static_cast<std::size_t>(x0 - 1)](engine) + 1;
            if (active(engine)) a += fading(engine) * link_loss(field, x0, y) * cfg.pathloss.gain(std::abs(x0 - y));
            if (active(engine)) b += fading(engine) * link_loss(field, x1, y) * cfg.pathloss.gain(std::abs(x1 - y));
        }
        now.push(a);
        later.push(b);
        cross.push(a * b);
        sq.push(a * a);
    }
    const auto m = s.moments(p);
    const double K = cfg.population.mean_users, xi = cfg.population.activity;
    const double expected_cross = K * xi * xi * s.sigma_temporal(p, 1) + K * K * xi * xi * m.sigma;
    EXPECT_LE(std::abs(now.mean - m.mean), 4 * now.standard_error());
    EXPECT_LE(std::abs(later.mean - m.mean), 4 * later.standard_error());
    EXPECT_LE(std::abs(sq.mean - m.second_moment), 4 * sq.standard_error());
    EXPECT_LE(std::abs(cross.mean - expected_cross), 4 * cross.standard_error());
}
