#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "complab/errors.hpp"
#include "complab/factor_model.hpp"
#include "complab/path_engine.hpp"

namespace complab {
namespace {

using nlohmann::json;

FactorModel identity_bm(int d)
{
    return make_builtin_model("correlated_bm", json{{"d", d}}, 1.0);
}

FactorModel gbm(double sigma, double r)
{
    return make_builtin_model("gbm", json{{"s0", 100}, {"sigma", sigma}, {"r", r}}, 1.0);
}

FactorModel sv()
{
    return make_builtin_model("expou_sv",
                              json{{"s0", 100}, {"y0", std::log(0.2)}, {"kappa", 1.0},
                                   {"theta", std::log(0.2)}, {"gamma", 0.5}, {"rho", -0.5}},
                              1.0);
}

TEST(SimulatePaths, OneStepIsStartPlusIncrement)
{
    auto const m = identity_bm(2);
    for (std::uint64_t seed : {0ull, 1ull, 987654321ull}) {
        auto const p = simulate_paths(m, 1, 1, seed);
        for (int i = 0; i < 2; ++i) {
            EXPECT_EQ(p.state(0, 1)[i], m.x0()[i] + p.increment(0, 0)[i]);
        }
    }
}

TEST(SimulatePaths, StartsAtX0AndUsesUniformGrid)
{
    auto const m = sv();
    auto const p = simulate_paths(m, 20, 8, 4);
    for (std::size_t n = 0; n < p.n_paths(); ++n) {
        EXPECT_EQ(p.state_vector(n, 0), m.x0());
    }
    ASSERT_EQ(p.times().size(), 9u);
    EXPECT_EQ(p.time(0), 0.0);
    EXPECT_EQ(p.time(8), 1.0);
    EXPECT_DOUBLE_EQ(p.time(3), 0.375);
}

TEST(SimulatePaths, GbmLogReturnMean)
{
    auto const m = gbm(0.2, 0.0);
    constexpr std::size_t n = 100000;
    auto const p = simulate_paths(m, n, 10, 12345, {.store_increments = false});
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sum += p.state(i, 10)[0] - p.state(i, 0)[0];
    }
    EXPECT_NEAR(sum / n, -0.02, 3.0 * 0.2 / std::sqrt(double(n)));
}

// Replaying x_{k+1} = x_k + m dt + sigma dW from the recorded increments.
TEST(SimulatePaths, ReconstructionIsBitExact)
{
    for (auto const& m : {sv(), gbm(0.3, 0.05), identity_bm(3)}) {
        auto const p = simulate_paths(m, 50, 40, 99);
        int const d = m.dimension();
        double const dt = p.dt();
        for (std::size_t n = 0; n < p.n_paths(); ++n) {
            for (std::size_t k = 0; k < p.n_steps(); ++k) {
                Vector const x = p.state_vector(n, k);
                Vector const mu = m.drift(p.time(k), x);
                Matrix const s = m.diffusion(p.time(k), x);
                for (int i = 0; i < d; ++i) {
                    double noise = 0.0;
                    for (int j = 0; j < d; ++j) {
                        noise += s(i, j) * p.increment(n, k)[j];
                    }
                    ASSERT_EQ(p.state(n, k + 1)[i], x[i] + mu[i] * dt + noise)
                        << m.family() << " path " << n << " step " << k;
                }
            }
        }
    }
}

TEST(SimulatePaths, ParallelMatchesReference)
{
    for (auto const& m : {sv(), gbm(0.2, 0.0), identity_bm(2)}) {
        auto const a = simulate_paths(m, 257, 33, 2024);
        auto const b = reference::simulate_paths(m, 257, 33, 2024);
        EXPECT_EQ(a.states(), b.states()) << m.family();
        EXPECT_EQ(a.increments(), b.increments()) << m.family();
        EXPECT_EQ(a.flagged_count(), b.flagged_count());
    }
}

TEST(SimulatePaths, Deterministic)
{
    auto const m = sv();
    auto const a = simulate_paths(m, 100, 50, 77);
    auto const b = simulate_paths(m, 100, 50, 77);
    auto const c = simulate_paths(m, 100, 50, 78);
    EXPECT_EQ(a.states(), b.states());
    EXPECT_NE(a.states(), c.states());
}

// A path's draws do not depend on how many paths are simulated.
TEST(SimulatePaths, PathPrefixStable)
{
    auto const m = sv();
    auto const a = simulate_paths(m, 10, 20, 5);
    auto const b = simulate_paths(m, 30, 20, 5);
    for (std::size_t n = 0; n < 10; ++n) {
        for (std::size_t k = 0; k <= 20; ++k) {
            EXPECT_EQ(a.state_vector(n, k), b.state_vector(n, k));
        }
    }
}

TEST(SimulatePaths, IncrementMomentsAndGaussianity)
{
    auto const m = identity_bm(2);
    auto const p = simulate_paths(m, 1000, 500, 31337);
    double const sdt = std::sqrt(p.dt());
    auto const& dw = p.increments();
    ASSERT_EQ(dw.size(), 1000000u);
    double m1 = 0, cross = 0;
    for (std::size_t i = 0; i < dw.size(); i += 2) {
        cross += dw[i] * dw[i + 1] / p.dt();
    }
    for (double v : dw) {
        m1 += v / sdt;
    }
    double const n = double(dw.size());
    m1 /= n;
    double m2 = 0, m3 = 0, m4 = 0;
    for (double v : dw) {
        double const c = v / sdt - m1;
        m2 += c * c;
        m3 += c * c * c;
        m4 += c * c * c * c;
    }
    m2 /= n;
    m3 /= n;
    m4 /= n;
    EXPECT_NEAR(m1, 0.0, 5.0 / std::sqrt(n));
    EXPECT_NEAR(m2, 1.0, 5.0 * std::sqrt(2.0 / n));
    EXPECT_NEAR(cross / (n / 2), 0.0, 5.0 / std::sqrt(n / 2));
    EXPECT_LT(std::abs(m3 / std::pow(m2, 1.5)), 0.05);
    EXPECT_LT(std::abs(m4 / (m2 * m2) - 3.0), 0.1);
}

TEST(SimulatePaths, Preconditions)
{
    auto const m = identity_bm(1);
    EXPECT_THROW(simulate_paths(m, 0, 10, 1), ConfigError);
    EXPECT_THROW(simulate_paths(m, 10, 0, 1), ConfigError);
}

TEST(SimulatePaths, ClampedPathsAreFlagged)
{
    FactorModel::Params params;
    params.drift = [](double, const Vector& x) { return Vector(Vector::Zero(x.size())); };
    params.diffusion = [](double, const Vector& x) {
        return Matrix(Matrix::Identity(x.size(), x.size()));
    };
    params.x0 = Vector::Zero(1);
    params.domain = Box{Vector::Constant(1, -0.5), Vector::Constant(1, 0.5)};
    FactorModel const m(params);
    auto const p = simulate_paths(m, 1000, 50, 3);
    EXPECT_GT(p.flagged_count(), 1u);
    EXPECT_TRUE(p.boundary_warning());
    for (double v : p.states()) {
        ASSERT_LE(std::abs(v), 0.5);
    }
    auto const r = reference::simulate_paths(m, 1000, 50, 3);
    EXPECT_EQ(p.states(), r.states());
    EXPECT_EQ(p.flagged_count(), r.flagged_count());

    auto const free = simulate_paths(identity_bm(1), 1000, 50, 3);
    EXPECT_EQ(free.flagged_count(), 0u);
    EXPECT_FALSE(free.boundary_warning());
}

TEST(QuadraticVariation, GbmTerminalMean)
{
    auto const m = gbm(0.2, 0.0);
    auto const p = simulate_paths(m, 10000, 2000, 8, {.store_increments = false});
    auto const qv = quadratic_variation(p, 0);
    double sum = 0.0;
    for (std::size_t n = 0; n < qv.n_paths(); ++n) {
        sum += qv.terminal(n);
    }
    EXPECT_NEAR(sum / qv.n_paths(), 0.04, 0.01 * 0.04);
}

TEST(QuadraticVariation, NondecreasingFromZero)
{
    auto const p = simulate_paths(sv(), 200, 100, 6);
    auto const qv = quadratic_variation(p, 0);
    for (std::size_t n = 0; n < qv.n_paths(); ++n) {
        ASSERT_EQ(qv.at(n, 0), 0.0);
        for (std::size_t k = 0; k < p.n_steps(); ++k) {
            ASSERT_LE(qv.at(n, k), qv.at(n, k + 1));
        }
    }
}

TEST(QuadraticVariation, ZeroIncrementsGiveZeroTrack)
{
    PathSet p("custom", 1, 3, 5, 1.0, Vector::Constant(1, 2.0), 0, false);
    for (std::size_t n = 0; n < 3; ++n) {
        for (std::size_t k = 0; k <= 5; ++k) {
            p.state(n, k)[0] = 2.0;
        }
    }
    auto const qv = quadratic_variation(p, 0);
    for (std::size_t n = 0; n < 3; ++n) {
        for (std::size_t k = 0; k <= 5; ++k) {
            EXPECT_EQ(qv.at(n, k), 0.0);
        }
    }
    EXPECT_THROW(quadratic_variation(p, 1), ConfigError);
}

// Euler log-price increments are N(m dt, sigma^2 dt) with m = r - sigma^2/2, so
// E[sum dx^2] - sigma^2 T = m^2 T dt. The drift is large to lift the bias above
// the Monte Carlo noise.
TEST(QuadraticVariation, BiasHalvesWithStep)
{
    double const sigma = 0.2;
    double const r = 1.0;
    double const drift = r - 0.5 * sigma * sigma;
    auto const m = gbm(sigma, r);
    std::vector<double> bias;
    for (std::size_t steps : {50u, 100u, 200u}) {
        auto const p = simulate_paths(m, 10000, steps, 21, {.store_increments = false});
        auto const qv = quadratic_variation(p, 0);
        double sum = 0.0;
        for (std::size_t n = 0; n < qv.n_paths(); ++n) {
            sum += qv.terminal(n);
        }
        double const b = sum / qv.n_paths() - sigma * sigma;
        double const dt = 1.0 / double(steps);
        double const se = sigma * sigma * std::sqrt(2.0 * dt) / 100.0;
        EXPECT_NEAR(b, drift * drift * dt, 5.0 * se) << steps;
        bias.push_back(b);
    }
    EXPECT_NEAR(bias[0] / bias[1], 2.0, 0.1);
    EXPECT_NEAR(bias[1] / bias[2], 2.0, 0.1);
}

TEST(PathsCsv, Columns)
{
    auto const p = simulate_paths(identity_bm(2), 2, 3, 1);
    std::ostringstream out;
    write_paths_csv(p, out, true);
    std::istringstream in(out.str());
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "path,step,t,xi_1,xi_2,dW_1,dW_2");
    int rows = 0;
    while (std::getline(in, line)) {
        ++rows;
    }
    EXPECT_EQ(rows, 2 * 4);

    auto const bare = simulate_paths(identity_bm(2), 2, 3, 1, {.store_increments = false});
    std::ostringstream out2;
    EXPECT_THROW(write_paths_csv(bare, out2, true), ConfigError);
}

}  // namespace
}  // namespace complab
