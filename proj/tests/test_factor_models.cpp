#include <cmath>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "complab/errors.hpp"
#include "complab/factor_model.hpp"

namespace complab {
namespace {

using nlohmann::json;

FactorModel sv_example()
{
    return make_builtin_model("expou_sv",
                              json{{"s0", 100}, {"y0", std::log(0.2)}, {"kappa", 1.0},
                                   {"theta", std::log(0.2)}, {"gamma", 0.5}, {"rho", -0.5},
                                   {"r", 0.0}},
                              1.0);
}

TEST(Builtins, CorrelatedBmIdentity)
{
    auto const m = make_builtin_model("correlated_bm", json{{"d", 2}}, 1.0);
    EXPECT_EQ(m.dimension(), 2);
    Vector x(2);
    x << 1.0, 2.0;
    auto const c = eval_coefficients(m, 0.3, x);
    EXPECT_EQ(c.drift, Vector::Zero(2));
    EXPECT_EQ(c.diffusion, Matrix::Identity(2, 2));
}

TEST(Builtins, GbmLogModel)
{
    auto const m = make_builtin_model("gbm", json{{"s0", 100}, {"sigma", 0.2}, {"r", 0.0}}, 1.0);
    EXPECT_EQ(m.dimension(), 1);
    EXPECT_NEAR(m.x0()[0], std::log(100.0), 1e-15);
    ASSERT_TRUE(m.price_coordinate());
    EXPECT_EQ(*m.price_coordinate(), 0);
    for (double t : {0.0, 0.4, 1.0}) {
        for (double x : {3.0, 4.6, 5.5}) {
            auto const c = eval_coefficients(m, t, Vector::Constant(1, x));
            EXPECT_NEAR(c.drift[0], -0.02, 1e-15);
            EXPECT_NEAR(c.diffusion(0, 0), 0.2, 1e-15);
        }
    }
    EXPECT_NEAR(m.spot(), 100.0, 1e-12);
}

TEST(Builtins, ExpOuDiffusionAtStart)
{
    auto const m = sv_example();
    auto const c = eval_coefficients(m, 0.0, m.x0());
    EXPECT_NEAR(c.diffusion(0, 0), 0.2, 1e-14);
    EXPECT_NEAR(c.diffusion(0, 1), 0.0, 0.0);
    EXPECT_NEAR(c.diffusion(1, 0), -0.25, 1e-14);
    EXPECT_NEAR(c.diffusion(1, 1), 0.4330127, 1e-7);
    EXPECT_NEAR(c.drift[0], -0.02, 1e-14);
    EXPECT_NEAR(c.drift[1], 0.0, 1e-15);
}

TEST(Builtins, Errors)
{
    EXPECT_THROW(make_builtin_model("heston", json::object(), 1.0), ConfigError);
    EXPECT_THROW(make_builtin_model("correlated_bm",
                                    json{{"d", 2}, {"sigma", {{1, 1}, {1, 1}}}}, 1.0),
                 ConfigError);
    json p{{"s0", 100}, {"y0", -1.6}, {"kappa", 1}, {"theta", -1.6}, {"gamma", 0.5},
           {"rho", 1.0}};
    EXPECT_THROW(make_builtin_model("expou_sv", p, 1.0), ConfigError);
    p["rho"] = -0.5;
    p["gamma"] = 0.0;
    EXPECT_THROW(make_builtin_model("expou_sv", p, 1.0), ConfigError);
    EXPECT_THROW(make_builtin_model("gbm", json{{"s0", -1}, {"sigma", 0.2}}, 1.0), ConfigError);
}

TEST(Builtins, ModelFromJson)
{
    json const doc = json::parse(R"({"family": "expou_sv", "params": {"s0":100, "y0":-1.6094,
        "kappa":1.0, "theta":-1.6094, "gamma":0.5, "rho":-0.5, "r":0.0}, "horizon":1.0})");
    auto const m = model_from_json(doc);
    EXPECT_EQ(m.family(), "expou_sv");
    EXPECT_EQ(m.dimension(), 2);
    EXPECT_DOUBLE_EQ(m.horizon(), 1.0);
}

TEST(EvalCoefficients, PureAndChecked)
{
    auto const m = sv_example();
    Vector x(2);
    x << 4.7, -1.2;
    auto const a = eval_coefficients(m, 0.37, x);
    auto const b = eval_coefficients(m, 0.37, x);
    EXPECT_EQ(a.drift, b.drift);  // bit-equal
    EXPECT_EQ(a.diffusion, b.diffusion);
    EXPECT_THROW(eval_coefficients(m, 1.5, x), DomainError);
    EXPECT_THROW(eval_coefficients(m, -0.1, x), DomainError);
}

TEST(EvalCoefficients, OutsideBoundedDomain)
{
    FactorModel::Params p;
    p.drift = [](double, const Vector& x) { return Vector(Vector::Zero(x.size())); };
    p.diffusion = [](double, const Vector& x) { return Matrix(Matrix::Identity(x.size(), x.size())); };
    p.x0 = Vector::Constant(1, 0.5);
    p.domain = Box{Vector::Constant(1, 0.0), Vector::Constant(1, 1.0)};
    FactorModel const m(p);
    EXPECT_NO_THROW(eval_coefficients(m, 0.0, Vector::Constant(1, 0.9)));
    EXPECT_THROW(eval_coefficients(m, 0.0, Vector::Constant(1, 1.1)), DomainError);

    p.x0 = Vector::Constant(1, 1.0);  // on the boundary, not strictly inside
    EXPECT_THROW(FactorModel{p}, ConfigError);
}

TEST(Ellipticity, IdentityPasses)
{
    auto const m = make_builtin_model("correlated_bm", json{{"d", 2}}, 1.0);
    GridProbe g{Vector::Constant(2, -1.0), Vector::Constant(2, 1.0), 4, 2};
    auto const r = validate_ellipticity(m, g);
    EXPECT_TRUE(r.passed);
    EXPECT_NEAR(r.min_eigenvalue_ratio, 1.0, 1e-15);
    EXPECT_EQ(r.probed_points.size(), 4u * 4u * 2u);
    auto const rp = validate_ellipticity(m, PathProbe{50, 5, 1});
    EXPECT_TRUE(rp.passed);
}

TEST(Ellipticity, RankOneFailsEverywhere)
{
    FactorModel::Params p;
    p.drift = [](double, const Vector& x) { return Vector(Vector::Zero(x.size())); };
    p.diffusion = [](double, const Vector&) {
        Matrix s(2, 2);
        s << 1, 1, 1, 1;
        return s;
    };
    p.x0 = Vector::Zero(2);
    FactorModel const m(p);
    GridProbe g{Vector::Constant(2, -1.0), Vector::Constant(2, 1.0), 3, 2};
    auto const r = validate_ellipticity(m, g);
    EXPECT_FALSE(r.passed);
    EXPECT_EQ(r.failures.size(), r.probed_points.size());
    EXPECT_LE(r.min_eigenvalue_ratio, r.floor);
}

// passed <=> failures empty <=> min ratio > floor
TEST(Ellipticity, ReportConsistency)
{
    auto const m = sv_example();
    for (double floor : {1e-12, 0.2, 0.9}) {
        auto const r = validate_ellipticity(m, PathProbe{100, 10, 3}, floor);
        EXPECT_EQ(r.passed, r.failures.empty());
        EXPECT_EQ(r.passed, r.min_eigenvalue_ratio > floor);
    }
}

// The SV minimum ratio equals the closed-form 2x2 eigenvalue ratio over the probes.
TEST(Ellipticity, SvRatioMatchesClosedForm)
{
    auto const m = sv_example();
    auto const r = validate_ellipticity(m, PathProbe{1000, 10, 17});
    EXPECT_TRUE(r.passed);
    EXPECT_GE(r.probed_points.size(), 1000u);
    double expected = 1.0;
    for (auto const& p : r.probed_points) {
        Matrix const s = m.diffusion(p.t, p.x);
        Matrix const a = s * s.transpose();
        double const tr = a(0, 0) + a(1, 1);
        double const det = a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0);
        double const disc = std::sqrt(std::max(0.0, tr * tr / 4.0 - det));
        expected = std::min(expected, (tr / 2.0 - disc) / (tr / 2.0 + disc));
    }
    EXPECT_NEAR(r.min_eigenvalue_ratio, expected, 1e-10 * expected);
}

TEST(Ellipticity, BuiltinsPassOnPathProbes)
{
    std::vector<FactorModel> models{
        make_builtin_model("correlated_bm",
                           json{{"d", 2}, {"sigma", {{1.0, 0.0}, {0.6, 0.8}}}}, 1.0),
        make_builtin_model("gbm", json{{"s0", 100}, {"sigma", 0.2}, {"r", 0.05}}, 1.0),
        sv_example()};
    for (auto const& m : models) {
        auto const r = validate_ellipticity(m, PathProbe{100, 10, 5});
        EXPECT_EQ(r.probed_points.size(), 1000u) << m.family();
        EXPECT_TRUE(r.passed) << m.family();
    }
}

// sigma sigma^T of the log-coordinate model equals [[v^2, v g rho], [v g rho, g^2]].
TEST(StochVol, EmbeddingCovariance)
{
    StochVolModel sv;
    sv.vol_of_stock = [](double t, double s, double y) { return 0.1 + 0.05 * std::sin(y) + 0.01 * t + 1e-4 * s; };
    sv.vol_drift = [](double, double, double y) { return -y; };
    sv.vol_vol = [](double, double s, double) { return 0.3 + 1e-3 * s; };
    sv.correlation = [](double t, double, double) { return -0.7 + 0.1 * t; };
    sv.s0 = 100;
    sv.y0 = 0.1;
    auto const m = to_factor_model(sv);
    auto const r = validate_ellipticity(m, PathProbe{100, 10, 8});
    ASSERT_TRUE(r.passed);
    for (auto const& p : r.probed_points) {
        double const s = std::exp(p.x[0]);
        double const y = p.x[1];
        double const v = sv.vol_of_stock(p.t, s, y);
        double const g = sv.vol_vol(p.t, s, y);
        double const rho = sv.correlation(p.t, s, y);
        Matrix const d = m.diffusion(p.t, p.x);
        Matrix const a = d * d.transpose();
        EXPECT_NEAR(a(0, 0), v * v, 1e-14);
        EXPECT_NEAR(a(0, 1), v * g * rho, 1e-14);
        EXPECT_NEAR(a(1, 0), v * g * rho, 1e-14);
        EXPECT_NEAR(a(1, 1), g * g, 1e-14);
    }
}

TEST(BoxTest, Clamp)
{
    Box b{Vector::Constant(2, 0.0), Vector::Constant(2, 1.0)};
    Vector x(2);
    x << -0.5, 0.5;
    EXPECT_TRUE(b.clamp(x));
    EXPECT_EQ(x[0], 0.0);
    EXPECT_FALSE(b.clamp(x));
    EXPECT_TRUE(b.contains(x));
    EXPECT_FALSE(b.strictly_contains(x));
    auto const u = Box::unbounded(3);
    Vector y = Vector::Constant(3, 1e300);
    EXPECT_FALSE(u.clamp(y));
}

}  // namespace
}  // namespace complab
