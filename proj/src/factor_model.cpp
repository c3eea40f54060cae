#include "complab/factor_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "complab/errors.hpp"
#include "complab/path_engine.hpp"

namespace complab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool all_finite(const Vector& v) { return v.allFinite(); }

std::string describe(double t, const Vector& x)
{
    std::ostringstream os;
    os << "(t=" << t << ", x=[";
    for (int i = 0; i < x.size(); ++i) {
        os << (i ? ", " : "") << x[i];
    }
    os << "])";
    return os.str();
}

double require_number(const nlohmann::json& params, const char* key)
{
    if (!params.contains(key) || !params.at(key).is_number()) {
        throw ConfigError(std::string("model params: missing numeric field '") + key + "'");
    }
    return params.at(key).get<double>();
}

double number_or(const nlohmann::json& params, const char* key, double fallback)
{
    if (!params.contains(key)) {
        return fallback;
    }
    if (!params.at(key).is_number()) {
        throw ConfigError(std::string("model params: field '") + key + "' must be a number");
    }
    return params.at(key).get<double>();
}

Matrix parse_sigma(const nlohmann::json& value, int dim)
{
    Matrix sigma = Matrix::Zero(dim, dim);
    if (value.is_number()) {
        sigma = value.get<double>() * Matrix::Identity(dim, dim);
        return sigma;
    }
    if (!value.is_array() || static_cast<int>(value.size()) != dim) {
        throw ConfigError("correlated_bm: 'sigma' must be a number or a d x d array");
    }
    for (int i = 0; i < dim; ++i) {
        auto const& row = value.at(i);
        if (!row.is_array() || static_cast<int>(row.size()) != dim) {
            throw ConfigError("correlated_bm: 'sigma' must be a number or a d x d array");
        }
        for (int j = 0; j < dim; ++j) {
            if (!row.at(j).is_number()) {
                throw ConfigError("correlated_bm: 'sigma' entries must be numbers");
            }
            sigma(i, j) = row.at(j).get<double>();
        }
    }
    return sigma;
}

FactorModel make_correlated_bm(const nlohmann::json& params, double horizon)
{
    if (!params.contains("d") || !params.at("d").is_number_integer()) {
        throw ConfigError("correlated_bm: missing integer field 'd'");
    }
    int const dim = params.at("d").get<int>();
    if (dim < 1 || dim > kMaxFactors) {
        throw ConfigError("correlated_bm: d must be in [1, " + std::to_string(kMaxFactors) + "]");
    }
    Matrix const sigma = params.contains("sigma") ? parse_sigma(params.at("sigma"), dim)
                                                  : Matrix(Matrix::Identity(dim, dim));
    if (!(eigenvalue_ratio(sigma) > kDefaultEllipticityFloor)) {
        throw ConfigError("correlated_bm: sigma sigma^T is not positive definite");
    }
    Vector x0 = Vector::Zero(dim);
    if (params.contains("x0")) {
        auto const& arr = params.at("x0");
        if (!arr.is_array() || static_cast<int>(arr.size()) != dim) {
            throw ConfigError("correlated_bm: 'x0' must be an array of length d");
        }
        for (int i = 0; i < dim; ++i) {
            x0[i] = arr.at(i).get<double>();
        }
    }
    double const rate = number_or(params, "r", 0.0);
    if (rate < 0.0) {
        throw ConfigError("correlated_bm: r must be non-negative");
    }

    FactorModel::Params p;
    p.family = "correlated_bm";
    p.drift = [dim](double, const Vector&) { return Vector(Vector::Zero(dim)); };
    p.diffusion = [sigma](double, const Vector&) { return sigma; };
    p.rate = rate;
    p.x0 = x0;
    p.horizon = horizon;
    p.time_homogeneous = true;
    return FactorModel(std::move(p));
}

FactorModel make_gbm(const nlohmann::json& params, double horizon)
{
    double const s0 = require_number(params, "s0");
    double const sigma = require_number(params, "sigma");
    double const rate = number_or(params, "r", 0.0);
    if (!(s0 > 0.0)) {
        throw ConfigError("gbm: s0 must be positive");
    }
    if (!(sigma > 0.0)) {
        throw ConfigError("gbm: sigma must be positive");
    }
    if (rate < 0.0) {
        throw ConfigError("gbm: r must be non-negative");
    }
    double const mu = rate - 0.5 * sigma * sigma;

    FactorModel::Params p;
    p.family = "gbm";
    p.drift = [mu](double, const Vector&) { return Vector(Vector::Constant(1, mu)); };
    p.diffusion = [sigma](double, const Vector&) { return Matrix(Matrix::Constant(1, 1, sigma)); };
    p.rate = rate;
    p.x0 = Vector::Constant(1, std::log(s0));
    p.horizon = horizon;
    p.price_coordinate = 0;
    p.time_homogeneous = true;
    return FactorModel(std::move(p));
}

}  // namespace

//---------------------------------------------------------------------------//
Box Box::unbounded(int dim)
{
    return Box{Vector::Constant(dim, -kInf), Vector::Constant(dim, kInf)};
}

bool Box::contains(const Vector& x) const
{
    for (int i = 0; i < x.size(); ++i) {
        if (!(x[i] >= lower[i] && x[i] <= upper[i])) {
            return false;
        }
    }
    return true;
}

bool Box::strictly_contains(const Vector& x) const
{
    for (int i = 0; i < x.size(); ++i) {
        if (!(x[i] > lower[i] && x[i] < upper[i])) {
            return false;
        }
    }
    return true;
}

bool Box::clamp(Vector& x) const
{
    bool moved = false;
    for (int i = 0; i < x.size(); ++i) {
        if (x[i] < lower[i]) {
            x[i] = lower[i];
            moved = true;
        }
        else if (x[i] > upper[i]) {
            x[i] = upper[i];
            moved = true;
        }
    }
    return moved;
}

//---------------------------------------------------------------------------//
FactorModel::FactorModel(Params params) : params_(std::move(params))
{
    int const dim = static_cast<int>(params_.x0.size());
    if (dim < 1 || dim > kMaxFactors) {
        throw ConfigError("factor model: dimension must be in [1, " + std::to_string(kMaxFactors)
                          + "]");
    }
    if (!params_.drift || !params_.diffusion) {
        throw ConfigError("factor model: drift and diffusion must be set");
    }
    if (!(params_.horizon > 0.0) || !std::isfinite(params_.horizon)) {
        throw ConfigError("factor model: horizon must be a positive finite time");
    }
    if (!(params_.rate >= 0.0) || !std::isfinite(params_.rate)) {
        throw ConfigError("factor model: rate must be a non-negative finite number");
    }
    if (!params_.domain) {
        params_.domain = Box::unbounded(dim);
    }
    if (params_.domain->dimension() != dim || params_.domain->upper.size() != dim) {
        throw ConfigError("factor model: domain dimension does not match x0");
    }
    if (!params_.domain->strictly_contains(params_.x0)) {
        throw ConfigError("factor model: x0 must lie strictly inside the domain");
    }
    if (params_.price_coordinate
        && (*params_.price_coordinate < 0 || *params_.price_coordinate >= dim)) {
        throw ConfigError("factor model: price coordinate out of range");
    }
}

double FactorModel::spot() const
{
    if (!params_.price_coordinate) {
        throw ConfigError("model '" + params_.family + "' has no designated price coordinate");
    }
    return std::exp(params_.x0[*params_.price_coordinate]);
}

Coefficients eval_coefficients(const FactorModel& model, double t, const Vector& x)
{
    if (x.size() != model.dimension()) {
        throw DomainError("eval_coefficients: state has wrong dimension");
    }
    if (!(t >= 0.0 && t <= model.horizon())) {
        throw DomainError("eval_coefficients: time outside [0, T] at " + describe(t, x));
    }
    if (!model.domain().contains(x)) {
        throw DomainError("eval_coefficients: state outside the domain at " + describe(t, x));
    }
    return Coefficients{model.drift(t, x), model.diffusion(t, x)};
}

//---------------------------------------------------------------------------//
FactorModel to_factor_model(const StochVolModel& sv)
{
    if (!sv.vol_of_stock || !sv.vol_drift || !sv.vol_vol || !sv.correlation) {
        throw ConfigError("stochastic volatility model: all coefficient functions must be set");
    }
    if (!(sv.s0 > 0.0)) {
        throw ConfigError("stochastic volatility model: s0 must be positive");
    }
    double const rate = sv.rate;
    FactorModel::Params p;
    p.family = sv.family;
    p.drift = [vol = sv.vol_of_stock, eta = sv.vol_drift, rate](double t, const Vector& x) {
        double const s = std::exp(x[0]);
        double const v = vol(t, s, x[1]);
        Vector m(2);
        m << rate - 0.5 * v * v, eta(t, s, x[1]);
        return m;
    };
    p.diffusion = [vol = sv.vol_of_stock, gamma = sv.vol_vol, rho = sv.correlation](
                      double t, const Vector& x) {
        double const s = std::exp(x[0]);
        double const g = gamma(t, s, x[1]);
        double const c = rho(t, s, x[1]);
        Matrix sigma(2, 2);
        sigma << vol(t, s, x[1]), 0.0, g * c, g * std::sqrt(std::max(0.0, 1.0 - c * c));
        return sigma;
    };
    p.rate = rate;
    p.x0 = Vector(2);
    p.x0 << std::log(sv.s0), sv.y0;
    p.horizon = sv.horizon;
    p.price_coordinate = 0;
    p.time_homogeneous = sv.time_homogeneous;
    return FactorModel(std::move(p));
}

StochVolModel make_expou_sv(double s0, double y0, double kappa, double theta, double gamma,
                            double rho, double rate, double horizon)
{
    if (!(std::abs(rho) < 1.0)) {
        throw ConfigError("expou_sv: |rho| must be < 1");
    }
    if (!(gamma > 0.0)) {
        throw ConfigError("expou_sv: gamma must be positive");
    }
    if (!(s0 > 0.0)) {
        throw ConfigError("expou_sv: s0 must be positive");
    }
    if (rate < 0.0) {
        throw ConfigError("expou_sv: r must be non-negative");
    }
    StochVolModel sv;
    sv.vol_of_stock = [](double, double, double y) { return std::exp(y); };
    sv.vol_drift = [kappa, theta](double, double, double y) { return kappa * (theta - y); };
    sv.vol_vol = [gamma](double, double, double) { return gamma; };
    sv.correlation = [rho](double, double, double) { return rho; };
    sv.s0 = s0;
    sv.y0 = y0;
    sv.rate = rate;
    sv.horizon = horizon;
    sv.family = "expou_sv";
    sv.time_homogeneous = true;
    return sv;
}

FactorModel make_builtin_model(const std::string& family, const nlohmann::json& params,
                               double horizon)
{
    if (!params.is_object()) {
        throw ConfigError("model 'params' must be a JSON object");
    }
    if (family == "correlated_bm") {
        return make_correlated_bm(params, horizon);
    }
    if (family == "gbm") {
        return make_gbm(params, horizon);
    }
    if (family == "expou_sv") {
        return to_factor_model(make_expou_sv(
            require_number(params, "s0"), require_number(params, "y0"),
            require_number(params, "kappa"), require_number(params, "theta"),
            require_number(params, "gamma"), require_number(params, "rho"),
            number_or(params, "r", 0.0), horizon));
    }
    throw ConfigError("unknown model family '" + family + "'");
}

FactorModel model_from_json(const nlohmann::json& doc)
{
    if (!doc.is_object() || !doc.contains("family") || !doc.at("family").is_string()) {
        throw ConfigError("model: missing string field 'family'");
    }
    double const horizon = number_or(doc, "horizon", 1.0);
    nlohmann::json const params = doc.contains("params") ? doc.at("params") : nlohmann::json::object();
    return make_builtin_model(doc.at("family").get<std::string>(), params, horizon);
}

//---------------------------------------------------------------------------//
double eigenvalue_ratio(const Matrix& diffusion)
{
    if (!diffusion.allFinite()) {
        return 0.0;
    }
    Matrix const a = diffusion * diffusion.transpose();
    Eigen::SelfAdjointEigenSolver<Matrix> solver(a, Eigen::EigenvaluesOnly);
    auto const& ev = solver.eigenvalues();  // ascending
    double const lo = ev[0];
    double const hi = ev[ev.size() - 1];
    if (!(hi > 0.0) || !(lo > 0.0)) {
        return 0.0;
    }
    return lo / hi;
}

namespace {

std::vector<SpacePoint> grid_probe_points(const FactorModel& model, const GridProbe& grid)
{
    int const dim = model.dimension();
    if (grid.lower.size() != dim || grid.upper.size() != dim) {
        throw ConfigError("grid probe: bounds have wrong dimension");
    }
    if (grid.nodes_per_axis < 1 || grid.time_nodes < 1) {
        throw ConfigError("grid probe: node counts must be positive");
    }
    std::vector<SpacePoint> points;
    auto coord = [](double lo, double hi, int i, int n) {
        return n == 1 ? 0.5 * (lo + hi) : lo + (hi - lo) * i / (n - 1);
    };
    std::size_t total = 1;
    for (int k = 0; k < dim; ++k) {
        total *= static_cast<std::size_t>(grid.nodes_per_axis);
    }
    for (int ti = 0; ti < grid.time_nodes; ++ti) {
        double const t = coord(0.0, model.horizon(), ti, grid.time_nodes);
        for (std::size_t flat = 0; flat < total; ++flat) {
            Vector x(dim);
            std::size_t rest = flat;
            for (int k = 0; k < dim; ++k) {
                int const i = static_cast<int>(rest % grid.nodes_per_axis);
                rest /= grid.nodes_per_axis;
                x[k] = coord(grid.lower[k], grid.upper[k], i, grid.nodes_per_axis);
            }
            points.push_back({t, x});
        }
    }
    return points;
}

std::vector<SpacePoint> path_probe_points(const FactorModel& model, const PathProbe& probe)
{
    PathOptions options;
    options.store_increments = false;
    auto const paths = simulate_paths(model, probe.n_paths, probe.n_steps, probe.seed, options);
    std::vector<SpacePoint> points;
    points.reserve(paths.n_paths() * paths.n_steps());
    for (std::size_t n = 0; n < paths.n_paths(); ++n) {
        for (std::size_t k = 1; k <= paths.n_steps(); ++k) {
            points.push_back({paths.time(k), paths.state_vector(n, k)});
        }
    }
    return points;
}

}  // namespace

ModelValidationReport validate_ellipticity(const FactorModel& model, const ProbePlan& probes,
                                           double floor)
{
    ModelValidationReport report;
    report.floor = floor;
    report.probed_points = std::visit(
        [&](const auto& plan) {
            using Plan = std::decay_t<decltype(plan)>;
            if constexpr (std::is_same_v<Plan, GridProbe>) {
                return grid_probe_points(model, plan);
            }
            else {
                return path_probe_points(model, plan);
            }
        },
        probes);

    report.min_eigenvalue_ratio = kInf;
    for (auto const& p : report.probed_points) {
        double ratio = 0.0;
        if (model.domain().contains(p.x)) {
            Vector const m = model.drift(p.t, p.x);
            Matrix const s = model.diffusion(p.t, p.x);
            ratio = all_finite(m) ? eigenvalue_ratio(s) : 0.0;
        }
        report.min_eigenvalue_ratio = std::min(report.min_eigenvalue_ratio, ratio);
        if (!(ratio > floor)) {
            report.failures.push_back(p);
        }
    }
    if (report.probed_points.empty()) {
        report.min_eigenvalue_ratio = 0.0;
    }
    report.passed = report.failures.empty() && !report.probed_points.empty();
    return report;
}

}  // namespace complab
