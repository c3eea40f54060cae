#include "complab/hedging.hpp"

#include <algorithm>
#include <cmath>
#include <exception>

#include <Eigen/LU>
#include <Eigen/SVD>

#include "complab/errors.hpp"

namespace complab {

Vector representation_integrand(const Pricer& claim, double t, const Vector& x)
{
    return claim.gradient(t, x).value;
}

StrategyWeights strategy_weights(const JacobianEvaluation& jacobian, const Vector& chi,
                                 double pseudo_inverse_threshold, SingularFallback fallback)
{
    auto const d = jacobian.G.rows();
    if (chi.size() != d) {
        throw ConfigError("strategy: integrand has wrong dimension");
    }
    StrategyWeights w;
    if (jacobian.is_singular && fallback == SingularFallback::zero) {
        w.alpha = Vector::Zero(d);
        w.event = StrategyEvent::singular;
        return w;
    }
    if (jacobian.is_singular || jacobian.singularity_ratio < pseudo_inverse_threshold) {
        // alpha = chi V S^+ U^T with singular values below the threshold dropped.
        Eigen::JacobiSVD<Matrix> svd(jacobian.G, Eigen::ComputeFullU | Eigen::ComputeFullV);
        auto const& s = svd.singularValues();
        Vector coeff = svd.matrixV().transpose() * chi;
        for (Eigen::Index j = 0; j < d; ++j) {
            coeff[j] = s[j] > 0.0 && s[j] >= pseudo_inverse_threshold * s[0] ? coeff[j] / s[j] : 0.0;
        }
        w.alpha = s[0] > 0.0 ? Vector(svd.matrixU() * coeff) : Vector(Vector::Zero(d));
        w.event = jacobian.is_singular ? StrategyEvent::singular : StrategyEvent::pseudo_inverse;
        return w;
    }
    // alpha G = chi  <=>  G^T alpha^T = chi^T
    Matrix const gt = jacobian.G.transpose();
    w.alpha = gt.partialPivLu().solve(chi);
    return w;
}

//---------------------------------------------------------------------------//
namespace {

struct HedgeSetup {
    std::size_t stride = 1;
    std::size_t rebalances = 0;
    double initial_wealth = 0.0;
};

HedgeSetup prepare(const FactorModel& model, const std::vector<PricerPtr>& assets,
                   const PricerPtr& claim, const PathSet& paths, const HedgeOptions& options)
{
    if (!claim) {
        throw ConfigError("hedge: missing claim");
    }
    if (assets.size() != static_cast<std::size_t>(model.dimension())) {
        throw ConfigError("hedge: need exactly one traded asset per factor");
    }
    if (std::abs(claim->maturity() - model.horizon()) > 1e-12 * std::max(1.0, model.horizon())) {
        throw ConfigError("hedge: claim maturity must equal the model horizon");
    }
    if (paths.dimension() != model.dimension() || paths.model_family() != model.family()
        || std::abs(paths.horizon() - model.horizon()) > 1e-12 * std::max(1.0, model.horizon())
        || paths.x0() != model.x0()) {
        throw ConfigError("hedge: path set was not simulated from this model");
    }
    if (options.rebalance_steps < 1 || paths.n_steps() % options.rebalance_steps != 0) {
        throw ConfigError("hedge: rebalance steps (" + std::to_string(options.rebalance_steps)
                          + ") must divide the path steps ("
                          + std::to_string(paths.n_steps()) + ")");
    }
    HedgeSetup s;
    s.rebalances = options.rebalance_steps;
    s.stride = paths.n_steps() / options.rebalance_steps;
    s.initial_wealth = claim->value(0.0, model.x0());
    return s;
}

struct PathHedge {
    double discounted_wealth = 0.0;
    double terminal_error = 0.0;
    std::size_t singular = 0;
    std::size_t pseudo_inverse = 0;
    std::size_t flagged = 0;
};

PathHedge hedge_path(const FactorModel& model, const std::vector<PricerPtr>& assets,
                     const Pricer& claim, const PathSet& paths, const HedgeOptions& options,
                     const HedgeSetup& setup, std::size_t path, HedgePlan* plan)
{
    int const dim = model.dimension();
    double const r = model.rate();
    PathHedge out;
    double wealth = setup.initial_wealth;

    Vector current(dim);
    {
        double const t0 = paths.time(0);
        Vector const x0 = paths.state_vector(path, 0);
        for (int i = 0; i < dim; ++i) {
            current[i] = std::exp(-r * t0) * assets[static_cast<std::size_t>(i)]->value(t0, x0);
        }
    }
    Vector next(dim);
    for (std::size_t k = 0; k < setup.rebalances; ++k) {
        std::size_t const step = k * setup.stride;
        std::size_t const step_next = step + setup.stride;
        double const t = paths.time(step);
        double const t_next = paths.time(step_next);
        Vector const x = paths.state_vector(path, step);
        Vector const x_next = paths.state_vector(path, step_next);

        auto const ev = build_G(assets, t, x, options.tolerance);
        auto const chi_grad = claim.gradient(t, x);
        out.flagged += (ev.flagged || chi_grad.flagged) ? 1 : 0;
        auto const sw = strategy_weights(ev, chi_grad.value, options.pseudo_inverse_threshold,
                                         options.singular_fallback);
        out.singular += sw.event == StrategyEvent::singular ? 1 : 0;
        out.pseudo_inverse += sw.event == StrategyEvent::pseudo_inverse ? 1 : 0;

        for (int i = 0; i < dim; ++i) {
            next[i] = std::exp(-r * t_next)
                      * assets[static_cast<std::size_t>(i)]->value(t_next, x_next);
        }
        for (int i = 0; i < dim; ++i) {
            double const increment = next[i] - current[i];
            wealth += sw.alpha[i] * increment;
            if (plan) {
                std::size_t const at
                    = (path * plan->n_rebalances + k) * static_cast<std::size_t>(dim)
                      + static_cast<std::size_t>(i);
                plan->alpha[at] = sw.alpha[i];
                plan->chi[at] = chi_grad.value[i];
                plan->discounted_increments[at] = increment;
            }
        }
        current = next;
    }
    double const horizon = paths.horizon();
    out.discounted_wealth = wealth;
    out.terminal_error = claim.payoff(paths.state_vector(path, paths.n_steps()))
                         - std::exp(r * horizon) * wealth;
    return out;
}

HedgeReport assemble(const HedgeSetup& setup, const PathSet& paths, std::vector<PathHedge> rows,
                     HedgePlan plan)
{
    HedgeReport report;
    report.rebalance_steps = setup.rebalances;
    report.dt = paths.horizon() / static_cast<double>(setup.rebalances);
    report.initial_wealth = setup.initial_wealth;
    std::size_t const n = rows.size();
    report.terminal_errors.resize(n);
    report.discounted_wealth.resize(n);
    report.singular_events.resize(n);
    double sum = 0.0;
    double sum_sq = 0.0;
    for (std::size_t p = 0; p < n; ++p) {
        double const e = rows[p].terminal_error;
        report.terminal_errors[p] = e;
        report.discounted_wealth[p] = rows[p].discounted_wealth;
        report.singular_events[p] = rows[p].singular;
        report.pseudo_inverse_events += rows[p].pseudo_inverse;
        report.flagged_gradients += rows[p].flagged;
        sum += e;
        sum_sq += e * e;
        report.max_abs_error = std::max(report.max_abs_error, std::abs(e));
    }
    report.mean_error = sum / static_cast<double>(n);
    report.rms_error = std::sqrt(sum_sq / static_cast<double>(n));
    report.plan = std::move(plan);
    return report;
}

HedgePlan make_plan(const HedgeOptions& options, const HedgeSetup& setup, const PathSet& paths,
                    int dim)
{
    HedgePlan plan;
    if (!options.record_strategy) {
        return plan;
    }
    plan.n_paths = paths.n_paths();
    plan.n_rebalances = setup.rebalances;
    plan.dim = dim;
    std::size_t const size = plan.n_paths * plan.n_rebalances * static_cast<std::size_t>(dim);
    plan.alpha.assign(size, 0.0);
    plan.chi.assign(size, 0.0);
    plan.discounted_increments.assign(size, 0.0);
    return plan;
}

}  // namespace

HedgeReport replicate(const FactorModel& model, const std::vector<PricerPtr>& assets,
                      const PricerPtr& claim, const PathSet& paths, const HedgeOptions& options)
{
    auto const setup = prepare(model, assets, claim, paths, options);
    HedgePlan plan = make_plan(options, setup, paths, model.dimension());
    HedgePlan* plan_ptr = options.record_strategy ? &plan : nullptr;
    std::vector<PathHedge> rows(paths.n_paths());
    std::vector<std::exception_ptr> errors(paths.n_paths());
    auto const count = static_cast<std::ptrdiff_t>(paths.n_paths());
#pragma omp parallel for schedule(dynamic, 16)
    for (std::ptrdiff_t p = 0; p < count; ++p) {
        auto const path = static_cast<std::size_t>(p);
        try {
            rows[path] = hedge_path(model, assets, *claim, paths, options, setup, path, plan_ptr);
        }
        catch (...) {
            errors[path] = std::current_exception();
        }
    }
    for (auto const& e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }
    return assemble(setup, paths, std::move(rows), std::move(plan));
}

namespace reference {
HedgeReport replicate(const FactorModel& model, const std::vector<PricerPtr>& assets,
                      const PricerPtr& claim, const PathSet& paths, const HedgeOptions& options)
{
    auto const setup = prepare(model, assets, claim, paths, options);
    HedgePlan plan = make_plan(options, setup, paths, model.dimension());
    HedgePlan* plan_ptr = options.record_strategy ? &plan : nullptr;
    std::vector<PathHedge> rows(paths.n_paths());
    for (std::size_t p = 0; p < paths.n_paths(); ++p) {
        rows[p] = hedge_path(model, assets, *claim, paths, options, setup, p, plan_ptr);
    }
    return assemble(setup, paths, std::move(rows), std::move(plan));
}
}  // namespace reference

//---------------------------------------------------------------------------//
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y)
{
    if (x.size() != y.size() || x.size() < 2) {
        throw ConfigError("loglog_slope: need at least two paired points");
    }
    double const n = static_cast<double>(x.size());
    double sx = 0.0, sy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0.0) || !(y[i] > 0.0)) {
            throw NumericalError("loglog_slope: values must be positive");
        }
        sx += std::log(x[i]);
        sy += std::log(y[i]);
    }
    double const mx = sx / n;
    double const my = sy / n;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        double const dx = std::log(x[i]) - mx;
        sxy += dx * (std::log(y[i]) - my);
        sxx += dx * dx;
    }
    if (!(sxx > 0.0)) {
        throw NumericalError("loglog_slope: x values are all equal");
    }
    return sxy / sxx;
}

HedgeSweep hedge_sweep(const FactorModel& model, const std::vector<PricerPtr>& assets,
                       const PricerPtr& claim, const PathSet& paths,
                       const std::vector<std::size_t>& rebalance_counts, HedgeOptions options)
{
    if (rebalance_counts.empty()) {
        throw ConfigError("hedge sweep: no rebalance counts");
    }
    std::vector<std::size_t> counts = rebalance_counts;
    std::sort(counts.begin(), counts.end());
    counts.erase(std::unique(counts.begin(), counts.end()), counts.end());

    HedgeSweep sweep;
    std::vector<double> dts, rms;
    bool const record = options.record_strategy;
    for (std::size_t c = 0; c < counts.size(); ++c) {
        options.rebalance_steps = counts[c];
        bool const finest = c + 1 == counts.size();
        options.record_strategy = record && finest;
        auto report = replicate(model, assets, claim, paths, options);
        SweepRow row;
        row.rebalance_steps = counts[c];
        row.dt = report.dt;
        row.mean_error = report.mean_error;
        row.rms_error = report.rms_error;
        row.max_abs_error = report.max_abs_error;
        for (auto s : report.singular_events) {
            row.singular_events += s;
        }
        sweep.rows.push_back(row);
        dts.push_back(row.dt);
        rms.push_back(row.rms_error);
        if (finest) {
            sweep.finest = std::move(report);
        }
    }
    if (counts.size() >= 2) {
        sweep.slope = loglog_slope(dts, rms);
    }
    return sweep;
}

}  // namespace complab
