#include "complab/varswap.hpp"

#include <cmath>

#include "complab/completeness.hpp"
#include "complab/errors.hpp"

namespace complab {

double varswap_price(const FactorModel& model, const Pricer& log_contract, double maturity,
                     double t, const Vector& x, double accrued)
{
    if (!model.price_coordinate()) {
        throw ConfigError("variance swap: model has no stock price coordinate");
    }
    if (!(t >= 0.0) || t > maturity + 1e-12) {
        throw DomainError("variance swap: need 0 <= t <= T");
    }
    double const discount = std::exp(-model.rate() * (maturity - t));
    return 2.0 * discount * accrued - 2.0 * log_contract.value(t, x);
}

VarSwapPaths varswap_along_paths(const FactorModel& model, const Pricer& log_contract,
                                 const PathSet& paths)
{
    auto const pc = model.price_coordinate();
    if (!pc) {
        throw ConfigError("variance swap: model has no stock price coordinate");
    }
    if (paths.dimension() != model.dimension()) {
        throw ConfigError("variance swap: path set does not match the model");
    }
    double const r = model.rate();
    std::size_t const n = paths.n_paths();
    std::size_t const steps = paths.n_steps();
    VarSwapPaths out;
    out.terminal_value.resize(n);
    out.realized_qv.resize(n);
    out.relative_gap.resize(n);
    out.band = 2.0 / std::sqrt(static_cast<double>(steps));

    auto const count = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t pi = 0; pi < count; ++pi) {
        auto const p = static_cast<std::size_t>(pi);
        double accrued = 0.0;
        double qv = 0.0;
        double log_prev = paths.state(p, 0)[static_cast<std::size_t>(*pc)];
        double disc_prev = std::exp(-r * paths.time(0) + log_prev);
        for (std::size_t k = 1; k <= steps; ++k) {
            double const log_s = paths.state(p, k)[static_cast<std::size_t>(*pc)];
            double const disc = std::exp(-r * paths.time(k) + log_s);
            accrued += (disc - disc_prev) / disc_prev;
            qv += (log_s - log_prev) * (log_s - log_prev);
            log_prev = log_s;
            disc_prev = disc;
        }
        // At T the log-contract value is its payoff.
        Vector const x_t = paths.state_vector(p, steps);
        double const v_t = 2.0 * accrued - 2.0 * log_contract.payoff(x_t);
        out.terminal_value[p] = v_t;
        out.realized_qv[p] = qv;
        out.relative_gap[p] = qv > 0.0 ? std::abs(v_t - qv) / qv : std::abs(v_t);
    }
    for (double g : out.relative_gap) {
        out.within_band += g <= out.band ? 1 : 0;
    }
    return out;
}

Vector varswap_gradient(const Vector& stock_gradient, const Vector& log_contract_gradient,
                        double v1, double t, double maturity, double rate)
{
    if (!(v1 > 0.0)) {
        throw DomainError("variance swap: stock price must be positive");
    }
    double const c = 2.0 * std::exp(-rate * (maturity - t)) / v1;
    return c * stock_gradient - 2.0 * log_contract_gradient;
}

RankCheck varswap_rank_check(const Matrix& G, double v1, double t, double maturity, double rate,
                             double tolerance)
{
    if (!(v1 > 0.0)) {
        throw DomainError("variance swap rank check: v1 must be positive");
    }
    if (G.rows() < 2 || G.rows() != G.cols()) {
        throw ConfigError("variance swap rank check: G must be square with d >= 2");
    }
    auto const last = G.rows() - 1;
    Matrix swapped = G;
    swapped.row(last)
        = varswap_gradient(G.row(0).transpose(), G.row(last).transpose(), v1, t, maturity, rate)
              .transpose();
    RankCheck out;
    out.rank_before = numerical_rank(G, tolerance);
    out.rank_after = numerical_rank(swapped, tolerance);
    out.equal = out.rank_before == out.rank_after;
    return out;
}

}  // namespace complab
