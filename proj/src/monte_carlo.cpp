#include "complab/monte_carlo.hpp"

#include <array>
#include <cmath>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include "complab/errors.hpp"
#include "complab/rng.hpp"

namespace complab {

namespace {

void check_config(const FactorModel& model, double t, const Vector& x, double t_end,
                  const McConfig& config)
{
    if (config.n_samples < kMinSamples) {
        throw ConfigError("monte carlo: n_samples must be >= " + std::to_string(kMinSamples));
    }
    if (!(config.max_dt > 0.0)) {
        throw ConfigError("monte carlo: max_dt must be positive");
    }
    if (!(config.relative_bump > 0.0) || !(config.min_bump > 0.0)) {
        throw ConfigError("monte carlo: bump sizes must be positive");
    }
    if (x.size() != model.dimension()) {
        throw DomainError("monte carlo: state has wrong dimension");
    }
    if (!(t >= 0.0) || !(t <= t_end)) {
        throw DomainError("monte carlo: need 0 <= t <= maturity");
    }
    if (!model.domain().contains(x)) {
        throw DomainError("monte carlo: start point outside the model domain");
    }
}

std::size_t substeps(double t, double t_end, double max_dt)
{
    double const span = t_end - t;
    if (span <= 0.0) {
        return 0;
    }
    return static_cast<std::size_t>(std::ceil(span / max_dt - 1e-12));
}

// Euler sub-path for sample `sample` from (t, x) over n steps of size dt.
Vector euler_terminal(const FactorModel& model, double t, Vector x, std::size_t n, double dt,
                      const NormalStream& stream)
{
    int const dim = model.dimension();
    double const sqrt_dt = std::sqrt(dt);
    std::array<double, kMaxFactors> z{};
    std::span<double> draws(z.data(), static_cast<std::size_t>(dim));
    Vector next(dim);
    for (std::size_t k = 0; k < n; ++k) {
        double const tk = t + dt * static_cast<double>(k);
        stream.normals(k, draws);
        Vector const mu = model.drift(tk, x);
        Matrix const sigma = model.diffusion(tk, x);
        for (int i = 0; i < dim; ++i) {
            double noise = 0.0;
            for (int j = 0; j < dim; ++j) {
                noise += sigma(i, j) * (sqrt_dt * z[j]);
            }
            next[i] = x[i] + mu[i] * dt + noise;
        }
        model.domain().clamp(next);
        x = next;
    }
    return x;
}

std::string describe(const Vector& x)
{
    std::ostringstream os;
    os << std::setprecision(17) << '(';
    for (int i = 0; i < x.size(); ++i) {
        os << (i ? ", " : "") << x[i];
    }
    os << ')';
    return os.str();
}

// Serial replay of the first sample whose value is not finite.
void check_finite(std::span<const double> samples, const FactorModel& model, double t,
                  const Vector& x, std::size_t n, double dt, const McConfig& config)
{
    for (std::size_t p = 0; p < samples.size(); ++p) {
        if (!std::isfinite(samples[p])) {
            NormalStream const stream(config.seed, StreamTag::monte_carlo, p);
            Vector const xt = euler_terminal(model, t, x, n, dt, stream);
            throw NumericalError("monte carlo: payoff is not finite on sample " + std::to_string(p)
                                 + " at terminal state " + describe(xt));
        }
    }
}

}  // namespace

McEstimate sample_mean(std::span<const double> samples)
{
    McEstimate est;
    if (samples.empty()) {
        return est;
    }
    double sum = 0.0;
    for (double s : samples) {
        sum += s;
    }
    double const n = static_cast<double>(samples.size());
    double const mean = sum / n;
    double ss = 0.0;
    for (double s : samples) {
        ss += (s - mean) * (s - mean);
    }
    est.price = mean;
    est.std_error = samples.size() > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0;
    return est;
}

McEstimate mc_transport(const FactorModel& model, double t, const Vector& x, double t_end,
                        const StateFunction& f, const McConfig& config)
{
    check_config(model, t, x, t_end, config);
    std::size_t const n = substeps(t, t_end, config.max_dt);
    double const dt = n > 0 ? (t_end - t) / static_cast<double>(n) : 0.0;
    double const discount = std::exp(-model.rate() * (t_end - t));
    std::vector<double> samples(config.n_samples);
    auto const count = static_cast<std::ptrdiff_t>(config.n_samples);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t p = 0; p < count; ++p) {
        NormalStream const stream(config.seed, StreamTag::monte_carlo,
                                  static_cast<std::uint64_t>(p));
        samples[static_cast<std::size_t>(p)]
            = discount * f(euler_terminal(model, t, x, n, dt, stream));
    }
    check_finite(samples, model, t, x, n, dt, config);
    return sample_mean(samples);
}

McEstimate price_mc(const FactorModel& model, const Asset& asset, double t, const Vector& x,
                    const McConfig& config)
{
    return mc_transport(model, t, x, asset.maturity,
                        [&asset](const Vector& xt) { return asset.evaluate(xt); }, config);
}

namespace reference {
McEstimate price_mc(const FactorModel& model, const Asset& asset, double t, const Vector& x,
                    const McConfig& config)
{
    check_config(model, t, x, asset.maturity, config);
    std::size_t const n = substeps(t, asset.maturity, config.max_dt);
    double const dt = n > 0 ? (asset.maturity - t) / static_cast<double>(n) : 0.0;
    double const discount = std::exp(-model.rate() * (asset.maturity - t));
    std::vector<double> samples(config.n_samples);
    for (std::size_t p = 0; p < config.n_samples; ++p) {
        NormalStream const stream(config.seed, StreamTag::monte_carlo, p);
        samples[p] = discount * asset.evaluate(euler_terminal(model, t, x, n, dt, stream));
    }
    check_finite(samples, model, t, x, n, dt, config);
    return sample_mean(samples);
}
}  // namespace reference

Gradient mc_gradient(const FactorModel& model, const Asset& asset, double t, const Vector& x,
                     const McConfig& config)
{
    check_config(model, t, x, asset.maturity, config);
    int const dim = model.dimension();
    std::size_t const n = substeps(t, asset.maturity, config.max_dt);
    double const dt = n > 0 ? (asset.maturity - t) / static_cast<double>(n) : 0.0;
    double const discount = std::exp(-model.rate() * (asset.maturity - t));

    Vector bump(dim);
    for (int j = 0; j < dim; ++j) {
        bump[j] = std::max(config.min_bump, config.relative_bump * std::abs(x[j]));
    }
    std::size_t const n_samples = config.n_samples;
    // samples[j * n_samples + p] is the central difference of sample p in direction j.
    std::vector<double> samples(static_cast<std::size_t>(dim) * n_samples);
    auto const count = static_cast<std::ptrdiff_t>(n_samples);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t p = 0; p < count; ++p) {
        NormalStream const stream(config.seed, StreamTag::monte_carlo,
                                  static_cast<std::uint64_t>(p));
        for (int j = 0; j < dim; ++j) {
            Vector up = x;
            Vector down = x;
            up[j] += bump[j];
            down[j] -= bump[j];
            model.domain().clamp(up);
            model.domain().clamp(down);
            double const width = up[j] - down[j];
            double const hi = asset.evaluate(euler_terminal(model, t, up, n, dt, stream));
            double const lo = asset.evaluate(euler_terminal(model, t, down, n, dt, stream));
            samples[static_cast<std::size_t>(j) * n_samples + static_cast<std::size_t>(p)]
                = width > 0.0 ? discount * (hi - lo) / width : 0.0;
        }
    }
    Gradient g{Vector(dim), Vector(dim), false};
    for (int j = 0; j < dim; ++j) {
        auto const est = sample_mean(
            std::span<const double>(samples.data() + static_cast<std::size_t>(j) * n_samples,
                                    n_samples));
        g.value[j] = est.price;
        g.std_error[j] = est.std_error;
    }
    g.flagged = g.std_error.norm() > 0.1 * g.value.norm();
    return g;
}

//---------------------------------------------------------------------------//
MonteCarloPricer::MonteCarloPricer(const FactorModel& model, Asset asset, McConfig config)
    : model_(model), asset_(resolve_asset(std::move(asset), model)), config_(config)
{
}

double MonteCarloPricer::value(double t, const Vector& x) const
{
    return price_mc(model_, asset_, t, x, config_).price;
}

Gradient MonteCarloPricer::gradient(double t, const Vector& x) const
{
    return mc_gradient(model_, asset_, t, x, config_);
}

}  // namespace complab
