#include "complab/path_engine.hpp"

#include <array>
#include <iomanip>
#include <ostream>

#include "complab/errors.hpp"
#include "complab/rng.hpp"

namespace complab {

PathSet::PathSet(std::string model_family, int dim, std::size_t n_paths, std::size_t n_steps,
                 double horizon, Vector x0, std::uint64_t seed, bool with_increments)
    : model_family_(std::move(model_family)),
      dim_(dim),
      n_paths_(n_paths),
      n_steps_(n_steps),
      horizon_(horizon),
      x0_(std::move(x0)),
      seed_(seed),
      times_(n_steps + 1),
      states_(n_paths * (n_steps + 1) * static_cast<std::size_t>(dim)),
      increments_(with_increments ? n_paths * n_steps * static_cast<std::size_t>(dim) : 0),
      flagged_(n_paths, 0)
{
    for (std::size_t k = 0; k <= n_steps; ++k) {
        times_[k] = horizon * static_cast<double>(k) / static_cast<double>(n_steps);
    }
}

std::span<const double> PathSet::state(std::size_t path, std::size_t step) const
{
    auto const d = static_cast<std::size_t>(dim_);
    return {states_.data() + (path * (n_steps_ + 1) + step) * d, d};
}

std::span<double> PathSet::state(std::size_t path, std::size_t step)
{
    auto const d = static_cast<std::size_t>(dim_);
    return {states_.data() + (path * (n_steps_ + 1) + step) * d, d};
}

std::span<const double> PathSet::increment(std::size_t path, std::size_t step) const
{
    auto const d = static_cast<std::size_t>(dim_);
    return {increments_.data() + (path * n_steps_ + step) * d, d};
}

std::span<double> PathSet::increment(std::size_t path, std::size_t step)
{
    auto const d = static_cast<std::size_t>(dim_);
    return {increments_.data() + (path * n_steps_ + step) * d, d};
}

Vector PathSet::state_vector(std::size_t path, std::size_t step) const
{
    auto const s = state(path, step);
    Vector v(dim_);
    for (int i = 0; i < dim_; ++i) {
        v[i] = s[i];
    }
    return v;
}

Vector PathSet::increment_vector(std::size_t path, std::size_t step) const
{
    auto const s = increment(path, step);
    Vector v(dim_);
    for (int i = 0; i < dim_; ++i) {
        v[i] = s[i];
    }
    return v;
}

std::size_t PathSet::flagged_count() const
{
    std::size_t count = 0;
    for (auto f : flagged_) {
        count += f;
    }
    return count;
}

bool PathSet::boundary_warning() const
{
    return static_cast<double>(flagged_count())
           > kBoundaryWarningFraction * static_cast<double>(n_paths_);
}

namespace {

void check_request(const FactorModel& model, std::size_t n_paths, std::size_t n_steps)
{
    if (n_paths < 1) {
        throw ConfigError("simulate_paths: n_paths must be >= 1");
    }
    if (n_steps < 1) {
        throw ConfigError("simulate_paths: n_steps must be >= 1");
    }
    if (model.dimension() > kMaxFactors) {
        throw ConfigError("simulate_paths: too many factors");
    }
}

// Euler-Maruyama for one path:
//   x_{k+1} = x_k + m(t_k, x_k) dt + sigma(t_k, x_k) dW_k
bool euler_path(const FactorModel& model, PathSet& paths, std::size_t path)
{
    int const dim = paths.dimension();
    double const dt = paths.dt();
    double const sqrt_dt = std::sqrt(dt);
    NormalStream const stream(paths.seed(), StreamTag::paths, path);
    std::array<double, kMaxFactors> z{};
    std::span<double> draws(z.data(), static_cast<std::size_t>(dim));
    bool const keep_dw = paths.has_increments();
    bool clamped = false;

    Vector x = paths.x0();
    Vector dw(dim);
    auto s0 = paths.state(path, 0);
    for (int i = 0; i < dim; ++i) {
        s0[i] = x[i];
    }
    for (std::size_t k = 0; k < paths.n_steps(); ++k) {
        double const t = paths.time(k);
        stream.normals(k, draws);
        for (int j = 0; j < dim; ++j) {
            dw[j] = sqrt_dt * z[j];
        }
        Vector const mu = model.drift(t, x);
        Matrix const sigma = model.diffusion(t, x);
        Vector next(dim);
        for (int i = 0; i < dim; ++i) {
            double noise = 0.0;
            for (int j = 0; j < dim; ++j) {
                noise += sigma(i, j) * dw[j];
            }
            next[i] = x[i] + mu[i] * dt + noise;
        }
        clamped = model.domain().clamp(next) || clamped;
        x = next;
        auto s = paths.state(path, k + 1);
        for (int i = 0; i < dim; ++i) {
            s[i] = x[i];
        }
        if (keep_dw) {
            auto inc = paths.increment(path, k);
            for (int j = 0; j < dim; ++j) {
                inc[j] = dw[j];
            }
        }
    }
    return clamped;
}

}  // namespace

PathSet simulate_paths(const FactorModel& model, std::size_t n_paths, std::size_t n_steps,
                       std::uint64_t seed, const PathOptions& options)
{
    check_request(model, n_paths, n_steps);
    PathSet paths(model.family(), model.dimension(), n_paths, n_steps, model.horizon(), model.x0(),
                  seed, options.store_increments);
    auto const count = static_cast<std::ptrdiff_t>(n_paths);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t n = 0; n < count; ++n) {
        auto const path = static_cast<std::size_t>(n);
        paths.set_flagged(path, euler_path(model, paths, path));
    }
    return paths;
}

namespace reference {

PathSet simulate_paths(const FactorModel& model, std::size_t n_paths, std::size_t n_steps,
                       std::uint64_t seed, const PathOptions& options)
{
    check_request(model, n_paths, n_steps);
    int const d = model.dimension();
    PathSet paths(model.family(), d, n_paths, n_steps, model.horizon(), model.x0(), seed,
                  options.store_increments);
    double const dt = paths.dt();
    std::vector<double> z(static_cast<std::size_t>(d));

    for (std::size_t n = 0; n < n_paths; ++n) {
        NormalStream const stream(seed, StreamTag::paths, n);
        Vector x = model.x0();
        bool clamped = false;
        for (int i = 0; i < d; ++i) {
            paths.state(n, 0)[i] = x[i];
        }
        for (std::size_t k = 0; k < n_steps; ++k) {
            stream.normals(k, z);
            Vector dw(d);
            for (int j = 0; j < d; ++j) {
                dw[j] = std::sqrt(dt) * z[j];
            }
            Vector const mu = model.drift(paths.time(k), x);
            Matrix const sigma = model.diffusion(paths.time(k), x);
            for (int i = 0; i < d; ++i) {
                double noise = 0.0;
                for (int j = 0; j < d; ++j) {
                    noise += sigma(i, j) * dw[j];
                }
                paths.state(n, k + 1)[i] = x[i] + mu[i] * dt + noise;
            }
            x = paths.state_vector(n, k + 1);
            if (model.domain().clamp(x)) {
                clamped = true;
                for (int i = 0; i < d; ++i) {
                    paths.state(n, k + 1)[i] = x[i];
                }
            }
            if (paths.has_increments()) {
                for (int j = 0; j < d; ++j) {
                    paths.increment(n, k)[j] = dw[j];
                }
            }
        }
        paths.set_flagged(n, clamped);
    }
    return paths;
}

}  // namespace reference

QuadraticVariationTrack quadratic_variation(const PathSet& paths, int price_index)
{
    if (price_index < 0 || price_index >= paths.dimension()) {
        throw ConfigError("quadratic_variation: price index out of range");
    }
    QuadraticVariationTrack track(paths.n_paths(), paths.n_steps() + 1);
    auto const count = static_cast<std::ptrdiff_t>(paths.n_paths());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t n = 0; n < count; ++n) {
        auto const path = static_cast<std::size_t>(n);
        double sum = 0.0;
        track.at(path, 0) = 0.0;
        for (std::size_t k = 0; k < paths.n_steps(); ++k) {
            double const dx = paths.state(path, k + 1)[price_index] - paths.state(path, k)[price_index];
            sum += dx * dx;
            track.at(path, k + 1) = sum;
        }
    }
    return track;
}

void write_paths_csv(const PathSet& paths, std::ostream& out, bool with_increments)
{
    if (with_increments && !paths.has_increments()) {
        throw ConfigError("path dump: increments were not stored");
    }
    int const d = paths.dimension();
    out << "path,step,t";
    for (int i = 1; i <= d; ++i) {
        out << ",xi_" << i;
    }
    if (with_increments) {
        for (int i = 1; i <= d; ++i) {
            out << ",dW_" << i;
        }
    }
    out << '\n' << std::setprecision(17);
    for (std::size_t n = 0; n < paths.n_paths(); ++n) {
        for (std::size_t k = 0; k <= paths.n_steps(); ++k) {
            out << n << ',' << k << ',' << paths.time(k);
            for (double v : paths.state(n, k)) {
                out << ',' << v;
            }
            if (with_increments) {
                for (int j = 0; j < d; ++j) {
                    out << ',' << (k == 0 ? 0.0 : paths.increment(n, k - 1)[j]);
                }
            }
            out << '\n';
        }
    }
}

}  // namespace complab
