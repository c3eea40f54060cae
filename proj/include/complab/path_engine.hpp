#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "complab/factor_model.hpp"
#include "complab/types.hpp"

namespace complab {

struct PathOptions {
    // Keep the Brownian increments (needed by hedging and witness runs).
    bool store_increments = true;
};

//---------------------------------------------------------------------------//
/*!
 * Euler-Maruyama trajectories of the factor process on a uniform grid,
 * together with the Brownian increments that drove them.
 *
 * Layout is path-major: states are [path][step][factor] with n_steps + 1
 * time points per path, increments are [path][step][factor] with n_steps
 * entries per path.
 */
class PathSet {
  public:
    PathSet() = default;
    PathSet(std::string model_family, int dim, std::size_t n_paths, std::size_t n_steps,
            double horizon, Vector x0, std::uint64_t seed, bool with_increments);

    const std::string& model_family() const { return model_family_; }
    int dimension() const { return dim_; }
    std::size_t n_paths() const { return n_paths_; }
    std::size_t n_steps() const { return n_steps_; }
    double horizon() const { return horizon_; }
    double dt() const { return horizon_ / static_cast<double>(n_steps_); }
    const Vector& x0() const { return x0_; }
    std::uint64_t seed() const { return seed_; }
    bool has_increments() const { return !increments_.empty(); }
    const std::vector<double>& times() const { return times_; }
    double time(std::size_t step) const { return times_[step]; }

    std::span<const double> state(std::size_t path, std::size_t step) const;
    std::span<double> state(std::size_t path, std::size_t step);
    std::span<const double> increment(std::size_t path, std::size_t step) const;
    std::span<double> increment(std::size_t path, std::size_t step);
    Vector state_vector(std::size_t path, std::size_t step) const;
    Vector increment_vector(std::size_t path, std::size_t step) const;

    const std::vector<double>& states() const { return states_; }
    const std::vector<double>& increments() const { return increments_; }

    // Paths that left the domain box and were clamped back onto it.
    bool flagged(std::size_t path) const { return flagged_[path] != 0; }
    void set_flagged(std::size_t path, bool value) { flagged_[path] = value ? 1 : 0; }
    std::size_t flagged_count() const;
    // More than 0.1% of paths were clamped.
    bool boundary_warning() const;

  private:
    std::string model_family_;
    int dim_ = 0;
    std::size_t n_paths_ = 0;
    std::size_t n_steps_ = 0;
    double horizon_ = 0.0;
    Vector x0_;
    std::uint64_t seed_ = 0;
    std::vector<double> times_;
    std::vector<double> states_;
    std::vector<double> increments_;
    std::vector<unsigned char> flagged_;
};

inline constexpr double kBoundaryWarningFraction = 1e-3;

// OpenMP-parallel over paths. Output is independent of the worker count.
PathSet simulate_paths(const FactorModel& model, std::size_t n_paths, std::size_t n_steps,
                       std::uint64_t seed, const PathOptions& options = {});

// Running sum of squared increments of one coordinate (the log price), per
// path and grid time. Layout [path][step], n_steps + 1 entries per path.
class QuadraticVariationTrack {
  public:
    QuadraticVariationTrack(std::size_t n_paths, std::size_t n_times)
        : n_paths_(n_paths), n_times_(n_times), values_(n_paths * n_times, 0.0)
    {
    }

    std::size_t n_paths() const { return n_paths_; }
    std::size_t n_times() const { return n_times_; }
    double at(std::size_t path, std::size_t step) const { return values_[path * n_times_ + step]; }
    double& at(std::size_t path, std::size_t step) { return values_[path * n_times_ + step]; }
    double terminal(std::size_t path) const { return at(path, n_times_ - 1); }

  private:
    std::size_t n_paths_;
    std::size_t n_times_;
    std::vector<double> values_;
};

QuadraticVariationTrack quadratic_variation(const PathSet& paths, int price_index);

// CSV dump: path,step,t,xi_1..xi_d[,dW_1..dW_d]. The dW columns hold the
// increment over (t_{k-1}, t_k] and are zero on step 0.
void write_paths_csv(const PathSet& paths, std::ostream& out, bool with_increments);

namespace reference {
// Serial implementation kept for testing the parallel kernel.
PathSet simulate_paths(const FactorModel& model, std::size_t n_paths, std::size_t n_steps,
                       std::uint64_t seed, const PathOptions& options = {});
}  // namespace reference

}  // namespace complab
