#pragma once

#include <array>
#include <atomic>
#include <cstddef>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "complab/asset.hpp"
#include "complab/factor_model.hpp"
#include "complab/pricer.hpp"
#include "complab/types.hpp"

namespace complab {

//---------------------------------------------------------------------------//
// Truncated spatial box, node counts and time stepping for the backward PDE.
struct GridSpec {
    Vector lower;
    Vector upper;
    std::vector<int> nodes;
    int time_steps = 100;
    // Fully implicit steps at the start of the backward march.
    int rannacher_steps = 4;
    // Limit on dt * max|a_12| / (h_1 h_2) for the explicit cross term.
    double cross_step_limit = 2.0;

    // Box centred on the model's initial point with the given half-widths.
    static GridSpec centered(const FactorModel& model, const Vector& half_width,
                             std::vector<int> nodes, int time_steps);
};

// Uniform axes built from a GridSpec.
struct SpatialGrid {
    std::vector<std::vector<double>> axes;
    std::vector<double> spacing;

    explicit SpatialGrid(const GridSpec& spec);

    int dimension() const { return static_cast<int>(axes.size()); }
    std::size_t size(int axis) const { return axes[axis].size(); }
    std::size_t node_count() const;
    // Flattened index, axis 0 fastest.
    std::size_t index(std::size_t i0, std::size_t i1 = 0) const { return i0 + axes[0].size() * i1; }
    Vector node(std::size_t flat) const;
};

//---------------------------------------------------------------------------//
/*!
 * Finite-difference stencil of the operator
 *   G_t v - r v = m . grad v + 1/2 sum_ij (sigma sigma^T)_ij d_ij v - r v
 * on a SpatialGrid, for one time t. Supports d <= 2.
 */
class DiscretizedGenerator {
  public:
    DiscretizedGenerator(const FactorModel& model, const SpatialGrid& grid, double t);

    int dimension() const { return dim_; }
    double rate() const { return rate_; }
    double drift(std::size_t node, int axis) const { return drift_[axis][node]; }
    // 1/2 (sigma sigma^T)_kk
    double half_variance(std::size_t node, int axis) const { return half_var_[axis][node]; }
    // (sigma sigma^T)_12; the mixed derivative carries coefficient 1, not 1/2.
    double covariance(std::size_t node) const { return cov_.empty() ? 0.0 : cov_[node]; }

    // Weights on (i-1, i, i+1) along `axis`.
    std::array<double, 3> second_order_weights(std::size_t node, int axis) const;
    std::array<double, 3> first_order_weights(std::size_t node, int axis) const;
    // Weights on (i+1,j+1), (i+1,j-1), (i-1,j+1), (i-1,j-1).
    std::array<double, 4> cross_weights(std::size_t node) const;

    double max_abs_covariance() const;

  private:
    int dim_;
    double rate_;
    std::vector<double> spacing_;
    std::array<std::vector<double>, 2> drift_;
    std::array<std::vector<double>, 2> half_var_;
    std::vector<double> cov_;
};

//---------------------------------------------------------------------------//
/*!
 * Time stack of v(t, x) on a spatial grid, from t = 0 to the asset maturity.
 *
 * Off-grid values use cubic (4-point Lagrange) interpolation in space and
 * linear interpolation in time. Gradients are fourth-order central
 * differences at the nodes, interpolated the same way.
 */
class PricingSurface {
  public:
    PricingSurface(std::string asset_id, SpatialGrid grid, std::vector<double> times);

    const std::string& asset_id() const { return asset_id_; }
    const SpatialGrid& grid() const { return grid_; }
    const std::vector<double>& times() const { return times_; }
    int dimension() const { return grid_.dimension(); }
    std::string backend() const { return "pde"; }
    std::string boundary_treatment() const { return "zero_second_derivative"; }

    std::span<double> slice(std::size_t time_index);
    std::span<const double> slice(std::size_t time_index) const;
    double at(std::size_t time_index, std::size_t node) const
    {
        return values_[time_index * grid_.node_count() + node];
    }

    // True when x is far enough from the edges for value/gradient lookups.
    bool interior(const Vector& x) const;
    // Moves x inside the region accepted by interior().
    Vector clamp_interior(const Vector& x) const;

    double value(double t, const Vector& x) const;
    Vector gradient(double t, const Vector& x) const;

    // CSV `t,x_1..x_d,value` for the requested time indices.
    void write_csv(std::ostream& out, const std::vector<std::size_t>& time_indices) const;

  private:
    struct Bracket {
        std::size_t lo;
        std::size_t hi;
        double weight_hi;
    };
    Bracket bracket_time(double t) const;
    double nodal_derivative(std::size_t time_index, std::size_t i0, std::size_t i1, int axis) const;
    template <class NodeFn>
    double interpolate(const Vector& x, NodeFn&& node_value) const;

    std::string asset_id_;
    SpatialGrid grid_;
    std::vector<double> times_;
    std::vector<double> values_;
};

// Crank-Nicolson (Douglas ADI, theta = 1/2) with fully implicit Rannacher
// startup steps and an explicit mixed-derivative term. Boundaries use the
// zero second-derivative (linearity) condition. d must be 1 or 2.
PricingSurface solve_pde(const FactorModel& model, const Asset& asset, const GridSpec& grid);

// Solves independent assets concurrently (one OpenMP task per asset).
std::vector<std::shared_ptr<const PricingSurface>> solve_pde_batch(
    const FactorModel& model, const std::vector<Asset>& assets, const std::vector<GridSpec>& grids);

//---------------------------------------------------------------------------//
// Pricer view of a PricingSurface.
class SurfacePricer final : public Pricer {
  public:
    SurfacePricer(std::shared_ptr<const PricingSurface> surface, Asset asset,
                  bool clamp_to_grid = false);

    std::string backend() const override { return "pde"; }
    double maturity() const override { return asset_.maturity; }
    double payoff(const Vector& x) const override { return asset_.evaluate(x); }
    double value(double t, const Vector& x) const override;
    Gradient gradient(double t, const Vector& x) const override;

    const PricingSurface& surface() const { return *surface_; }
    // Number of lookups that were moved back inside the grid.
    std::size_t clamped_lookups() const { return clamped_.load(); }

  private:
    Vector locate(const Vector& x) const;

    std::shared_ptr<const PricingSurface> surface_;
    Asset asset_;
    bool clamp_to_grid_;
    mutable std::atomic<std::size_t> clamped_{0};
};

}  // namespace complab
