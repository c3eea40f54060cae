#include "complab/pde.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <iomanip>
#include <ostream>

#include "complab/errors.hpp"

namespace complab {

//---------------------------------------------------------------------------//
GridSpec GridSpec::centered(const FactorModel& model, const Vector& half_width,
                            std::vector<int> nodes, int time_steps)
{
    if (half_width.size() != model.dimension()) {
        throw ConfigError("grid: half-width has wrong dimension");
    }
    GridSpec spec;
    spec.lower = model.x0() - half_width;
    spec.upper = model.x0() + half_width;
    spec.nodes = std::move(nodes);
    spec.time_steps = time_steps;
    return spec;
}

SpatialGrid::SpatialGrid(const GridSpec& spec)
{
    int const dim = static_cast<int>(spec.nodes.size());
    if (dim < 1 || dim > 2) {
        throw ConfigError("PDE grid: only 1 or 2 spatial dimensions are supported");
    }
    if (spec.lower.size() != dim || spec.upper.size() != dim) {
        throw ConfigError("PDE grid: bounds do not match the node counts");
    }
    for (int k = 0; k < dim; ++k) {
        double const lo = spec.lower[k];
        double const hi = spec.upper[k];
        if (!std::isfinite(lo) || !std::isfinite(hi) || !(hi > lo)) {
            throw ConfigError("PDE grid: empty or inverted box on axis " + std::to_string(k + 1));
        }
        if (spec.nodes[k] < 9) {
            throw ConfigError("PDE grid: need at least 9 nodes per axis");
        }
        int const n = spec.nodes[k];
        double const h = (hi - lo) / (n - 1);
        std::vector<double> axis(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            axis[static_cast<std::size_t>(i)] = lo + h * i;
        }
        axis.back() = hi;
        axes.push_back(std::move(axis));
        spacing.push_back(h);
    }
}

std::size_t SpatialGrid::node_count() const
{
    std::size_t count = 1;
    for (auto const& axis : axes) {
        count *= axis.size();
    }
    return count;
}

Vector SpatialGrid::node(std::size_t flat) const
{
    Vector x(dimension());
    std::size_t const n0 = axes[0].size();
    x[0] = axes[0][flat % n0];
    if (dimension() == 2) {
        x[1] = axes[1][flat / n0];
    }
    return x;
}

//---------------------------------------------------------------------------//
DiscretizedGenerator::DiscretizedGenerator(const FactorModel& model, const SpatialGrid& grid,
                                           double t)
    : dim_(grid.dimension()), rate_(model.rate()), spacing_(grid.spacing)
{
    if (model.dimension() != dim_) {
        throw ConfigError("PDE: grid dimension does not match the model");
    }
    std::size_t const count = grid.node_count();
    for (int k = 0; k < dim_; ++k) {
        drift_[k].resize(count);
        half_var_[k].resize(count);
    }
    if (dim_ == 2) {
        cov_.resize(count);
    }
    for (std::size_t node = 0; node < count; ++node) {
        Vector const x = grid.node(node);
        Vector const m = model.drift(t, x);
        Matrix const s = model.diffusion(t, x);
        Matrix const a = s * s.transpose();
        if (!m.allFinite() || !a.allFinite()) {
            throw NumericalError("PDE: model coefficients are not finite on the grid box");
        }
        for (int k = 0; k < dim_; ++k) {
            drift_[k][node] = m[k];
            half_var_[k][node] = 0.5 * a(k, k);
        }
        if (dim_ == 2) {
            cov_[node] = a(0, 1);
        }
    }
}

std::array<double, 3> DiscretizedGenerator::second_order_weights(std::size_t node, int axis) const
{
    double const h = spacing_[axis];
    double const c = half_var_[axis][node] / (h * h);
    return {c, -2.0 * c, c};
}

std::array<double, 3> DiscretizedGenerator::first_order_weights(std::size_t node, int axis) const
{
    double const c = drift_[axis][node] / (2.0 * spacing_[axis]);
    return {-c, 0.0, c};
}

std::array<double, 4> DiscretizedGenerator::cross_weights(std::size_t node) const
{
    if (dim_ < 2) {
        return {0.0, 0.0, 0.0, 0.0};
    }
    double const c = cov_[node] / (4.0 * spacing_[0] * spacing_[1]);
    return {c, -c, -c, c};
}

double DiscretizedGenerator::max_abs_covariance() const
{
    double m = 0.0;
    for (double c : cov_) {
        m = std::max(m, std::abs(c));
    }
    return m;
}

//---------------------------------------------------------------------------//
namespace {

// Solves the line system (I - theta dt A_k) y = rhs with the linearity rows
// y_0 = 2 y_1 - y_2 and y_{n-1} = 2 y_{n-2} - y_{n-3}. Entries 1..n-2 of
// lower/diag/upper/rhs hold the interior rows; scratch must have size n.
void solve_line(std::vector<double>& lower, std::vector<double>& diag, std::vector<double>& upper,
                std::vector<double>& rhs, std::vector<double>& y)
{
    std::size_t const n = y.size();
    // Fold the boundary rows into rows 1 and n-2.
    diag[1] += 2.0 * lower[1];
    upper[1] -= lower[1];
    lower[1] = 0.0;
    lower[n - 2] -= upper[n - 2];
    diag[n - 2] += 2.0 * upper[n - 2];
    upper[n - 2] = 0.0;

    // Thomas algorithm on rows 1..n-2.
    for (std::size_t i = 2; i <= n - 2; ++i) {
        double const w = lower[i] / diag[i - 1];
        diag[i] -= w * upper[i - 1];
        rhs[i] -= w * rhs[i - 1];
    }
    y[n - 2] = rhs[n - 2] / diag[n - 2];
    for (std::size_t i = n - 2; i-- > 1;) {
        y[i] = (rhs[i] - upper[i] * y[i + 1]) / diag[i];
    }
    y[0] = 2.0 * y[1] - y[2];
    y[n - 1] = 2.0 * y[n - 2] - y[n - 3];
}

class AdiStepper {
  public:
    AdiStepper(const SpatialGrid& grid) : grid_(grid)
    {
        std::size_t const count = grid.node_count();
        for (int k = 0; k < grid.dimension(); ++k) {
            axis_op_[k].assign(count, 0.0);
        }
        y_.assign(count, 0.0);
        std::size_t longest = 0;
        for (auto const& a : grid.axes) {
            longest = std::max(longest, a.size());
        }
        lower_.resize(longest);
        diag_.resize(longest);
        upper_.resize(longest);
        rhs_.resize(longest);
        line_.resize(longest);
    }

    // One Douglas step of size dt for u_tau = (A_mixed + A_1 + A_2) u.
    void step(const DiscretizedGenerator& gen, double dt, double theta, std::vector<double>& u)
    {
        int const dim = grid_.dimension();
        double const rate_share = gen.rate() / dim;
        std::size_t const n0 = grid_.size(0);
        std::size_t const n1 = dim == 2 ? grid_.size(1) : 1;
        std::size_t const j_lo = dim == 2 ? 1 : 0;
        std::size_t const j_hi = dim == 2 ? n1 - 1 : 1;

        // Predictor Y0 = U + dt A U on interior nodes.
        y_ = u;
        for (std::size_t j = j_lo; j < j_hi; ++j) {
            for (std::size_t i = 1; i + 1 < n0; ++i) {
                std::size_t const node = grid_.index(i, j);
                double total = 0.0;
                {
                    auto const s = gen.second_order_weights(node, 0);
                    auto const f = gen.first_order_weights(node, 0);
                    double const a0 = (s[0] + f[0]) * u[node - 1] + (s[1] + f[1]) * u[node]
                                      + (s[2] + f[2]) * u[node + 1] - rate_share * u[node];
                    axis_op_[0][node] = a0;
                    total += a0;
                }
                if (dim == 2) {
                    auto const s = gen.second_order_weights(node, 1);
                    auto const f = gen.first_order_weights(node, 1);
                    double const a1 = (s[0] + f[0]) * u[node - n0] + (s[1] + f[1]) * u[node]
                                      + (s[2] + f[2]) * u[node + n0] - rate_share * u[node];
                    axis_op_[1][node] = a1;
                    auto const c = gen.cross_weights(node);
                    double const mixed = c[0] * u[node + 1 + n0] + c[1] * u[node + 1 - n0]
                                         + c[2] * u[node - 1 + n0] + c[3] * u[node - 1 - n0];
                    total += a1 + mixed;
                }
                y_[node] = u[node] + dt * total;
            }
        }

        // Implicit correction along axis 0 for every interior line.
        for (std::size_t j = j_lo; j < j_hi; ++j) {
            for (std::size_t i = 1; i + 1 < n0; ++i) {
                std::size_t const node = grid_.index(i, j);
                auto const s = gen.second_order_weights(node, 0);
                auto const f = gen.first_order_weights(node, 0);
                lower_[i] = -theta * dt * (s[0] + f[0]);
                diag_[i] = 1.0 - theta * dt * (s[1] + f[1] - rate_share);
                upper_[i] = -theta * dt * (s[2] + f[2]);
                rhs_[i] = y_[node] - theta * dt * axis_op_[0][node];
            }
            line_.resize(n0);
            solve_line(lower_, diag_, upper_, rhs_, line_);
            for (std::size_t i = 0; i < n0; ++i) {
                y_[grid_.index(i, j)] = line_[i];
            }
        }

        if (dim == 2) {
            // Implicit correction along axis 1 for interior columns.
            for (std::size_t i = 1; i + 1 < n0; ++i) {
                for (std::size_t j = 1; j + 1 < n1; ++j) {
                    std::size_t const node = grid_.index(i, j);
                    auto const s = gen.second_order_weights(node, 1);
                    auto const f = gen.first_order_weights(node, 1);
                    lower_[j] = -theta * dt * (s[0] + f[0]);
                    diag_[j] = 1.0 - theta * dt * (s[1] + f[1] - rate_share);
                    upper_[j] = -theta * dt * (s[2] + f[2]);
                    rhs_[j] = y_[node] - theta * dt * axis_op_[1][node];
                }
                line_.resize(n1);
                solve_line(lower_, diag_, upper_, rhs_, line_);
                for (std::size_t j = 0; j < n1; ++j) {
                    y_[grid_.index(i, j)] = line_[j];
                }
            }
            // Re-impose linearity on the axis-0 edges (corners included).
            for (std::size_t j = 0; j < n1; ++j) {
                std::size_t const first = grid_.index(0, j);
                std::size_t const last = grid_.index(n0 - 1, j);
                y_[first] = 2.0 * y_[first + 1] - y_[first + 2];
                y_[last] = 2.0 * y_[last - 1] - y_[last - 2];
            }
        }
        u.swap(y_);
    }

  private:
    const SpatialGrid& grid_;
    std::array<std::vector<double>, 2> axis_op_;
    std::vector<double> y_;
    std::vector<double> lower_, diag_, upper_, rhs_, line_;
};

void floor_edges(const SpatialGrid& grid, std::vector<double>& u)
{
    std::size_t const n0 = grid.size(0);
    std::size_t const n1 = grid.dimension() == 2 ? grid.size(1) : 1;
    for (std::size_t j = 0; j < n1; ++j) {
        bool const edge_row = grid.dimension() == 2 && (j == 0 || j + 1 == n1);
        for (std::size_t i = 0; i < n0; ++i) {
            if (edge_row || i == 0 || i + 1 == n0) {
                double& v = u[grid.index(i, j)];
                v = std::max(v, 0.0);
            }
        }
    }
}

}  // namespace

PricingSurface solve_pde(const FactorModel& model, const Asset& raw_asset, const GridSpec& spec)
{
    Asset const asset = resolve_asset(raw_asset, model);
    SpatialGrid grid(spec);
    if (grid.dimension() != model.dimension()) {
        throw ConfigError("PDE: grid dimension does not match the model dimension");
    }
    if (spec.time_steps < 1) {
        throw ConfigError("PDE: time_steps must be >= 1");
    }
    if (spec.rannacher_steps < 0) {
        throw ConfigError("PDE: rannacher_steps must be >= 0");
    }
    int const steps = spec.time_steps;
    double const maturity = asset.maturity;
    double const dt = maturity / steps;

    std::vector<double> times(static_cast<std::size_t>(steps) + 1);
    for (int k = 0; k <= steps; ++k) {
        times[static_cast<std::size_t>(k)] = maturity * k / steps;
    }
    PricingSurface surface(asset.id, grid, times);

    std::size_t const count = grid.node_count();
    std::vector<double> u(count);
    for (std::size_t node = 0; node < count; ++node) {
        u[node] = asset.evaluate(grid.node(node));
    }
    std::copy(u.begin(), u.end(), surface.slice(static_cast<std::size_t>(steps)).begin());

    std::optional<DiscretizedGenerator> cached;
    if (model.time_homogeneous()) {
        cached.emplace(model, grid, 0.0);
    }
    // Linear extrapolation overshoots below zero where a decaying price is
    // convex; the edges of a non-negative claim are floored at zero.
    bool const nonnegative = asset.kind != AssetKind::log_contract;
    AdiStepper stepper(grid);
    for (int s = 1; s <= steps; ++s) {
        double const t_mid = maturity - (s - 0.5) * dt;
        std::optional<DiscretizedGenerator> local;
        if (!cached) {
            local.emplace(model, grid, t_mid);
        }
        auto const& gen = cached ? *cached : *local;
        if (grid.dimension() == 2) {
            double const load = dt * gen.max_abs_covariance() / (grid.spacing[0] * grid.spacing[1]);
            if (load > spec.cross_step_limit) {
                throw NumericalError(
                    "PDE: time step too large for the explicit cross-derivative term (dt*|a12|/(h1*h2) = "
                    + std::to_string(load) + " > " + std::to_string(spec.cross_step_limit)
                    + "); increase time_steps");
            }
        }
        double const theta = s <= spec.rannacher_steps ? 1.0 : 0.5;
        stepper.step(gen, dt, theta, u);
        if (nonnegative) {
            floor_edges(grid, u);
        }
        std::size_t const slot = static_cast<std::size_t>(steps - s);
        std::copy(u.begin(), u.end(), surface.slice(slot).begin());
    }
    for (double v : surface.slice(0)) {
        if (!std::isfinite(v)) {
            throw NumericalError("PDE: solution became non-finite");
        }
    }
    return surface;
}

std::vector<std::shared_ptr<const PricingSurface>> solve_pde_batch(
    const FactorModel& model, const std::vector<Asset>& assets, const std::vector<GridSpec>& grids)
{
    if (assets.size() != grids.size()) {
        throw ConfigError("PDE batch: need one grid per asset");
    }
    std::vector<std::shared_ptr<const PricingSurface>> out(assets.size());
    std::vector<std::exception_ptr> errors(assets.size());
    auto const count = static_cast<std::ptrdiff_t>(assets.size());
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t i = 0; i < count; ++i) {
        auto const k = static_cast<std::size_t>(i);
        try {
            out[k] = std::make_shared<const PricingSurface>(solve_pde(model, assets[k], grids[k]));
        }
        catch (...) {
            errors[k] = std::current_exception();
        }
    }
    for (auto const& e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }
    return out;
}

//---------------------------------------------------------------------------//
PricingSurface::PricingSurface(std::string asset_id, SpatialGrid grid, std::vector<double> times)
    : asset_id_(std::move(asset_id)),
      grid_(std::move(grid)),
      times_(std::move(times)),
      values_(times_.size() * grid_.node_count(), 0.0)
{
}

std::span<double> PricingSurface::slice(std::size_t time_index)
{
    std::size_t const n = grid_.node_count();
    return {values_.data() + time_index * n, n};
}

std::span<const double> PricingSurface::slice(std::size_t time_index) const
{
    std::size_t const n = grid_.node_count();
    return {values_.data() + time_index * n, n};
}

namespace {

// Cell index i with 3 <= i <= n - 5 and local coordinate s = (x - a_i) / h.
struct AxisLocation {
    std::size_t cell;
    double s;
};

bool locate_axis(const std::vector<double>& axis, double h, double x, AxisLocation& loc)
{
    std::size_t const n = axis.size();
    double const pos = (x - axis.front()) / h;
    if (!(pos >= 3.0 - 1e-12) || !(pos <= static_cast<double>(n - 4) + 1e-12)) {
        return false;
    }
    auto cell = static_cast<std::size_t>(std::floor(pos));
    cell = std::clamp<std::size_t>(cell, 3, n - 5);
    loc = {cell, pos - static_cast<double>(cell)};
    return true;
}

// 4-point Lagrange weights on nodes cell-1 .. cell+2.
std::array<double, 4> lagrange_weights(double s)
{
    return {-s * (s - 1.0) * (s - 2.0) / 6.0, (s + 1.0) * (s - 1.0) * (s - 2.0) / 2.0,
            -(s + 1.0) * s * (s - 2.0) / 2.0, (s + 1.0) * s * (s - 1.0) / 6.0};
}

}  // namespace

bool PricingSurface::interior(const Vector& x) const
{
    if (x.size() != dimension()) {
        return false;
    }
    AxisLocation loc{};
    for (int k = 0; k < dimension(); ++k) {
        if (!locate_axis(grid_.axes[k], grid_.spacing[k], x[k], loc)) {
            return false;
        }
    }
    return true;
}

Vector PricingSurface::clamp_interior(const Vector& x) const
{
    Vector y = x;
    for (int k = 0; k < dimension(); ++k) {
        auto const& axis = grid_.axes[k];
        y[k] = std::clamp(y[k], axis[3], axis[axis.size() - 4]);
    }
    return y;
}

PricingSurface::Bracket PricingSurface::bracket_time(double t) const
{
    double const maturity = times_.back();
    double const dt = maturity / static_cast<double>(times_.size() - 1);
    if (!(t >= -1e-12) || !(t <= maturity + 1e-12)) {
        throw DomainError("pricing surface: time outside [0, maturity]");
    }
    double const pos = std::clamp(t / dt, 0.0, static_cast<double>(times_.size() - 1));
    auto lo = static_cast<std::size_t>(std::floor(pos));
    double w = pos - static_cast<double>(lo);
    if (w < 1e-9) {
        return {lo, lo, 0.0};
    }
    if (w > 1.0 - 1e-9) {
        return {lo + 1, lo + 1, 0.0};
    }
    return {lo, lo + 1, w};
}

template <class NodeFn>
double PricingSurface::interpolate(const Vector& x, NodeFn&& node_value) const
{
    AxisLocation l0{};
    if (!locate_axis(grid_.axes[0], grid_.spacing[0], x[0], l0)) {
        throw DomainError("pricing surface: point too close to grid edge");
    }
    auto const w0 = lagrange_weights(l0.s);
    if (dimension() == 1) {
        double sum = 0.0;
        for (std::size_t a = 0; a < 4; ++a) {
            sum += w0[a] * node_value(l0.cell - 1 + a, 0);
        }
        return sum;
    }
    AxisLocation l1{};
    if (!locate_axis(grid_.axes[1], grid_.spacing[1], x[1], l1)) {
        throw DomainError("pricing surface: point too close to grid edge");
    }
    auto const w1 = lagrange_weights(l1.s);
    double sum = 0.0;
    for (std::size_t b = 0; b < 4; ++b) {
        double row = 0.0;
        for (std::size_t a = 0; a < 4; ++a) {
            row += w0[a] * node_value(l0.cell - 1 + a, l1.cell - 1 + b);
        }
        sum += w1[b] * row;
    }
    return sum;
}

double PricingSurface::nodal_derivative(std::size_t time_index, std::size_t i0, std::size_t i1,
                                        int axis) const
{
    std::size_t const node = grid_.index(i0, i1);
    std::size_t const stride = axis == 0 ? 1 : grid_.size(0);
    auto const u = slice(time_index);
    double const h = grid_.spacing[axis];
    return (-u[node + 2 * stride] + 8.0 * u[node + stride] - 8.0 * u[node - stride]
            + u[node - 2 * stride])
           / (12.0 * h);
}

double PricingSurface::value(double t, const Vector& x) const
{
    auto const br = bracket_time(t);
    auto at_slice = [&](std::size_t ti) {
        auto const u = slice(ti);
        return interpolate(x, [&](std::size_t i0, std::size_t i1) { return u[grid_.index(i0, i1)]; });
    };
    double const lo = at_slice(br.lo);
    if (br.hi == br.lo) {
        return lo;
    }
    return (1.0 - br.weight_hi) * lo + br.weight_hi * at_slice(br.hi);
}

Vector PricingSurface::gradient(double t, const Vector& x) const
{
    auto const br = bracket_time(t);
    Vector g(dimension());
    for (int k = 0; k < dimension(); ++k) {
        auto at_slice = [&](std::size_t ti) {
            return interpolate(x, [&](std::size_t i0, std::size_t i1) {
                return nodal_derivative(ti, i0, i1, k);
            });
        };
        double const lo = at_slice(br.lo);
        g[k] = br.hi == br.lo ? lo : (1.0 - br.weight_hi) * lo + br.weight_hi * at_slice(br.hi);
    }
    return g;
}

void PricingSurface::write_csv(std::ostream& out, const std::vector<std::size_t>& time_indices) const
{
    out << "t";
    for (int k = 1; k <= dimension(); ++k) {
        out << ",x_" << k;
    }
    out << ",value\n" << std::setprecision(17);
    for (std::size_t ti : time_indices) {
        if (ti >= times_.size()) {
            throw ConfigError("surface export: time index out of range");
        }
        auto const u = slice(ti);
        for (std::size_t node = 0; node < grid_.node_count(); ++node) {
            Vector const x = grid_.node(node);
            out << times_[ti];
            for (int k = 0; k < dimension(); ++k) {
                out << ',' << x[k];
            }
            out << ',' << u[node] << '\n';
        }
    }
}

//---------------------------------------------------------------------------//
SurfacePricer::SurfacePricer(std::shared_ptr<const PricingSurface> surface, Asset asset,
                             bool clamp_to_grid)
    : surface_(std::move(surface)), asset_(std::move(asset)), clamp_to_grid_(clamp_to_grid)
{
    if (!surface_) {
        throw ConfigError("surface pricer: null surface");
    }
}

Vector SurfacePricer::locate(const Vector& x) const
{
    if (surface_->interior(x)) {
        return x;
    }
    if (!clamp_to_grid_) {
        throw DomainError("pricing surface '" + surface_->asset_id()
                          + "': point too close to grid edge");
    }
    clamped_.fetch_add(1, std::memory_order_relaxed);
    return surface_->clamp_interior(x);
}

double SurfacePricer::value(double t, const Vector& x) const
{
    return surface_->value(t, locate(x));
}

Gradient SurfacePricer::gradient(double t, const Vector& x) const
{
    Vector const g = surface_->gradient(t, locate(x));
    return Gradient{g, Vector::Zero(g.size()), false};
}

}  // namespace complab
