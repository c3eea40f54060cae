#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "complab/types.hpp"

namespace complab {

//---------------------------------------------------------------------------//
// Axis-aligned state-space box; bounds may be infinite.
struct Box {
    Vector lower;
    Vector upper;

    static Box unbounded(int dim);

    int dimension() const { return static_cast<int>(lower.size()); }
    bool contains(const Vector& x) const;
    bool strictly_contains(const Vector& x) const;
    // Returns true when any coordinate had to be moved.
    bool clamp(Vector& x) const;
};

using DriftFn = std::function<Vector(double t, const Vector& x)>;
using DiffusionFn = std::function<Matrix(double t, const Vector& x)>;

struct Coefficients {
    Vector drift;
    Matrix diffusion;
};

//---------------------------------------------------------------------------//
/*!
 * Factor diffusion dxi = m(t, xi) dt + sigma(t, xi) dw under the pricing
 * measure, with a constant short rate.
 *
 * Immutable after construction; the coefficient callables must be pure so a
 * model can be shared by any number of workers.
 */
class FactorModel {
  public:
    struct Params {
        std::string family = "custom";
        DriftFn drift;
        DiffusionFn diffusion;
        double rate = 0.0;
        Vector x0;
        double horizon = 1.0;
        std::optional<Box> domain;
        // Coordinate holding log S, when the model carries a traded stock.
        std::optional<int> price_coordinate;
        // Coefficients do not depend on t (lets the PDE solver cache them).
        bool time_homogeneous = false;
    };

    explicit FactorModel(Params params);

    int dimension() const { return static_cast<int>(params_.x0.size()); }
    const std::string& family() const { return params_.family; }
    double rate() const { return params_.rate; }
    const Vector& x0() const { return params_.x0; }
    double horizon() const { return params_.horizon; }
    const Box& domain() const { return *params_.domain; }
    std::optional<int> price_coordinate() const { return params_.price_coordinate; }
    bool time_homogeneous() const { return params_.time_homogeneous; }

    // Unchecked coefficient evaluation for the inner kernels.
    Vector drift(double t, const Vector& x) const { return params_.drift(t, x); }
    Matrix diffusion(double t, const Vector& x) const { return params_.diffusion(t, x); }

    // Initial stock level, for models with a price coordinate.
    double spot() const;

  private:
    Params params_;
};

// Checked coefficient evaluation: throws DomainError outside [0,T] x domain.
Coefficients eval_coefficients(const FactorModel& model, double t, const Vector& x);

//---------------------------------------------------------------------------//
/*!
 * Two-factor stochastic volatility dynamics in (S, Y) coordinates:
 *
 *   dS = r S dt + vol(t,S,Y) S dw1
 *   dY = eta(t,S,Y) dt + gamma(t,S,Y) (rho dw1 + sqrt(1 - rho^2) dw2)
 */
struct StochVolModel {
    using ScalarFn = std::function<double(double t, double s, double y)>;

    ScalarFn vol_of_stock;
    ScalarFn vol_drift;
    ScalarFn vol_vol;
    ScalarFn correlation;
    double s0 = 1.0;
    double y0 = 0.0;
    double rate = 0.0;
    double horizon = 1.0;
    std::string family = "stoch_vol";
    bool time_homogeneous = false;
};

// Log-coordinate factor model (xi1 = log S, xi2 = Y) with diffusion
// [[vol, 0], [gamma rho, gamma sqrt(1 - rho^2)]].
FactorModel to_factor_model(const StochVolModel& sv);

//---------------------------------------------------------------------------//
// Built-in families. `params` is the JSON "params" object of a model config.
FactorModel make_builtin_model(const std::string& family, const nlohmann::json& params,
                               double horizon);

// Exp-OU volatility: vol = exp(y), dY = kappa (theta - Y) dt + gamma dw~.
StochVolModel make_expou_sv(double s0, double y0, double kappa, double theta,
                            double gamma, double rho, double rate, double horizon);

// Parses {"family": ..., "params": {...}, "horizon": ...}.
FactorModel model_from_json(const nlohmann::json& doc);

//---------------------------------------------------------------------------//
// Ellipticity check of sigma sigma^T on a finite set of probe points.

struct GridProbe {
    Vector lower;
    Vector upper;
    int nodes_per_axis = 5;
    int time_nodes = 3;
};

struct PathProbe {
    std::size_t n_paths = 100;
    std::size_t n_steps = 10;
    std::uint64_t seed = 0;
};

using ProbePlan = std::variant<GridProbe, PathProbe>;

struct ModelValidationReport {
    std::vector<SpacePoint> probed_points;
    double min_eigenvalue_ratio = 0.0;
    double floor = 1e-12;
    bool passed = false;
    std::vector<SpacePoint> failures;
};

inline constexpr double kDefaultEllipticityFloor = 1e-12;

// lambda_min / lambda_max of the symmetric matrix sigma sigma^T; 0 for a
// non-finite or non-positive spectrum.
double eigenvalue_ratio(const Matrix& diffusion);

ModelValidationReport validate_ellipticity(const FactorModel& model, const ProbePlan& probes,
                                           double floor = kDefaultEllipticityFloor);

}  // namespace complab
