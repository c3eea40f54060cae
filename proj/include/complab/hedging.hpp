#pragma once

#include <cstddef>
#include <vector>

#include "complab/completeness.hpp"
#include "complab/factor_model.hpp"
#include "complab/path_engine.hpp"
#include "complab/pricer.hpp"
#include "complab/types.hpp"

namespace complab {

// grad v_H(t, x): integrand of the claim price against dM = sigma dw.
Vector representation_integrand(const Pricer& claim, double t, const Vector& x);

enum class StrategyEvent { regular, pseudo_inverse, singular };

// Holdings used where G is singular: none at all, or the truncated
// pseudo-inverse that still hedges the attainable part of chi.
enum class SingularFallback { zero, pseudo_inverse };

struct StrategyWeights {
    Vector alpha;
    StrategyEvent event = StrategyEvent::regular;
};

// Units held so that alpha G = chi. Singular G (ratio < tolerance) gets the
// chosen fallback; ratios below `pseudo_inverse_threshold` use a truncated
// pseudo-inverse.
StrategyWeights strategy_weights(const JacobianEvaluation& jacobian, const Vector& chi,
                                 double pseudo_inverse_threshold,
                                 SingularFallback fallback = SingularFallback::zero);

struct HedgeOptions {
    std::size_t rebalance_steps = 100;
    double tolerance = kDefaultSingularityTolerance;
    double pseudo_inverse_threshold = 1e-6;
    SingularFallback singular_fallback = SingularFallback::zero;
    // Keep alpha, chi and the discounted asset increments per rebalance.
    bool record_strategy = false;
};

// alpha_t and chi_t per path and rebalance time, plus the realized
// discounted asset changes they were applied to. Layout [path][k][asset].
struct HedgePlan {
    std::size_t n_paths = 0;
    std::size_t n_rebalances = 0;
    int dim = 0;
    std::vector<double> alpha;
    std::vector<double> chi;
    std::vector<double> discounted_increments;

    double at(const std::vector<double>& field, std::size_t path, std::size_t k, int i) const
    {
        return field[(path * n_rebalances + k) * static_cast<std::size_t>(dim) + i];
    }
};

struct HedgeReport {
    std::size_t rebalance_steps = 0;
    double dt = 0.0;
    double initial_wealth = 0.0;
    // H(xi_T) - X_T per path.
    std::vector<double> terminal_errors;
    // Discounted terminal wealth per path.
    std::vector<double> discounted_wealth;
    std::vector<std::size_t> singular_events;
    std::size_t pseudo_inverse_events = 0;
    std::size_t flagged_gradients = 0;
    double mean_error = 0.0;
    double rms_error = 0.0;
    double max_abs_error = 0.0;
    HedgePlan plan;
};

// Discrete self-financing replication of `claim` with the traded assets
// along `paths`. OpenMP-parallel over paths.
HedgeReport replicate(const FactorModel& model, const std::vector<PricerPtr>& assets,
                      const PricerPtr& claim, const PathSet& paths, const HedgeOptions& options);

namespace reference {
HedgeReport replicate(const FactorModel& model, const std::vector<PricerPtr>& assets,
                      const PricerPtr& claim, const PathSet& paths, const HedgeOptions& options);
}  // namespace reference

struct SweepRow {
    std::size_t rebalance_steps = 0;
    double dt = 0.0;
    double mean_error = 0.0;
    double rms_error = 0.0;
    double max_abs_error = 0.0;
    std::size_t singular_events = 0;
};

struct HedgeSweep {
    std::vector<SweepRow> rows;
    // OLS slope of log RMS error against log dt.
    double slope = 0.0;
    // Report for the finest rebalance grid.
    HedgeReport finest;
};

HedgeSweep hedge_sweep(const FactorModel& model, const std::vector<PricerPtr>& assets,
                       const PricerPtr& claim, const PathSet& paths,
                       const std::vector<std::size_t>& rebalance_counts, HedgeOptions options);

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace complab
