#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>

#include "complab/asset.hpp"
#include "complab/factor_model.hpp"
#include "complab/pricer.hpp"
#include "complab/types.hpp"

namespace complab {

inline constexpr std::size_t kMinSamples = 100;

struct McConfig {
    std::size_t n_samples = 10000;
    std::uint64_t seed = 0;
    // Largest Euler step of the sub-paths.
    double max_dt = 0.01;
    // Gradient bump h_j = max(min_bump, relative_bump |x_j|).
    double relative_bump = 1e-4;
    double min_bump = 1e-4;

    bool operator==(const McConfig&) const = default;
};

struct McEstimate {
    double price = 0.0;
    double std_error = 0.0;
};

using StateFunction = std::function<double(const Vector& terminal_state)>;

// e^{-r (t_end - t)} E_{t,x}[f(xi_{t_end})] by Euler sub-paths; parallel over
// samples with a fixed-order reduction.
McEstimate mc_transport(const FactorModel& model, double t, const Vector& x, double t_end,
                        const StateFunction& f, const McConfig& config);

McEstimate price_mc(const FactorModel& model, const Asset& asset, double t, const Vector& x,
                    const McConfig& config);

// Central bump-and-reprice with common random numbers.
Gradient mc_gradient(const FactorModel& model, const Asset& asset, double t, const Vector& x,
                     const McConfig& config);

// Mean and standard error of a sample, summed in index order.
McEstimate sample_mean(std::span<const double> samples);

namespace reference {
McEstimate price_mc(const FactorModel& model, const Asset& asset, double t, const Vector& x,
                    const McConfig& config);
}  // namespace reference

class MonteCarloPricer final : public Pricer {
  public:
    MonteCarloPricer(const FactorModel& model, Asset asset, McConfig config);

    std::string backend() const override { return "mc"; }
    double maturity() const override { return asset_.maturity; }
    double payoff(const Vector& x) const override { return asset_.evaluate(x); }
    double value(double t, const Vector& x) const override;
    Gradient gradient(double t, const Vector& x) const override;

  private:
    FactorModel model_;
    Asset asset_;
    McConfig config_;
};

}  // namespace complab
