#pragma once

#include <memory>
#include <string>
#include <vector>

#include "complab/asset.hpp"
#include "complab/factor_model.hpp"
#include "complab/types.hpp"

namespace complab {

struct Gradient {
    Vector value;
    // Per-component standard error (zero for deterministic backends).
    Vector std_error;
    // Monte Carlo noise exceeds 10% of |grad v|.
    bool flagged = false;
};

//---------------------------------------------------------------------------//
/*!
 * Pricing backend for one asset: v(t, x) = e^{-r(T_i - t)} E_{t,x}[h(xi_T_i)]
 * and its spatial gradient.
 *
 * Implementations are immutable and safe to call concurrently.
 */
class Pricer {
  public:
    virtual ~Pricer() = default;

    virtual std::string backend() const = 0;
    virtual double maturity() const = 0;
    // Terminal value of the priced claim (payoff at maturity).
    virtual double payoff(const Vector& terminal_state) const = 0;
    virtual double value(double t, const Vector& x) const = 0;
    virtual Gradient gradient(double t, const Vector& x) const = 0;
};

using PricerPtr = std::shared_ptr<const Pricer>;

//---------------------------------------------------------------------------//
/*!
 * Analytic prices for the cases with a closed form:
 *  - heat kernel (constant sigma, zero drift, r = 0): square, call and put on
 *    a factor, via Bachelier with variance (sigma sigma^T)_kk (T - t);
 *  - affine stock claims a + b S under any model: v = a e^{-r(T-t)} + b s.
 */
class ClosedFormPricer final : public Pricer {
  public:
    ClosedFormPricer(const FactorModel& model, Asset asset);

    // True when `asset` under `model` has one of the closed forms above.
    static bool supports(const FactorModel& model, const Asset& asset);

    std::string backend() const override { return "closed_form"; }
    double maturity() const override { return asset_.maturity; }
    double payoff(const Vector& x) const override { return asset_.evaluate(x); }
    double value(double t, const Vector& x) const override;
    Gradient gradient(double t, const Vector& x) const override;

  private:
    enum class Form { heat, affine_stock };

    Asset asset_;
    Form form_;
    double rate_;
    // (sigma sigma^T)_kk for the heat forms.
    double variance_rate_ = 0.0;
};

enum class HeatPayoff { square_coordinate, call_on_factor, put_on_factor };

// Heat-kernel closed form with constant sigma and r = 0. `coordinate` is
// 0-based; call/put use Bachelier with variance (sigma sigma^T)_kk (T - t).
double closed_form_heat(HeatPayoff payoff, const Matrix& sigma, int coordinate,
                        double strike, double t, const Vector& x, double maturity);

//---------------------------------------------------------------------------//
// Static portfolio sum_i w_i A^i of other pricers.
class PortfolioPricer final : public Pricer {
  public:
    PortfolioPricer(std::vector<double> weights, std::vector<PricerPtr> legs);

    std::string backend() const override { return "portfolio"; }
    double maturity() const override;
    double payoff(const Vector& x) const override;
    double value(double t, const Vector& x) const override;
    Gradient gradient(double t, const Vector& x) const override;

  private:
    std::vector<double> weights_;
    std::vector<PricerPtr> legs_;
};

}  // namespace complab
