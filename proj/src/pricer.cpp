#include "complab/pricer.hpp"

#include <cmath>
#include <numbers>

#include "complab/errors.hpp"

namespace complab {

namespace {

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double normal_pdf(double z)
{
    return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
}

bool is_risk_neutral_stock_family(const std::string& family)
{
    return family == "gbm" || family == "expou_sv" || family == "stoch_vol";
}

}  // namespace

double closed_form_heat(HeatPayoff payoff, const Matrix& sigma, int coordinate, double strike,
                        double t, const Vector& x, double maturity)
{
    if (coordinate < 0 || coordinate >= x.size() || sigma.rows() != x.size()) {
        throw ConfigError("closed_form_heat: coordinate or sigma shape mismatch");
    }
    double const tau = maturity - t;
    if (tau < 0.0) {
        throw DomainError("closed_form_heat: t is past maturity");
    }
    double const var_rate = (sigma * sigma.transpose())(coordinate, coordinate);
    double const u = x[coordinate];
    switch (payoff) {
        case HeatPayoff::square_coordinate:
            return u * u + var_rate * tau;
        case HeatPayoff::call_on_factor:
        case HeatPayoff::put_on_factor: {
            double const sign = payoff == HeatPayoff::call_on_factor ? 1.0 : -1.0;
            double const sd = std::sqrt(var_rate * tau);
            if (sd == 0.0) {
                return std::max(sign * (u - strike), 0.0);
            }
            double const d = sign * (u - strike) / sd;
            return sign * (u - strike) * normal_cdf(d) + sd * normal_pdf(d);
        }
    }
    throw ConfigError("closed_form_heat: unsupported payoff");
}

//---------------------------------------------------------------------------//
bool ClosedFormPricer::supports(const FactorModel& model, const Asset& asset)
{
    if (asset.kind == AssetKind::european_stock && asset.payoff == PayoffType::linear) {
        return is_risk_neutral_stock_family(model.family());
    }
    if (asset.kind == AssetKind::european_factor && model.family() == "correlated_bm"
        && model.rate() == 0.0) {
        return asset.payoff == PayoffType::square || asset.payoff == PayoffType::call
               || asset.payoff == PayoffType::put || asset.payoff == PayoffType::linear;
    }
    return false;
}

ClosedFormPricer::ClosedFormPricer(const FactorModel& model, Asset asset)
    : asset_(resolve_asset(std::move(asset), model)), rate_(model.rate())
{
    if (!supports(model, asset_)) {
        throw ConfigError("closed form: no analytic price for asset '" + asset_.id
                          + "' under model '" + model.family() + "'");
    }
    if (asset_.kind == AssetKind::european_stock) {
        form_ = Form::affine_stock;
    }
    else {
        form_ = Form::heat;
        Matrix const sigma = model.diffusion(0.0, model.x0());
        variance_rate_ = (sigma * sigma.transpose())(asset_.coordinate, asset_.coordinate);
    }
}

double ClosedFormPricer::value(double t, const Vector& x) const
{
    double const tau = asset_.maturity - t;
    if (tau < 0.0) {
        throw DomainError("closed form: t is past maturity");
    }
    double const u = x[asset_.coordinate];
    if (form_ == Form::affine_stock) {
        return asset_.intercept * std::exp(-rate_ * tau) + asset_.slope * std::exp(u);
    }
    double const sd = std::sqrt(variance_rate_ * tau);
    switch (asset_.payoff) {
        case PayoffType::square:
            return u * u + variance_rate_ * tau;
        case PayoffType::linear:
            return asset_.intercept + asset_.slope * u;
        case PayoffType::call:
        case PayoffType::put: {
            double const sign = asset_.payoff == PayoffType::call ? 1.0 : -1.0;
            if (sd == 0.0) {
                return std::max(sign * (u - asset_.strike), 0.0);
            }
            double const d = sign * (u - asset_.strike) / sd;
            return sign * (u - asset_.strike) * normal_cdf(d) + sd * normal_pdf(d);
        }
        default:
            break;
    }
    throw ConfigError("closed form: unsupported payoff");
}

Gradient ClosedFormPricer::gradient(double t, const Vector& x) const
{
    double const tau = asset_.maturity - t;
    if (tau < 0.0) {
        throw DomainError("closed form: t is past maturity");
    }
    int const dim = static_cast<int>(x.size());
    Gradient g{Vector::Zero(dim), Vector::Zero(dim), false};
    double const u = x[asset_.coordinate];
    double& slot = g.value[asset_.coordinate];
    if (form_ == Form::affine_stock) {
        slot = asset_.slope * std::exp(u);
        return g;
    }
    double const sd = std::sqrt(variance_rate_ * tau);
    switch (asset_.payoff) {
        case PayoffType::square:
            slot = 2.0 * u;
            break;
        case PayoffType::linear:
            slot = asset_.slope;
            break;
        case PayoffType::call:
            slot = sd == 0.0 ? (u > asset_.strike ? 1.0 : 0.0) : normal_cdf((u - asset_.strike) / sd);
            break;
        case PayoffType::put:
            slot = sd == 0.0 ? (u < asset_.strike ? -1.0 : 0.0)
                             : -normal_cdf((asset_.strike - u) / sd);
            break;
        default:
            throw ConfigError("closed form: unsupported payoff");
    }
    return g;
}

//---------------------------------------------------------------------------//
PortfolioPricer::PortfolioPricer(std::vector<double> weights, std::vector<PricerPtr> legs)
    : weights_(std::move(weights)), legs_(std::move(legs))
{
    if (weights_.size() != legs_.size() || legs_.empty()) {
        throw ConfigError("portfolio: need one weight per leg");
    }
    for (auto const& leg : legs_) {
        if (!leg) {
            throw ConfigError("portfolio: null leg");
        }
    }
}

double PortfolioPricer::maturity() const
{
    double m = legs_.front()->maturity();
    for (auto const& leg : legs_) {
        m = std::min(m, leg->maturity());
    }
    return m;
}

double PortfolioPricer::payoff(const Vector& x) const
{
    double sum = 0.0;
    for (std::size_t i = 0; i < legs_.size(); ++i) {
        sum += weights_[i] * legs_[i]->payoff(x);
    }
    return sum;
}

double PortfolioPricer::value(double t, const Vector& x) const
{
    double sum = 0.0;
    for (std::size_t i = 0; i < legs_.size(); ++i) {
        sum += weights_[i] * legs_[i]->value(t, x);
    }
    return sum;
}

Gradient PortfolioPricer::gradient(double t, const Vector& x) const
{
    int const dim = static_cast<int>(x.size());
    Gradient g{Vector::Zero(dim), Vector::Zero(dim), false};
    Vector variance = Vector::Zero(dim);
    for (std::size_t i = 0; i < legs_.size(); ++i) {
        Gradient const leg = legs_[i]->gradient(t, x);
        g.value += weights_[i] * leg.value;
        variance += (weights_[i] * leg.std_error).cwiseAbs2();
        g.flagged = g.flagged || leg.flagged;
    }
    g.std_error = variance.cwiseSqrt();
    return g;
}

}  // namespace complab
