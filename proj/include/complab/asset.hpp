#pragma once

#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "complab/factor_model.hpp"
#include "complab/types.hpp"

namespace complab {

enum class AssetKind { european_factor, european_stock, log_contract };
enum class PayoffType { call, put, linear, square, log_return };

//---------------------------------------------------------------------------//
/*!
 * European claim h(xi_T) paid at `maturity`.
 *
 * european_factor payoffs act on one factor coordinate u = xi_k, stock
 * payoffs on s = exp(xi_k) for the model's price coordinate k. The log
 * contract pays log(S_T / S_0) - r T, the discounted log return.
 *
 *   call   (u - K)^+        put  (K - u)^+
 *   linear a + b u          square  u^2
 */
struct Asset {
    std::string id;
    AssetKind kind = AssetKind::european_stock;
    PayoffType payoff = PayoffType::call;
    double strike = 0.0;
    double intercept = 0.0;
    double slope = 1.0;
    double maturity = 1.0;
    // Factor index the payoff reads (0-based); resolved from the model for
    // stock and log-contract assets.
    int coordinate = 0;
    // Log-contract constants: log S_0 and r T_i.
    double log_reference = 0.0;
    double rate_offset = 0.0;

    double evaluate(const Vector& terminal_state) const;
    // Payoff as a function of the payoff variable u (factor value or stock).
    double evaluate_scalar(double u) const;
    bool is_affine() const;

    bool operator==(const Asset&) const = default;
};

// Binds stock/log-contract assets to the model's price coordinate and checks
// maturity against the horizon. Throws ConfigError on mismatch.
Asset resolve_asset(Asset asset, const FactorModel& model);

Asset make_log_contract(const FactorModel& model, double maturity);

std::string to_string(AssetKind kind);
std::string to_string(PayoffType payoff);

// {"kind":"european_stock","payoff":"put","strike":100.0,"maturity":1.0}
// plus optional "coordinate" (1-based), "intercept", "slope", "id".
Asset asset_from_json(const nlohmann::json& doc);
nlohmann::json asset_to_json(const Asset& asset);

}  // namespace complab
