#include "complab/asset.hpp"

#include <algorithm>
#include <cmath>

#include "complab/errors.hpp"

namespace complab {

double Asset::evaluate_scalar(double u) const
{
    switch (payoff) {
        case PayoffType::call:
            return std::max(u - strike, 0.0);
        case PayoffType::put:
            return std::max(strike - u, 0.0);
        case PayoffType::linear:
            return intercept + slope * u;
        case PayoffType::square:
            return u * u;
        case PayoffType::log_return:
            return u;
    }
    return 0.0;
}

double Asset::evaluate(const Vector& terminal_state) const
{
    double const xi = terminal_state[coordinate];
    switch (kind) {
        case AssetKind::european_factor:
            return evaluate_scalar(xi);
        case AssetKind::european_stock:
            return evaluate_scalar(std::exp(xi));
        case AssetKind::log_contract:
            return (xi - log_reference) - rate_offset;
    }
    return 0.0;
}

bool Asset::is_affine() const
{
    return kind != AssetKind::log_contract && payoff == PayoffType::linear;
}

Asset resolve_asset(Asset asset, const FactorModel& model)
{
    if (!(asset.maturity >= model.horizon())) {
        throw ConfigError("asset '" + asset.id + "': maturity must be >= the horizon T");
    }
    switch (asset.kind) {
        case AssetKind::european_factor:
            if (asset.coordinate < 0 || asset.coordinate >= model.dimension()) {
                throw ConfigError("asset '" + asset.id + "': factor coordinate out of range");
            }
            if (asset.payoff == PayoffType::log_return) {
                throw ConfigError("asset '" + asset.id + "': log payoff needs kind log_contract");
            }
            break;
        case AssetKind::european_stock:
            if (!model.price_coordinate()) {
                throw ConfigError("asset '" + asset.id + "': model '" + model.family()
                                  + "' has no stock coordinate");
            }
            if (asset.payoff == PayoffType::square || asset.payoff == PayoffType::log_return) {
                throw ConfigError("asset '" + asset.id + "': unsupported stock payoff");
            }
            asset.coordinate = *model.price_coordinate();
            break;
        case AssetKind::log_contract:
            if (!model.price_coordinate()) {
                throw ConfigError("asset '" + asset.id + "': model '" + model.family()
                                  + "' has no stock coordinate");
            }
            asset.coordinate = *model.price_coordinate();
            asset.payoff = PayoffType::log_return;
            asset.log_reference = model.x0()[asset.coordinate];
            asset.rate_offset = model.rate() * asset.maturity;
            break;
    }
    return asset;
}

Asset make_log_contract(const FactorModel& model, double maturity)
{
    Asset asset;
    asset.id = "log_contract";
    asset.kind = AssetKind::log_contract;
    asset.payoff = PayoffType::log_return;
    asset.maturity = maturity;
    return resolve_asset(asset, model);
}

std::string to_string(AssetKind kind)
{
    switch (kind) {
        case AssetKind::european_factor:
            return "european_factor";
        case AssetKind::european_stock:
            return "european_stock";
        case AssetKind::log_contract:
            return "log_contract";
    }
    return "unknown";
}

std::string to_string(PayoffType payoff)
{
    switch (payoff) {
        case PayoffType::call:
            return "call";
        case PayoffType::put:
            return "put";
        case PayoffType::linear:
            return "linear";
        case PayoffType::square:
            return "square";
        case PayoffType::log_return:
            return "log";
    }
    return "unknown";
}

namespace {

double number_field(const nlohmann::json& doc, const char* key, double fallback)
{
    if (!doc.contains(key)) {
        return fallback;
    }
    if (!doc.at(key).is_number()) {
        throw ConfigError(std::string("asset: field '") + key + "' must be a number");
    }
    return doc.at(key).get<double>();
}

}  // namespace

Asset asset_from_json(const nlohmann::json& doc)
{
    if (!doc.is_object()) {
        throw ConfigError("asset: expected a JSON object");
    }
    Asset asset;
    std::string const kind = doc.value("kind", "european_stock");
    if (kind == "european_factor") {
        asset.kind = AssetKind::european_factor;
    }
    else if (kind == "european_stock") {
        asset.kind = AssetKind::european_stock;
    }
    else if (kind == "log_contract") {
        asset.kind = AssetKind::log_contract;
    }
    else {
        throw ConfigError("asset: unknown kind '" + kind + "'");
    }

    std::string const payoff = doc.value("payoff", kind == "log_contract" ? "log" : "");
    if (payoff == "call") {
        asset.payoff = PayoffType::call;
    }
    else if (payoff == "put") {
        asset.payoff = PayoffType::put;
    }
    else if (payoff == "linear" || payoff == "affine" || payoff == "stock") {
        asset.payoff = PayoffType::linear;
    }
    else if (payoff == "square") {
        asset.payoff = PayoffType::square;
    }
    else if (payoff == "log") {
        asset.payoff = PayoffType::log_return;
    }
    else {
        throw ConfigError("asset: unknown payoff '" + payoff + "'");
    }

    if (!doc.contains("maturity") || !doc.at("maturity").is_number()) {
        throw ConfigError("asset: missing numeric field 'maturity'");
    }
    asset.maturity = doc.at("maturity").get<double>();
    asset.strike = number_field(doc, "strike", 0.0);
    asset.intercept = number_field(doc, "intercept", 0.0);
    asset.slope = number_field(doc, "slope", 1.0);
    if ((asset.payoff == PayoffType::call || asset.payoff == PayoffType::put)
        && !doc.contains("strike")) {
        throw ConfigError("asset: call/put payoffs need a 'strike'");
    }
    if (doc.contains("coordinate")) {
        if (!doc.at("coordinate").is_number_integer()) {
            throw ConfigError("asset: 'coordinate' must be an integer");
        }
        asset.coordinate = doc.at("coordinate").get<int>() - 1;
    }
    asset.id = doc.value("id", to_string(asset.kind) + "_" + to_string(asset.payoff));
    return asset;
}

nlohmann::json asset_to_json(const Asset& asset)
{
    nlohmann::json doc;
    doc["id"] = asset.id;
    doc["kind"] = to_string(asset.kind);
    doc["payoff"] = to_string(asset.payoff);
    doc["maturity"] = asset.maturity;
    if (asset.payoff == PayoffType::call || asset.payoff == PayoffType::put) {
        doc["strike"] = asset.strike;
    }
    if (asset.payoff == PayoffType::linear) {
        doc["intercept"] = asset.intercept;
        doc["slope"] = asset.slope;
    }
    if (asset.kind == AssetKind::european_factor) {
        doc["coordinate"] = asset.coordinate + 1;
    }
    return doc;
}

}  // namespace complab
