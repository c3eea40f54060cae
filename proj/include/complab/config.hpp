#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "complab/asset.hpp"
#include "complab/factor_model.hpp"
#include "complab/hedging.hpp"
#include "complab/monte_carlo.hpp"
#include "complab/pde.hpp"
#include "complab/pricer.hpp"

namespace complab {

// PDE grid as written in a config. `half_width` is resolved against the
// model's initial point when the config is parsed.
struct GridConfig {
    std::vector<double> lower;
    std::vector<double> upper;
    std::vector<int> nodes;
    int time_steps = 200;
    int rannacher_steps = 4;
    double cross_step_limit = 2.0;

    GridSpec to_spec() const;
    bool operator==(const GridConfig&) const = default;
};

struct AssetSpec {
    Asset asset;
    // auto | closed_form | pde | mc
    std::string backend = "auto";
    std::optional<GridConfig> grid;

    bool operator==(const AssetSpec&) const = default;
};

// Claim to hedge: a single payoff, or a static portfolio of the traded assets.
struct ClaimSpec {
    std::optional<AssetSpec> asset;
    std::vector<double> weights;

    bool operator==(const ClaimSpec&) const = default;
};

struct PointSpec {
    double t = 0.0;
    std::vector<double> x;

    bool operator==(const PointSpec&) const = default;
};

struct HedgeConfig {
    std::size_t rebalance_steps = 100;
    std::vector<std::size_t> sweep;
    double pseudo_inverse_threshold = 1e-6;
    // zero | pseudo_inverse
    std::string singular_fallback = "zero";

    bool operator==(const HedgeConfig&) const = default;
};

struct ValidateConfig {
    // paths | grid
    std::string probe = "paths";
    std::size_t n_paths = 100;
    std::size_t n_steps = 10;
    std::vector<double> lower;
    std::vector<double> upper;
    int nodes_per_axis = 5;
    int time_nodes = 3;
    double floor = kDefaultEllipticityFloor;

    bool operator==(const ValidateConfig&) const = default;
};

struct WitnessConfig {
    std::size_t n_mc = 0;
    std::size_t max_anchors = 1000;

    bool operator==(const WitnessConfig&) const = default;
};

//---------------------------------------------------------------------------//
/*!
 * Everything a run needs besides the subcommand and output directory.
 *
 * The model is kept as its JSON object ({"family","params","horizon"}) so
 * the echo in a report re-parses to an equal config.
 */
struct AnalysisConfig {
    nlohmann::json model;
    std::vector<AssetSpec> assets;
    std::optional<ClaimSpec> claim;
    std::optional<std::uint64_t> seed;
    std::size_t n_paths = 1000;
    std::size_t n_steps = 100;
    std::optional<GridConfig> grid;
    McConfig mc;
    double tolerance = 1e-8;
    bool analyticity_assumed = true;
    // pathwise | single_point
    std::string method = "pathwise";
    std::vector<PointSpec> probes;
    std::vector<PointSpec> price_points;
    HedgeConfig hedge;
    ValidateConfig validate;
    WitnessConfig witness;
    // Move PDE lookups that come too close to the grid edge back inside.
    bool clamp_to_grid = true;

    bool operator==(const AnalysisConfig&) const = default;
};

AnalysisConfig config_from_json(const nlohmann::json& doc);
nlohmann::json config_to_json(const AnalysisConfig& config);
// Reads and parses a config file; ConfigError on I/O or syntax problems.
AnalysisConfig load_config(const std::filesystem::path& path);

//---------------------------------------------------------------------------//
// Pricers for the configured assets and claim.
struct PricerBundle {
    std::vector<PricerPtr> assets;
    std::vector<std::string> backends;
    PricerPtr claim;
    std::string claim_backend;
    // PDE surfaces by asset id.
    std::map<std::string, std::shared_ptr<const PricingSurface>> surfaces;
    std::vector<std::shared_ptr<const SurfacePricer>> surface_pricers;

    std::size_t clamped_lookups() const;
};

// Backend actually used for `spec` under `model` ("auto" resolved).
std::string choose_backend(const FactorModel& model, const AssetSpec& spec);

// Box of about six standard deviations around x0 on every axis.
GridSpec default_grid(const FactorModel& model, const Asset& asset);

PricerBundle build_pricers(const FactorModel& model, const AnalysisConfig& config,
                           bool with_claim);

HedgeOptions hedge_options(const AnalysisConfig& config);

std::vector<SpacePoint> resolve_points(const std::vector<PointSpec>& points,
                                       const FactorModel& model);

}  // namespace complab
