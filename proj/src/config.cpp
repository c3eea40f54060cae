#include "complab/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "complab/errors.hpp"

namespace complab {

using nlohmann::json;

namespace {

void check_keys(const json& doc, const std::set<std::string>& allowed, const std::string& where)
{
    if (!doc.is_object()) {
        throw ConfigError(where + ": expected a JSON object");
    }
    for (auto const& item : doc.items()) {
        if (!allowed.count(item.key())) {
            throw ConfigError(where + ": unknown key '" + item.key() + "'");
        }
    }
}

double get_number(const json& doc, const char* key, double fallback, const std::string& where)
{
    if (!doc.contains(key)) {
        return fallback;
    }
    if (!doc.at(key).is_number()) {
        throw ConfigError(where + ": '" + key + "' must be a number");
    }
    double const v = doc.at(key).get<double>();
    if (!std::isfinite(v)) {
        throw ConfigError(where + ": '" + key + "' must be finite");
    }
    return v;
}

std::size_t get_count(const json& doc, const char* key, std::size_t fallback,
                      const std::string& where)
{
    if (!doc.contains(key)) {
        return fallback;
    }
    auto const& v = doc.at(key);
    if (!v.is_number_integer() || v.get<long long>() < 0) {
        throw ConfigError(where + ": '" + key + "' must be a non-negative integer");
    }
    return v.get<std::size_t>();
}

std::vector<double> get_numbers(const json& value, const std::string& where)
{
    if (!value.is_array()) {
        throw ConfigError(where + ": expected an array of numbers");
    }
    std::vector<double> out;
    for (auto const& v : value) {
        if (!v.is_number()) {
            throw ConfigError(where + ": expected an array of numbers");
        }
        out.push_back(v.get<double>());
    }
    return out;
}

GridConfig parse_grid(const json& doc, const FactorModel& model, const std::string& where)
{
    check_keys(doc, {"lower", "upper", "half_width", "nodes", "time_steps", "rannacher_steps",
                     "cross_step_limit"},
               where);
    GridConfig grid;
    int const dim = model.dimension();
    if (doc.contains("half_width")) {
        auto const hw = get_numbers(doc.at("half_width"), where + ".half_width");
        if (static_cast<int>(hw.size()) != dim) {
            throw ConfigError(where + ": half_width needs one entry per factor");
        }
        for (int k = 0; k < dim; ++k) {
            grid.lower.push_back(model.x0()[k] - hw[static_cast<std::size_t>(k)]);
            grid.upper.push_back(model.x0()[k] + hw[static_cast<std::size_t>(k)]);
        }
    }
    else {
        if (!doc.contains("lower") || !doc.contains("upper")) {
            throw ConfigError(where + ": give either half_width or lower and upper");
        }
        grid.lower = get_numbers(doc.at("lower"), where + ".lower");
        grid.upper = get_numbers(doc.at("upper"), where + ".upper");
    }
    if (!doc.contains("nodes") || !doc.at("nodes").is_array()) {
        throw ConfigError(where + ": missing 'nodes' array");
    }
    for (auto const& n : doc.at("nodes")) {
        if (!n.is_number_integer()) {
            throw ConfigError(where + ": nodes must be integers");
        }
        grid.nodes.push_back(n.get<int>());
    }
    if (static_cast<int>(grid.nodes.size()) != dim || static_cast<int>(grid.lower.size()) != dim
        || static_cast<int>(grid.upper.size()) != dim) {
        throw ConfigError(where + ": grid dimension does not match the model");
    }
    grid.time_steps = static_cast<int>(get_count(doc, "time_steps", 200, where));
    grid.rannacher_steps = static_cast<int>(get_count(doc, "rannacher_steps", 4, where));
    grid.cross_step_limit = get_number(doc, "cross_step_limit", 2.0, where);
    SpatialGrid const check(grid.to_spec());  // validates bounds and node counts
    return grid;
}

json grid_to_json(const GridConfig& grid)
{
    return json{{"lower", grid.lower},
                {"upper", grid.upper},
                {"nodes", grid.nodes},
                {"time_steps", grid.time_steps},
                {"rannacher_steps", grid.rannacher_steps},
                {"cross_step_limit", grid.cross_step_limit}};
}

AssetSpec parse_asset_spec(const json& doc, const FactorModel& model, const std::string& where)
{
    check_keys(doc, {"id", "kind", "payoff", "strike", "intercept", "slope", "maturity",
                     "coordinate", "backend", "grid"},
               where);
    AssetSpec spec;
    spec.asset = asset_from_json(doc);
    resolve_asset(spec.asset, model);
    if (doc.contains("backend")) {
        if (!doc.at("backend").is_string()) {
            throw ConfigError(where + ": 'backend' must be a string");
        }
        spec.backend = doc.at("backend").get<std::string>();
        static const std::set<std::string> known{"auto", "closed_form", "pde", "mc"};
        if (!known.count(spec.backend)) {
            throw ConfigError(where + ": unknown backend '" + spec.backend + "'");
        }
    }
    if (doc.contains("grid")) {
        spec.grid = parse_grid(doc.at("grid"), model, where + ".grid");
    }
    return spec;
}

json asset_spec_to_json(const AssetSpec& spec)
{
    json doc = asset_to_json(spec.asset);
    doc["backend"] = spec.backend;
    if (spec.grid) {
        doc["grid"] = grid_to_json(*spec.grid);
    }
    return doc;
}

std::vector<PointSpec> parse_points(const json& value, int dim, const std::string& where)
{
    if (!value.is_array()) {
        throw ConfigError(where + ": expected an array of {t, x} points");
    }
    std::vector<PointSpec> out;
    for (auto const& p : value) {
        check_keys(p, {"t", "x"}, where);
        PointSpec pt;
        pt.t = get_number(p, "t", 0.0, where);
        if (!p.contains("x")) {
            throw ConfigError(where + ": point needs 'x'");
        }
        pt.x = get_numbers(p.at("x"), where + ".x");
        if (static_cast<int>(pt.x.size()) != dim) {
            throw ConfigError(where + ": point has wrong dimension");
        }
        out.push_back(std::move(pt));
    }
    return out;
}

json points_to_json(const std::vector<PointSpec>& points)
{
    json out = json::array();
    for (auto const& p : points) {
        out.push_back(json{{"t", p.t}, {"x", p.x}});
    }
    return out;
}

void make_ids_unique(std::vector<AssetSpec>& assets)
{
    std::set<std::string> seen;
    for (std::size_t i = 0; i < assets.size(); ++i) {
        auto& id = assets[i].asset.id;
        if (seen.count(id)) {
            id += "_" + std::to_string(i + 1);
        }
        if (seen.count(id)) {
            throw ConfigError("assets: duplicate id '" + id + "'");
        }
        seen.insert(id);
    }
}

}  // namespace

GridSpec GridConfig::to_spec() const
{
    GridSpec spec;
    auto const dim = static_cast<Eigen::Index>(nodes.size());
    if (lower.size() != nodes.size() || upper.size() != nodes.size()) {
        throw ConfigError("grid: bounds do not match the node counts");
    }
    spec.lower = Vector(dim);
    spec.upper = Vector(dim);
    for (Eigen::Index k = 0; k < dim; ++k) {
        spec.lower[k] = lower[static_cast<std::size_t>(k)];
        spec.upper[k] = upper[static_cast<std::size_t>(k)];
    }
    spec.nodes = nodes;
    spec.time_steps = time_steps;
    spec.rannacher_steps = rannacher_steps;
    spec.cross_step_limit = cross_step_limit;
    return spec;
}

AnalysisConfig config_from_json(const json& doc)
{
    check_keys(doc, {"description", "model", "assets", "claim", "seed", "paths", "grid", "mc",
                     "tolerance", "analyticity_assumed", "method", "probes", "price_points",
                     "hedge", "validate", "witness", "clamp_to_grid"},
               "config");
    AnalysisConfig cfg;
    if (!doc.contains("model")) {
        throw ConfigError("config: missing 'model'");
    }
    cfg.model = doc.at("model");
    check_keys(cfg.model, {"family", "params", "horizon"}, "model");
    FactorModel const model = model_from_json(cfg.model);
    int const dim = model.dimension();

    if (doc.contains("assets")) {
        if (!doc.at("assets").is_array()) {
            throw ConfigError("config: 'assets' must be an array");
        }
        std::size_t i = 0;
        for (auto const& a : doc.at("assets")) {
            ++i;
            cfg.assets.push_back(parse_asset_spec(a, model, "assets[" + std::to_string(i) + "]"));
        }
        make_ids_unique(cfg.assets);
    }

    if (doc.contains("claim")) {
        auto const& c = doc.at("claim");
        ClaimSpec claim;
        if (c.is_object() && c.value("kind", "") == "portfolio") {
            check_keys(c, {"kind", "weights"}, "claim");
            if (!c.contains("weights")) {
                throw ConfigError("claim: portfolio needs 'weights'");
            }
            claim.weights = get_numbers(c.at("weights"), "claim.weights");
            if (claim.weights.size() != cfg.assets.size()) {
                throw ConfigError("claim: need one weight per traded asset");
            }
        }
        else {
            claim.asset = parse_asset_spec(c, model, "claim");
            for (auto const& a : cfg.assets) {
                if (a.asset.id == claim.asset->asset.id) {
                    claim.asset->asset.id += "_claim";
                    break;
                }
            }
        }
        cfg.claim = std::move(claim);
    }

    if (doc.contains("seed")) {
        auto const& s = doc.at("seed");
        if (!s.is_number_integer() || (s.is_number_integer() && !s.is_number_unsigned()
                                       && s.get<long long>() < 0)) {
            throw ConfigError("config: 'seed' must be a non-negative integer");
        }
        cfg.seed = s.get<std::uint64_t>();
    }

    if (doc.contains("paths")) {
        auto const& p = doc.at("paths");
        check_keys(p, {"n_paths", "n_steps"}, "paths");
        cfg.n_paths = get_count(p, "n_paths", cfg.n_paths, "paths");
        cfg.n_steps = get_count(p, "n_steps", cfg.n_steps, "paths");
        if (cfg.n_paths < 1 || cfg.n_steps < 1) {
            throw ConfigError("paths: n_paths and n_steps must be >= 1");
        }
    }
    if (doc.contains("grid")) {
        cfg.grid = parse_grid(doc.at("grid"), model, "grid");
    }
    if (doc.contains("mc")) {
        auto const& m = doc.at("mc");
        check_keys(m, {"n_samples", "max_dt", "relative_bump", "min_bump"}, "mc");
        cfg.mc.n_samples = get_count(m, "n_samples", cfg.mc.n_samples, "mc");
        cfg.mc.max_dt = get_number(m, "max_dt", cfg.mc.max_dt, "mc");
        cfg.mc.relative_bump = get_number(m, "relative_bump", cfg.mc.relative_bump, "mc");
        cfg.mc.min_bump = get_number(m, "min_bump", cfg.mc.min_bump, "mc");
        if (cfg.mc.n_samples < kMinSamples || !(cfg.mc.max_dt > 0.0) || !(cfg.mc.relative_bump > 0.0)
            || !(cfg.mc.min_bump > 0.0)) {
            throw ConfigError("mc: n_samples >= 100 and positive step and bump sizes required");
        }
    }
    cfg.tolerance = get_number(doc, "tolerance", cfg.tolerance, "config");
    if (!(cfg.tolerance > 0.0) || !(cfg.tolerance < 1.0)) {
        throw ConfigError("config: tolerance must lie in (0, 1)");
    }
    if (doc.contains("analyticity_assumed")) {
        if (!doc.at("analyticity_assumed").is_boolean()) {
            throw ConfigError("config: 'analyticity_assumed' must be a boolean");
        }
        cfg.analyticity_assumed = doc.at("analyticity_assumed").get<bool>();
    }
    if (doc.contains("clamp_to_grid")) {
        if (!doc.at("clamp_to_grid").is_boolean()) {
            throw ConfigError("config: 'clamp_to_grid' must be a boolean");
        }
        cfg.clamp_to_grid = doc.at("clamp_to_grid").get<bool>();
    }
    if (doc.contains("method")) {
        cfg.method = doc.at("method").is_string() ? doc.at("method").get<std::string>() : "";
        if (cfg.method != "pathwise" && cfg.method != "single_point") {
            throw ConfigError("config: method must be 'pathwise' or 'single_point'");
        }
    }
    if (doc.contains("probes")) {
        cfg.probes = parse_points(doc.at("probes"), dim, "probes");
    }
    if (doc.contains("price_points")) {
        cfg.price_points = parse_points(doc.at("price_points"), dim, "price_points");
    }
    if (doc.contains("hedge")) {
        auto const& h = doc.at("hedge");
        check_keys(h, {"rebalance_steps", "sweep", "pseudo_inverse_threshold", "singular_fallback"},
                   "hedge");
        cfg.hedge.rebalance_steps = get_count(h, "rebalance_steps", cfg.hedge.rebalance_steps,
                                              "hedge");
        if (h.contains("sweep")) {
            for (double v : get_numbers(h.at("sweep"), "hedge.sweep")) {
                if (!(v >= 1.0) || v != std::floor(v)) {
                    throw ConfigError("hedge.sweep: entries must be positive integers");
                }
                cfg.hedge.sweep.push_back(static_cast<std::size_t>(v));
            }
        }
        cfg.hedge.pseudo_inverse_threshold = get_number(
            h, "pseudo_inverse_threshold", cfg.hedge.pseudo_inverse_threshold, "hedge");
        cfg.hedge.singular_fallback = h.value("singular_fallback", cfg.hedge.singular_fallback);
        if (cfg.hedge.singular_fallback != "zero"
            && cfg.hedge.singular_fallback != "pseudo_inverse") {
            throw ConfigError("hedge: singular_fallback must be 'zero' or 'pseudo_inverse'");
        }
    }
    if (doc.contains("validate")) {
        auto const& v = doc.at("validate");
        check_keys(v, {"probe", "n_paths", "n_steps", "lower", "upper", "nodes_per_axis",
                       "time_nodes", "floor"},
                   "validate");
        auto& vc = cfg.validate;
        vc.probe = v.value("probe", vc.probe);
        if (vc.probe != "paths" && vc.probe != "grid") {
            throw ConfigError("validate: probe must be 'paths' or 'grid'");
        }
        vc.n_paths = get_count(v, "n_paths", vc.n_paths, "validate");
        vc.n_steps = get_count(v, "n_steps", vc.n_steps, "validate");
        if (v.contains("lower")) {
            vc.lower = get_numbers(v.at("lower"), "validate.lower");
        }
        if (v.contains("upper")) {
            vc.upper = get_numbers(v.at("upper"), "validate.upper");
        }
        vc.nodes_per_axis = static_cast<int>(get_count(v, "nodes_per_axis", 5, "validate"));
        vc.time_nodes = static_cast<int>(get_count(v, "time_nodes", 3, "validate"));
        vc.floor = get_number(v, "floor", vc.floor, "validate");
        if (vc.probe == "grid"
            && (static_cast<int>(vc.lower.size()) != dim
                || static_cast<int>(vc.upper.size()) != dim)) {
            throw ConfigError("validate: grid probe needs lower and upper per factor");
        }
    }
    if (doc.contains("witness")) {
        auto const& w = doc.at("witness");
        check_keys(w, {"n_mc", "max_anchors"}, "witness");
        cfg.witness.n_mc = get_count(w, "n_mc", 0, "witness");
        cfg.witness.max_anchors = get_count(w, "max_anchors", 1000, "witness");
    }
    return cfg;
}

json config_to_json(const AnalysisConfig& cfg)
{
    json doc;
    doc["model"] = cfg.model;
    doc["assets"] = json::array();
    for (auto const& a : cfg.assets) {
        doc["assets"].push_back(asset_spec_to_json(a));
    }
    if (cfg.claim) {
        if (cfg.claim->asset) {
            doc["claim"] = asset_spec_to_json(*cfg.claim->asset);
        }
        else {
            doc["claim"] = json{{"kind", "portfolio"}, {"weights", cfg.claim->weights}};
        }
    }
    if (cfg.seed) {
        doc["seed"] = *cfg.seed;
    }
    doc["paths"] = json{{"n_paths", cfg.n_paths}, {"n_steps", cfg.n_steps}};
    if (cfg.grid) {
        doc["grid"] = grid_to_json(*cfg.grid);
    }
    doc["mc"] = json{{"n_samples", cfg.mc.n_samples},
                     {"max_dt", cfg.mc.max_dt},
                     {"relative_bump", cfg.mc.relative_bump},
                     {"min_bump", cfg.mc.min_bump}};
    doc["tolerance"] = cfg.tolerance;
    doc["analyticity_assumed"] = cfg.analyticity_assumed;
    doc["method"] = cfg.method;
    doc["probes"] = points_to_json(cfg.probes);
    doc["price_points"] = points_to_json(cfg.price_points);
    doc["hedge"] = json{{"rebalance_steps", cfg.hedge.rebalance_steps},
                        {"sweep", cfg.hedge.sweep},
                        {"pseudo_inverse_threshold", cfg.hedge.pseudo_inverse_threshold},
                        {"singular_fallback", cfg.hedge.singular_fallback}};
    json v{{"probe", cfg.validate.probe},
           {"n_paths", cfg.validate.n_paths},
           {"n_steps", cfg.validate.n_steps},
           {"nodes_per_axis", cfg.validate.nodes_per_axis},
           {"time_nodes", cfg.validate.time_nodes},
           {"floor", cfg.validate.floor}};
    if (!cfg.validate.lower.empty()) {
        v["lower"] = cfg.validate.lower;
        v["upper"] = cfg.validate.upper;
    }
    doc["validate"] = v;
    doc["witness"] = json{{"n_mc", cfg.witness.n_mc}, {"max_anchors", cfg.witness.max_anchors}};
    doc["clamp_to_grid"] = cfg.clamp_to_grid;
    return doc;
}

AnalysisConfig load_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config file '" + path.string() + "'");
    }
    std::stringstream buffer;
    buffer << in.rdbuf();
    json doc;
    try {
        doc = json::parse(buffer.str());
    }
    catch (const json::parse_error& e) {
        throw ConfigError(std::string("malformed JSON in config: ") + e.what());
    }
    try {
        return config_from_json(doc);
    }
    catch (const json::exception& e) {
        throw ConfigError(std::string("invalid config: ") + e.what());
    }
}

//---------------------------------------------------------------------------//
std::size_t PricerBundle::clamped_lookups() const
{
    std::size_t total = 0;
    for (auto const& p : surface_pricers) {
        total += p->clamped_lookups();
    }
    return total;
}

std::string choose_backend(const FactorModel& model, const AssetSpec& spec)
{
    Asset const asset = resolve_asset(spec.asset, model);
    bool const closed = ClosedFormPricer::supports(model, asset);
    bool const pde_ok = model.dimension() <= 2;
    if (spec.backend == "auto") {
        return closed ? "closed_form" : pde_ok ? "pde" : "mc";
    }
    if (spec.backend == "closed_form" && !closed) {
        throw ConfigError("asset '" + asset.id + "': no closed form under model '"
                          + model.family() + "'");
    }
    if (spec.backend == "pde" && !pde_ok) {
        throw ConfigError("asset '" + asset.id + "': the PDE backend supports at most 2 factors");
    }
    return spec.backend;
}

GridSpec default_grid(const FactorModel& model, const Asset& asset)
{
    int const dim = model.dimension();
    if (dim > 2) {
        throw ConfigError("default grid: the PDE backend supports at most 2 factors");
    }
    Matrix const sigma = model.diffusion(0.0, model.x0());
    Matrix const a = sigma * sigma.transpose();
    Vector hw(dim);
    for (int k = 0; k < dim; ++k) {
        hw[k] = std::max(6.0 * std::sqrt(a(k, k) * asset.maturity), 1e-3);
    }
    std::vector<int> nodes(static_cast<std::size_t>(dim), dim == 1 ? 401 : 121);
    return GridSpec::centered(model, hw, nodes, dim == 1 ? 400 : 200);
}

namespace {


PricerPtr make_direct(const FactorModel& model, const AssetSpec& spec, const std::string& backend,
                      const AnalysisConfig& cfg)
{
    if (backend == "closed_form") {
        return std::make_shared<const ClosedFormPricer>(model, spec.asset);
    }
    McConfig mc = cfg.mc;
    mc.seed = cfg.seed.value_or(0);
    return std::make_shared<const MonteCarloPricer>(model, spec.asset, mc);
}

}  // namespace

PricerBundle build_pricers(const FactorModel& model, const AnalysisConfig& cfg, bool with_claim)
{
    PricerBundle bundle;
    std::size_t const n = cfg.assets.size();
    bundle.assets.resize(n);
    bundle.backends.resize(n);

    std::vector<AssetSpec const*> pde_specs;
    std::vector<PricerPtr*> pde_slots;
    for (std::size_t i = 0; i < n; ++i) {
        auto const& spec = cfg.assets[i];
        bundle.backends[i] = choose_backend(model, spec);
        if (bundle.backends[i] == "pde") {
            pde_specs.push_back(&spec);
            pde_slots.push_back(&bundle.assets[i]);
        }
        else {
            bundle.assets[i] = make_direct(model, spec, bundle.backends[i], cfg);
        }
    }
    bool const claim_asset = with_claim && cfg.claim && cfg.claim->asset;
    if (claim_asset) {
        bundle.claim_backend = choose_backend(model, *cfg.claim->asset);
        if (bundle.claim_backend == "pde") {
            pde_specs.push_back(&*cfg.claim->asset);
            pde_slots.push_back(&bundle.claim);
        }
        else {
            bundle.claim = make_direct(model, *cfg.claim->asset, bundle.claim_backend, cfg);
        }
    }

    if (!pde_specs.empty()) {
        std::vector<Asset> assets;
        std::vector<GridSpec> grids;
        for (auto const* spec : pde_specs) {
            Asset const resolved = resolve_asset(spec->asset, model);
            assets.push_back(resolved);
            if (spec->grid) {
                grids.push_back(spec->grid->to_spec());
            }
            else if (cfg.grid) {
                grids.push_back(cfg.grid->to_spec());
            }
            else {
                grids.push_back(default_grid(model, resolved));
            }
        }
        auto surfaces = solve_pde_batch(model, assets, grids);
        for (std::size_t k = 0; k < surfaces.size(); ++k) {
            auto pricer
                = std::make_shared<const SurfacePricer>(surfaces[k], assets[k], cfg.clamp_to_grid);
            *pde_slots[k] = pricer;
            bundle.surface_pricers.push_back(pricer);
            bundle.surfaces[assets[k].id] = surfaces[k];
        }
    }

    if (with_claim && cfg.claim && !cfg.claim->asset) {
        bundle.claim = std::make_shared<const PortfolioPricer>(cfg.claim->weights, bundle.assets);
        bundle.claim_backend = "portfolio";
    }
    return bundle;
}

std::vector<SpacePoint> resolve_points(const std::vector<PointSpec>& points,
                                       const FactorModel& model)
{
    std::vector<SpacePoint> out;
    for (auto const& p : points) {
        Vector x(model.dimension());
        for (int k = 0; k < model.dimension(); ++k) {
            x[k] = p.x[static_cast<std::size_t>(k)];
        }
        out.push_back({p.t, x});
    }
    return out;
}

HedgeOptions hedge_options(const AnalysisConfig& config)
{
    HedgeOptions ho;
    ho.rebalance_steps = config.hedge.rebalance_steps;
    ho.tolerance = config.tolerance;
    ho.pseudo_inverse_threshold = config.hedge.pseudo_inverse_threshold;
    ho.singular_fallback = config.hedge.singular_fallback == "pseudo_inverse"
                               ? SingularFallback::pseudo_inverse
                               : SingularFallback::zero;
    return ho;
}

}  // namespace complab
