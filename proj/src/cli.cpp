#include "complab/cli.hpp"

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <omp.h>

#include "complab/completeness.hpp"
#include "complab/errors.hpp"
#include "complab/hedging.hpp"
#include "complab/path_engine.hpp"
#include "complab/varswap.hpp"

#ifndef COMPLAB_VERSION
#define COMPLAB_VERSION "0.0.0"
#endif

namespace complab {

using nlohmann::json;

namespace {

class StageTimer {
  public:
    explicit StageTimer(json& sink) : sink_(sink) {}

    template <class F>
    auto operator()(const std::string& stage, F&& f)
    {
        auto const start = std::chrono::steady_clock::now();
        auto result = f();
        std::chrono::duration<double> const elapsed = std::chrono::steady_clock::now() - start;
        sink_[stage] = elapsed.count();
        return result;
    }

  private:
    json& sink_;
};

// Locale-free shortest round-trip formatting for CSV cells.
std::string num(double v)
{
    std::ostringstream out;
    out << std::setprecision(17) << v;
    return out.str();
}

json vec_json(const Vector& v)
{
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        out.push_back(v[i]);
    }
    return out;
}

json point_json(double t, const Vector& x)
{
    return json{{"t", t}, {"x", vec_json(x)}};
}

std::string x_header(int dim, const std::string& prefix)
{
    std::string out;
    for (int k = 1; k <= dim; ++k) {
        out += "," + prefix + std::to_string(k);
    }
    return out;
}

std::vector<SpacePoint> default_probes(const FactorModel& model)
{
    return {{0.0, model.x0()}, {0.5 * model.horizon(), model.x0()}};
}

void require_d_assets(const AnalysisConfig& cfg, const FactorModel& model)
{
    if (cfg.assets.size() != static_cast<std::size_t>(model.dimension())) {
        throw ConfigError("this run needs exactly d = " + std::to_string(model.dimension())
                          + " traded assets, got " + std::to_string(cfg.assets.size()));
    }
}

void add_pricing_warnings(const PricerBundle& bundle, json& warnings)
{
    if (auto const n = bundle.clamped_lookups(); n > 0) {
        warnings.push_back("pde lookups moved back inside the grid: " + std::to_string(n));
    }
}

void add_path_warnings(const PathSet& paths, json& warnings)
{
    if (paths.boundary_warning()) {
        warnings.push_back("paths clamped at the domain boundary: "
                           + std::to_string(paths.flagged_count()));
    }
}

json verdict_json(const CompletenessVerdict& v)
{
    json out{{"verdict", to_string(v.verdict)},
             {"method", to_string(v.method)},
             {"tolerance", v.tolerance},
             {"explanation", v.explanation},
             {"probes_evaluated", v.probes_evaluated},
             {"best_ratio", v.best_ratio}};
    if (v.point) {
        out["point"] = point_json(v.point->t, v.point->x);
        out["singularity_ratio"] = v.point->singularity_ratio;
        out["det"] = v.point->det;
    }
    else {
        out["point"] = nullptr;
        out["singularity_ratio"] = v.best_ratio;
    }
    if (v.occupation) {
        auto const& o = *v.occupation;
        out["occupation"] = json{{"mean_fraction", o.mean},
                                 {"max_fraction", o.max},
                                 {"probed_points", o.probed_points},
                                 {"singular_points", o.singular_points},
                                 {"flagged_gradients", o.flagged_gradients}};
    }
    return out;
}

//---------------------------------------------------------------------------//
void run_validate(const AnalysisConfig& cfg, const FactorModel& model, RunReport& rr,
                  StageTimer& timed)
{
    auto const& vc = cfg.validate;
    ProbePlan plan;
    if (vc.probe == "grid") {
        GridProbe g;
        g.lower = Vector::Map(vc.lower.data(), static_cast<Eigen::Index>(vc.lower.size()));
        g.upper = Vector::Map(vc.upper.data(), static_cast<Eigen::Index>(vc.upper.size()));
        g.nodes_per_axis = vc.nodes_per_axis;
        g.time_nodes = vc.time_nodes;
        plan = g;
    }
    else {
        plan = PathProbe{vc.n_paths, vc.n_steps, *cfg.seed};
    }
    auto const report
        = timed("validate", [&] { return validate_ellipticity(model, plan, vc.floor); });
    json failures = json::array();
    for (std::size_t i = 0; i < report.failures.size() && i < 10; ++i) {
        failures.push_back(point_json(report.failures[i].t, report.failures[i].x));
    }
    rr.results = json{{"passed", report.passed},
                      {"min_eigenvalue_ratio", report.min_eigenvalue_ratio},
                      {"floor", report.floor},
                      {"probed_points", report.probed_points.size()},
                      {"failure_count", report.failures.size()},
                      {"first_failures", failures}};
}

void run_simulate(const AnalysisConfig& cfg, const FactorModel& model, const CliOptions& opts,
                  RunReport& rr, StageTimer& timed)
{
    PathOptions po;
    po.store_increments = opts.dump_increments;
    auto const paths = timed("simulate", [&] {
        return simulate_paths(model, cfg.n_paths, cfg.n_steps, *cfg.seed, po);
    });
    int const dim = model.dimension();
    Vector mean = Vector::Zero(dim);
    Vector sq = Vector::Zero(dim);
    for (std::size_t p = 0; p < paths.n_paths(); ++p) {
        Vector const x = paths.state_vector(p, paths.n_steps());
        mean += x;
        sq += x.cwiseProduct(x);
    }
    double const n = static_cast<double>(paths.n_paths());
    mean /= n;
    Vector var = sq / n - mean.cwiseProduct(mean);
    rr.results = json{{"n_paths", paths.n_paths()},
                      {"n_steps", paths.n_steps()},
                      {"dt", paths.dt()},
                      {"flagged_paths", paths.flagged_count()},
                      {"terminal_mean", vec_json(mean)},
                      {"terminal_variance", vec_json(var)}};
    if (auto pc = model.price_coordinate()) {
        auto const qv = quadratic_variation(paths, *pc);
        double sum = 0.0;
        for (std::size_t p = 0; p < qv.n_paths(); ++p) {
            sum += qv.terminal(p);
        }
        rr.results["mean_realized_qv"] = sum / n;
    }
    add_path_warnings(paths, rr.report["warnings"]);
    if (opts.dump_paths) {
        std::ostringstream csv;
        write_paths_csv(paths, csv, opts.dump_increments);
        write_atomic(*opts.dump_paths, csv.str());
        rr.report["paths_file"] = opts.dump_paths->string();
    }
}

void run_price(const AnalysisConfig& cfg, const FactorModel& model, RunReport& rr,
               StageTimer& timed)
{
    auto const bundle = timed("pricing_setup", [&] { return build_pricers(model, cfg, true); });
    auto points = resolve_points(cfg.price_points, model);
    if (points.empty()) {
        points.push_back({0.0, model.x0()});
    }
    int const dim = model.dimension();
    std::vector<std::pair<std::string, PricerPtr>> rows;
    std::vector<std::string> backends;
    for (std::size_t i = 0; i < bundle.assets.size(); ++i) {
        rows.emplace_back(cfg.assets[i].asset.id, bundle.assets[i]);
        backends.push_back(bundle.backends[i]);
    }
    if (bundle.claim) {
        rows.emplace_back(cfg.claim->asset ? cfg.claim->asset->asset.id : "claim", bundle.claim);
        backends.push_back(bundle.claim_backend);
    }
    std::ostringstream csv;
    csv << "asset,backend,t" << x_header(dim, "x_") << ",value" << x_header(dim, "grad_")
        << x_header(dim, "grad_stderr_") << ",flagged\n";
    json table = json::array();
    timed("price", [&] {
        for (std::size_t r = 0; r < rows.size(); ++r) {
            for (auto const& pt : points) {
                double const v = rows[r].second->value(pt.t, pt.x);
                auto const g = rows[r].second->gradient(pt.t, pt.x);
                csv << rows[r].first << ',' << backends[r] << ',' << num(pt.t);
                for (int k = 0; k < dim; ++k) {
                    csv << ',' << num(pt.x[k]);
                }
                csv << ',' << num(v);
                for (int k = 0; k < dim; ++k) {
                    csv << ',' << num(g.value[k]);
                }
                for (int k = 0; k < dim; ++k) {
                    csv << ',' << num(g.std_error[k]);
                }
                csv << ',' << (g.flagged ? 1 : 0) << '\n';
                table.push_back(json{{"asset", rows[r].first},
                                     {"backend", backends[r]},
                                     {"t", pt.t},
                                     {"x", vec_json(pt.x)},
                                     {"value", v},
                                     {"gradient", vec_json(g.value)},
                                     {"gradient_stderr", vec_json(g.std_error)},
                                     {"flagged", g.flagged}});
            }
        }
        return 0;
    });
    rr.files.emplace_back("prices.csv", csv.str());
    for (auto const& [id, surface] : bundle.surfaces) {
        std::ostringstream s;
        surface->write_csv(s, {0, surface->times().size() - 1});
        rr.files.emplace_back("surface_" + id + ".csv", s.str());
    }
    rr.results = json{{"prices", table}};
    add_pricing_warnings(bundle, rr.report["warnings"]);
}

void run_completeness(const AnalysisConfig& cfg, const FactorModel& model, RunReport& rr,
                      StageTimer& timed)
{
    require_d_assets(cfg, model);
    auto const bundle = timed("pricing_setup", [&] { return build_pricers(model, cfg, false); });
    auto probes = resolve_points(cfg.probes, model);
    if (probes.empty()) {
        probes = default_probes(model);
    }
    CompletenessVerdict verdict;
    if (cfg.method == "single_point") {
        verdict = timed("single_point", [&] {
            return single_point_test(model, bundle.assets, probes, cfg.analyticity_assumed,
                                     cfg.tolerance);
        });
    }
    else {
        PathOptions po;
        po.store_increments = false;
        auto const paths = timed("simulate", [&] {
            return simulate_paths(model, cfg.n_paths, cfg.n_steps, *cfg.seed, po);
        });
        add_path_warnings(paths, rr.report["warnings"]);
        PathwiseOptions opts;
        opts.tolerance = cfg.tolerance;
        opts.analyticity_assumed = cfg.analyticity_assumed;
        opts.confirmation_probes = probes;
        verdict = timed("occupation", [&] {
            return completeness_along_paths(model, bundle.assets, paths, opts);
        });
        std::ostringstream csv;
        csv << "path,occupation_fraction\n";
        auto const& f = verdict.occupation->fractions;
        for (std::size_t p = 0; p < f.size(); ++p) {
            csv << p << ',' << num(f[p]) << '\n';
        }
        rr.files.emplace_back("occupation.csv", csv.str());
        if (verdict.occupation->flagged_gradients > 0) {
            rr.report["warnings"].push_back(
                "noisy Monte Carlo gradients at "
                + std::to_string(verdict.occupation->flagged_gradients) + " points");
        }
    }
    rr.results = verdict_json(verdict);
    rr.results["backends"] = bundle.backends;
    add_pricing_warnings(bundle, rr.report["warnings"]);
}

void run_witness(const AnalysisConfig& cfg, const FactorModel& model, RunReport& rr,
                 StageTimer& timed)
{
    require_d_assets(cfg, model);
    auto const bundle = timed("pricing_setup", [&] { return build_pricers(model, cfg, false); });
    auto const paths = timed("simulate", [&] {
        return simulate_paths(model, cfg.n_paths, cfg.n_steps, *cfg.seed);
    });
    add_path_warnings(paths, rr.report["warnings"]);
    WitnessOptions wo;
    wo.tolerance = cfg.tolerance;
    wo.n_mc = cfg.witness.n_mc;
    wo.max_anchors = cfg.witness.max_anchors;
    auto const w
        = timed("witness", [&] { return incompleteness_witness(model, bundle.assets, paths, wo); });

    int const dim = model.dimension();
    std::ostringstream csv;
    csv << "path,H,occupation_time" << x_header(dim, "gain_") << '\n';
    for (std::size_t p = 0; p < w.H.size(); ++p) {
        csv << p << ',' << num(w.H[p]) << ',' << num(w.occupation_time[p]);
        for (auto const& g : w.gains) {
            csv << ',' << num(g[p]);
        }
        csv << '\n';
    }
    rr.files.emplace_back("witness.csv", csv.str());

    json anchors = json::array();
    for (std::size_t i = 0; i < w.anchors.size() && i < 5; ++i) {
        auto const& a = w.anchors[i];
        anchors.push_back(json{{"t", a.t},
                               {"x", vec_json(a.x)},
                               {"beta", vec_json(a.beta)},
                               {"kernel_residual", a.kernel_residual},
                               {"normalization", a.normalization}});
    }
    json orth = json::array();
    for (std::size_t i = 0; i < w.orthogonality.size(); ++i) {
        orth.push_back(json{{"asset", cfg.assets[i].asset.id},
                            {"mean", w.orthogonality[i]},
                            {"stderr", w.orthogonality_stderr[i]}});
    }
    rr.results = json{{"n_paths", w.H.size()},
                      {"singular_points", w.singular_points},
                      {"anchors_stored", w.anchors.size()},
                      {"first_anchors", anchors},
                      {"max_kernel_residual", w.max_kernel_residual},
                      {"max_normalization_error", w.max_normalization_error},
                      {"second_moment", w.second_moment},
                      {"second_moment_stderr", w.second_moment_stderr},
                      {"mean_occupation", w.mean_occupation},
                      {"mean_occupation_stderr", w.mean_occupation_stderr},
                      {"isometry_gap", w.isometry_gap},
                      {"isometry_gap_stderr", w.isometry_gap_stderr},
                      {"orthogonality", orth}};
    add_pricing_warnings(bundle, rr.report["warnings"]);
}

void run_hedge(const AnalysisConfig& cfg, const FactorModel& model, RunReport& rr,
               StageTimer& timed)
{
    require_d_assets(cfg, model);
    if (!cfg.claim) {
        throw ConfigError("hedge: config has no 'claim'");
    }
    auto const bundle = timed("pricing_setup", [&] { return build_pricers(model, cfg, true); });
    PathOptions po;
    po.store_increments = false;
    auto const paths = timed("simulate", [&] {
        return simulate_paths(model, cfg.n_paths, cfg.n_steps, *cfg.seed, po);
    });
    add_path_warnings(paths, rr.report["warnings"]);
    HedgeOptions ho = hedge_options(cfg);

    HedgeReport finest;
    json sweep_json = nullptr;
    if (!cfg.hedge.sweep.empty()) {
        auto sweep = timed("hedge", [&] {
            return hedge_sweep(model, bundle.assets, bundle.claim, paths, cfg.hedge.sweep, ho);
        });
        std::ostringstream csv;
        csv << "rebalance_steps,dt,mean_error,rms_error,max_abs_error,singular_events\n";
        json rows = json::array();
        for (auto const& r : sweep.rows) {
            csv << r.rebalance_steps << ',' << num(r.dt) << ',' << num(r.mean_error) << ','
                << num(r.rms_error) << ',' << num(r.max_abs_error) << ',' << r.singular_events
                << '\n';
            rows.push_back(json{{"rebalance_steps", r.rebalance_steps},
                                {"dt", r.dt},
                                {"mean_error", r.mean_error},
                                {"rms_error", r.rms_error},
                                {"max_abs_error", r.max_abs_error},
                                {"singular_events", r.singular_events}});
        }
        rr.files.emplace_back("sweep_summary.csv", csv.str());
        sweep_json = json{{"rows", rows}, {"loglog_slope", sweep.slope}};
        finest = std::move(sweep.finest);
    }
    else {
        finest = timed("hedge", [&] {
            return replicate(model, bundle.assets, bundle.claim, paths, ho);
        });
    }
    std::ostringstream csv;
    csv << "path,terminal_error,singular_events\n";
    std::size_t singular_total = 0;
    for (std::size_t p = 0; p < finest.terminal_errors.size(); ++p) {
        csv << p << ',' << num(finest.terminal_errors[p]) << ',' << finest.singular_events[p]
            << '\n';
        singular_total += finest.singular_events[p];
    }
    rr.files.emplace_back("hedge_errors.csv", csv.str());
    rr.results = json{{"claim_backend", bundle.claim_backend},
                      {"asset_backends", bundle.backends},
                      {"initial_wealth", finest.initial_wealth},
                      {"rebalance_steps", finest.rebalance_steps},
                      {"dt", finest.dt},
                      {"mean_error", finest.mean_error},
                      {"rms_error", finest.rms_error},
                      {"max_abs_error", finest.max_abs_error},
                      {"relative_rms_error", finest.initial_wealth != 0.0
                                                 ? finest.rms_error / std::abs(finest.initial_wealth)
                                                 : 0.0},
                      {"singular_events", singular_total},
                      {"pseudo_inverse_events", finest.pseudo_inverse_events},
                      {"sweep", sweep_json}};
    if (finest.flagged_gradients > 0) {
        rr.report["warnings"].push_back("noisy Monte Carlo gradients at "
                                        + std::to_string(finest.flagged_gradients)
                                        + " rebalance points");
    }
    add_pricing_warnings(bundle, rr.report["warnings"]);
}

void run_varswap(const AnalysisConfig& cfg, const FactorModel& model, RunReport& rr,
                 StageTimer& timed)
{
    if (!model.price_coordinate()) {
        throw ConfigError("varswap: model has no stock price coordinate");
    }
    double const maturity = model.horizon();
    AssetSpec log_spec;
    log_spec.asset = make_log_contract(model, maturity);
    log_spec.grid = cfg.grid;
    AnalysisConfig sub = cfg;
    sub.assets = {log_spec};
    sub.claim.reset();
    auto const bundle = timed("pricing_setup", [&] { return build_pricers(model, sub, false); });
    auto const& log_pricer = *bundle.assets.front();
    double const v0 = varswap_price(model, log_pricer, maturity, 0.0, model.x0());

    PathOptions po;
    po.store_increments = false;
    auto const paths = timed("simulate", [&] {
        return simulate_paths(model, cfg.n_paths, cfg.n_steps, *cfg.seed, po);
    });
    add_path_warnings(paths, rr.report["warnings"]);
    auto const vs = timed("pathwise", [&] { return varswap_along_paths(model, log_pricer, paths); });
    std::ostringstream csv;
    csv << "path,terminal_value,realized_qv,relative_gap\n";
    for (std::size_t p = 0; p < vs.terminal_value.size(); ++p) {
        csv << p << ',' << num(vs.terminal_value[p]) << ',' << num(vs.realized_qv[p]) << ','
            << num(vs.relative_gap[p]) << '\n';
    }
    rr.files.emplace_back("varswap_paths.csv", csv.str());

    json ranks = json::array();
    if (cfg.assets.size() == static_cast<std::size_t>(model.dimension())
        && model.dimension() >= 2) {
        auto const traded = build_pricers(model, cfg, false);
        auto probes = resolve_points(cfg.probes, model);
        if (probes.empty()) {
            probes = default_probes(model);
        }
        for (auto const& p : probes) {
            auto const ev = build_G(traded.assets, p.t, p.x, cfg.tolerance);
            double const v1 = traded.assets.front()->value(p.t, p.x);
            auto const rc = varswap_rank_check(ev.G, v1, p.t, maturity, model.rate(),
                                               cfg.tolerance);
            ranks.push_back(json{{"t", p.t},
                                 {"x", vec_json(p.x)},
                                 {"rank_before", rc.rank_before},
                                 {"rank_after", rc.rank_after},
                                 {"equal", rc.equal}});
        }
    }
    double const n = static_cast<double>(vs.terminal_value.size());
    rr.results = json{{"maturity", maturity},
                      {"log_contract_backend", bundle.backends.front()},
                      {"log_contract_value", log_pricer.value(0.0, model.x0())},
                      {"V0", v0},
                      {"band", vs.band},
                      {"within_band", vs.within_band},
                      {"fraction_within_band", static_cast<double>(vs.within_band) / n},
                      {"rank_checks", ranks}};
    add_pricing_warnings(bundle, rr.report["warnings"]);
}

json error_json(const std::string& type, const std::string& message, int code)
{
    return json{{"error", {{"type", type}, {"message", message}, {"exit_code", code}}}};
}

void apply_thread_cap()
{
    if (char const* env = std::getenv("COMPLAB_THREADS")) {
        char* end = nullptr;
        long const n = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && n > 0) {
            omp_set_num_threads(static_cast<int>(n));
        }
    }
}

}  // namespace

const std::vector<std::string>& subcommands()
{
    static const std::vector<std::string> names{"validate", "simulate", "price", "completeness",
                                                "witness", "hedge", "varswap"};
    return names;
}

RunReport execute(const std::string& subcommand, const AnalysisConfig& cfg,
                  const CliOptions& options)
{
    if (!cfg.seed) {
        throw ConfigError("config has no 'seed' and none was given with --seed");
    }
    RunReport rr;
    rr.report = json{{"tool", "complab"},
                     {"version", COMPLAB_VERSION},
                     {"subcommand", subcommand},
                     {"seed", *cfg.seed},
                     {"timings_s", json::object()},
                     {"warnings", json::array()}};
    json const echo = config_to_json(cfg);
    rr.report["config"] = echo;
    rr.report["config_hash"] = sha256_hex(echo.dump());
    StageTimer timed(rr.report["timings_s"]);

    FactorModel const model = model_from_json(cfg.model);
    if (subcommand == "validate") {
        run_validate(cfg, model, rr, timed);
    }
    else if (subcommand == "simulate") {
        run_simulate(cfg, model, options, rr, timed);
    }
    else if (subcommand == "price") {
        run_price(cfg, model, rr, timed);
    }
    else if (subcommand == "completeness") {
        run_completeness(cfg, model, rr, timed);
    }
    else if (subcommand == "witness") {
        run_witness(cfg, model, rr, timed);
    }
    else if (subcommand == "hedge") {
        run_hedge(cfg, model, rr, timed);
    }
    else if (subcommand == "varswap") {
        run_varswap(cfg, model, rr, timed);
    }
    else {
        throw ConfigError("unknown subcommand '" + subcommand + "'");
    }
    rr.results["config_hash"] = rr.report["config_hash"];
    rr.report["results"] = rr.results;
    json outputs = json::array();
    for (auto const& f : rr.files) {
        outputs.push_back(f.first);
    }
    rr.report["outputs"] = outputs;
    return rr;
}

int run(const CliOptions& options, std::ostream& err)
{
    apply_thread_cap();
    try {
        AnalysisConfig cfg = load_config(options.config);
        if (options.seed) {
            cfg.seed = options.seed;
        }
        if (!options.sweep_steps.empty()) {
            cfg.hedge.sweep = options.sweep_steps;
        }
        RunReport const rr = execute(options.subcommand, cfg, options);
        emit_report(rr, options.out);

        if (rr.results.is_object() && rr.results.value("passed", true) == false) {
            err << error_json("validation_failed", "ellipticity check failed",
                              exit_numerical_failure)
                       .dump()
                << '\n';
            return exit_numerical_failure;
        }
        if (options.strict && rr.results.is_object()
            && rr.results.value("verdict", "") == "INCONCLUSIVE") {
            err << error_json("inconclusive", "verdict is INCONCLUSIVE under --strict",
                              exit_inconclusive)
                       .dump()
                << '\n';
            return exit_inconclusive;
        }
        return exit_ok;
    }
    catch (const ConfigError& e) {
        err << error_json("config_error", e.what(), exit_config_error).dump() << '\n';
        return exit_config_error;
    }
    catch (const nlohmann::json::exception& e) {
        err << error_json("config_error", e.what(), exit_config_error).dump() << '\n';
        return exit_config_error;
    }
    catch (const std::exception& e) {
        err << error_json("numerical_failure", e.what(), exit_numerical_failure).dump() << '\n';
        return exit_numerical_failure;
    }
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"complab: completeness analysis for diffusion market models"};
    CliOptions options;
    std::string config;
    std::string out_dir;
    std::string dump;
    std::uint64_t seed = 0;
    app.add_option("subcommand", options.subcommand, "validate | simulate | price | "
                                                     "completeness | witness | hedge | varswap")
        ->required()
        ->check(CLI::IsMember(subcommands()));
    app.add_option("--config", config, "analysis config (JSON)")->required();
    app.add_option("--out", out_dir, "output directory")->required();
    auto* seed_opt = app.add_option("--seed", seed, "override the config seed");
    app.add_flag("--strict", options.strict, "exit 4 on an INCONCLUSIVE verdict");
    auto* dump_opt = app.add_option("--dump-paths", dump, "write simulated paths as CSV");
    app.add_flag("--dump-increments", options.dump_increments,
                 "include Brownian increments in --dump-paths");
    app.add_option("--sweep-steps", options.sweep_steps, "rebalance counts for a hedge sweep")
        ->delimiter(',');
    try {
        app.parse(argc, argv);
    }
    catch (const CLI::CallForHelp&) {
        out << app.help();
        return exit_ok;
    }
    catch (const CLI::ParseError& e) {
        err << error_json("usage_error", e.what(), exit_config_error).dump() << '\n';
        return exit_config_error;
    }
    options.config = config;
    options.out = out_dir;
    if (*seed_opt) {
        options.seed = seed;
    }
    if (*dump_opt) {
        options.dump_paths = dump;
    }
    return run(options, err);
}

}  // namespace complab
