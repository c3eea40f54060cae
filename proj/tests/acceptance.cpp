// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any
// failure. Every tolerance below is the pinned acceptance tolerance.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "complab/cli.hpp"
#include "complab/completeness.hpp"
#include "complab/config.hpp"
#include "complab/hedging.hpp"
#include "complab/monte_carlo.hpp"
#include "complab/path_engine.hpp"
#include "complab/pde.hpp"
#include "complab/pricer.hpp"
#include "complab/varswap.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace complab;

namespace {

fs::path config_path(const std::string& name)
{
    return fs::path(COMPLAB_SOURCE_DIR) / "configs" / name;
}

// Collects failed checks with a short reason each.
class Checks {
  public:
    void expect(bool ok, const std::string& what)
    {
        if (!ok) {
            failures_.push_back(what);
        }
    }
    void note(const std::string& s) { notes_.push_back(s); }
    bool passed() const { return failures_.empty(); }
    std::string summary() const
    {
        std::string out;
        for (auto const& s : passed() ? notes_ : failures_) {
            out += (out.empty() ? "" : "; ") + s;
        }
        return out;
    }

  private:
    std::vector<std::string> failures_;
    std::vector<std::string> notes_;
};

std::string fmt(double v)
{
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

struct Loaded {
    AnalysisConfig cfg;
    FactorModel model;
    PricerBundle bundle;
};

Loaded load(const std::string& name, bool with_claim)
{
    auto cfg = load_config(config_path(name));
    auto model = model_from_json(cfg.model);
    auto bundle = build_pricers(model, cfg, with_claim);
    return {std::move(cfg), std::move(model), std::move(bundle)};
}

Vector vec(std::initializer_list<double> v)
{
    Vector x(static_cast<Eigen::Index>(v.size()));
    int i = 0;
    for (double e : v) {
        x[i++] = e;
    }
    return x;
}

//---------------------------------------------------------------------------//
void heat_example(Checks& c)
{
    auto const run = load("heat_squares.json", false);
    auto const& model = run.model;

    double worst = 0.0;
    for (int i = 0; i < 2; ++i) {
        auto const& surf = *run.bundle.surfaces.at(i == 0 ? "square_1" : "square_2");
        auto const& grid = surf.grid();
        for (std::size_t k = 0; k < surf.times().size(); ++k) {
            double const t = surf.times()[k];
            for (std::size_t n = 0; n < grid.node_count(); ++n) {
                Vector const x = grid.node(n);
                if (std::abs(x[0]) <= 5.0 && std::abs(x[1]) <= 5.0) {
                    double const exact = oracle::heat_square(x[i], t, 1.0);
                    worst = std::max(worst, std::abs(surf.at(k, n) - exact));
                }
            }
        }
    }
    c.expect(worst <= 1e-4, "surface error " + fmt(worst) + " > 1e-4");
    c.note("surface max err " + fmt(worst));

    auto const ev = build_G(run.bundle.assets, 0.0, vec({1, 2}));
    Matrix target = Matrix::Zero(2, 2);
    target(0, 0) = 2.0;
    target(1, 1) = 4.0;
    double const gerr = (ev.G - target).cwiseAbs().maxCoeff();
    c.expect(gerr <= 1e-3, "G differs from diag(2,4) by " + fmt(gerr));
    c.note("G err " + fmt(gerr) + ", det " + fmt(ev.det));

    PathOptions po;
    po.store_increments = false;
    auto const paths = simulate_paths(model, run.cfg.n_paths, run.cfg.n_steps, *run.cfg.seed, po);
    auto const v = completeness_along_paths(model, run.bundle.assets, paths);
    c.expect(v.verdict == Verdict::complete, "verdict " + to_string(v.verdict));
    c.note("verdict " + to_string(v.verdict));
}

void counterexample(Checks& c)
{
    auto const run = load("two_calls.json", false);
    auto const& model = run.model;
    auto const paths = simulate_paths(model, run.cfg.n_paths, run.cfg.n_steps, *run.cfg.seed);
    c.expect(paths.n_paths() >= 10000, "fewer than 10^4 paths");

    auto const v = completeness_along_paths(model, run.bundle.assets, paths);
    auto const& occ = *v.occupation;
    double const share = double(occ.singular_points) / double(occ.probed_points);
    c.expect(occ.probed_points >= 10000, "fewer than 10^4 probed points");
    c.expect(share >= 0.999, "singular share " + fmt(share) + " < 0.999");
    c.expect(v.verdict == Verdict::likely_incomplete, "verdict " + to_string(v.verdict));
    c.note("singular share " + fmt(share) + ", verdict " + to_string(v.verdict));

    auto const w = incompleteness_witness(model, run.bundle.assets, paths);
    double const gap = std::abs(w.second_moment - w.mean_occupation);
    c.expect(gap <= 3.0 * w.isometry_gap_stderr,
             "E[H^2] - occupation = " + fmt(gap) + " > 3 se " + fmt(w.isometry_gap_stderr));
    c.note("E[H^2] " + fmt(w.second_moment) + " vs occupation " + fmt(w.mean_occupation));
    for (std::size_t i = 0; i < w.orthogonality.size(); ++i) {
        c.expect(std::abs(w.orthogonality[i]) <= 3.0 * w.orthogonality_stderr[i],
                 "cov(H, gain_" + std::to_string(i + 1) + ") = " + fmt(w.orthogonality[i]));
    }
    c.expect(w.max_kernel_residual <= 1e-10, "kernel residual " + fmt(w.max_kernel_residual));
    c.expect(w.max_normalization_error <= 1e-10,
             "normalization error " + fmt(w.max_normalization_error));
}

void stochastic_volatility(Checks& c)
{
    auto const run = load("sv_put_completion.json", true);
    auto const& model = run.model;
    auto const probes = resolve_points(run.cfg.probes, model);
    auto const v = single_point_test(model, run.bundle.assets, probes, true);
    c.expect(v.verdict == Verdict::complete, "put completion verdict " + to_string(v.verdict));
    if (v.point) {
        double const vega = v.point->G(1, 1);
        c.expect(v.point->singularity_ratio >= v.tolerance, "ratio below tolerance");
        c.note("dv2/dy " + fmt(vega) + ", ratio " + fmt(v.point->singularity_ratio));
    }

    auto const affine = load("sv_affine.json", false);
    auto const va = single_point_test(affine.model, affine.bundle.assets,
                                      resolve_points(affine.cfg.probes, affine.model), true);
    c.expect(va.verdict == Verdict::likely_incomplete, "affine verdict " + to_string(va.verdict));

    PathOptions po;
    po.store_increments = false;
    auto const paths = simulate_paths(model, run.cfg.n_paths, run.cfg.n_steps, *run.cfg.seed, po);
    auto const sweep = hedge_sweep(model, run.bundle.assets, run.bundle.claim, paths,
                                   run.cfg.hedge.sweep, hedge_options(run.cfg));
    double const price = run.bundle.claim->value(0.0, model.x0());
    std::string rms;
    for (std::size_t i = 0; i < sweep.rows.size(); ++i) {
        rms += (i ? "/" : "") + fmt(sweep.rows[i].rms_error);
        if (i > 0) {
            c.expect(sweep.rows[i].rms_error < sweep.rows[i - 1].rms_error,
                     "RMS not decreasing at " + std::to_string(sweep.rows[i].rebalance_steps));
        }
    }
    c.expect(sweep.rows.back().rebalance_steps == 400, "sweep does not end at 400 steps");
    double const rel = sweep.rows.back().rms_error / price;
    c.expect(rel < 0.05, "RMS at 400 steps is " + fmt(100 * rel) + "% of the price");
    c.note("hedge RMS " + rms + " (" + fmt(100 * rel) + "% of " + fmt(price) + ")");
}

void hedging_convergence(Checks& c)
{
    auto const run = load("gbm_call_hedge.json", true);
    PathOptions po;
    po.store_increments = false;
    auto const paths
        = simulate_paths(run.model, run.cfg.n_paths, run.cfg.n_steps, *run.cfg.seed, po);
    c.expect(paths.n_paths() >= 10000, "fewer than 10^4 paths");
    auto const sweep = hedge_sweep(run.model, run.bundle.assets, run.bundle.claim, paths,
                                   {25, 50, 100, 200}, hedge_options(run.cfg));
    c.expect(sweep.slope >= 0.35 && sweep.slope <= 0.65, "slope " + fmt(sweep.slope));
    c.note("slope " + fmt(sweep.slope));
}

void variance_swap(Checks& c)
{
    for (double r : {0.0, 0.05}) {
        auto cfg = load_config(config_path("gbm_varswap.json"));
        cfg.model["params"]["r"] = r;
        auto const model = model_from_json(cfg.model);
        Asset const lc = make_log_contract(model, 1.0);
        auto const surf = std::make_shared<const PricingSurface>(
            solve_pde(model, lc, cfg.grid->to_spec()));
        SurfacePricer const log_contract(surf, lc, true);
        double const v0 = varswap_price(model, log_contract, 1.0, 0.0, model.x0());
        double const exact = std::exp(-r) * 0.04;
        c.expect(std::abs(v0 - exact) <= 1e-4, "V0(r=" + fmt(r) + ") = " + fmt(v0));
        c.note("V0(r=" + fmt(r) + ") " + fmt(v0));
        if (r > 0.0) {
            auto const paths = simulate_paths(model, cfg.n_paths, cfg.n_steps, *cfg.seed);
            auto const vs = varswap_along_paths(model, log_contract, paths);
            double const share = double(vs.within_band) / double(paths.n_paths());
            c.expect(paths.n_paths() >= 1000, "fewer than 10^3 paths");
            c.expect(share >= 0.95, "only " + fmt(share) + " of paths within band");
            c.note("within band " + fmt(share));
        }
    }

    std::size_t failures = 0;
    std::size_t checks = 0;
    std::mt19937_64 rng(20240611);
    std::normal_distribution<double> z;
    for (int trial = 0; trial < 1000; ++trial) {
        Matrix G(2, 2);
        G << z(rng), z(rng), z(rng), z(rng);
        failures += varswap_rank_check(G, 100.0, 0.0, 1.0, 0.0).equal ? 0 : 1;
        ++checks;
    }

    // Stock and log contract under exp-OU volatility, along simulated paths.
    auto const sv = load("sv_put_completion.json", false);
    Asset const lc = make_log_contract(sv.model, 1.0);
    auto const lsurf = std::make_shared<const PricingSurface>(
        solve_pde(sv.model, lc, sv.cfg.grid->to_spec()));
    std::vector<PricerPtr> const sv_assets{sv.bundle.assets[0],
                                           std::make_shared<SurfacePricer>(lsurf, lc, true)};
    auto const sv_paths = simulate_paths(sv.model, 100, 10, 17);
    for (std::size_t p = 0; p < sv_paths.n_paths(); ++p) {
        for (std::size_t k = 0; k < sv_paths.n_steps(); ++k) {
            double const t = sv_paths.time(k);
            Vector const x = sv_paths.state_vector(p, k);
            auto const ev = build_G(sv_assets, t, x);
            double const v1 = sv_assets[0]->value(t, x);
            failures += varswap_rank_check(ev.G, v1, t, 1.0, sv.model.rate()).equal ? 0 : 1;
            ++checks;
        }
    }

    // Two calls on factor 1 with a log-contract row, d = 3: every row lies
    // along factor 1.
    auto const calls = load("two_calls.json", false);
    auto const calls_paths = simulate_paths(calls.model, 100, 10, 19);
    for (std::size_t p = 0; p < calls_paths.n_paths(); ++p) {
        for (std::size_t k = 0; k < calls_paths.n_steps(); ++k) {
            double const t = calls_paths.time(k);
            Vector const x = calls_paths.state_vector(p, k);
            double const s = x[0];
            Matrix G = Matrix::Zero(3, 3);
            G(0, 0) = 1.0;
            G(1, 0) = calls.bundle.assets[0]->gradient(t, x).value[0];
            G(2, 0) = 1.0 / s;
            failures += varswap_rank_check(G, s, t, 1.0, 0.0).equal ? 0 : 1;
            ++checks;
        }
    }
    c.expect(failures == 0, std::to_string(failures) + " rank checks failed");
    c.note("rank checks " + std::to_string(checks) + ", failures " + std::to_string(failures));
}

void pricing_cross_validation(Checks& c)
{
    McConfig mc;
    mc.n_samples = 100000;
    mc.max_dt = 0.01;

    // gbm: PDE and MC against Black-Scholes.
    for (double r : {0.0, 0.05}) {
        auto const model = make_builtin_model("gbm", json{{"s0", 100}, {"sigma", 0.2}, {"r", r}}, 1.0);
        auto const spec = GridSpec::centered(model, Vector::Constant(1, 1.6), {801}, 800);
        Asset call;
        call.id = "call";
        call.payoff = PayoffType::call;
        call.strike = 100;
        Asset put = call;
        put.id = "put";
        put.payoff = PayoffType::put;
        call = resolve_asset(call, model);
        put = resolve_asset(put, model);
        auto const sc = solve_pde(model, call, spec);
        auto const sp = solve_pde(model, put, spec);
        double worst_parity = 0.0;
        for (double t : {0.0, 0.25, 0.5, 0.75}) {
            for (double s : {80.0, 90.0, 100.0, 110.0, 125.0}) {
                Vector const x = vec({std::log(s)});
                double const tau = 1.0 - t;
                double const pc = sc.value(t, x);
                double const pp = sp.value(t, x);
                double const grid_budget = 2e-3;
                c.expect(std::abs(pc - oracle::bs_call(s, 100, r, 0.2, tau)) <= grid_budget,
                         "gbm PDE call off BS at s=" + fmt(s));
                c.expect(std::abs(pp - oracle::bs_put(s, 100, r, 0.2, tau)) <= grid_budget,
                         "gbm PDE put off BS at s=" + fmt(s));
                worst_parity = std::max(worst_parity,
                                        std::abs(pc - pp - (s - 100.0 * std::exp(-r * tau))));
                mc.seed = static_cast<std::uint64_t>(1000 * t + s);
                auto const est = price_mc(model, call, t, x, mc);
                c.expect(std::abs(est.price - oracle::bs_call(s, 100, r, 0.2, tau))
                             <= 3.0 * est.std_error,
                         "gbm MC call off BS at s=" + fmt(s) + " t=" + fmt(t));
                c.expect(std::abs(est.price - pc) <= 3.0 * est.std_error + grid_budget,
                         "gbm MC vs PDE at s=" + fmt(s));
            }
        }
        c.expect(worst_parity < 1e-3, "put-call parity residual " + fmt(worst_parity));
        if (r > 0.0) {
            c.note("parity residual " + fmt(worst_parity));
        }
    }

    // correlated_bm: square and call on a factor against the heat closed forms.
    {
        auto const run = load("heat_squares.json", false);
        auto const& model = run.model;
        Asset fcall;
        fcall.id = "fcall";
        fcall.kind = AssetKind::european_factor;
        fcall.payoff = PayoffType::call;
        fcall.strike = 0.5;
        fcall = resolve_asset(fcall, model);
        auto const scall = solve_pde(model, fcall, run.cfg.grid->to_spec());
        auto const& ssq = *run.bundle.surfaces.at("square_1");
        Matrix const id = Matrix::Identity(2, 2);
        // Kinked payoff on h = 0.1: the smooth-payoff budget does not apply.
        double const kink_budget = 5e-3;
        // Kept within 3 sd of the strike so the sampled payoff is never all zero.
        std::mt19937_64 rng(3);
        std::uniform_real_distribution<double> ut(0.0, 0.75);
        std::uniform_real_distribution<double> ux(-1.0, 2.0);
        Asset const sq = resolve_asset(asset_from_json(json{{"kind", "european_factor"},
                                                            {"payoff", "square"},
                                                            {"coordinate", 1},
                                                            {"maturity", 1.0}}),
                                       model);
        for (int p = 0; p < 20; ++p) {
            double const t = ut(rng);
            Vector const x = vec({ux(rng), ux(rng)});
            double const tau = 1.0 - t;
            double const bach = oracle::bachelier_call(x[0], 0.5, std::sqrt(tau));
            c.expect(std::abs(closed_form_heat(HeatPayoff::call_on_factor, id, 0, 0.5, t, x, 1.0) - bach)
                         <= 1e-12,
                     "closed-form call off Bachelier");
            c.expect(std::abs(scall.value(t, x) - bach) <= kink_budget, "PDE factor call off Bachelier by " + fmt(scall.value(t, x) - bach) + " at t=" + fmt(t));
            c.expect(std::abs(ssq.value(t, x) - oracle::heat_square(x[0], t, 1.0)) <= 1e-4,
                     "PDE square off heat solution");
            mc.seed = 500 + static_cast<std::uint64_t>(p);
            auto const est = price_mc(model, fcall, t, x, mc);
            c.expect(std::abs(est.price - bach) <= 3.0 * est.std_error, "MC factor call off Bachelier at p=" + std::to_string(p) + ": "
                         + fmt(est.price - bach) + " vs se " + fmt(est.std_error));
            auto const esq = price_mc(model, sq, t, x, mc);
            c.expect(std::abs(esq.price - oracle::heat_square(x[0], t, 1.0)) <= 3.0 * esq.std_error,
                     "MC square off heat solution");
        }
    }

    // exp-OU: MC against the PDE, plus the discounted-martingale check.
    {
        auto const run = load("sv_put_completion.json", true);
        auto const& model = run.model;
        auto const& put = *run.bundle.surfaces.at("put_100");
        Asset const a = resolve_asset(run.cfg.assets[1].asset, model);
        std::mt19937_64 rng(5);
        std::uniform_real_distribution<double> ut(0.0, 0.9);
        std::uniform_real_distribution<double> ux(-0.2, 0.2);
        McConfig smc;
        smc.n_samples = 20000;
        smc.max_dt = 0.0025;
        // Euler bias at this step plus the grid error.
        double const budget = 2e-2;
        for (int p = 0; p < 20; ++p) {
            double const t = ut(rng);
            Vector x = model.x0();
            x[0] += ux(rng);
            x[1] += ux(rng);
            smc.seed = 900 + static_cast<std::uint64_t>(p);
            auto const est = price_mc(model, a, t, x, smc);
            c.expect(std::abs(est.price - put.value(t, x)) <= 3.0 * est.std_error + budget,
                     "SV MC vs PDE at t=" + fmt(t));
        }
        SurfacePricer const v(run.bundle.surfaces.at("put_100"), a, true);
        smc.n_samples = 50000;
        smc.seed = 77;
        auto const mart = mc_transport(
            model, 0.25, model.x0(), 0.5, [&](const Vector& x) { return v.value(0.5, x); }, smc);
        double const gap = std::abs(mart.price - v.value(0.25, model.x0()));
        c.expect(gap <= 3.0 * mart.std_error, "martingale gap " + fmt(gap) + " > 3 se "
                                                  + fmt(mart.std_error));
        c.note("martingale gap " + fmt(gap) + " (se " + fmt(mart.std_error) + ")");
    }
}

std::map<std::string, std::string> manifest(const fs::path& dir)
{
    std::ifstream in(dir / "manifest.json");
    json const doc = json::parse(in);
    std::map<std::string, std::string> out;
    for (auto const& e : doc.at("files")) {
        out[e.at("file").get<std::string>()] = e.at("sha256").get<std::string>();
    }
    return out;
}

void determinism(Checks& c)
{
    fs::path const root = fs::temp_directory_path() / "complab_acceptance";
    fs::remove_all(root);
    std::vector<std::pair<std::string, std::string>> const runs{
        {"completeness", "heat_squares.json"}, {"witness", "two_calls.json"},
        {"hedge", "gbm_call_hedge.json"},     {"varswap", "gbm_varswap.json"},
        {"price", "sv_put_completion.json"},   {"simulate", "sv_affine.json"}};
    std::size_t compared = 0;
    for (auto const& [sub, name] : runs) {
        std::map<std::string, std::string> hashes[2];
        for (int rep = 0; rep < 2; ++rep) {
            CliOptions o;
            o.subcommand = sub;
            o.config = config_path(name);
            o.out = root / (sub + std::to_string(rep));
            std::ostringstream err;
            int const code = run(o, err);
            c.expect(code == 0, sub + " exited " + std::to_string(code) + ": " + err.str());
            hashes[rep] = manifest(o.out);
            hashes[rep].erase("report.json");  // carries wall-clock timings
        }
        c.expect(!hashes[0].empty() && hashes[0] == hashes[1], sub + " outputs differ");
        compared += hashes[0].size();
    }
    c.note(std::to_string(compared) + " numeric outputs byte-identical");
    fs::remove_all(root);
}

struct Criterion {
    int id;
    std::string name;
    double budget_s;  // 0: no runtime budget
    std::function<void(Checks&)> body;
};

}  // namespace

int main()
{
    std::vector<Criterion> const criteria{
        {1, "heat example", 30.0, heat_example},
        {2, "two-call counterexample", 120.0, counterexample},
        {3, "stochastic volatility completion", 300.0, stochastic_volatility},
        {4, "discrete hedging convergence", 60.0, hedging_convergence},
        {5, "variance swap identities", 60.0, variance_swap},
        {6, "pricing cross-validation", 0.0, pricing_cross_validation},
        {7, "determinism", 0.0, determinism},
    };
    int failed = 0;
    for (auto const& cr : criteria) {
        Checks checks;
        auto const start = std::chrono::steady_clock::now();
        try {
            cr.body(checks);
        }
        catch (const std::exception& e) {
            checks.expect(false, std::string("exception: ") + e.what());
        }
        double const elapsed
            = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (cr.budget_s > 0.0) {
            checks.expect(elapsed < cr.budget_s, "runtime " + fmt(elapsed) + " s over budget");
        }
        bool const ok = checks.passed();
        failed += ok ? 0 : 1;
        std::printf("criterion %d %s: %s (%.1f s) %s\n", cr.id, cr.name.c_str(),
                    ok ? "PASS" : "FAIL", elapsed, checks.summary().c_str());
        std::fflush(stdout);
    }
    return failed == 0 ? 0 : 1;
}
