#include "complab/completeness.hpp"

#include <algorithm>
#include <cmath>
#include <exception>

#include <Eigen/LU>
#include <Eigen/SVD>

#include "complab/errors.hpp"

namespace complab {

JacobianEvaluation analyze_jacobian(double t, const Vector& x, const Matrix& G, double tolerance)
{
    if (G.rows() != G.cols() || G.rows() < 1) {
        throw ConfigError("jacobian: G must be square");
    }
    JacobianEvaluation ev;
    ev.t = t;
    ev.x = x;
    ev.G = G;
    ev.tolerance = tolerance;
    if (!G.allFinite()) {
        throw NumericalError("jacobian: G has non-finite entries");
    }
    ev.det = G.partialPivLu().determinant();
    Eigen::JacobiSVD<Matrix> svd(G);
    ev.singular_values = svd.singularValues();
    double const smax = ev.singular_values[0];
    double const smin = ev.singular_values[ev.singular_values.size() - 1];
    ev.singularity_ratio = smax > 0.0 ? smin / smax : 0.0;
    ev.is_singular = ev.singularity_ratio < tolerance;
    return ev;
}

JacobianEvaluation build_G(const std::vector<PricerPtr>& pricers, double t, const Vector& x,
                           double tolerance)
{
    auto const d = static_cast<std::size_t>(x.size());
    if (pricers.size() != d) {
        throw ConfigError("build_G: need exactly d = " + std::to_string(d) + " assets, got "
                          + std::to_string(pricers.size()));
    }
    Matrix G(x.size(), x.size());
    bool flagged = false;
    for (std::size_t i = 0; i < d; ++i) {
        Gradient g;
        try {
            g = pricers[i]->gradient(t, x);
        }
        catch (const GradientError&) {
            throw;
        }
        catch (const std::exception& e) {
            throw GradientError(i, e.what());
        }
        if (g.value.size() != x.size()) {
            throw GradientError(i, "gradient has wrong dimension");
        }
        G.row(static_cast<Eigen::Index>(i)) = g.value.transpose();
        flagged = flagged || g.flagged;
    }
    auto ev = analyze_jacobian(t, x, G, tolerance);
    ev.flagged = flagged;
    return ev;
}

int numerical_rank(const Matrix& G, double tolerance)
{
    Eigen::JacobiSVD<Matrix> svd(G);
    auto const& s = svd.singularValues();
    if (s.size() == 0 || s[0] <= 0.0) {
        return 0;
    }
    int rank = 0;
    for (Eigen::Index i = 0; i < s.size(); ++i) {
        if (s[i] >= tolerance * s[0]) {
            ++rank;
        }
    }
    return rank;
}

std::string to_string(Verdict verdict)
{
    switch (verdict) {
        case Verdict::complete:
            return "COMPLETE";
        case Verdict::likely_incomplete:
            return "LIKELY_INCOMPLETE";
        case Verdict::inconclusive:
            return "INCONCLUSIVE";
    }
    return "INCONCLUSIVE";
}

std::string to_string(VerdictMethod method)
{
    switch (method) {
        case VerdictMethod::pathwise_occupation:
            return "pathwise_occupation";
        case VerdictMethod::single_point_analytic:
            return "single_point_analytic";
    }
    return "single_point_analytic";
}

//---------------------------------------------------------------------------//
CompletenessVerdict single_point_test(const FactorModel& model,
                                      const std::vector<PricerPtr>& pricers,
                                      const std::vector<SpacePoint>& probe_points,
                                      bool analyticity_assumed, double tolerance)
{
    if (probe_points.empty()) {
        throw ConfigError("single_point_test: empty probe list");
    }
    CompletenessVerdict out;
    out.method = VerdictMethod::single_point_analytic;
    out.tolerance = tolerance;
    for (auto const& p : probe_points) {
        if (p.x.size() != model.dimension()) {
            throw ConfigError("single_point_test: probe has wrong dimension");
        }
        if (!(p.t >= 0.0) || !(p.t < model.horizon()) || !model.domain().strictly_contains(p.x)) {
            throw DomainError("single_point_test: probe point is not interior");
        }
        auto ev = build_G(pricers, p.t, p.x, tolerance);
        ++out.probes_evaluated;
        out.best_ratio = std::max(out.best_ratio, ev.singularity_ratio);
        if (!ev.is_singular) {
            out.verdict = Verdict::complete;
            out.point = std::move(ev);
            out.explanation = "G is non-singular at a probe point";
            break;
        }
    }
    if (!out.point) {
        out.verdict = Verdict::likely_incomplete;
        out.explanation = "G is singular at every probe point";
    }
    if (!analyticity_assumed) {
        out.explanation += "; analyticity of the pricing functions was not assumed, so a "
                           "single-point test cannot decide";
        out.verdict = Verdict::inconclusive;
    }
    return out;
}

//---------------------------------------------------------------------------//
namespace {

void check_paths(const FactorModel& model, const std::vector<PricerPtr>& pricers,
                 const PathSet& paths)
{
    if (paths.dimension() != model.dimension() || paths.model_family() != model.family()
        || std::abs(paths.horizon() - model.horizon()) > 1e-12 * std::max(1.0, model.horizon())
        || paths.x0() != model.x0()) {
        throw ConfigError("path set was not simulated from this model");
    }
    if (pricers.size() != static_cast<std::size_t>(model.dimension())) {
        throw ConfigError("need exactly one asset per factor");
    }
}

struct PathOccupation {
    std::size_t singular = 0;
    std::size_t flagged = 0;
};

PathOccupation occupation_of_path(const std::vector<PricerPtr>& pricers, const PathSet& paths,
                                  std::size_t path, double tolerance)
{
    PathOccupation out;
    for (std::size_t k = 0; k < paths.n_steps(); ++k) {
        auto const ev = build_G(pricers, paths.time(k), paths.state_vector(path, k), tolerance);
        out.singular += ev.is_singular ? 1 : 0;
        out.flagged += ev.flagged ? 1 : 0;
    }
    return out;
}

OccupationStats summarize(const std::vector<PathOccupation>& per_path, std::size_t n_steps)
{
    OccupationStats stats;
    stats.fractions.resize(per_path.size());
    double sum = 0.0;
    for (std::size_t p = 0; p < per_path.size(); ++p) {
        double const f = static_cast<double>(per_path[p].singular) / static_cast<double>(n_steps);
        stats.fractions[p] = f;
        sum += f;
        stats.max = std::max(stats.max, f);
        stats.singular_points += per_path[p].singular;
        stats.flagged_gradients += per_path[p].flagged;
    }
    stats.mean = per_path.empty() ? 0.0 : sum / static_cast<double>(per_path.size());
    stats.probed_points = per_path.size() * n_steps;
    return stats;
}

// Rethrows the exception of the lowest failing index, if any.
void rethrow_first(const std::vector<std::exception_ptr>& errors)
{
    for (auto const& e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }
}

}  // namespace

namespace reference {
OccupationStats occupation(const std::vector<PricerPtr>& pricers, const PathSet& paths,
                           double tolerance)
{
    std::vector<PathOccupation> per_path(paths.n_paths());
    for (std::size_t p = 0; p < paths.n_paths(); ++p) {
        per_path[p] = occupation_of_path(pricers, paths, p, tolerance);
    }
    return summarize(per_path, paths.n_steps());
}
}  // namespace reference

OccupationStats occupation(const std::vector<PricerPtr>& pricers, const PathSet& paths,
                           double tolerance)
{
    std::vector<PathOccupation> per_path(paths.n_paths());
    std::vector<std::exception_ptr> errors(paths.n_paths());
    auto const count = static_cast<std::ptrdiff_t>(paths.n_paths());
#pragma omp parallel for schedule(dynamic, 16)
    for (std::ptrdiff_t p = 0; p < count; ++p) {
        auto const path = static_cast<std::size_t>(p);
        try {
            per_path[path] = occupation_of_path(pricers, paths, path, tolerance);
        }
        catch (...) {
            errors[path] = std::current_exception();
        }
    }
    rethrow_first(errors);
    return summarize(per_path, paths.n_steps());
}

CompletenessVerdict completeness_along_paths(const FactorModel& model,
                                             const std::vector<PricerPtr>& pricers,
                                             const PathSet& paths, const PathwiseOptions& options)
{
    check_paths(model, pricers, paths);
    auto stats = occupation(pricers, paths, options.tolerance);

    CompletenessVerdict out;
    out.method = VerdictMethod::pathwise_occupation;
    out.tolerance = options.tolerance;
    out.probes_evaluated = stats.probed_points;

    if (stats.max == 0.0) {
        auto probes = options.confirmation_probes;
        if (probes.empty()) {
            probes = {{0.0, model.x0()}, {0.5 * model.horizon(), model.x0()}};
        }
        auto confirm = single_point_test(model, pricers, probes, options.analyticity_assumed,
                                         options.tolerance);
        out.best_ratio = confirm.best_ratio;
        out.point = confirm.point;
        if (confirm.verdict == Verdict::complete) {
            out.verdict = Verdict::complete;
            out.explanation = "no path visited the singular set and G is non-singular at a "
                              "confirmation probe";
        }
        else {
            out.verdict = Verdict::inconclusive;
            out.explanation = "no path visited the singular set but the confirmation probe "
                              "failed: " + confirm.explanation;
        }
    }
    else if (stats.mean > 0.5) {
        out.verdict = Verdict::likely_incomplete;
        out.explanation = "paths spend most of their time on the singular set";
    }
    else {
        out.verdict = Verdict::inconclusive;
        out.explanation = "paths spend a positive but minority fraction of time on the "
                          "singular set";
    }
    out.occupation = std::move(stats);
    return out;
}

//---------------------------------------------------------------------------//
Vector select_kernel_vector(const Matrix& gamma, const Matrix& sigma)
{
    Eigen::JacobiSVD<Matrix> svd(gamma, Eigen::ComputeFullV);
    Vector v = svd.matrixV().col(gamma.cols() - 1);
    double const q = (sigma.transpose() * v).squaredNorm();
    if (!(q > 0.0)) {
        throw NumericalError("witness: kernel direction is degenerate for sigma");
    }
    Vector beta = v / std::sqrt(q);
    double const scale = beta.cwiseAbs().maxCoeff();
    for (Eigen::Index i = 0; i < beta.size(); ++i) {
        if (std::abs(beta[i]) > 1e-12 * scale) {
            if (beta[i] < 0.0) {
                beta = -beta;
            }
            break;
        }
    }
    return beta;
}

namespace {

struct PathWitness {
    double H = 0.0;
    double occupation = 0.0;
    std::vector<double> gains;
    std::size_t singular = 0;
    double max_residual = 0.0;
    double max_normalization_error = 0.0;
};

WitnessAnchor make_anchor(const FactorModel& model, const JacobianEvaluation& ev)
{
    WitnessAnchor a;
    a.t = ev.t;
    a.x = ev.x;
    Matrix const sigma = model.diffusion(ev.t, ev.x);
    Matrix const a_mat = sigma * sigma.transpose();
    a.gamma = ev.G * a_mat;
    a.beta = select_kernel_vector(a.gamma, sigma);
    double const gnorm = a.gamma.jacobiSvd().singularValues()[0];
    a.kernel_residual = gnorm > 0.0 ? (a.gamma * a.beta).norm() / gnorm : 0.0;
    a.normalization = a.beta.dot(a_mat * a.beta);
    return a;
}

PathWitness witness_of_path(const FactorModel& model, const std::vector<PricerPtr>& pricers,
                            const PathSet& paths, std::size_t path, double tolerance)
{
    int const dim = paths.dimension();
    double const dt = paths.dt();
    PathWitness out;
    out.gains.assign(pricers.size(), 0.0);
    for (std::size_t k = 0; k < paths.n_steps(); ++k) {
        double const t = paths.time(k);
        Vector const x = paths.state_vector(path, k);
        Vector const dw = paths.increment_vector(path, k);
        auto const ev = build_G(pricers, t, x, tolerance);
        Matrix const sigma = model.diffusion(t, x);
        Vector const dm = sigma * dw;
        double const discount = std::exp(-model.rate() * t);
        for (int i = 0; i < dim; ++i) {
            out.gains[static_cast<std::size_t>(i)] += discount * ev.G.row(i).dot(dm);
        }
        if (ev.is_singular) {
            auto const anchor = make_anchor(model, ev);
            out.H += anchor.beta.dot(dm);
            out.occupation += dt;
            ++out.singular;
            out.max_residual = std::max(out.max_residual, anchor.kernel_residual);
            out.max_normalization_error
                = std::max(out.max_normalization_error, std::abs(anchor.normalization - 1.0));
        }
    }
    return out;
}

// Mean and standard error of a sample.
std::pair<double, double> mean_stderr(const std::vector<double>& v)
{
    double const n = static_cast<double>(v.size());
    double sum = 0.0;
    for (double x : v) {
        sum += x;
    }
    double const mean = sum / n;
    double ss = 0.0;
    for (double x : v) {
        ss += (x - mean) * (x - mean);
    }
    double const se = v.size() > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0;
    return {mean, se};
}

}  // namespace

WitnessClaim incompleteness_witness(const FactorModel& model,
                                    const std::vector<PricerPtr>& pricers, const PathSet& paths,
                                    const WitnessOptions& options)
{
    check_paths(model, pricers, paths);
    if (!paths.has_increments()) {
        throw ConfigError("witness: path set has no stored Brownian increments");
    }
    std::size_t const n = options.n_mc == 0 ? paths.n_paths()
                                            : std::min(options.n_mc, paths.n_paths());
    if (n < 2) {
        throw ConfigError("witness: need at least 2 paths");
    }
    std::vector<PathWitness> per_path(n);
    std::vector<std::exception_ptr> errors(n);
    auto const count = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(dynamic, 16)
    for (std::ptrdiff_t p = 0; p < count; ++p) {
        auto const path = static_cast<std::size_t>(p);
        try {
            per_path[path] = witness_of_path(model, pricers, paths, path, options.tolerance);
        }
        catch (...) {
            errors[path] = std::current_exception();
        }
    }
    rethrow_first(errors);

    WitnessClaim claim;
    for (auto const& w : per_path) {
        claim.singular_points += w.singular;
        claim.max_kernel_residual = std::max(claim.max_kernel_residual, w.max_residual);
        claim.max_normalization_error
            = std::max(claim.max_normalization_error, w.max_normalization_error);
    }
    if (claim.singular_points == 0) {
        throw NoWitnessError();
    }

    // Anchors in path order, recomputed for the first few paths only.
    for (std::size_t p = 0; p < n && claim.anchors.size() < options.max_anchors; ++p) {
        for (std::size_t k = 0; k < paths.n_steps() && claim.anchors.size() < options.max_anchors;
             ++k) {
            auto const ev = build_G(pricers, paths.time(k), paths.state_vector(p, k),
                                    options.tolerance);
            if (ev.is_singular) {
                claim.anchors.push_back(make_anchor(model, ev));
            }
        }
    }

    claim.H.resize(n);
    claim.occupation_time.resize(n);
    claim.gains.assign(pricers.size(), std::vector<double>(n));
    std::vector<double> h2(n), gap(n);
    for (std::size_t p = 0; p < n; ++p) {
        claim.H[p] = per_path[p].H;
        claim.occupation_time[p] = per_path[p].occupation;
        for (std::size_t i = 0; i < pricers.size(); ++i) {
            claim.gains[i][p] = per_path[p].gains[i];
        }
        h2[p] = per_path[p].H * per_path[p].H;
        gap[p] = h2[p] - per_path[p].occupation;
    }
    std::tie(claim.second_moment, claim.second_moment_stderr) = mean_stderr(h2);
    std::tie(claim.mean_occupation, claim.mean_occupation_stderr)
        = mean_stderr(claim.occupation_time);
    std::tie(claim.isometry_gap, claim.isometry_gap_stderr) = mean_stderr(gap);
    for (std::size_t i = 0; i < pricers.size(); ++i) {
        std::vector<double> prod(n);
        for (std::size_t p = 0; p < n; ++p) {
            prod[p] = claim.H[p] * claim.gains[i][p];
        }
        auto const [m, se] = mean_stderr(prod);
        claim.orthogonality.push_back(m);
        claim.orthogonality_stderr.push_back(se);
    }
    return claim;
}

}  // namespace complab
