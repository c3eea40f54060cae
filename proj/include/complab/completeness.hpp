#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "complab/factor_model.hpp"
#include "complab/path_engine.hpp"
#include "complab/pricer.hpp"
#include "complab/types.hpp"

namespace complab {

inline constexpr double kDefaultSingularityTolerance = 1e-8;

//---------------------------------------------------------------------------//
// G(t, x): row i is grad v_i(t, x).
struct JacobianEvaluation {
    double t = 0.0;
    Vector x;
    Matrix G;
    double det = 0.0;
    Vector singular_values;  // descending
    double singularity_ratio = 0.0;  // sigma_min / sigma_max
    double tolerance = kDefaultSingularityTolerance;
    bool is_singular = true;
    // Some gradient came from a noisy Monte Carlo estimate.
    bool flagged = false;
};

// Determinant (LU), singular values (SVD) and singularity flag of G.
JacobianEvaluation analyze_jacobian(double t, const Vector& x, const Matrix& G,
                                    double tolerance = kDefaultSingularityTolerance);

// Builds G from one pricer per factor. Gradient failures are rethrown as
// GradientError carrying the asset index.
JacobianEvaluation build_G(const std::vector<PricerPtr>& pricers, double t, const Vector& x,
                           double tolerance = kDefaultSingularityTolerance);

// Number of singular values >= tolerance * sigma_max.
int numerical_rank(const Matrix& G, double tolerance = kDefaultSingularityTolerance);

//---------------------------------------------------------------------------//
enum class Verdict { complete, likely_incomplete, inconclusive };
enum class VerdictMethod { pathwise_occupation, single_point_analytic };

std::string to_string(Verdict verdict);
std::string to_string(VerdictMethod method);

struct OccupationStats {
    // Per-path fraction of grid time spent on singular points.
    std::vector<double> fractions;
    double mean = 0.0;
    double max = 0.0;
    std::size_t probed_points = 0;
    std::size_t singular_points = 0;
    std::size_t flagged_gradients = 0;
};

struct CompletenessVerdict {
    Verdict verdict = Verdict::inconclusive;
    VerdictMethod method = VerdictMethod::single_point_analytic;
    double tolerance = kDefaultSingularityTolerance;
    // Non-singular witness point, when one was found.
    std::optional<JacobianEvaluation> point;
    // Largest singularity ratio seen among single-point probes.
    double best_ratio = 0.0;
    std::size_t probes_evaluated = 0;
    std::optional<OccupationStats> occupation;
    std::string explanation;
};

CompletenessVerdict single_point_test(const FactorModel& model,
                                      const std::vector<PricerPtr>& pricers,
                                      const std::vector<SpacePoint>& probe_points,
                                      bool analyticity_assumed,
                                      double tolerance = kDefaultSingularityTolerance);

struct PathwiseOptions {
    double tolerance = kDefaultSingularityTolerance;
    // Fed to the confirming single-point test.
    bool analyticity_assumed = true;
    std::vector<SpacePoint> confirmation_probes;  // default: (0, x0), (T/2, x0)
};

// Occupation of the singular set along simulated paths (left-point grid
// times t_0 .. t_{K-1}). OpenMP-parallel over paths.
CompletenessVerdict completeness_along_paths(const FactorModel& model,
                                             const std::vector<PricerPtr>& pricers,
                                             const PathSet& paths,
                                             const PathwiseOptions& options = {});

namespace reference {
OccupationStats occupation(const std::vector<PricerPtr>& pricers, const PathSet& paths,
                           double tolerance);
}  // namespace reference

// Parallel counterpart of reference::occupation.
OccupationStats occupation(const std::vector<PricerPtr>& pricers, const PathSet& paths,
                           double tolerance);

//---------------------------------------------------------------------------//
struct WitnessAnchor {
    double t = 0.0;
    Vector x;
    Vector beta;
    Matrix gamma;  // G sigma sigma^T
    double kernel_residual = 0.0;  // |Gamma beta| / |Gamma|
    double normalization = 0.0;    // beta^T sigma sigma^T beta
};

struct WitnessClaim {
    // Stored anchors (capped at max_anchors); the residual and normalization
    // bounds below cover every singular point visited.
    std::vector<WitnessAnchor> anchors;
    std::size_t singular_points = 0;
    double max_kernel_residual = 0.0;
    double max_normalization_error = 0.0;

    // Realized claim H = sum beta^T sigma dW and occupation time per path.
    std::vector<double> H;
    std::vector<double> occupation_time;
    // Discounted gains sum e^{-rt} grad v_i sigma dW, [asset][path].
    std::vector<std::vector<double>> gains;

    double second_moment = 0.0;  // E[H^2]
    double second_moment_stderr = 0.0;
    double mean_occupation = 0.0;  // E[int 1_S dt]
    double mean_occupation_stderr = 0.0;
    // Paired standard error of H^2 - occupation.
    double isometry_gap = 0.0;
    double isometry_gap_stderr = 0.0;
    std::vector<double> orthogonality;  // E[H gain_i]
    std::vector<double> orthogonality_stderr;
};

struct WitnessOptions {
    double tolerance = kDefaultSingularityTolerance;
    // Paths used for the Monte Carlo estimates; 0 means all.
    std::size_t n_mc = 0;
    std::size_t max_anchors = 1000;
};

// Kernel vector of Gamma = G sigma sigma^T for its smallest singular value,
// scaled to beta^T sigma sigma^T beta = 1, first non-negligible entry positive.
Vector select_kernel_vector(const Matrix& gamma, const Matrix& sigma);

WitnessClaim incompleteness_witness(const FactorModel& model,
                                    const std::vector<PricerPtr>& pricers, const PathSet& paths,
                                    const WitnessOptions& options = {});

}  // namespace complab
