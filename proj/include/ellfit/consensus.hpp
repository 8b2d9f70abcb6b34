#pragma once

// Sample-consensus ellipsoid fitting with Gaussian-kernel scoring and
// weighted least-squares local optimization.

#include "ellfit/distance.hpp"
#include "ellfit/quadric.hpp"
#include "ellfit/random.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace ellfit {

struct FitConfig {
    double epsilon = 0.1;  ///< distance threshold, scene length units
    double confidence = 0.95;
    std::size_t sample_size = 9;
    MetricKind score_metric = MetricKind::cas(0.5);
    MetricKind weight_metric = MetricKind::cas(0.5);
    bool local_opt_enabled = true;
    std::size_t lo_steps = 5;
    std::size_t max_iterations = 100000;
    std::size_t min_iterations = 50;
    std::uint64_t seed = 0;

    /// Sets lambda on both metrics (ignored by single-distance metrics).
    FitConfig& set_lambda(double lambda);

    /// Throws Error(InvalidArgument) naming the first violated bound.
    void validate() const;

    /// Proposed method: CAS score and CAS-weighted local optimization.
    static FitConfig proposed(double epsilon, double lambda = 0.5);
    /// Plain RANSAC scored by the Sampson distance.
    static FitConfig ransac_sampson(double epsilon);
    /// CAS score without local optimization.
    static FitConfig cas_ransac(double epsilon, double lambda = 0.5);
    /// Sampson score with algebraic-distance weights in local optimization.
    static FitConfig flo(double epsilon);
};

enum class PointLabel : std::uint8_t { Outlier = 0, Inlier = 1 };

struct FitReport {
    EllipsoidModel best_model;
    double best_score = 0.0;
    std::vector<PointLabel> labels;
    double inlier_ratio = 0.0;
    std::size_t iterations_used = 0;
    std::size_t lo_invocations = 0;
    double wall_time = 0.0;  ///< seconds
    std::string rng_algorithm;
};

/// Where a scored candidate came from.
enum class CandidateSource { Sample, LocalOptimization };

struct CandidateEvent {
    std::size_t iteration = 0;
    CandidateSource source = CandidateSource::Sample;
    double score = 0.0;
    double best_score = 0.0;  ///< global best after this candidate
};

/// Optional observers; both may be empty.
struct FitHooks {
    /// (iteration, best_score, required_iterations), once per iteration.
    std::function<void(std::size_t, double, std::size_t)> progress;
    /// Every validated candidate, in scoring order.
    std::function<void(const CandidateEvent&)> candidate;
};

/// exp(-d^2 / (2 eps^2)); infinite distances map to 0.
double point_energy(double distance, double epsilon);

/// Sum of point energies over all points.
double model_score(const EllipsoidModel& m, std::span<const Point3> points, double epsilon, const MetricKind& metric);

/// ceil(log(1 - mu) / log(1 - v^n)), clamped to [min_iterations, max_iterations].
/// v == 0 or underflowing v^n gives max_iterations.
std::size_t required_iterations(double inlier_ratio, double confidence, std::size_t sample_size,
                                std::size_t min_iterations = 1, std::size_t max_iterations = 100000);

/// Inlier iff the metric is strictly below epsilon.
std::vector<PointLabel> classify(std::span<const Point3> points, const EllipsoidModel& m, double epsilon,
                                 const MetricKind& metric);

double inlier_fraction(std::span<const PointLabel> labels);

/// `sample_size` distinct indices drawn uniformly, returned ascending.
/// Throws Error(TooFewPoints) if there are fewer points than requested.
std::vector<std::size_t> sample_minimal(std::size_t point_count, std::size_t sample_size, Rng& rng);

/// Iteratively reweighted refit of `m` under a threshold annealed linearly
/// from 1.5 eps to 0.5 eps. Returns the best-scoring valid step output, or
/// nullopt when no step produced a valid ellipsoid.
struct LocalOptimizationResult {
    EllipsoidModel model;
    double score = 0.0;
};
std::optional<LocalOptimizationResult> local_optimize(const EllipsoidModel& m, std::span<const Point3> points,
                                                      const FitConfig& cfg);

/// Annealed threshold of local-optimization step k (1-based).
double lo_threshold(std::size_t step, const FitConfig& cfg);

/// Full pipeline. Throws Error(TooFewPoints) or Error(NoModelFound).
FitReport fit(std::span<const Point3> points, const FitConfig& cfg, const FitHooks& hooks = {});

}  // namespace ellfit
