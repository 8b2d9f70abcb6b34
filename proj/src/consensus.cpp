#include "ellfit/consensus.hpp"

#include "ellfit/error.hpp"
#include "ellfit/least_squares.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

namespace ellfit {

FitConfig& FitConfig::set_lambda(double lambda) {
    score_metric = score_metric.with_lambda(lambda);
    weight_metric = weight_metric.with_lambda(lambda);
    return *this;
}

void FitConfig::validate() const {
    auto fail = [](const char* what) { throw Error(ErrorCode::InvalidArgument, what); };
    if (!(epsilon > 0.0) || !std::isfinite(epsilon)) fail("epsilon must be positive and finite");
    if (!(confidence > 0.0 && confidence < 1.0)) fail("confidence must lie in (0, 1)");
    if (sample_size < 9) fail("sample size must be at least 9");
    if (lo_steps < 1) fail("lo_steps must be at least 1");
    if (min_iterations < 1) fail("min_iterations must be at least 1");
    if (min_iterations > max_iterations) fail("min_iterations must not exceed max_iterations");
}

FitConfig FitConfig::proposed(double epsilon, double lambda) {
    FitConfig cfg;
    cfg.epsilon = epsilon;
    cfg.score_metric = MetricKind::cas(lambda);
    cfg.weight_metric = MetricKind::cas(lambda);
    cfg.local_opt_enabled = true;
    return cfg;
}

FitConfig FitConfig::ransac_sampson(double epsilon) {
    FitConfig cfg;
    cfg.epsilon = epsilon;
    cfg.score_metric = MetricKind::sampson();
    cfg.weight_metric = MetricKind::sampson();
    cfg.local_opt_enabled = false;
    return cfg;
}

FitConfig FitConfig::cas_ransac(double epsilon, double lambda) {
    FitConfig cfg = proposed(epsilon, lambda);
    cfg.local_opt_enabled = false;
    return cfg;
}

FitConfig FitConfig::flo(double epsilon) {
    FitConfig cfg;
    cfg.epsilon = epsilon;
    cfg.score_metric = MetricKind::sampson();
    cfg.weight_metric = MetricKind::algebraic();
    cfg.local_opt_enabled = true;
    return cfg;
}

double point_energy(double distance, double epsilon) {
    if (!std::isfinite(distance)) {
        return 0.0;
    }
    return std::exp(-distance * distance / (2.0 * epsilon * epsilon));
}

double model_score(const EllipsoidModel& m, std::span<const Point3> points, double epsilon, const MetricKind& metric) {
    double score = 0.0;
    for (const Point3& p : points) {
        score += point_energy(metric_or_infinity(metric, p, m), epsilon);
    }
    return score;
}

std::size_t required_iterations(double inlier_ratio, double confidence, std::size_t sample_size,
                                std::size_t min_iterations, std::size_t max_iterations) {
    const double good_sample = std::pow(std::clamp(inlier_ratio, 0.0, 1.0), static_cast<double>(sample_size));
    if (!(good_sample > 0.0) || 1.0 - good_sample == 1.0) {
        return max_iterations;
    }
    if (good_sample >= 1.0) {
        return min_iterations;
    }
    const double raw = std::ceil(std::log(1.0 - confidence) / std::log1p(-good_sample));
    if (!(raw < static_cast<double>(max_iterations))) {
        return max_iterations;
    }
    return std::clamp(static_cast<std::size_t>(std::max(raw, 0.0)), min_iterations, max_iterations);
}

std::vector<PointLabel> classify(std::span<const Point3> points, const EllipsoidModel& m, double epsilon,
                                 const MetricKind& metric) {
    std::vector<PointLabel> labels(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
        labels[i] = metric_or_infinity(metric, points[i], m) < epsilon ? PointLabel::Inlier : PointLabel::Outlier;
    }
    return labels;
}

double inlier_fraction(std::span<const PointLabel> labels) {
    if (labels.empty()) {
        return 0.0;
    }
    const auto inliers = std::count(labels.begin(), labels.end(), PointLabel::Inlier);
    return static_cast<double>(inliers) / static_cast<double>(labels.size());
}

std::vector<std::size_t> sample_minimal(std::size_t point_count, std::size_t sample_size, Rng& rng) {
    if (point_count < sample_size) {
        throw Error(ErrorCode::TooFewPoints, "fewer points than the minimal sample size");
    }
    // Floyd's algorithm: one draw per selected index.
    std::vector<std::size_t> chosen;
    chosen.reserve(sample_size);
    for (std::size_t j = point_count - sample_size; j < point_count; ++j) {
        const std::size_t t = std::uniform_int_distribution<std::size_t>(0, j)(rng);
        if (std::find(chosen.begin(), chosen.end(), t) == chosen.end()) {
            chosen.push_back(t);
        } else {
            chosen.push_back(j);
        }
    }
    std::sort(chosen.begin(), chosen.end());
    return chosen;
}

double lo_threshold(std::size_t step, const FitConfig& cfg) {
    if (cfg.lo_steps <= 1) {
        return cfg.epsilon;
    }
    const double t = static_cast<double>(step - 1) / static_cast<double>(cfg.lo_steps - 1);
    return cfg.epsilon * (1.5 - t);
}

std::optional<LocalOptimizationResult> local_optimize(const EllipsoidModel& m, std::span<const Point3> points,
                                                      const FitConfig& cfg) {
    std::optional<LocalOptimizationResult> best;
    EllipsoidModel current = m;
    for (std::size_t step = 1; step <= cfg.lo_steps; ++step) {
        const WeightVector weights = metric_weights(points, current, lo_threshold(step, cfg), cfg.weight_metric);
        try {
            EllipsoidModel candidate(wls_fit(points, weights));
            const double score = model_score(candidate, points, cfg.epsilon, cfg.score_metric);
            if (!best || score > best->score) {
                best = LocalOptimizationResult{candidate, score};
            }
            current = std::move(candidate);
        } catch (const Error&) {
            // Invalid or unsolvable step: keep the current model.
        }
    }
    return best;
}

FitReport fit(std::span<const Point3> points, const FitConfig& cfg, const FitHooks& hooks) {
    cfg.validate();
    if (points.size() < cfg.sample_size) {
        throw Error(ErrorCode::TooFewPoints, "fewer points than the minimal sample size");
    }
    const auto start = std::chrono::steady_clock::now();

    std::optional<EllipsoidModel> best;
    double best_score = -std::numeric_limits<double>::infinity();
    double ransac_best_score = -std::numeric_limits<double>::infinity();
    std::size_t required = cfg.max_iterations;
    std::size_t iteration = 0;
    std::size_t lo_invocations = 0;

    std::vector<Point3> sample(cfg.sample_size);
    auto notify = [&](CandidateSource source, double score) {
        if (hooks.candidate) {
            hooks.candidate(CandidateEvent{iteration, source, score, best_score});
        }
    };

    while (iteration < required) {
        ++iteration;
        Rng rng = make_rng(cfg.seed, iteration);
        const auto indices = sample_minimal(points.size(), cfg.sample_size, rng);
        for (std::size_t k = 0; k < indices.size(); ++k) {
            sample[k] = points[indices[k]];
        }

        std::optional<EllipsoidModel> model;
        try {
            model.emplace(lls_fit(sample));
        } catch (const Error&) {
            // Rank-deficient sample or failed validation: next iteration.
        }

        if (model) {
            const double score = model_score(*model, points, cfg.epsilon, cfg.score_metric);
            bool improved = false;
            if (score > best_score) {
                best = *model;
                best_score = score;
                improved = true;
            }
            notify(CandidateSource::Sample, score);

            if (score > ransac_best_score) {
                ransac_best_score = score;
                if (cfg.local_opt_enabled) {
                    ++lo_invocations;
                    if (auto refined = local_optimize(*model, points, cfg)) {
                        if (refined->score > best_score) {
                            best = refined->model;
                            best_score = refined->score;
                            improved = true;
                        }
                        notify(CandidateSource::LocalOptimization, refined->score);
                    }
                }
            }

            if (improved) {
                const auto labels = classify(points, *best, cfg.epsilon, cfg.score_metric);
                required = required_iterations(inlier_fraction(labels), cfg.confidence, cfg.sample_size,
                                               cfg.min_iterations, cfg.max_iterations);
            }
        }

        if (hooks.progress) {
            hooks.progress(iteration, best ? best_score : 0.0, required);
        }
    }

    if (!best) {
        throw Error(ErrorCode::NoModelFound, "no candidate validated as an ellipsoid");
    }

    auto labels = classify(points, *best, cfg.epsilon, cfg.score_metric);
    const double ratio = inlier_fraction(labels);
    const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
    return FitReport{*best,         best_score,     std::move(labels), ratio,
                     iteration,     lo_invocations, elapsed.count(),   std::string(kRngAlgorithm)};
}

}  // namespace ellfit
