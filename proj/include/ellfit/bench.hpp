#pragma once

// Fitting-error and residual metrics plus the experiment grid runner.

#include "ellfit/consensus.hpp"
#include "ellfit/synth.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace ellfit {

struct ErrorTriple {
    double parameter_error = 0.0;  ///< L1 of q difference, both unit-norm and sign-normalized
    double semiaxis_error = 0.0;   ///< L1 of descending-sorted semiaxes difference
    double center_error = 0.0;     ///< L1 of center difference
};

struct ResidualTriple {
    double sampson_residual = 0.0;
    double orthogonal_residual = 0.0;
    double axial_residual = 0.0;
};

ErrorTriple fitting_errors(const EllipsoidModel& estimated, const EllipsoidModel& truth);

/// Mean Sampson, orthogonal and axial distance over all points. A point at
/// the exact model center (Sampson undefined) contributes its orthogonal
/// distance to the Sampson mean.
ResidualTriple residuals(const EllipsoidModel& m, std::span<const Point3> points);

/// How a variant's epsilon is obtained for a given instance.
struct EpsilonRule {
    enum class Mode { Absolute, NoiseMultiple } mode = Mode::NoiseMultiple;
    double value = 1.0;

    /// Absolute: value. NoiseMultiple: value * sigma, where sigma is the
    /// instance's absolute noise std, floored at 1% of the true mean semiaxis.
    double resolve(const Instance& inst) const;
};

struct MethodVariant {
    std::string name;
    FitConfig config;
    EpsilonRule epsilon;
};

struct ExperimentGrid {
    std::vector<MethodVariant> variants;
    std::vector<DatasetSpec> specs;
    std::size_t runs_per_instance = 100;
    std::uint64_t seed = 0;
    std::filesystem::path output;

    void validate() const;
};

/// Parses the grid JSON document (schema in README.md).
ExperimentGrid grid_from_json(const nlohmann::json& doc);
/// Builds one variant from its JSON object; presets: proposed, ransac-sampson, cas-ransac, flo.
MethodVariant variant_from_json(const nlohmann::json& doc);

struct RunRecord {
    std::size_t variant = 0;
    std::size_t spec = 0;
    std::size_t instance = 0;
    std::size_t run = 0;
    bool succeeded = false;  ///< false when fit() found no model
    ErrorTriple errors;
    ResidualTriple residuals;
    std::size_t iterations = 0;
    std::size_t lo_count = 0;
    bool is_ellipsoid = false;
    double wall_ms = 0.0;
};

struct SummaryStat {
    double mean = 0.0;
    double std = 0.0;  ///< sample standard deviation; 0 for a single value
};

struct Aggregate {
    std::size_t variant = 0;
    std::size_t spec = 0;
    std::size_t runs = 0;       ///< all runs in the cell
    std::size_t succeeded = 0;  ///< runs contributing to error/residual stats
    SummaryStat parameter_error, semiaxis_error, center_error;
    SummaryStat sampson_residual, orthogonal_residual, axial_residual;
    SummaryStat iterations, lo_count, is_ellipsoid, wall_ms;
};

struct GridResult {
    std::vector<RunRecord> records;  ///< canonical (variant, spec, instance, run) order
    std::vector<Aggregate> aggregates;
};

SummaryStat summarize(std::span<const double> values);

/// Seed of fit `run` on `instance` of `spec`; shared by all variants.
std::uint64_t run_seed(const ExperimentGrid& grid, std::size_t spec, std::size_t instance, std::size_t run);

/// Runs every (variant, spec, instance, run) cell; `jobs` worker threads
/// (0 = hardware concurrency). Output does not depend on `jobs`.
GridResult run_grid(const ExperimentGrid& grid, unsigned jobs = 1);

std::vector<Aggregate> aggregate(const ExperimentGrid& grid, std::span<const RunRecord> records);

/// CSV header shared by data and aggregate rows.
inline constexpr const char* kReportHeader =
    "variant,dataset_kind,noise_level,outlier_fraction,instance,run,param_err,semiaxis_err,center_err,"
    "sampson_res,orth_res,axial_res,iterations,lo_count,is_ellipsoid,wall_ms";

/// Data rows first, then one aggregate row per (variant, spec) whose
/// instance and run columns read `all` and `n=<runs>` and whose numeric
/// cells read `mean ± std`.
void write_report(const ExperimentGrid& grid, const GridResult& result, std::ostream& out);
void write_report(const ExperimentGrid& grid, const GridResult& result, const std::filesystem::path& path);

}  // namespace ellfit
