#include "ellfit/bench.hpp"

#include "ellfit/distance.hpp"
#include "ellfit/error.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <mutex>
#include <ostream>
#include <thread>

namespace ellfit {

namespace {

Eigen::Vector3d sorted_descending(Eigen::Vector3d v) {
    std::sort(v.data(), v.data() + 3, std::greater<>());
    return v;
}

std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

std::string format_stat(const SummaryStat& s) { return format_number(s.mean) + " ± " + format_number(s.std); }

template <typename T>
T json_value_or(const nlohmann::json& doc, const char* key, T fallback) {
    return doc.contains(key) ? doc.at(key).get<T>() : fallback;
}

FitConfig preset(const std::string& name) {
    if (name == "proposed" || name == "cas-lo") return FitConfig::proposed(1.0);
    if (name == "ransac-sampson" || name == "ransac") return FitConfig::ransac_sampson(1.0);
    if (name == "cas-ransac") return FitConfig::cas_ransac(1.0);
    if (name == "flo") return FitConfig::flo(1.0);
    throw Error(ErrorCode::InvalidArgument, "unknown variant preset '" + name + "'");
}

DatasetSpec spec_from_json(const nlohmann::json& doc) {
    const DatasetKind kind = parse_dataset_kind(doc.at("kind").get<std::string>());
    DatasetSpec spec = kind == DatasetKind::Outlier ? DatasetSpec::outlier(json_value_or(doc, "fraction", 0.1))
                                                    : DatasetSpec::gaussian(json_value_or(doc, "sigma_rel", 0.1));
    spec.sigma_rel = json_value_or(doc, "sigma_rel", spec.sigma_rel);
    spec.outlier_fraction = json_value_or(doc, "fraction", spec.outlier_fraction);
    spec.point_count = json_value_or<std::size_t>(doc, "point_count", spec.point_count);
    spec.instance_count = json_value_or<std::size_t>(doc, "instances", spec.instance_count);
    spec.seed = json_value_or<std::uint64_t>(doc, "seed", spec.seed);
    spec.validate();
    return spec;
}

}  // namespace

ErrorTriple fitting_errors(const EllipsoidModel& estimated, const EllipsoidModel& truth) {
    const auto& ge = estimated.geometry();
    const auto& gt = truth.geometry();
    return ErrorTriple{
        (estimated.coeffs().vector() - truth.coeffs().vector()).lpNorm<1>(),
        (sorted_descending(ge.semiaxes) - sorted_descending(gt.semiaxes)).lpNorm<1>(),
        (ge.center - gt.center).lpNorm<1>(),
    };
}

ResidualTriple residuals(const EllipsoidModel& m, std::span<const Point3> points) {
    ResidualTriple r;
    if (points.empty()) {
        return r;
    }
    for (const Point3& p : points) {
        const double orth = orthogonal_distance(p, m);
        r.sampson_residual += try_sampson_distance(p, m).value_or(orth);
        r.orthogonal_residual += orth;
        r.axial_residual += axial_distance(p, m);
    }
    const double n = static_cast<double>(points.size());
    r.sampson_residual /= n;
    r.orthogonal_residual /= n;
    r.axial_residual /= n;
    return r;
}

double EpsilonRule::resolve(const Instance& inst) const {
    if (mode == Mode::Absolute) {
        return value;
    }
    const double floor = 0.01 * inst.truth.geometry().semiaxes.mean();
    return value * std::max(inst.sigma, floor);
}

void ExperimentGrid::validate() const {
    if (variants.empty()) throw Error(ErrorCode::InvalidArgument, "grid needs at least one variant");
    if (specs.empty()) throw Error(ErrorCode::InvalidArgument, "grid needs at least one dataset spec");
    if (runs_per_instance < 1) throw Error(ErrorCode::InvalidArgument, "runs_per_instance must be at least 1");
    for (const auto& v : variants) {
        if (!(v.epsilon.value > 0.0)) throw Error(ErrorCode::InvalidArgument, "variant '" + v.name + "': bad epsilon");
        FitConfig probe = v.config;
        probe.epsilon = 1.0;
        probe.validate();
    }
    for (const auto& s : specs) {
        s.validate();
        if (s.instance_count < 1) throw Error(ErrorCode::InvalidArgument, "dataset spec needs at least one instance");
    }
}

MethodVariant variant_from_json(const nlohmann::json& doc) {
    MethodVariant v;
    v.name = doc.at("name").get<std::string>();
    v.config = preset(json_value_or<std::string>(doc, "preset", "proposed"));

    const double lambda = json_value_or(doc, "lambda", 0.5);
    if (doc.contains("score_metric")) v.config.score_metric = parse_metric(doc.at("score_metric").get<std::string>());
    if (doc.contains("weight_metric")) v.config.weight_metric = parse_metric(doc.at("weight_metric").get<std::string>());
    v.config.set_lambda(lambda);
    v.config.local_opt_enabled = json_value_or(doc, "local_opt", v.config.local_opt_enabled);
    v.config.confidence = json_value_or(doc, "confidence", v.config.confidence);
    v.config.lo_steps = json_value_or<std::size_t>(doc, "lo_steps", v.config.lo_steps);
    v.config.max_iterations = json_value_or<std::size_t>(doc, "max_iterations", v.config.max_iterations);
    v.config.min_iterations = json_value_or<std::size_t>(doc, "min_iterations", v.config.min_iterations);

    if (doc.contains("epsilon")) {
        const auto& eps = doc.at("epsilon");
        if (eps.is_number()) {
            v.epsilon = EpsilonRule{EpsilonRule::Mode::Absolute, eps.get<double>()};
        } else {
            v.epsilon = EpsilonRule{EpsilonRule::Mode::NoiseMultiple, eps.at("noise_multiple").get<double>()};
        }
    }
    return v;
}

ExperimentGrid grid_from_json(const nlohmann::json& doc) {
    try {
        ExperimentGrid grid;
        for (const auto& v : doc.at("variants")) grid.variants.push_back(variant_from_json(v));
        for (const auto& s : doc.at("datasets")) grid.specs.push_back(spec_from_json(s));
        grid.runs_per_instance = json_value_or<std::size_t>(doc, "runs_per_instance", grid.runs_per_instance);
        grid.seed = json_value_or<std::uint64_t>(doc, "seed", grid.seed);
        if (doc.contains("output")) grid.output = doc.at("output").get<std::string>();
        grid.validate();
        return grid;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::ParseError, std::string("malformed grid JSON: ") + e.what());
    }
}

SummaryStat summarize(std::span<const double> values) {
    SummaryStat s;
    if (values.empty()) {
        s.mean = s.std = std::numeric_limits<double>::quiet_NaN();
        return s;
    }
    double sum = 0.0;
    for (double v : values) sum += v;
    s.mean = sum / static_cast<double>(values.size());
    if (values.size() > 1) {
        double sq = 0.0;
        for (double v : values) sq += (v - s.mean) * (v - s.mean);
        s.std = std::sqrt(sq / static_cast<double>(values.size() - 1));
    }
    return s;
}

std::uint64_t run_seed(const ExperimentGrid& grid, std::size_t spec, std::size_t instance, std::size_t run) {
    return substream_seed(grid.seed, spec, instance, run);
}

GridResult run_grid(const ExperimentGrid& grid, unsigned jobs) {
    grid.validate();

    // Instances are shared by every variant and run.
    std::vector<std::vector<Instance>> instances(grid.specs.size());
    for (std::size_t s = 0; s < grid.specs.size(); ++s) {
        for (std::size_t i = 0; i < grid.specs[s].instance_count; ++i) {
            instances[s].push_back(make_instance(grid.specs[s], i));
        }
    }

    std::vector<RunRecord> records;
    for (std::size_t v = 0; v < grid.variants.size(); ++v) {
        for (std::size_t s = 0; s < grid.specs.size(); ++s) {
            for (std::size_t i = 0; i < grid.specs[s].instance_count; ++i) {
                for (std::size_t r = 0; r < grid.runs_per_instance; ++r) {
                    RunRecord rec;
                    rec.variant = v;
                    rec.spec = s;
                    rec.instance = i;
                    rec.run = r;
                    records.push_back(rec);
                }
            }
        }
    }

    auto execute = [&](RunRecord& rec) {
        const Instance& inst = instances[rec.spec][rec.instance];
        const MethodVariant& variant = grid.variants[rec.variant];
        FitConfig cfg = variant.config;
        cfg.epsilon = variant.epsilon.resolve(inst);
        cfg.seed = run_seed(grid, rec.spec, rec.instance, rec.run);
        try {
            const FitReport report = fit(inst.points, cfg);
            rec.succeeded = true;
            rec.errors = fitting_errors(report.best_model, inst.truth);
            rec.residuals = residuals(report.best_model, inst.points);
            rec.iterations = report.iterations_used;
            rec.lo_count = report.lo_invocations;
            rec.is_ellipsoid = validate_ellipsoid(report.best_model.coeffs());
            rec.wall_ms = report.wall_time * 1e3;
        } catch (const Error& e) {
            if (e.code() != ErrorCode::NoModelFound) throw;
            constexpr double nan = std::numeric_limits<double>::quiet_NaN();
            rec.errors = ErrorTriple{nan, nan, nan};
            rec.residuals = ResidualTriple{nan, nan, nan};
            rec.iterations = cfg.max_iterations;
        }
    };

    if (jobs == 0) {
        jobs = std::max(1u, std::thread::hardware_concurrency());
    }
    if (jobs == 1) {
        for (auto& rec : records) execute(rec);
    } else {
        std::atomic<std::size_t> next{0};
        std::exception_ptr failure;
        std::mutex failure_mutex;
        std::vector<std::thread> workers;
        for (unsigned w = 0; w < jobs; ++w) {
            workers.emplace_back([&] {
                for (std::size_t k = next++; k < records.size(); k = next++) {
                    try {
                        execute(records[k]);
                    } catch (...) {
                        std::lock_guard lock(failure_mutex);
                        if (!failure) failure = std::current_exception();
                    }
                }
            });
        }
        for (auto& t : workers) t.join();
        if (failure) std::rethrow_exception(failure);
    }

    GridResult result;
    result.aggregates = aggregate(grid, records);
    result.records = std::move(records);
    return result;
}

std::vector<Aggregate> aggregate(const ExperimentGrid& grid, std::span<const RunRecord> records) {
    std::vector<Aggregate> out;
    for (std::size_t v = 0; v < grid.variants.size(); ++v) {
        for (std::size_t s = 0; s < grid.specs.size(); ++s) {
            std::vector<double> pe, se, ce, sr, orr, ar, it, lo, ell, ms;
            Aggregate agg;
            agg.variant = v;
            agg.spec = s;
            for (const auto& rec : records) {
                if (rec.variant != v || rec.spec != s) continue;
                ++agg.runs;
                it.push_back(static_cast<double>(rec.iterations));
                lo.push_back(static_cast<double>(rec.lo_count));
                ell.push_back(rec.is_ellipsoid ? 1.0 : 0.0);
                ms.push_back(rec.wall_ms);
                if (!rec.succeeded) continue;
                ++agg.succeeded;
                pe.push_back(rec.errors.parameter_error);
                se.push_back(rec.errors.semiaxis_error);
                ce.push_back(rec.errors.center_error);
                sr.push_back(rec.residuals.sampson_residual);
                orr.push_back(rec.residuals.orthogonal_residual);
                ar.push_back(rec.residuals.axial_residual);
            }
            agg.parameter_error = summarize(pe);
            agg.semiaxis_error = summarize(se);
            agg.center_error = summarize(ce);
            agg.sampson_residual = summarize(sr);
            agg.orthogonal_residual = summarize(orr);
            agg.axial_residual = summarize(ar);
            agg.iterations = summarize(it);
            agg.lo_count = summarize(lo);
            agg.is_ellipsoid = summarize(ell);
            agg.wall_ms = summarize(ms);
            out.push_back(agg);
        }
    }
    return out;
}

void write_report(const ExperimentGrid& grid, const GridResult& result, std::ostream& out) {
    out << kReportHeader << '\n';
    auto prefix = [&](std::size_t v, std::size_t s) {
        const DatasetSpec& spec = grid.specs[s];
        return grid.variants[v].name + ',' + std::string(dataset_kind_name(spec.kind)) + ',' +
               format_number(spec.sigma_rel) + ',' + format_number(spec.outlier_fraction);
    };
    for (const auto& r : result.records) {
        out << prefix(r.variant, r.spec) << ',' << r.instance << ',' << r.run << ','
            << format_number(r.errors.parameter_error) << ',' << format_number(r.errors.semiaxis_error) << ','
            << format_number(r.errors.center_error) << ',' << format_number(r.residuals.sampson_residual) << ','
            << format_number(r.residuals.orthogonal_residual) << ',' << format_number(r.residuals.axial_residual)
            << ',' << r.iterations << ',' << r.lo_count << ',' << (r.is_ellipsoid ? 1 : 0) << ','
            << format_number(r.wall_ms) << '\n';
    }
    for (const auto& a : result.aggregates) {
        out << prefix(a.variant, a.spec) << ",all,n=" << a.runs << ',' << format_stat(a.parameter_error) << ','
            << format_stat(a.semiaxis_error) << ',' << format_stat(a.center_error) << ','
            << format_stat(a.sampson_residual) << ',' << format_stat(a.orthogonal_residual) << ','
            << format_stat(a.axial_residual) << ',' << format_stat(a.iterations) << ',' << format_stat(a.lo_count)
            << ',' << format_stat(a.is_ellipsoid) << ',' << format_stat(a.wall_ms) << '\n';
    }
}

void write_report(const ExperimentGrid& grid, const GridResult& result, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error(ErrorCode::IoError, "cannot write '" + path.string() + "'");
    }
    write_report(grid, result, out);
    if (!out) {
        throw Error(ErrorCode::IoError, "failed writing '" + path.string() + "'");
    }
}

}  // namespace ellfit
