#include "ellfit/cli.hpp"

#include "ellfit/bench.hpp"
#include "ellfit/consensus.hpp"
#include "ellfit/distance.hpp"
#include "ellfit/error.hpp"
#include "ellfit/model_io.hpp"
#include "ellfit/synth.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace ellfit {

namespace {

struct FitOptions {
    std::string points;
    double epsilon = 0.0;
    double lambda = 0.5;
    std::string metric = "cas";
    std::string weight_metric;
    bool no_lo = false;
    std::uint64_t seed = 0;
    double confidence = 0.95;
    std::size_t lo_steps = 5;
    std::size_t max_iterations = 100000;
    std::size_t min_iterations = 50;
    std::string out;
};

struct SynthOptions {
    std::string kind = "gaussian";
    double sigma = -1.0;
    double fraction = 0.1;
    std::size_t count = 500;
    std::size_t instances = 1;
    std::uint64_t seed = 0;
    std::string out;
};

struct BenchOptions {
    std::string grid;
    std::string out;
    unsigned jobs = 1;
};

struct DistanceOptions {
    std::string points;
    std::string model;
    double lambda = 0.5;
    std::string out;
};

int run_fit(const FitOptions& opt, std::ostream& out, std::ostream& err) {
    FitConfig cfg;
    cfg.epsilon = opt.epsilon;
    cfg.score_metric = parse_metric(opt.metric, opt.lambda);
    cfg.weight_metric = parse_metric(opt.weight_metric.empty() ? opt.metric : opt.weight_metric, opt.lambda);
    cfg.local_opt_enabled = !opt.no_lo;
    cfg.seed = opt.seed;
    cfg.confidence = opt.confidence;
    cfg.lo_steps = opt.lo_steps;
    cfg.max_iterations = opt.max_iterations;
    cfg.min_iterations = opt.min_iterations;
    cfg.validate();

    const auto points = load_points(opt.points);
    const FitReport report = fit(points, cfg);

    nlohmann::json doc;
    doc["model"] = model_to_json(report.best_model);
    doc["score"] = report.best_score;
    doc["inlier_ratio"] = report.inlier_ratio;
    doc["iterations"] = report.iterations_used;
    doc["lo_invocations"] = report.lo_invocations;
    doc["rng"] = report.rng_algorithm;
    doc["seed"] = cfg.seed;
    std::vector<int> labels;
    labels.reserve(report.labels.size());
    for (PointLabel l : report.labels) labels.push_back(l == PointLabel::Inlier ? 1 : 0);
    doc["labels"] = labels;

    if (opt.out.empty()) {
        out << doc.dump(2) << '\n';
    } else {
        write_json_file(doc, opt.out);
        out << "wrote " << opt.out << ": " << report.iterations_used << " iterations, inlier ratio "
            << report.inlier_ratio << '\n';
    }
    err << "wall_time_ms=" << report.wall_time * 1e3 << '\n';
    return kExitOk;
}

int run_synth(const SynthOptions& opt, std::ostream& out) {
    const DatasetKind kind = parse_dataset_kind(opt.kind);
    DatasetSpec spec = kind == DatasetKind::Outlier ? DatasetSpec::outlier(opt.fraction, opt.seed)
                                                    : DatasetSpec::gaussian(0.1, opt.seed);
    if (opt.sigma >= 0.0) spec.sigma_rel = opt.sigma;
    spec.point_count = opt.count;
    spec.instance_count = opt.instances;
    spec.validate();

    const std::filesystem::path dir(opt.out);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) {
        throw Error(ErrorCode::IoError, "cannot create '" + dir.string() + "': " + ec.message());
    }

    for (std::size_t i = 0; i < spec.instance_count; ++i) {
        const Instance inst = make_instance(spec, i);
        char stem[32];
        std::snprintf(stem, sizeof(stem), "instance_%03zu", i);
        save_points(inst.points, dir / (std::string(stem) + ".csv"));

        nlohmann::json side;
        side["truth"] = model_to_json(inst.truth);
        side["sigma"] = inst.sigma;
        side["spec"] = {{"kind", dataset_kind_name(spec.kind)},
                        {"point_count", spec.point_count},
                        {"sigma_rel", spec.sigma_rel},
                        {"fraction", spec.outlier_fraction},
                        {"seed", spec.seed},
                        {"instance", i}};
        std::vector<int> labels;
        for (PointLabel l : inst.ground_labels) labels.push_back(l == PointLabel::Inlier ? 1 : 0);
        side["labels"] = labels;
        write_json_file(side, dir / (std::string(stem) + ".json"));
    }
    out << "wrote " << spec.instance_count << " instance(s) to " << dir.string() << '\n';
    return kExitOk;
}

int run_bench(const BenchOptions& opt, std::ostream& out, std::ostream& err) {
    ExperimentGrid grid = grid_from_json(read_json_file(opt.grid));
    if (!opt.out.empty()) grid.output = opt.out;
    if (grid.output.empty()) {
        throw Error(ErrorCode::InvalidArgument, "no output path: pass --out or set \"output\" in the grid");
    }
    const GridResult result = run_grid(grid, opt.jobs);
    write_report(grid, result, grid.output);
    out << "wrote " << result.records.size() << " rows and " << result.aggregates.size() << " aggregates to "
        << grid.output.string() << '\n';
    (void)err;
    return kExitOk;
}

int run_distances(const DistanceOptions& opt, std::ostream& out) {
    const auto points = load_points(opt.points);
    const EllipsoidModel model = load_model(opt.model);
    const std::vector<MetricKind> kinds{MetricKind::algebraic(), MetricKind::sampson(), MetricKind::orthogonal(),
                                        MetricKind::axial(), MetricKind::cas(opt.lambda)};

    std::ostringstream csv;
    csv << "point_index,metric,value\n" << std::setprecision(17);
    for (std::size_t i = 0; i < points.size(); ++i) {
        for (const auto& kind : kinds) {
            csv << i << ',' << metric_name(kind.tag()) << ',' << metric_or_infinity(kind, points[i], model) << '\n';
        }
    }
    if (opt.out.empty() || opt.out == "-") {
        out << csv.str();
    } else {
        std::ofstream file(opt.out, std::ios::binary | std::ios::trunc);
        if (!(file << csv.str())) {
            throw Error(ErrorCode::IoError, "cannot write '" + opt.out + "'");
        }
    }
    return kExitOk;
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Robust ellipsoid fitting with axial/Sampson distance combination", "ellfit"};
    app.require_subcommand(1);

    FitOptions fit_opt;
    auto* fit_cmd = app.add_subcommand("fit", "Fit an ellipsoid to a point file");
    fit_cmd->add_option("points", fit_opt.points, "Point file (x,y,z per line)")->required();
    fit_cmd->add_option("--epsilon", fit_opt.epsilon, "Distance threshold (scene units)")
        ->required()
        ->check(CLI::PositiveNumber);
    fit_cmd->add_option("--lambda", fit_opt.lambda, "Control ratio of combined metrics")->check(CLI::Range(0.0, 1.0));
    fit_cmd->add_option("--metric", fit_opt.metric,
                        "Score metric: cas, sampson, axial, orthogonal, algebraic, sampson+orthogonal, "
                        "axial+orthogonal");
    fit_cmd->add_option("--weight-metric", fit_opt.weight_metric, "Local-optimization weight metric (default: --metric)");
    fit_cmd->add_flag("--no-lo", fit_opt.no_lo, "Disable local optimization");
    fit_cmd->add_option("--seed", fit_opt.seed, "RNG seed");
    fit_cmd->add_option("--confidence", fit_opt.confidence, "Confidence for the stopping rule")
        ->check(CLI::Range(0.0, 1.0));
    fit_cmd->add_option("--lo-steps", fit_opt.lo_steps, "Local-optimization steps")->check(CLI::PositiveNumber);
    fit_cmd->add_option("--max-iterations", fit_opt.max_iterations, "Iteration cap")->check(CLI::PositiveNumber);
    fit_cmd->add_option("--min-iterations", fit_opt.min_iterations, "Iteration floor")->check(CLI::PositiveNumber);
    fit_cmd->add_option("--out", fit_opt.out, "Write the result JSON here instead of stdout");

    SynthOptions synth_opt;
    auto* synth_cmd = app.add_subcommand("synth", "Generate synthetic instances with truth sidecars");
    synth_cmd->add_option("--kind", synth_opt.kind, "gaussian or outlier");
    synth_cmd->add_option("--sigma", synth_opt.sigma, "Noise std as a fraction of the mean semiaxis")
        ->check(CLI::NonNegativeNumber);
    synth_cmd->add_option("--fraction", synth_opt.fraction, "Outlier fraction")->check(CLI::Range(0.0, 1.0));
    synth_cmd->add_option("--count", synth_opt.count, "Points per instance")->check(CLI::Range(9, 100000000));
    synth_cmd->add_option("--instances", synth_opt.instances, "Number of instances")->check(CLI::PositiveNumber);
    synth_cmd->add_option("--seed", synth_opt.seed, "RNG seed");
    synth_cmd->add_option("--out", synth_opt.out, "Output directory")->required();

    BenchOptions bench_opt;
    auto* bench_cmd = app.add_subcommand("bench", "Run an experiment grid and write a CSV report");
    bench_cmd->add_option("grid", bench_opt.grid, "Grid JSON file")->required();
    bench_cmd->add_option("--out", bench_opt.out, "Report CSV path");
    bench_cmd->add_option("--jobs", bench_opt.jobs, "Worker threads (0 = all cores)");

    DistanceOptions dist_opt;
    auto* dist_cmd = app.add_subcommand("distances", "Evaluate every metric for each point against a model");
    dist_cmd->add_option("points", dist_opt.points, "Point file")->required();
    dist_cmd->add_option("model", dist_opt.model, "Model JSON (bare model or fit output)")->required();
    dist_cmd->add_option("--lambda", dist_opt.lambda, "Control ratio for cas")->check(CLI::Range(0.0, 1.0));
    dist_cmd->add_option("--out", dist_opt.out, "CSV path (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*fit_cmd) return run_fit(fit_opt, out, err);
        if (*synth_cmd) return run_synth(synth_opt, out);
        if (*bench_cmd) return run_bench(bench_opt, out, err);
        if (*dist_cmd) return run_distances(dist_opt, out);
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return e.code() == ErrorCode::InvalidArgument ? kExitUsage : kExitRuntime;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
    return kExitUsage;
}

}  // namespace ellfit
