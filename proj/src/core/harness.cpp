#include "harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <mutex>
#include <set>
#include <thread>
#include <unordered_set>

#include <json.hpp>

#include "error.hpp"
#include "transforms.hpp"

namespace tpot {

using Json = nlohmann::ordered_json;

namespace {

constexpr std::uint64_t kReplicateStream = 0x7e91;
constexpr std::uint64_t kOuterSplitStream = 0x0517;
constexpr std::uint64_t kArmSearchStream = 0x5ea7;
constexpr std::uint64_t kHoldoutFitStream = 0x0f17;

constexpr Arm kAllArms[] = { Arm::RfBaseline, Arm::RandomSearch, Arm::Guided, Arm::Pareto };

std::uint64_t replicate_seed(std::uint64_t experiment_seed, std::size_t r)
{
    return derive_seed(experiment_seed, { kReplicateStream, r });
}

SplitPair outer_split(const Dataset& data, std::uint64_t seed_r, double holdout_fraction)
{
    return stratified_split(data, 1.0 - holdout_fraction, derive_seed(seed_r, { kOuterSplitStream }));
}

double holdout_accuracy(const Pipeline& p, const SplitPair& split, std::uint64_t seed)
{
    const auto preds = fit_predict(p, split.train, split.test, seed, 0);
    return balanced_accuracy(split.test.labels(), preds);
}

std::int64_t millis_since(std::chrono::steady_clock::time_point t0)
{
    return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - t0).count();
}

} // namespace

std::string_view name_of(Arm arm) noexcept
{
    switch (arm) {
    case Arm::RfBaseline: return "rf_baseline";
    case Arm::RandomSearch: return "random_search";
    case Arm::Guided: return "guided";
    case Arm::Pareto: return "pareto";
    }
    return "?";
}

std::optional<Arm> arm_from_name(std::string_view name) noexcept
{
    for (auto a : kAllArms) {
        if (name_of(a) == name) {
            return a;
        }
    }
    return std::nullopt;
}

Pipeline baseline_pipeline(std::size_t trees)
{
    return { PipelineNode::model(OperatorKind::RandomForest,
        { static_cast<double>(trees), static_cast<double>(kUncappedDepth) }, PipelineNode::leaf()) };
}

BaselineResult run_rf_baseline(const Dataset& data, std::uint64_t seed, std::size_t trees, double holdout_fraction)
{
    const auto split = outer_split(data, seed, holdout_fraction);
    const auto p = baseline_pipeline(trees);
    return { holdout_accuracy(p, split, derive_seed(seed, { kHoldoutFitStream, 0 })), p.size() };
}

GpConfig ExperimentSpec::desk_scale_config()
{
    GpConfig cfg;
    cfg.population_size = 50;
    cfg.generations = 30;
    return cfg;
}

void check_experiment(const ExperimentSpec& spec)
{
    require(spec.replicates >= 1, ErrorKind::Usage, "replicates must be at least 1");
    require(!spec.arms.empty(), ErrorKind::Usage, "at least one arm is required");
    require(std::set<Arm>(spec.arms.begin(), spec.arms.end()).size() == spec.arms.size(), ErrorKind::Usage,
        "arms must not repeat");
    require(spec.outer_holdout_fraction > 0.0 && spec.outer_holdout_fraction < 1.0, ErrorKind::Usage,
        "outer_holdout_fraction must lie in (0, 1)");
    require(spec.rf_trees >= 1, ErrorKind::Usage, "rf_trees must be at least 1");
    require(spec.workers >= 1, ErrorKind::Usage, "workers must be at least 1");
    check_config(spec.gp);
    if (spec.source.kind == DataSource::Kind::Epistasis) {
        check_spec(spec.source.epistasis);
    }
}

// ---- experiment document -------------------------------------------------

namespace {

void only_keys(const Json& obj, std::initializer_list<std::string_view> allowed, const std::string& where)
{
    require(obj.is_object(), ErrorKind::Schema, where + ": expected an object");
    for (const auto& [key, value] : obj.items()) {
        require(std::find(allowed.begin(), allowed.end(), key) != allowed.end(), ErrorKind::Schema,
            where + ": unknown key \"" + key + "\"");
    }
}

template <class T>
void read_opt(const Json& obj, const char* key, T& out, const std::string& where)
{
    if (!obj.contains(key)) {
        return;
    }
    try {
        out = obj.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        fail(ErrorKind::Schema, where + "." + key + ": wrong type");
    }
}

DataSource source_from(const Json& d)
{
    DataSource s;
    if (d.contains("csv")) {
        only_keys(d, { "csv", "label_column" }, "$.data");
        s.kind = DataSource::Kind::Csv;
        read_opt(d, "csv", s.path, "$.data");
        read_opt(d, "label_column", s.label_column, "$.data");
        return s;
    }
    require(d.contains("generator"), ErrorKind::Schema, "$.data: needs \"csv\" or \"generator\"");
    const auto gen = d.at("generator").get<std::string>();
    if (gen == "epistasis") {
        only_keys(d, { "generator", "heritability", "maf", "sample_size", "models", "noise_snps", "tolerance", "seed" },
            "$.data");
        s.kind = DataSource::Kind::Epistasis;
        auto& e = s.epistasis;
        read_opt(d, "heritability", e.heritability, "$.data");
        read_opt(d, "maf", e.maf, "$.data");
        read_opt(d, "sample_size", e.sample_size, "$.data");
        read_opt(d, "models", e.n_models, "$.data");
        e.predictive_snps = 2 * e.n_models;
        read_opt(d, "noise_snps", e.noise_snps, "$.data");
        read_opt(d, "tolerance", e.tolerance, "$.data");
    } else if (gen == "hillvalley") {
        only_keys(d, { "generator", "samples", "length", "noise", "seed" }, "$.data");
        s.kind = DataSource::Kind::HillValley;
        read_opt(d, "samples", s.hill_valley.n_samples, "$.data");
        read_opt(d, "length", s.hill_valley.series_length, "$.data");
        read_opt(d, "noise", s.hill_valley.noise_std, "$.data");
    } else {
        fail(ErrorKind::Schema, "$.data.generator: unknown generator \"" + gen + "\"");
    }
    read_opt(d, "seed", s.seed, "$.data");
    return s;
}

void gp_overrides(const Json& g, GpConfig& cfg)
{
    const std::string w = "$.gp";
    only_keys(g,
        { "population_size", "generations", "mutation_rate", "crossover_rate", "elitism_fraction",
            "parsimony_probability", "max_depth", "init_depth", "max_operators", "eval_budget_millis", "workers",
            "resplit_each_generation" },
        w);
    read_opt(g, "population_size", cfg.population_size, w);
    read_opt(g, "generations", cfg.generations, w);
    read_opt(g, "mutation_rate", cfg.mutation_rate, w);
    read_opt(g, "crossover_rate", cfg.crossover_rate, w);
    read_opt(g, "elitism_fraction", cfg.elitism_fraction, w);
    read_opt(g, "parsimony_probability", cfg.parsimony_probability, w);
    read_opt(g, "max_depth", cfg.max_depth, w);
    read_opt(g, "init_depth", cfg.init_depth, w);
    read_opt(g, "max_operators", cfg.max_operators, w);
    read_opt(g, "eval_budget_millis", cfg.eval_budget_millis, w);
    read_opt(g, "workers", cfg.workers, w);
    read_opt(g, "resplit_each_generation", cfg.resplit_each_generation, w);
}

} // namespace

ExperimentSpec experiment_from_json(const std::string& text)
{
    Json doc;
    try {
        doc = Json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        fail(ErrorKind::Parse, std::string("experiment document: ") + e.what());
    }
    only_keys(doc,
        { "format", "data", "arms", "replicates", "outer_holdout_fraction", "seed", "scale", "gp", "rf_trees",
            "output_dir", "workers" },
        "$");
    require(doc.value("format", "") == "tpot-experiment/1", ErrorKind::Parse,
        "experiment document: expected version tag \"tpot-experiment/1\"");
    ExperimentSpec spec;
    require(doc.contains("data"), ErrorKind::Schema, "$: missing \"data\"");
    spec.source = source_from(doc.at("data"));
    const auto scale = doc.value("scale", std::string("desk"));
    if (scale == "full") {
        spec.gp.population_size = 100;
        spec.gp.generations = 100;
        spec.replicates = 30;
    } else {
        require(scale == "desk", ErrorKind::Schema, "$.scale: expected \"desk\" or \"full\"");
    }
    require(doc.contains("arms") && doc.at("arms").is_array(), ErrorKind::Schema, "$.arms: expected a list");
    for (const auto& a : doc.at("arms")) {
        const auto arm = a.is_string() ? arm_from_name(a.get<std::string>()) : std::nullopt;
        require(arm.has_value(), ErrorKind::Schema, "$.arms: unknown arm " + a.dump());
        spec.arms.push_back(*arm);
    }
    read_opt(doc, "replicates", spec.replicates, "$");
    read_opt(doc, "outer_holdout_fraction", spec.outer_holdout_fraction, "$");
    read_opt(doc, "seed", spec.seed, "$");
    read_opt(doc, "rf_trees", spec.rf_trees, "$");
    read_opt(doc, "output_dir", spec.output_dir, "$");
    read_opt(doc, "workers", spec.workers, "$");
    if (doc.contains("gp")) {
        gp_overrides(doc.at("gp"), spec.gp);
    }
    check_experiment(spec);
    return spec;
}

Dataset load_source(const DataSource& source, std::vector<std::string>* class_names)
{
    switch (source.kind) {
    case DataSource::Kind::Csv: {
        auto loaded = load_csv(source.path, source.label_column);
        if (class_names) {
            *class_names = loaded.class_names;
        }
        return std::move(loaded.data);
    }
    case DataSource::Kind::Epistasis: {
        Rng rng = make_rng(source.seed);
        if (class_names) {
            *class_names = { "0", "1" };
        }
        return simulate_epistatic_dataset(source.epistasis, rng).data;
    }
    case DataSource::Kind::HillValley: {
        Rng rng = make_rng(source.seed);
        if (class_names) {
            *class_names = { "0", "1" };
        }
        return generate_hill_valley(source.hill_valley, rng);
    }
    }
    fail(ErrorKind::Contract, "unknown data source");
}

// ---- running ---------------------------------------------------------------

MedianInterval median_notch(std::vector<double> values)
{
    require(!values.empty(), ErrorKind::Contract, "median of an empty sample");
    const double med = quantile(values, 0.5);
    const double iqr = quantile(values, 0.75) - quantile(values, 0.25);
    const double half = 1.57 * iqr / std::sqrt(static_cast<double>(values.size()));
    return { med, med - half, med + half };
}

std::vector<ArmSummary> summarize(const std::vector<Arm>& arms, const std::vector<ReplicateRecord>& records)
{
    std::vector<ArmSummary> out;
    for (auto arm : arms) {
        ArmSummary s;
        s.arm = arm;
        std::vector<double> acc;
        std::vector<double> sizes;
        for (const auto& r : records) {
            if (r.arm != arm) {
                continue;
            }
            if (r.failed) {
                ++s.failed;
                continue;
            }
            acc.push_back(r.accuracy);
            sizes.push_back(static_cast<double>(r.size));
        }
        s.completed = acc.size();
        if (!acc.empty()) {
            const auto m = median_notch(acc);
            s.median_accuracy = m.median;
            s.ci_low = m.low;
            s.ci_high = m.high;
            double total = 0.0;
            for (double v : sizes) {
                total += v;
            }
            s.mean_size = total / static_cast<double>(sizes.size());
            s.median_size = quantile(sizes, 0.5);
        }
        out.push_back(s);
    }
    return out;
}

namespace {

struct ReplicateContext {
    std::uint64_t seed = 0;
    SplitPair split;
    std::unordered_set<std::uint64_t> holdout_only; // hashes of holdout rows absent from outer-train
};

ReplicateContext make_context(const Dataset& data, const ExperimentSpec& spec, std::size_t r)
{
    ReplicateContext ctx;
    ctx.seed = replicate_seed(spec.seed, r);
    ctx.split = outer_split(data, ctx.seed, spec.outer_holdout_fraction);
    std::unordered_set<std::uint64_t> train_rows;
    for (std::size_t i = 0; i < ctx.split.train.rows(); ++i) {
        train_rows.insert(row_hash(ctx.split.train, i));
    }
    for (std::size_t i = 0; i < ctx.split.test.rows(); ++i) {
        const auto h = row_hash(ctx.split.test, i);
        if (!train_rows.contains(h)) {
            ctx.holdout_only.insert(h);
        }
    }
    return ctx;
}

ReplicateRecord run_job(const ExperimentSpec& spec, Arm arm, std::size_t r, const ReplicateContext& ctx)
{
    const auto t0 = std::chrono::steady_clock::now();
    ReplicateRecord rec;
    rec.arm = arm;
    rec.replicate = r;
    rec.seed = ctx.seed;
    const auto arm_index = static_cast<std::uint64_t>(arm);
    try {
        if (arm == Arm::RfBaseline) {
            rec.pipeline = baseline_pipeline(spec.rf_trees);
        } else {
            GpConfig cfg = spec.gp;
            cfg.selection_mode = arm == Arm::Guided ? SelectionMode::Standard
                : arm == Arm::Pareto               ? SelectionMode::Pareto
                                                   : SelectionMode::RandomSearch;
            cfg.seed = derive_seed(ctx.seed, { kArmSearchStream, arm_index });
            cfg.observe_eval_data = [&ctx](const Dataset& seen) {
                for (std::size_t i = 0; i < seen.rows(); ++i) {
                    require(!ctx.holdout_only.contains(row_hash(seen, i)), ErrorKind::Contract,
                        "outer holdout row reached the search");
                }
            };
            const auto run = run_search(cfg, ctx.split.train);
            rec.evaluations = run.total_evaluations;
            require(run.best && run.best->fitness && !run.best->fitness->failed, ErrorKind::Training,
                "no pipeline evaluated successfully");
            rec.pipeline = run.best->pipeline;
            rec.internal_accuracy = run.best->fitness->balanced_accuracy;
        }
        rec.size = rec.pipeline->size();
        rec.accuracy = holdout_accuracy(*rec.pipeline, ctx.split, derive_seed(ctx.seed, { kHoldoutFitStream, arm_index }));
    } catch (const std::exception& e) {
        rec.failed = true;
        rec.error = e.what();
        rec.pipeline.reset();
        rec.size = 0;
        rec.accuracy = 0.0;
    }
    rec.wall_millis = millis_since(t0);
    return rec;
}

void write_outputs(const ExperimentReport& report)
{
    namespace fs = std::filesystem;
    const fs::path dir(report.spec.output_dir);
    std::error_code ec;
    fs::create_directories(dir / "pipelines", ec);
    require(!ec, ErrorKind::Io, "cannot create " + (dir / "pipelines").string() + ": " + ec.message());
    write_text_file((dir / "report.json").string(), report_to_json(report));
    write_text_file((dir / "timing.json").string(), timing_to_json(report));
    std::string csv = "arm,replicate,accuracy,size\n";
    for (const auto& r : report.records) {
        if (r.failed) {
            continue;
        }
        csv += std::string(name_of(r.arm)) + "," + std::to_string(r.replicate) + "," + Json(r.accuracy).dump() + ","
            + std::to_string(r.size) + "\n";
        const auto stem = std::string(name_of(r.arm)) + "_" + std::to_string(r.replicate);
        write_text_file((dir / "pipelines" / (stem + ".json")).string(), serialize(*r.pipeline));
    }
    write_text_file((dir / "replicates.csv").string(), csv);
}

} // namespace

ExperimentReport run_experiment(const ExperimentSpec& spec)
{
    std::vector<std::string> class_names;
    auto data = load_source(spec.source, &class_names);
    return run_experiment(spec, data, std::move(class_names));
}

ExperimentReport run_experiment(const ExperimentSpec& spec, const Dataset& data, std::vector<std::string> class_names)
{
    check_experiment(spec);
    const auto t0 = std::chrono::steady_clock::now();
    ExperimentReport report;
    report.spec = spec;
    report.rows = data.rows();
    report.features = data.cols();
    report.class_names = std::move(class_names);

    // An infeasible outer split fails every job of that replicate.
    std::vector<std::optional<ReplicateContext>> contexts(spec.replicates);
    std::vector<std::string> context_errors(spec.replicates);
    for (std::size_t r = 0; r < spec.replicates; ++r) {
        try {
            contexts[r] = make_context(data, spec, r);
        } catch (const std::exception& e) {
            context_errors[r] = e.what();
        }
    }

    std::vector<Arm> arms = spec.arms;
    std::sort(arms.begin(), arms.end());
    const std::size_t jobs = arms.size() * spec.replicates;
    std::vector<ReplicateRecord> records(jobs);
    std::atomic<std::size_t> next { 0 };
    auto worker = [&] {
        for (std::size_t j = next++; j < jobs; j = next++) {
            const Arm arm = arms[j / spec.replicates];
            const std::size_t r = j % spec.replicates;
            if (contexts[r]) {
                records[j] = run_job(spec, arm, r, *contexts[r]);
            } else {
                records[j].arm = arm;
                records[j].replicate = r;
                records[j].seed = replicate_seed(spec.seed, r);
                records[j].failed = true;
                records[j].error = context_errors[r];
            }
        }
    };
    const std::size_t threads = std::min(spec.workers, jobs);
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t t = 0; t < threads; ++t) {
            pool.emplace_back(worker);
        }
    }
    report.records = std::move(records);
    report.summaries = summarize(spec.arms, report.records);
    report.wall_millis = millis_since(t0);
    if (!spec.output_dir.empty()) {
        write_outputs(report);
    }
    return report;
}

// ---- documents ---------------------------------------------------------------

std::string report_to_json(const ExperimentReport& report)
{
    const auto& spec = report.spec;
    Json doc;
    doc["format"] = "tpot-report/1";
    Json data;
    switch (spec.source.kind) {
    case DataSource::Kind::Csv:
        data["source"] = "csv";
        data["path"] = spec.source.path;
        data["label_column"] = spec.source.label_column;
        break;
    case DataSource::Kind::Epistasis:
        data["source"] = "epistasis";
        data["heritability"] = spec.source.epistasis.heritability;
        data["maf"] = spec.source.epistasis.maf;
        data["models"] = spec.source.epistasis.n_models;
        data["noise_snps"] = spec.source.epistasis.noise_snps;
        data["sample_size"] = spec.source.epistasis.sample_size;
        data["seed"] = spec.source.seed;
        break;
    case DataSource::Kind::HillValley:
        data["source"] = "hillvalley";
        data["samples"] = spec.source.hill_valley.n_samples;
        data["length"] = spec.source.hill_valley.series_length;
        data["noise"] = spec.source.hill_valley.noise_std;
        data["seed"] = spec.source.seed;
        break;
    }
    data["rows"] = report.rows;
    data["features"] = report.features;
    data["class_names"] = report.class_names;
    doc["data"] = std::move(data);
    doc["replicate_scheme"] = "re-seeded outer stratified splits of one dataset";
    doc["seed"] = spec.seed;
    doc["replicates"] = spec.replicates;
    doc["outer_holdout_fraction"] = spec.outer_holdout_fraction;
    Json arms = Json::array();
    for (auto a : spec.arms) {
        arms.push_back(std::string(name_of(a)));
    }
    doc["arms"] = std::move(arms);
    doc["rf_trees"] = spec.rf_trees;
    const auto& g = spec.gp;
    doc["gp"] = {
        { "population_size", g.population_size },
        { "generations", g.generations },
        { "mutation_rate", g.mutation_rate },
        { "crossover_rate", g.crossover_rate },
        { "elitism_fraction", g.elitism_fraction },
        { "parsimony_probability", g.parsimony_probability },
        { "max_depth", g.max_depth },
        { "init_depth", g.init_depth },
        { "max_operators", g.max_operators },
        { "eval_budget_millis", g.eval_budget_millis },
        { "resplit_each_generation", g.resplit_each_generation },
    };
    Json records = Json::array();
    for (const auto& r : report.records) {
        Json j;
        j["arm"] = std::string(name_of(r.arm));
        j["replicate"] = r.replicate;
        j["seed"] = r.seed;
        j["status"] = r.failed ? "failed" : "ok";
        if (r.failed) {
            j["error"] = r.error;
        } else {
            j["accuracy"] = r.accuracy;
            j["size"] = r.size;
            if (r.arm != Arm::RfBaseline) {
                j["internal_accuracy"] = r.internal_accuracy;
                j["evaluations"] = r.evaluations;
            }
            j["pipeline"] = render(*r.pipeline);
        }
        records.push_back(std::move(j));
    }
    doc["records"] = std::move(records);
    Json summary = Json::array();
    for (const auto& s : report.summaries) {
        Json j;
        j["arm"] = std::string(name_of(s.arm));
        j["completed"] = s.completed;
        j["failed"] = s.failed;
        if (s.completed > 0) {
            j["median_accuracy"] = s.median_accuracy;
            j["median_ci95"] = { s.ci_low, s.ci_high };
            j["mean_size"] = s.mean_size;
            j["median_size"] = s.median_size;
        }
        summary.push_back(std::move(j));
    }
    doc["summary"] = std::move(summary);
    return doc.dump(2) + "\n";
}

std::string timing_to_json(const ExperimentReport& report)
{
    Json doc;
    doc["format"] = "tpot-timing/1";
    doc["wall_millis"] = report.wall_millis;
    Json records = Json::array();
    for (const auto& r : report.records) {
        records.push_back({ { "arm", std::string(name_of(r.arm)) }, { "replicate", r.replicate },
            { "wall_millis", r.wall_millis } });
    }
    doc["records"] = std::move(records);
    return doc.dump(2) + "\n";
}

void export_pipeline(const RunResult& run, const std::string& path)
{
    require(run.best && run.best->fitness && !run.best->fitness->failed, ErrorKind::Contract,
        "run has no successfully evaluated pipeline to export");
    write_text_file(path, serialize(run.best->pipeline));
    write_text_file(path + ".txt", render(run.best->pipeline) + "\n");
}

} // namespace tpot
