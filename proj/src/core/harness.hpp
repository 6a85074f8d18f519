#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "datagen.hpp"
#include "dataset.hpp"
#include "evolve.hpp"

namespace tpot {

// ---- ingestion -----------------------------------------------------------

struct LoadedCsv {
    Dataset data;
    std::vector<std::string> class_names; // code -> original label text
};

// Features must be numeric. When every label parses as an integer, codes
// follow ascending label value (so files written by write_csv load back
// unchanged); otherwise codes follow first appearance. Blank lines are
// skipped.
LoadedCsv load_csv(const std::string& path, const std::string& label_column = "class");

// ---- baseline ------------------------------------------------------------

inline constexpr std::size_t kBaselineTrees = 500;
inline constexpr double kOuterHoldoutFraction = 0.25;

// RandomForest(Leaf) with the given tree count and no depth cap.
Pipeline baseline_pipeline(std::size_t trees = kBaselineTrees);

struct BaselineResult {
    double accuracy = 0.0;
    std::size_t size = 1;
};

// Outer stratified split of `data`, forest fit on outer-train, balanced
// accuracy on the outer holdout. Uses the same split as replicate `seed` of
// an experiment.
BaselineResult run_rf_baseline(const Dataset& data, std::uint64_t seed, std::size_t trees = kBaselineTrees,
    double holdout_fraction = kOuterHoldoutFraction);

// ---- experiments ---------------------------------------------------------

enum class Arm { RfBaseline, RandomSearch, Guided, Pareto };

std::string_view name_of(Arm arm) noexcept;
std::optional<Arm> arm_from_name(std::string_view name) noexcept;

struct DataSource {
    enum class Kind { Csv, Epistasis, HillValley };
    Kind kind = Kind::Csv;
    std::string path;
    std::string label_column = "class";
    EpistasisSpec epistasis;
    HillValleySpec hill_valley;
    std::uint64_t seed = 0; // generator seed
};

struct ExperimentSpec {
    DataSource source;
    std::vector<Arm> arms;
    std::size_t replicates = 10;
    double outer_holdout_fraction = kOuterHoldoutFraction;
    GpConfig gp = desk_scale_config();
    std::size_t rf_trees = kBaselineTrees;
    std::uint64_t seed = 0;
    std::string output_dir; // empty: nothing written
    std::size_t workers = 1;

    static GpConfig desk_scale_config();
};

// Parses a "tpot-experiment/1" document. Relative paths are kept as given.
ExperimentSpec experiment_from_json(const std::string& text);
void check_experiment(const ExperimentSpec& spec);

struct ReplicateRecord {
    Arm arm = Arm::RfBaseline;
    std::size_t replicate = 0;
    std::uint64_t seed = 0;
    bool failed = false;
    std::string error;
    double accuracy = 0.0;          // outer holdout
    double internal_accuracy = 0.0; // best-ever internal fitness (search arms)
    std::size_t size = 0;
    std::size_t evaluations = 0;
    std::optional<Pipeline> pipeline;
    std::int64_t wall_millis = 0;
};

struct ArmSummary {
    Arm arm = Arm::RfBaseline;
    std::size_t completed = 0;
    std::size_t failed = 0;
    double median_accuracy = 0.0;
    double ci_low = 0.0; // notch interval: median -/+ 1.57 IQR / sqrt(n)
    double ci_high = 0.0;
    double mean_size = 0.0;
    double median_size = 0.0;
};

struct ExperimentReport {
    ExperimentSpec spec;
    std::size_t rows = 0;
    std::size_t features = 0;
    std::vector<std::string> class_names;
    std::vector<ReplicateRecord> records; // sorted by (arm, replicate)
    std::vector<ArmSummary> summaries;    // in spec.arms order
    std::int64_t wall_millis = 0;
};

// Median and notch interval of a non-empty sample.
struct MedianInterval {
    double median;
    double low;
    double high;
};
MedianInterval median_notch(std::vector<double> values);

std::vector<ArmSummary> summarize(const std::vector<Arm>& arms, const std::vector<ReplicateRecord>& records);

// Runs every (arm, replicate) job. When spec.output_dir is set, writes
// report.json, timing.json, replicates.csv and pipelines/.
ExperimentReport run_experiment(const ExperimentSpec& spec);
ExperimentReport run_experiment(const ExperimentSpec& spec, const Dataset& data,
    std::vector<std::string> class_names);

// Body without wall-clock fields; identical seeds give identical bytes.
std::string report_to_json(const ExperimentReport& report);
std::string timing_to_json(const ExperimentReport& report);

Dataset load_source(const DataSource& source, std::vector<std::string>* class_names);

// ---- export --------------------------------------------------------------

// Writes the serialized best pipeline to `path` and its one-line rendering
// to `path` + ".txt". Throws Contract when the run has no successful
// individual; nothing is written then.
void export_pipeline(const RunResult& run, const std::string& path);

void write_text_file(const std::string& path, const std::string& text);
std::string read_text_file(const std::string& path);

} // namespace tpot
