#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dataset.hpp"
#include "pipeline.hpp"
#include "rng.hpp"

namespace tpot {

struct Individual {
    Pipeline pipeline;
    std::optional<FitnessRecord> fitness;
    std::uint64_t discovery = 0; // evaluation order within the run

    bool operator==(const Individual&) const = default;
};

// Ordering used for elites and the best-ever record: succeeded before
// failed, then higher accuracy, smaller size, earlier discovery.
bool better_overall(const Individual& a, const Individual& b);

// ---- NSGA-II -------------------------------------------------------------

struct Objectives {
    double accuracy; // maximized
    double size;     // minimized
};

bool dominates(const Objectives& a, const Objectives& b);

struct FrontSort {
    std::vector<std::vector<std::size_t>> fronts;
    std::vector<double> crowding; // per point; boundary points are +inf
};

FrontSort fast_nondominated_sort(std::span<const Objectives> points);

// ---- selection -----------------------------------------------------------

struct SelectionParams {
    double elitism_fraction = 0.10;
    std::size_t tournament_size = 3;
    double parsimony_probability = 0.70;
    double pareto_fraction = 0.20;
};

struct Selection {
    std::vector<Individual> chosen;
    std::size_t elites = 0; // the first `elites` entries are exempt from variation
};

// Two accuracy tournaments, then the smaller of the two winners with
// probability parsimony_probability, otherwise the fitter. Accuracy ties go
// to the first drawn. Returns an index into `pop`.
std::size_t double_tournament(std::span<const Individual> pop, Rng& rng, const SelectionParams& params);

Selection select_standard(std::span<const Individual> pop, Rng& rng, const SelectionParams& params = {});

// Ranks by (front, descending crowding); the top ceil(fraction * N) are
// cycled to refill N slots. Failed individuals rank after every front.
Selection select_pareto(std::span<const Individual> pop, const SelectionParams& params = {});

// ---- variation -----------------------------------------------------------

enum class MutationKind { Point, Insert, Shrink };

Pipeline mutate(const Pipeline& p, Rng& rng, const PipelineLimits& limits);
// Applies the given variant, falling back to point mutation when it is
// inapplicable or would break the limits.
Pipeline mutate_with(const Pipeline& p, MutationKind kind, Rng& rng, const PipelineLimits& limits);

Pipeline crossover(const Pipeline& a, const Pipeline& b, Rng& rng, const PipelineLimits& limits);

// ---- runs ----------------------------------------------------------------

enum class SelectionMode { Standard, Pareto, RandomSearch };

std::string_view name_of(SelectionMode mode) noexcept;
std::optional<SelectionMode> mode_from_name(std::string_view name) noexcept;

struct GpConfig {
    std::size_t population_size = 100;
    std::size_t generations = 100;
    double mutation_rate = 0.90;
    double crossover_rate = 0.05;
    SelectionMode selection_mode = SelectionMode::Standard;
    double elitism_fraction = 0.10;
    double parsimony_probability = 0.70;
    std::uint64_t seed = 0;
    int max_depth = 6;
    int init_depth = 3;
    std::size_t max_operators = 20;
    std::int64_t eval_budget_millis = kDefaultEvalBudgetMillis;
    std::size_t workers = 1;
    bool resplit_each_generation = false;

    // Called with both halves of every internal split before they are used
    // for evaluation.
    std::function<void(const Dataset&)> observe_eval_data;
};

// Throws Error(Usage) on an invalid configuration.
void check_config(const GpConfig& cfg);

struct GenerationStats {
    std::size_t generation = 0;
    double best_accuracy = 0.0;   // population best (running best for random search)
    double median_accuracy = 0.0;
    double median_size = 0.0;
    std::size_t evaluations = 0;  // evaluations in this generation
    std::int64_t elapsed_millis = 0;
};

struct RunResult {
    std::optional<Individual> best;
    std::vector<GenerationStats> history;
    std::size_t total_evaluations = 0;
    std::vector<Individual> pareto_front; // Pareto mode only
    std::uint64_t seed = 0;
    SelectionMode mode = SelectionMode::Standard;
};

RunResult evolve_run(const GpConfig& cfg, const Dataset& data);
RunResult random_search_run(const GpConfig& cfg, const Dataset& data);
// Dispatches on cfg.selection_mode.
RunResult run_search(const GpConfig& cfg, const Dataset& data);

// Run document ("tpot-run/1"). Timing fields are included only when
// `with_timing` is set.
std::string run_to_json(const RunResult& run, bool with_timing);
RunResult run_from_json(const std::string& text);

} // namespace tpot
