#include "tpot/tpot.h"

#include <algorithm>
#include <cstring>
#include <new>
#include <string>

#include "datagen.hpp"
#include "error.hpp"
#include "evolve.hpp"
#include "harness.hpp"

struct tpot_dataset {
    tpot::Dataset data;
};

struct tpot_run {
    tpot::RunResult run;
};

namespace {

thread_local std::string last_error;

tpot_status status_of(tpot::ErrorKind kind)
{
    using tpot::ErrorKind;
    switch (kind) {
    case ErrorKind::Usage: return TPOT_ERR_USAGE;
    case ErrorKind::Parse: return TPOT_ERR_PARSE;
    case ErrorKind::Schema: return TPOT_ERR_SCHEMA;
    case ErrorKind::Io: return TPOT_ERR_IO;
    case ErrorKind::GenerationFailed:
    case ErrorKind::UndefinedHeritability: return TPOT_ERR_GENERATION;
    case ErrorKind::Training:
    case ErrorKind::DegenerateOutput: return TPOT_ERR_TRAINING;
    case ErrorKind::BudgetExceeded: return TPOT_ERR_BUDGET;
    case ErrorKind::Contract:
    case ErrorKind::SplitInfeasible:
    case ErrorKind::IncompatibleCombine:
    case ErrorKind::NoGuess:
    case ErrorKind::Shape: return TPOT_ERR_DATA;
    }
    return TPOT_ERR_INTERNAL;
}

template <class F>
tpot_status guarded(F&& f)
{
    last_error.clear();
    try {
        f();
        return TPOT_OK;
    } catch (const tpot::Error& e) {
        last_error = e.what();
        return status_of(e.kind());
    } catch (const std::bad_alloc&) {
        last_error = "out of memory";
    } catch (const std::exception& e) {
        last_error = e.what();
    }
    return TPOT_ERR_INTERNAL;
}

tpot_status invalid(const char* what)
{
    last_error = what;
    return TPOT_ERR_INVALID_ARGUMENT;
}

char* dup_string(const std::string& s)
{
    auto* out = new char[s.size() + 1];
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

tpot::GpConfig to_config(const tpot_gp_config& c)
{
    tpot::GpConfig cfg;
    cfg.population_size = c.population_size;
    cfg.generations = c.generations;
    cfg.mutation_rate = c.mutation_rate;
    cfg.crossover_rate = c.crossover_rate;
    switch (c.mode) {
    case TPOT_MODE_STANDARD: cfg.selection_mode = tpot::SelectionMode::Standard; break;
    case TPOT_MODE_PARETO: cfg.selection_mode = tpot::SelectionMode::Pareto; break;
    case TPOT_MODE_RANDOM: cfg.selection_mode = tpot::SelectionMode::RandomSearch; break;
    default: tpot::fail(tpot::ErrorKind::Usage, "unknown search mode");
    }
    cfg.elitism_fraction = c.elitism_fraction;
    cfg.parsimony_probability = c.parsimony_probability;
    cfg.seed = c.seed;
    cfg.max_depth = c.max_depth;
    cfg.init_depth = c.init_depth;
    cfg.max_operators = c.max_operators;
    cfg.eval_budget_millis = c.eval_budget_millis;
    cfg.workers = c.workers;
    cfg.resplit_each_generation = c.resplit_each_generation != 0;
    return cfg;
}

} // namespace

extern "C" {

const char* tpot_version(void) { return "0.1.0"; }

const char* tpot_last_error(void) { return last_error.c_str(); }

const char* tpot_status_name(tpot_status status)
{
    switch (status) {
    case TPOT_OK: return "ok";
    case TPOT_ERR_INVALID_ARGUMENT: return "invalid-argument";
    case TPOT_ERR_USAGE: return "usage";
    case TPOT_ERR_PARSE: return "parse";
    case TPOT_ERR_SCHEMA: return "schema";
    case TPOT_ERR_IO: return "io";
    case TPOT_ERR_DATA: return "data";
    case TPOT_ERR_GENERATION: return "generation-failed";
    case TPOT_ERR_TRAINING: return "training";
    case TPOT_ERR_BUDGET: return "budget-exceeded";
    case TPOT_ERR_INTERNAL: return "internal";
    }
    return "unknown";
}

void tpot_string_free(char* s) { delete[] s; }

tpot_status tpot_dataset_load_csv(const char* path, const char* label_column, tpot_dataset** out)
{
    if (!path || !out) {
        return invalid("path and out are required");
    }
    return guarded([&] {
        auto loaded = tpot::load_csv(path, label_column ? label_column : "class");
        *out = new tpot_dataset { std::move(loaded.data) };
    });
}

tpot_status tpot_dataset_write_csv(const tpot_dataset* ds, const char* path)
{
    if (!ds || !path) {
        return invalid("dataset and path are required");
    }
    return guarded([&] { tpot::write_csv(ds->data, path); });
}

size_t tpot_dataset_rows(const tpot_dataset* ds) { return ds ? ds->data.rows() : 0; }
size_t tpot_dataset_cols(const tpot_dataset* ds) { return ds ? ds->data.cols() : 0; }
int tpot_dataset_classes(const tpot_dataset* ds) { return ds ? ds->data.class_count() : 0; }

tpot_status tpot_dataset_copy_values(const tpot_dataset* ds, double* buf, size_t len)
{
    if (!ds || !buf) {
        return invalid("dataset and buffer are required");
    }
    const auto& d = ds->data;
    if (len < d.rows() * d.cols()) {
        return invalid("buffer too small");
    }
    for (std::size_t i = 0; i < d.rows(); ++i) {
        for (std::size_t j = 0; j < d.cols(); ++j) {
            buf[i * d.cols() + j] = d.at(i, j);
        }
    }
    return TPOT_OK;
}

tpot_status tpot_dataset_copy_labels(const tpot_dataset* ds, int32_t* buf, size_t len)
{
    if (!ds || !buf) {
        return invalid("dataset and buffer are required");
    }
    if (len < ds->data.rows()) {
        return invalid("buffer too small");
    }
    std::copy(ds->data.labels().begin(), ds->data.labels().end(), buf);
    return TPOT_OK;
}

void tpot_dataset_free(tpot_dataset* ds) { delete ds; }

void tpot_epistasis_params_default(tpot_epistasis_params* p)
{
    if (!p) {
        return;
    }
    const tpot::EpistasisSpec s;
    *p = { s.heritability, s.maf, s.n_models, s.noise_snps, s.sample_size, s.tolerance };
}

tpot_status tpot_generate_epistasis(const tpot_epistasis_params* p, uint64_t seed, tpot_dataset** out,
    char** metadata_json)
{
    if (!p || !out) {
        return invalid("params and out are required");
    }
    return guarded([&] {
        tpot::EpistasisSpec s;
        s.heritability = p->heritability;
        s.maf = p->maf;
        s.n_models = p->models;
        s.predictive_snps = 2 * p->models;
        s.noise_snps = p->noise_snps;
        s.sample_size = p->sample_size;
        s.tolerance = p->tolerance;
        tpot::Rng rng = tpot::make_rng(seed);
        auto d = tpot::simulate_epistatic_dataset(s, rng);
        std::string meta = metadata_json ? tpot::epistasis_metadata_json(s, d, seed) : std::string();
        *out = new tpot_dataset { std::move(d.data) };
        if (metadata_json) {
            *metadata_json = dup_string(meta);
        }
    });
}

void tpot_hill_valley_params_default(tpot_hill_valley_params* p)
{
    if (!p) {
        return;
    }
    const tpot::HillValleySpec s;
    *p = { s.n_samples, s.series_length, s.noise_std };
}

tpot_status tpot_generate_hill_valley(const tpot_hill_valley_params* p, uint64_t seed, tpot_dataset** out)
{
    if (!p || !out) {
        return invalid("params and out are required");
    }
    return guarded([&] {
        tpot::HillValleySpec s;
        s.n_samples = p->samples;
        s.series_length = p->length;
        s.noise_std = p->noise_std;
        tpot::Rng rng = tpot::make_rng(seed);
        *out = new tpot_dataset { tpot::generate_hill_valley(s, rng) };
    });
}

void tpot_gp_config_default(tpot_gp_config* cfg)
{
    if (!cfg) {
        return;
    }
    const tpot::GpConfig d;
    *cfg = { d.population_size, d.generations, d.mutation_rate, d.crossover_rate, TPOT_MODE_STANDARD,
        d.elitism_fraction, d.parsimony_probability, d.seed, d.max_depth, d.init_depth, d.max_operators,
        d.eval_budget_millis, d.workers, d.resplit_each_generation ? 1 : 0 };
}

tpot_status tpot_search(const tpot_dataset* ds, const tpot_gp_config* cfg, tpot_run** out)
{
    if (!ds || !cfg || !out) {
        return invalid("dataset, config and out are required");
    }
    return guarded([&] {
        const auto c = to_config(*cfg);
        tpot::check_config(c);
        *out = new tpot_run { tpot::run_search(c, ds->data) };
    });
}

tpot_status tpot_run_best(const tpot_run* run, int* has_best, double* accuracy, size_t* size)
{
    if (!run || !has_best) {
        return invalid("run and has_best are required");
    }
    const auto& best = run->run.best;
    const bool ok = best && best->fitness && !best->fitness->failed;
    *has_best = ok ? 1 : 0;
    if (accuracy) {
        *accuracy = ok ? best->fitness->balanced_accuracy : 0.0;
    }
    if (size) {
        *size = ok ? best->pipeline.size() : 0;
    }
    return TPOT_OK;
}

size_t tpot_run_evaluations(const tpot_run* run) { return run ? run->run.total_evaluations : 0; }
size_t tpot_run_generations(const tpot_run* run) { return run ? run->run.history.size() : 0; }

tpot_status tpot_run_render_best(const tpot_run* run, char** out)
{
    if (!run || !out) {
        return invalid("run and out are required");
    }
    return guarded([&] {
        tpot::require(run->run.best.has_value(), tpot::ErrorKind::Contract, "run has no best individual");
        *out = dup_string(tpot::render(run->run.best->pipeline));
    });
}

tpot_status tpot_run_to_json(const tpot_run* run, int with_timing, char** out)
{
    if (!run || !out) {
        return invalid("run and out are required");
    }
    return guarded([&] { *out = dup_string(tpot::run_to_json(run->run, with_timing != 0)); });
}

tpot_status tpot_run_from_json(const char* text, tpot_run** out)
{
    if (!text || !out) {
        return invalid("text and out are required");
    }
    return guarded([&] { *out = new tpot_run { tpot::run_from_json(text) }; });
}

tpot_status tpot_run_export(const tpot_run* run, const char* path)
{
    if (!run || !path) {
        return invalid("run and path are required");
    }
    return guarded([&] { tpot::export_pipeline(run->run, path); });
}

void tpot_run_free(tpot_run* run) { delete run; }

tpot_status tpot_rf_baseline(const tpot_dataset* ds, size_t trees, uint64_t seed, double* accuracy)
{
    if (!ds || !accuracy) {
        return invalid("dataset and accuracy are required");
    }
    if (trees == 0) {
        return invalid("trees must be at least 1");
    }
    return guarded([&] { *accuracy = tpot::run_rf_baseline(ds->data, seed, trees).accuracy; });
}

tpot_status tpot_bench(const char* spec_json, size_t workers, const char* output_dir, char** report_json)
{
    if (!spec_json) {
        return invalid("spec document is required");
    }
    return guarded([&] {
        auto spec = tpot::experiment_from_json(spec_json);
        if (workers > 0) {
            spec.workers = workers;
        }
        if (output_dir) {
            spec.output_dir = output_dir;
        }
        const auto report = tpot::run_experiment(spec);
        if (report_json) {
            *report_json = dup_string(tpot::report_to_json(report));
        }
    });
}

} // extern "C"
