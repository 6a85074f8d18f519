#include "evolve.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <thread>

#include <json.hpp>

#include "error.hpp"

namespace tpot {

std::string_view name_of(SelectionMode mode) noexcept
{
    switch (mode) {
    case SelectionMode::Standard: return "standard";
    case SelectionMode::Pareto: return "pareto";
    case SelectionMode::RandomSearch: return "random";
    }
    return "?";
}

std::optional<SelectionMode> mode_from_name(std::string_view name) noexcept
{
    for (auto m : { SelectionMode::Standard, SelectionMode::Pareto, SelectionMode::RandomSearch }) {
        if (name_of(m) == name) {
            return m;
        }
    }
    return std::nullopt;
}

void check_config(const GpConfig& cfg)
{
    auto usage = [](bool ok, const char* what) { require(ok, ErrorKind::Usage, what); };
    usage(cfg.population_size >= 1, "population_size must be at least 1");
    usage(cfg.mutation_rate >= 0 && cfg.crossover_rate >= 0, "variation rates must be non-negative");
    usage(cfg.mutation_rate + cfg.crossover_rate <= 1.0 + 1e-12, "mutation_rate + crossover_rate must not exceed 1");
    usage(cfg.elitism_fraction > 0 && cfg.elitism_fraction < 1, "elitism_fraction must lie in (0, 1)");
    usage(cfg.parsimony_probability >= 0 && cfg.parsimony_probability <= 1, "parsimony probability must lie in [0, 1]");
    usage(cfg.max_depth >= 1 && cfg.init_depth >= 1, "depth limits must be at least 1");
    usage(cfg.init_depth <= cfg.max_depth, "init_depth must not exceed max_depth");
    usage(cfg.max_operators >= 1, "max_operators must be at least 1");
    usage(cfg.eval_budget_millis >= 0, "eval_budget_millis must be non-negative (0 = unbounded)");
    usage(cfg.workers >= 1, "workers must be at least 1");
}

namespace {

using Clock = std::chrono::steady_clock;

std::int64_t millis_since(Clock::time_point t0)
{
    return std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - t0).count();
}

double median(std::vector<double> v)
{
    if (v.empty()) {
        return 0.0;
    }
    std::sort(v.begin(), v.end());
    const std::size_t h = v.size() / 2;
    return v.size() % 2 == 1 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

constexpr std::uint64_t kSplitStream = 0x5b11;
constexpr std::uint64_t kInitStream = 0x1417;
constexpr std::uint64_t kEvalStream = 0xe7a1;
constexpr std::uint64_t kVaryStream = 0x7a41;

class Search {
public:
    Search(const GpConfig& cfg, const Dataset& data)
        : cfg_(cfg)
        , data_(data)
    {
        check_config(cfg);
        resplit(0);
        result_.seed = cfg.seed;
        result_.mode = cfg.selection_mode;
        start_ = Clock::now();
    }

    void resplit(std::size_t generation)
    {
        split_ = stratified_split(data_, kInternalTrainFraction, derive_seed(cfg_.seed, { kSplitStream, generation }));
        if (cfg_.observe_eval_data) {
            cfg_.observe_eval_data(split_.train);
            cfg_.observe_eval_data(split_.test);
        }
    }

    // Evaluates every individual without fitness; results do not depend on
    // the worker count.
    std::size_t evaluate(std::vector<Individual>& pop, std::size_t generation)
    {
        std::vector<std::size_t> todo;
        for (std::size_t i = 0; i < pop.size(); ++i) {
            if (!pop[i].fitness) {
                todo.push_back(i);
            }
        }
        auto work = [&](std::size_t k) {
            const auto i = todo[k];
            pop[i].fitness = evaluate_on_split(pop[i].pipeline, split_,
                derive_seed(cfg_.seed, { kEvalStream, generation, i }), cfg_.eval_budget_millis);
        };
        const std::size_t workers = std::min(std::max<std::size_t>(cfg_.workers, 1), todo.size());
        if (workers <= 1) {
            for (std::size_t k = 0; k < todo.size(); ++k) {
                work(k);
            }
        } else {
            std::atomic<std::size_t> next { 0 };
            std::vector<std::thread> threads;
            for (std::size_t w = 0; w < workers; ++w) {
                threads.emplace_back([&] {
                    for (std::size_t k = next++; k < todo.size(); k = next++) {
                        work(k);
                    }
                });
            }
            for (auto& t : threads) {
                t.join();
            }
        }
        for (auto i : todo) {
            pop[i].discovery = discovered_++;
            consider(pop[i]);
        }
        result_.total_evaluations += todo.size();
        return todo.size();
    }

    void consider(const Individual& ind)
    {
        if (!result_.best || better_overall(ind, *result_.best)) {
            result_.best = ind;
        }
        if (cfg_.selection_mode == SelectionMode::Pareto && ind.fitness && !ind.fitness->failed) {
            archive_.push_back(ind);
        }
    }

    void record(const std::vector<Individual>& pop, std::size_t generation, std::size_t evaluations, bool running_best)
    {
        GenerationStats s;
        s.generation = generation;
        std::vector<double> acc;
        std::vector<double> sizes;
        double best = 0.0;
        for (const auto& ind : pop) {
            const double a = ind.fitness && !ind.fitness->failed ? ind.fitness->balanced_accuracy : 0.0;
            acc.push_back(a);
            sizes.push_back(static_cast<double>(ind.pipeline.size()));
            best = std::max(best, a);
        }
        if (running_best && result_.best && result_.best->fitness && !result_.best->fitness->failed) {
            best = result_.best->fitness->balanced_accuracy;
        }
        s.best_accuracy = best;
        s.median_accuracy = median(acc);
        s.median_size = median(sizes);
        s.evaluations = evaluations;
        s.elapsed_millis = millis_since(start_);
        result_.history.push_back(s);
    }

    RunResult finish()
    {
        if (cfg_.selection_mode == SelectionMode::Pareto) {
            std::vector<Objectives> pts;
            for (const auto& ind : archive_) {
                pts.push_back({ ind.fitness->balanced_accuracy, static_cast<double>(ind.pipeline.size()) });
            }
            if (!pts.empty()) {
                auto fronts = fast_nondominated_sort(pts);
                std::vector<Individual> front;
                for (auto i : fronts.fronts.front()) {
                    front.push_back(archive_[i]);
                }
                std::sort(front.begin(), front.end(), [](const auto& a, const auto& b) { return better_overall(a, b); });
                // one representative per objective pair: the earliest found
                std::vector<Individual> unique;
                for (auto& ind : front) {
                    const bool seen = std::any_of(unique.begin(), unique.end(), [&](const auto& u) {
                        return u.fitness->balanced_accuracy == ind.fitness->balanced_accuracy
                            && u.pipeline.size() == ind.pipeline.size();
                    });
                    if (!seen) {
                        unique.push_back(std::move(ind));
                    }
                }
                result_.pareto_front = std::move(unique);
            }
        }
        return std::move(result_);
    }

    const GpConfig& cfg_;
    const Dataset& data_;
    SplitPair split_;
    RunResult result_;
    std::vector<Individual> archive_;
    std::uint64_t discovered_ = 0;
    Clock::time_point start_;
};

} // namespace

RunResult evolve_run(const GpConfig& cfg, const Dataset& data)
{
    if (cfg.selection_mode == SelectionMode::RandomSearch) {
        return random_search_run(cfg, data);
    }
    Search search(cfg, data);
    const PipelineLimits limits { cfg.max_depth, cfg.max_operators };
    auto init_rng = make_rng(derive_seed(cfg.seed, { kInitStream }));
    auto vary_rng = make_rng(derive_seed(cfg.seed, { kVaryStream }));
    SelectionParams sel;
    sel.elitism_fraction = cfg.elitism_fraction;
    sel.parsimony_probability = cfg.parsimony_probability;

    std::vector<Individual> pop;
    for (std::size_t i = 0; i < cfg.population_size; ++i) {
        pop.push_back({ random_pipeline(init_rng, cfg.init_depth, cfg.max_operators), std::nullopt, 0 });
    }
    for (std::size_t gen = 0;; ++gen) {
        if (cfg.resplit_each_generation && gen > 0) {
            search.resplit(gen);
            for (auto& ind : pop) {
                ind.fitness.reset();
            }
        }
        const auto evaluated = search.evaluate(pop, gen);
        search.record(pop, gen, evaluated, false);
        if (gen == cfg.generations) {
            break;
        }
        Selection selected = cfg.selection_mode == SelectionMode::Pareto ? select_pareto(pop, sel)
                                                                         : select_standard(pop, vary_rng, sel);
        const std::vector<Individual> pool = selected.chosen;
        std::vector<Individual> next = std::move(selected.chosen);
        for (std::size_t i = selected.elites; i < next.size(); ++i) {
            const double r = uniform01(vary_rng);
            Pipeline child;
            if (r < cfg.mutation_rate) {
                child = mutate(next[i].pipeline, vary_rng, limits);
            } else if (r < cfg.mutation_rate + cfg.crossover_rate) {
                const auto& partner = pool[uniform_index(vary_rng, pool.size())];
                child = crossover(next[i].pipeline, partner.pipeline, vary_rng, limits);
            } else {
                continue; // reproduction keeps the known fitness
            }
            if (!(child == next[i].pipeline)) {
                next[i] = { std::move(child), std::nullopt, 0 };
            }
        }
        pop = std::move(next);
    }
    return search.finish();
}

RunResult random_search_run(const GpConfig& cfg, const Dataset& data)
{
    GpConfig random_cfg = cfg;
    random_cfg.selection_mode = SelectionMode::RandomSearch;
    Search search(random_cfg, data);
    auto rng = make_rng(derive_seed(cfg.seed, { kInitStream }));
    for (std::size_t gen = 0; gen < cfg.generations; ++gen) {
        std::vector<Individual> batch;
        for (std::size_t i = 0; i < cfg.population_size; ++i) {
            batch.push_back({ random_pipeline(rng, cfg.max_depth, cfg.max_operators), std::nullopt, 0 });
        }
        const auto evaluated = search.evaluate(batch, gen);
        search.record(batch, gen, evaluated, true);
    }
    return search.finish();
}

RunResult run_search(const GpConfig& cfg, const Dataset& data)
{
    return cfg.selection_mode == SelectionMode::RandomSearch ? random_search_run(cfg, data) : evolve_run(cfg, data);
}

namespace {

using Json = nlohmann::ordered_json;

Json individual_json(const Individual& ind, bool with_timing)
{
    Json j;
    j["pipeline"] = Json::parse(serialize(ind.pipeline));
    j["rendering"] = render(ind.pipeline);
    j["discovery"] = ind.discovery;
    if (ind.fitness) {
        Json f;
        f["balanced_accuracy"] = ind.fitness->balanced_accuracy;
        f["size"] = ind.fitness->size;
        f["failed"] = ind.fitness->failed;
        if (ind.fitness->failed) {
            f["error"] = ind.fitness->error;
        }
        if (with_timing) {
            f["eval_millis"] = ind.fitness->eval_millis;
        }
        j["fitness"] = std::move(f);
    } else {
        j["fitness"] = nullptr;
    }
    return j;
}

Individual individual_from(const Json& j)
{
    Individual ind;
    ind.pipeline = deserialize(j.at("pipeline").dump());
    ind.discovery = j.at("discovery").get<std::uint64_t>();
    if (!j.at("fitness").is_null()) {
        const auto& f = j.at("fitness");
        FitnessRecord r;
        r.balanced_accuracy = f.at("balanced_accuracy").get<double>();
        r.size = f.at("size").get<std::size_t>();
        r.failed = f.at("failed").get<bool>();
        r.error = f.value("error", std::string {});
        r.eval_millis = f.value("eval_millis", std::int64_t { 0 });
        ind.fitness = r;
    }
    return ind;
}

} // namespace

std::string run_to_json(const RunResult& run, bool with_timing)
{
    Json doc;
    doc["format"] = "tpot-run/1";
    doc["mode"] = std::string(name_of(run.mode));
    doc["seed"] = run.seed;
    doc["total_evaluations"] = run.total_evaluations;
    doc["best"] = run.best ? individual_json(*run.best, with_timing) : Json(nullptr);
    Json history = Json::array();
    for (const auto& g : run.history) {
        Json h;
        h["generation"] = g.generation;
        h["best_accuracy"] = g.best_accuracy;
        h["median_accuracy"] = g.median_accuracy;
        h["median_size"] = g.median_size;
        h["evaluations"] = g.evaluations;
        if (with_timing) {
            h["elapsed_millis"] = g.elapsed_millis;
        }
        history.push_back(std::move(h));
    }
    doc["history"] = std::move(history);
    Json front = Json::array();
    for (const auto& ind : run.pareto_front) {
        front.push_back(individual_json(ind, with_timing));
    }
    doc["pareto_front"] = std::move(front);
    return doc.dump(2) + "\n";
}

RunResult run_from_json(const std::string& text)
{
    try {
        const auto doc = Json::parse(text);
        require(doc.at("format") == "tpot-run/1", ErrorKind::Parse, "run document: expected version tag \"tpot-run/1\"");
        RunResult run;
        const auto mode = mode_from_name(doc.at("mode").get<std::string>());
        require(mode.has_value(), ErrorKind::Parse, "run document: unknown mode");
        run.mode = *mode;
        run.seed = doc.at("seed").get<std::uint64_t>();
        run.total_evaluations = doc.at("total_evaluations").get<std::size_t>();
        if (!doc.at("best").is_null()) {
            run.best = individual_from(doc.at("best"));
        }
        for (const auto& h : doc.at("history")) {
            GenerationStats g;
            g.generation = h.at("generation").get<std::size_t>();
            g.best_accuracy = h.at("best_accuracy").get<double>();
            g.median_accuracy = h.at("median_accuracy").get<double>();
            g.median_size = h.at("median_size").get<double>();
            g.evaluations = h.at("evaluations").get<std::size_t>();
            g.elapsed_millis = h.value("elapsed_millis", std::int64_t { 0 });
            run.history.push_back(g);
        }
        for (const auto& ind : doc.at("pareto_front")) {
            run.pareto_front.push_back(individual_from(ind));
        }
        return run;
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::Parse, std::string("run document: ") + e.what());
    }
}

} // namespace tpot
