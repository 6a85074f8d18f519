#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "error.hpp"
#include "evolve.hpp"

namespace tpot {

namespace {

bool succeeded(const Individual& ind) { return ind.fitness && !ind.fitness->failed; }

// Tournament fitness: failed and unevaluated individuals sit below every
// succeeded one, including those with accuracy 0.
double score(const Individual& ind) { return succeeded(ind) ? ind.fitness->balanced_accuracy : -1.0; }

std::size_t size_key(const Individual& ind) { return ind.pipeline.size(); }

} // namespace

bool better_overall(const Individual& a, const Individual& b)
{
    const double sa = score(a);
    const double sb = score(b);
    if (sa != sb) {
        return sa > sb;
    }
    if (size_key(a) != size_key(b)) {
        return size_key(a) < size_key(b);
    }
    return a.discovery < b.discovery;
}

bool dominates(const Objectives& a, const Objectives& b)
{
    return a.accuracy >= b.accuracy && a.size <= b.size && (a.accuracy > b.accuracy || a.size < b.size);
}

FrontSort fast_nondominated_sort(std::span<const Objectives> points)
{
    const std::size_t n = points.size();
    FrontSort out;
    out.crowding.assign(n, 0.0);
    std::vector<std::vector<std::size_t>> dominated(n);
    std::vector<std::size_t> count(n, 0);
    std::vector<std::size_t> current;
    for (std::size_t p = 0; p < n; ++p) {
        for (std::size_t q = 0; q < n; ++q) {
            if (dominates(points[p], points[q])) {
                dominated[p].push_back(q);
            } else if (dominates(points[q], points[p])) {
                ++count[p];
            }
        }
        if (count[p] == 0) {
            current.push_back(p);
        }
    }
    while (!current.empty()) {
        std::vector<std::size_t> next;
        for (auto p : current) {
            for (auto q : dominated[p]) {
                if (--count[q] == 0) {
                    next.push_back(q);
                }
            }
        }
        std::sort(next.begin(), next.end());
        out.fronts.push_back(std::move(current));
        current = std::move(next);
    }

    constexpr double inf = std::numeric_limits<double>::infinity();
    for (const auto& front : out.fronts) {
        for (int objective = 0; objective < 2; ++objective) {
            auto value = [&](std::size_t i) { return objective == 0 ? points[i].accuracy : points[i].size; };
            std::vector<std::size_t> order(front);
            std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return value(a) < value(b); });
            const double lo = value(order.front());
            const double hi = value(order.back());
            // A degenerate spread contributes nothing, so fronts of
            // duplicates keep finite distances.
            if (!(hi > lo)) {
                continue;
            }
            out.crowding[order.front()] = inf;
            out.crowding[order.back()] = inf;
            for (std::size_t k = 1; k + 1 < order.size(); ++k) {
                out.crowding[order[k]] += (value(order[k + 1]) - value(order[k - 1])) / (hi - lo);
            }
        }
    }
    return out;
}

namespace {

std::size_t tournament(std::span<const Individual> pop, Rng& rng, std::size_t k)
{
    std::size_t best = uniform_index(rng, pop.size());
    for (std::size_t t = 1; t < k; ++t) {
        const std::size_t c = uniform_index(rng, pop.size());
        if (score(pop[c]) > score(pop[best])) {
            best = c;
        }
    }
    return best;
}

} // namespace

std::size_t double_tournament(std::span<const Individual> pop, Rng& rng, const SelectionParams& params)
{
    require(!pop.empty(), ErrorKind::Contract, "tournament on an empty population");
    const std::size_t a = tournament(pop, rng, params.tournament_size);
    const std::size_t b = tournament(pop, rng, params.tournament_size);
    if (bernoulli(rng, params.parsimony_probability)) {
        return size_key(pop[b]) < size_key(pop[a]) ? b : a;
    }
    return score(pop[b]) > score(pop[a]) ? b : a;
}

Selection select_standard(std::span<const Individual> pop, Rng& rng, const SelectionParams& params)
{
    const std::size_t n = pop.size();
    Selection out;
    if (n == 0) {
        return out;
    }
    out.elites = std::clamp<std::size_t>(static_cast<std::size_t>(std::llround(params.elitism_fraction * static_cast<double>(n))),
        1, n);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return better_overall(pop[a], pop[b]); });
    for (std::size_t i = 0; i < out.elites; ++i) {
        out.chosen.push_back(pop[order[i]]);
    }
    while (out.chosen.size() < n) {
        out.chosen.push_back(pop[double_tournament(pop, rng, params)]);
    }
    return out;
}

Selection select_pareto(std::span<const Individual> pop, const SelectionParams& params)
{
    const std::size_t n = pop.size();
    Selection out;
    if (n == 0) {
        return out;
    }
    std::vector<std::size_t> ok;
    std::vector<std::size_t> failed;
    for (std::size_t i = 0; i < n; ++i) {
        (succeeded(pop[i]) ? ok : failed).push_back(i);
    }
    std::vector<Objectives> points;
    for (auto i : ok) {
        points.push_back({ pop[i].fitness->balanced_accuracy, static_cast<double>(size_key(pop[i])) });
    }
    auto sorted = fast_nondominated_sort(points);
    std::vector<std::size_t> ranking;
    for (auto front : sorted.fronts) {
        std::stable_sort(front.begin(), front.end(),
            [&](auto a, auto b) { return sorted.crowding[a] > sorted.crowding[b]; });
        for (auto local : front) {
            ranking.push_back(ok[local]);
        }
    }
    std::stable_sort(failed.begin(), failed.end(), [&](auto a, auto b) { return size_key(pop[a]) < size_key(pop[b]); });
    ranking.insert(ranking.end(), failed.begin(), failed.end());

    const auto parents = std::clamp<std::size_t>(
        static_cast<std::size_t>(std::ceil(params.pareto_fraction * static_cast<double>(n) - 1e-9)), 1, n);
    for (std::size_t i = 0; i < n; ++i) {
        out.chosen.push_back(pop[ranking[i % parents]]);
    }
    return out;
}

} // namespace tpot
