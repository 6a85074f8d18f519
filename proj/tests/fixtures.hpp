#pragma once

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "dataset.hpp"
#include "rng.hpp"

namespace fixtures {

// Builds a dataset from row-major values with names x0, x1, ...
inline tpot::Dataset from_rows(const std::vector<std::vector<double>>& rows, tpot::LabelVector labels, int classes)
{
    const std::size_t n = rows.size();
    const std::size_t m = n == 0 ? 0 : rows[0].size();
    std::vector<std::string> names;
    for (std::size_t j = 0; j < m; ++j) {
        names.push_back("x" + std::to_string(j));
    }
    std::vector<double> values(n * m);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
            values[j * n + i] = rows[i][j];
        }
    }
    return { names, values, std::move(labels), classes };
}

// Gaussian blobs: class c centred at (sep * c) on every axis.
inline tpot::Dataset blobs(std::size_t per_class, std::size_t m, int classes, double sep, std::uint64_t seed)
{
    auto rng = tpot::make_rng(seed);
    std::normal_distribution<double> noise(0.0, 1.0);
    std::vector<std::vector<double>> rows;
    tpot::LabelVector labels;
    for (int c = 0; c < classes; ++c) {
        for (std::size_t i = 0; i < per_class; ++i) {
            std::vector<double> r(m);
            for (auto& v : r) {
                v = sep * c + noise(rng);
            }
            rows.push_back(r);
            labels.push_back(c);
        }
    }
    return from_rows(rows, labels, classes);
}

} // namespace fixtures
