#pragma once

#include <cstdint>
#include <utility>
#include <variant>
#include <vector>

#include "dataset.hpp"
#include "deadline.hpp"
#include "operators.hpp"

namespace tpot {

struct ScaleState {
    std::vector<double> center;
    std::vector<double> scale; // 0 marks a column mapped to 0
};

struct PolynomialState {};

struct ProjectionState {
    std::vector<double> mean;
    std::vector<double> components; // m x k, column-major
    std::size_t k = 0;
};

struct SelectionState {
    std::vector<std::size_t> keep;
};

// Train-fitted transform. Applying it never touches labels or guess.
struct FittedTransform {
    OperatorKind kind {};
    ParamVector params;
    std::size_t input_width = 0;
    std::vector<std::string> output_names;
    std::variant<ScaleState, PolynomialState, ProjectionState, SelectionState> state;
};

// Fits on `train` only and returns the fitted transform together with the
// transformed training set. `seed` drives RandomizedPCA's sketch.
std::pair<FittedTransform, Dataset> fit_transform(OperatorKind kind,
    const ParamVector& params,
    const Dataset& train,
    std::uint64_t seed = 0,
    const Deadline& deadline = {});

Dataset apply_transform(const FittedTransform& t, const Dataset& ds, const Deadline& deadline = {});

// One-way ANOVA F statistic of every column against the labels. Constant
// columns score 0; zero within-class variance with class separation scores
// +inf.
std::vector<double> anova_f_scores(const Dataset& ds);

// Linear-interpolated quantile of an unsorted sample (q in [0,1]).
double quantile(std::vector<double> values, double q);

} // namespace tpot
