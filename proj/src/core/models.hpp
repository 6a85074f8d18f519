#pragma once

#include <cstdint>
#include <span>
#include <variant>
#include <vector>

#include "dataset.hpp"
#include "deadline.hpp"
#include "linear.hpp"
#include "operators.hpp"
#include "tree.hpp"

namespace tpot {

struct TreeState {
    tree::Tree tree;
};

struct ForestState {
    std::vector<tree::Tree> trees;
};

struct BoostState {
    double learning_rate = 0.1;
    std::vector<double> init;                // per raw score (1 for binary, K otherwise)
    std::vector<std::vector<tree::Tree>> stages;
    std::vector<double> shrink;              // effective step of each stage
    std::vector<double> train_loss;          // loss before stage 1, then after each stage
};

struct KnnState {
    std::size_t k = 1;
    std::vector<double> rows; // training rows, row-major
    LabelVector labels;
};

struct FittedModel {
    OperatorKind kind {};
    ParamVector params;
    std::size_t input_width = 0;
    int class_count = 0;
    std::variant<TreeState, ForestState, BoostState, linear::Weights, KnnState> state;
};

// Trains a classifier on `train`. Every class 0..C-1 must have at least one
// row. `seed` drives bootstrap and feature subsampling.
FittedModel train_model(OperatorKind kind,
    const ParamVector& params,
    const Dataset& train,
    std::uint64_t seed = 0,
    const Deadline& deadline = {});

LabelVector predict(const FittedModel& model, const Dataset& ds, const Deadline& deadline = {});

// Index of the largest count; the lowest index wins ties.
Label vote(std::span<const double> counts);

// Multinomial log loss per boosting stage on the training fold; empty for
// other kinds.
const std::vector<double>& boosting_train_loss(const FittedModel& model);

inline constexpr int kLogisticIterations = 300;
inline constexpr int kSvmIterations = 300;

} // namespace tpot
