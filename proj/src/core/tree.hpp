#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "dataset.hpp"
#include "deadline.hpp"
#include "rng.hpp"

namespace tpot::tree {

// Sorted distinct values and per-row ranks for every feature. Built once per
// fit and shared by all trees of an ensemble or boosting run.
class FeatureRanks {
public:
    explicit FeatureRanks(const Dataset& ds);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return distinct_.size(); }
    std::span<const double> distinct(std::size_t j) const { return distinct_[j]; }
    std::span<const std::uint32_t> ranks(std::size_t j) const { return { ranks_.data() + j * rows_, rows_ }; }

private:
    std::size_t rows_ = 0;
    std::vector<std::vector<double>> distinct_;
    std::vector<std::uint32_t> ranks_;
};

struct Node {
    std::int32_t feature = -1; // -1 marks a leaf
    double threshold = 0.0;    // x <= threshold goes left
    std::int32_t left = -1;
    std::int32_t right = -1;
    double value = 0.0;        // leaf output (class id for classifiers)
};

class Tree {
public:
    Tree() = default;
    explicit Tree(std::vector<Node> nodes) : nodes_(std::move(nodes)) {}

    double predict(const Dataset& ds, std::size_t row) const;
    std::size_t leaf_index(const Dataset& ds, std::size_t row) const;

    const std::vector<Node>& nodes() const noexcept { return nodes_; }
    std::vector<Node>& nodes() noexcept { return nodes_; }

private:
    std::vector<Node> nodes_;
};

struct GrowOptions {
    int max_depth = 0;          // 0 = grow until pure / unsplittable
    std::size_t max_features = 0; // features tried per split; 0 = all
    std::size_t min_samples_split = 2;
    double min_gain = 0.0;      // splits with gain <= min_gain are rejected when min_gain > 0
};

// Classification tree with Gini impurity. `rows` may contain repeats
// (bootstrap samples). Leaves predict the majority class, lowest id on ties.
Tree grow_classifier(const FeatureRanks& ranks,
    std::span<const Label> labels,
    int class_count,
    std::vector<std::uint32_t> rows,
    const GrowOptions& opts,
    Rng* rng,
    const Deadline& deadline);

// Least-squares regression tree on `targets`; leaf values come from
// `leaf_value(rows_in_leaf)`.
Tree grow_regressor(const FeatureRanks& ranks,
    std::span<const double> targets,
    std::vector<std::uint32_t> rows,
    const GrowOptions& opts,
    const std::function<double(std::span<const std::uint32_t>)>& leaf_value,
    const Deadline& deadline);

} // namespace tpot::tree
