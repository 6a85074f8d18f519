#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace tpot {

using Label = std::int32_t;
using LabelVector = std::vector<Label>;

// Labeled numeric dataset. Values are stored column-major so that a column
// is a contiguous span; this matches Eigen's default layout and keeps
// per-feature statistics cache friendly.
class Dataset {
public:
    Dataset() = default;

    // Throws Error(Contract) when any invariant is violated.
    Dataset(std::vector<std::string> feature_names,
        std::vector<double> column_major_values,
        LabelVector labels,
        int class_count,
        std::optional<LabelVector> guess = std::nullopt);

    std::size_t rows() const noexcept { return labels_.size(); }
    std::size_t cols() const noexcept { return names_.size(); }
    int class_count() const noexcept { return class_count_; }

    const std::vector<std::string>& feature_names() const noexcept { return names_; }
    const LabelVector& labels() const noexcept { return labels_; }
    const std::optional<LabelVector>& guess() const noexcept { return guess_; }
    const std::vector<double>& values() const noexcept { return values_; }

    std::span<const double> column(std::size_t j) const
    {
        return { values_.data() + j * rows(), rows() };
    }
    double at(std::size_t row, std::size_t col) const { return values_[col * rows() + row]; }

    // Rows in the given order (duplicates allowed).
    Dataset select_rows(std::span<const std::size_t> rows) const;
    // Columns in the given order; guess and labels are kept.
    Dataset select_columns(std::span<const std::size_t> cols) const;
    // Same labels/guess with a new feature block.
    Dataset with_features(std::vector<std::string> names, std::vector<double> column_major_values) const;
    Dataset with_guess(std::optional<LabelVector> guess) const;

    bool operator==(const Dataset&) const = default;

private:
    std::vector<std::string> names_;
    std::vector<double> values_;
    LabelVector labels_;
    std::optional<LabelVector> guess_;
    int class_count_ = 0;
};

struct SplitPair {
    Dataset train;
    Dataset test;
};

// Per-class train counts used by stratified_split: the total is
// round(fraction * n), distributed by largest remainder and clamped so that
// every class with >= 2 rows lands in both halves.
std::vector<std::size_t> stratified_train_counts(std::span<const std::size_t> class_sizes, double train_fraction);

SplitPair stratified_split(const Dataset& ds, double train_fraction, std::uint64_t seed);

// Macro-averaged recall over the classes present in `truth`.
double balanced_accuracy(std::span<const Label> truth, std::span<const Label> preds);

// Feature union; on duplicate names the first occurrence wins.
Dataset combine(const Dataset& a, const Dataset& b);

// Returns `base` if unused, otherwise base_1, base_2, ...
std::string unique_name(const std::vector<std::string>& taken, const std::string& base);

Dataset push_guess_to_feature(const Dataset& ds, const std::string& tag);

// Row content hash over feature values and label.
std::uint64_t row_hash(const Dataset& ds, std::size_t row);

} // namespace tpot
