#include "dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>
#include <unordered_set>

#include "error.hpp"
#include "rng.hpp"

namespace tpot {

namespace {

void check_labels(const LabelVector& labels, int class_count, const char* what)
{
    for (auto l : labels) {
        require(l >= 0 && l < class_count, ErrorKind::Contract,
            std::string(what) + " value " + std::to_string(l) + " outside 0.." + std::to_string(class_count - 1));
    }
}

} // namespace

Dataset::Dataset(std::vector<std::string> feature_names,
    std::vector<double> column_major_values,
    LabelVector labels,
    int class_count,
    std::optional<LabelVector> guess)
    : names_(std::move(feature_names))
    , values_(std::move(column_major_values))
    , labels_(std::move(labels))
    , guess_(std::move(guess))
    , class_count_(class_count)
{
    require(class_count_ >= 2, ErrorKind::Contract, "dataset needs at least 2 classes");
    require(values_.size() == names_.size() * labels_.size(), ErrorKind::Contract,
        "value block does not match rows x columns");
    std::unordered_set<std::string> seen(names_.begin(), names_.end());
    require(seen.size() == names_.size(), ErrorKind::Contract, "feature names must be pairwise distinct");
    check_labels(labels_, class_count_, "label");
    if (guess_) {
        require(guess_->size() == labels_.size(), ErrorKind::Contract, "guess length differs from row count");
        check_labels(*guess_, class_count_, "guess");
    }
}

Dataset Dataset::select_rows(std::span<const std::size_t> rows) const
{
    const auto n = this->rows();
    const auto m = cols();
    std::vector<double> values(rows.size() * m);
    for (std::size_t j = 0; j < m; ++j) {
        const double* src = values_.data() + j * n;
        double* dst = values.data() + j * rows.size();
        for (std::size_t i = 0; i < rows.size(); ++i) {
            dst[i] = src[rows[i]];
        }
    }
    LabelVector labels(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        labels[i] = labels_[rows[i]];
    }
    std::optional<LabelVector> guess;
    if (guess_) {
        guess.emplace(rows.size());
        for (std::size_t i = 0; i < rows.size(); ++i) {
            (*guess)[i] = (*guess_)[rows[i]];
        }
    }
    Dataset out;
    out.names_ = names_;
    out.values_ = std::move(values);
    out.labels_ = std::move(labels);
    out.guess_ = std::move(guess);
    out.class_count_ = class_count_;
    return out;
}

Dataset Dataset::select_columns(std::span<const std::size_t> cols) const
{
    const auto n = rows();
    std::vector<std::string> names;
    std::vector<double> values;
    names.reserve(cols.size());
    values.reserve(cols.size() * n);
    for (auto j : cols) {
        require(j < this->cols(), ErrorKind::Shape, "column index out of range");
        names.push_back(names_[j]);
        auto c = column(j);
        values.insert(values.end(), c.begin(), c.end());
    }
    return with_features(std::move(names), std::move(values));
}

Dataset Dataset::with_features(std::vector<std::string> names, std::vector<double> column_major_values) const
{
    return Dataset(std::move(names), std::move(column_major_values), labels_, class_count_, guess_);
}

Dataset Dataset::with_guess(std::optional<LabelVector> guess) const
{
    Dataset out = *this;
    if (guess) {
        require(guess->size() == rows(), ErrorKind::Contract, "guess length differs from row count");
        check_labels(*guess, class_count_, "guess");
    }
    out.guess_ = std::move(guess);
    return out;
}

std::vector<std::size_t> stratified_train_counts(std::span<const std::size_t> class_sizes, double train_fraction)
{
    const std::size_t total = std::accumulate(class_sizes.begin(), class_sizes.end(), std::size_t { 0 });
    const auto target_total = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(total)));

    std::vector<std::size_t> counts(class_sizes.size());
    std::vector<std::pair<double, std::size_t>> remainders;
    std::size_t assigned = 0;
    for (std::size_t c = 0; c < class_sizes.size(); ++c) {
        const double exact = train_fraction * static_cast<double>(class_sizes[c]);
        counts[c] = static_cast<std::size_t>(std::floor(exact));
        assigned += counts[c];
        if (class_sizes[c] > 0) {
            remainders.emplace_back(exact - std::floor(exact), c);
        }
    }
    // largest remainder first, lower class id on ties
    std::stable_sort(remainders.begin(), remainders.end(),
        [](const auto& a, const auto& b) { return a.first > b.first; });
    for (std::size_t k = 0; assigned < target_total && k < remainders.size(); ++k) {
        ++counts[remainders[k].second];
        ++assigned;
    }
    for (std::size_t c = 0; c < class_sizes.size(); ++c) {
        if (class_sizes[c] >= 2) {
            counts[c] = std::clamp<std::size_t>(counts[c], 1, class_sizes[c] - 1);
        }
    }
    return counts;
}

SplitPair stratified_split(const Dataset& ds, double train_fraction, std::uint64_t seed)
{
    require(train_fraction > 0.0 && train_fraction < 1.0, ErrorKind::Contract, "train fraction must lie in (0,1)");
    const auto C = static_cast<std::size_t>(ds.class_count());
    std::vector<std::vector<std::size_t>> by_class(C);
    for (std::size_t i = 0; i < ds.rows(); ++i) {
        by_class[static_cast<std::size_t>(ds.labels()[i])].push_back(i);
    }
    std::vector<std::size_t> sizes(C);
    for (std::size_t c = 0; c < C; ++c) {
        sizes[c] = by_class[c].size();
        require(sizes[c] == 0 || sizes[c] >= 2, ErrorKind::SplitInfeasible,
            "class " + std::to_string(c) + " has fewer than 2 rows");
    }
    require(ds.rows() >= 2, ErrorKind::SplitInfeasible, "dataset has fewer than 2 rows");

    const auto counts = stratified_train_counts(sizes, train_fraction);
    std::vector<std::size_t> train_rows;
    std::vector<std::size_t> test_rows;
    for (std::size_t c = 0; c < C; ++c) {
        auto rng = make_rng(derive_seed(seed, { 0x5711, c }));
        auto& idx = by_class[c];
        std::shuffle(idx.begin(), idx.end(), rng);
        train_rows.insert(train_rows.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(counts[c]));
        test_rows.insert(test_rows.end(), idx.begin() + static_cast<std::ptrdiff_t>(counts[c]), idx.end());
    }
    // keep original row order within each half
    std::sort(train_rows.begin(), train_rows.end());
    std::sort(test_rows.begin(), test_rows.end());
    return { ds.select_rows(train_rows), ds.select_rows(test_rows) };
}

double balanced_accuracy(std::span<const Label> truth, std::span<const Label> preds)
{
    require(truth.size() == preds.size(), ErrorKind::Contract, "truth and prediction lengths differ");
    require(!truth.empty(), ErrorKind::Contract, "balanced accuracy of an empty vector");
    const auto max_label = *std::max_element(truth.begin(), truth.end());
    std::vector<std::size_t> total(static_cast<std::size_t>(max_label) + 1, 0);
    std::vector<std::size_t> correct(total.size(), 0);
    for (std::size_t i = 0; i < truth.size(); ++i) {
        require(truth[i] >= 0, ErrorKind::Contract, "negative label");
        const auto c = static_cast<std::size_t>(truth[i]);
        ++total[c];
        if (preds[i] == truth[i]) {
            ++correct[c];
        }
    }
    double sum = 0.0;
    std::size_t present = 0;
    for (std::size_t c = 0; c < total.size(); ++c) {
        if (total[c] > 0) {
            sum += static_cast<double>(correct[c]) / static_cast<double>(total[c]);
            ++present;
        }
    }
    return sum / static_cast<double>(present);
}

Dataset combine(const Dataset& a, const Dataset& b)
{
    require(a.rows() == b.rows(), ErrorKind::IncompatibleCombine, "combine: row counts differ");
    require(a.class_count() == b.class_count(), ErrorKind::IncompatibleCombine, "combine: class counts differ");
    require(a.labels() == b.labels(), ErrorKind::IncompatibleCombine, "combine: labels differ");

    std::vector<std::string> names = a.feature_names();
    std::vector<double> values = a.values();
    std::unordered_set<std::string> seen(names.begin(), names.end());
    for (std::size_t j = 0; j < b.cols(); ++j) {
        if (seen.insert(b.feature_names()[j]).second) {
            names.push_back(b.feature_names()[j]);
            auto c = b.column(j);
            values.insert(values.end(), c.begin(), c.end());
        }
    }
    auto guess = a.guess() ? a.guess() : b.guess();
    return Dataset(std::move(names), std::move(values), a.labels(), a.class_count(), std::move(guess));
}

std::string unique_name(const std::vector<std::string>& taken, const std::string& base)
{
    auto used = [&](const std::string& s) { return std::find(taken.begin(), taken.end(), s) != taken.end(); };
    if (!used(base)) {
        return base;
    }
    for (std::size_t k = 1;; ++k) {
        auto candidate = base + "_" + std::to_string(k);
        if (!used(candidate)) {
            return candidate;
        }
    }
}

Dataset push_guess_to_feature(const Dataset& ds, const std::string& tag)
{
    require(ds.guess().has_value(), ErrorKind::NoGuess, "dataset has no guess column");
    auto names = ds.feature_names();
    names.push_back(unique_name(names, tag));
    auto values = ds.values();
    for (auto g : *ds.guess()) {
        values.push_back(static_cast<double>(g));
    }
    return Dataset(std::move(names), std::move(values), ds.labels(), ds.class_count(), std::nullopt);
}

std::uint64_t row_hash(const Dataset& ds, std::size_t row)
{
    std::uint64_t h = mix64(static_cast<std::uint64_t>(ds.labels()[row]));
    for (std::size_t j = 0; j < ds.cols(); ++j) {
        double v = ds.at(row, j);
        if (v == 0.0) {
            v = 0.0; // fold -0.0
        }
        std::uint64_t bits = 0;
        std::memcpy(&bits, &v, sizeof bits);
        h = mix64(h ^ bits);
    }
    return h;
}

} // namespace tpot
