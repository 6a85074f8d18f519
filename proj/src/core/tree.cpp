#include "tree.hpp"

#include <algorithm>
#include <bit>
#include <numeric>

#include "error.hpp"

namespace tpot::tree {

FeatureRanks::FeatureRanks(const Dataset& ds)
    : rows_(ds.rows())
    , distinct_(ds.cols())
    , ranks_(ds.rows() * ds.cols())
{
    std::vector<std::uint32_t> order(rows_);
    for (std::size_t j = 0; j < ds.cols(); ++j) {
        auto col = ds.column(j);
        std::iota(order.begin(), order.end(), 0U);
        std::sort(order.begin(), order.end(), [&](auto a, auto b) { return col[a] < col[b]; });
        auto& uniq = distinct_[j];
        std::uint32_t* rank = ranks_.data() + j * rows_;
        for (auto i : order) {
            if (uniq.empty() || col[i] != uniq.back()) {
                uniq.push_back(col[i]);
            }
            rank[i] = static_cast<std::uint32_t>(uniq.size() - 1);
        }
    }
}

std::size_t Tree::leaf_index(const Dataset& ds, std::size_t row) const
{
    std::size_t k = 0;
    while (nodes_[k].feature >= 0) {
        const auto& n = nodes_[k];
        k = static_cast<std::size_t>(ds.at(row, static_cast<std::size_t>(n.feature)) <= n.threshold ? n.left : n.right);
    }
    return k;
}

double Tree::predict(const Dataset& ds, std::size_t row) const { return nodes_[leaf_index(ds, row)].value; }

namespace {

struct Work {
    std::size_t begin;
    std::size_t end;
    int depth;
    std::size_t node;
};

struct Split {
    bool found = false;
    std::size_t feature = 0;
    std::uint32_t rank = 0; // left side holds ranks <= rank
    double threshold = 0.0;
    double score = 0.0;
};

// Shared split search. Row statistics are W-dimensional sums accumulated by
// `add`; the split score is sum_k L_k^2 / n_L + sum_k R_k^2 / n_R, which is
// the Gini criterion for one-hot class targets and the squared-error
// criterion for scalar regression targets.
template <class AddFn>
class Grower {
public:
    Grower(const FeatureRanks& fr, std::size_t width, AddFn add, const GrowOptions& opts, Rng* rng,
        const Deadline& deadline)
        : fr_(fr)
        , W_(width)
        , add_(add)
        , opts_(opts)
        , rng_(rng)
        , deadline_(deadline)
        , features_(fr.cols())
        , parent_(width)
        , left_(width)
    {
        std::iota(features_.begin(), features_.end(), std::size_t { 0 });
        std::size_t max_distinct = 1;
        for (std::size_t j = 0; j < fr.cols(); ++j) {
            max_distinct = std::max(max_distinct, fr.distinct(j).size());
        }
        bucket_count_.resize(max_distinct);
        bucket_sum_.resize(max_distinct * width);
    }

    template <class LeafFn, class PureFn>
    Tree grow(std::vector<std::uint32_t> rows, LeafFn leaf, PureFn pure, bool require_positive_gain)
    {
        rows_ = std::move(rows);
        std::vector<Node> nodes(1);
        std::vector<Work> stack { { 0, rows_.size(), 0, 0 } };
        while (!stack.empty()) {
            deadline_.check();
            auto w = stack.back();
            stack.pop_back();
            const std::size_t n = w.end - w.begin;
            std::span<const std::uint32_t> node_rows(rows_.data() + w.begin, n);

            std::fill(parent_.begin(), parent_.end(), 0.0);
            for (auto r : node_rows) {
                add_(r, parent_.data());
            }
            const bool at_depth_cap = opts_.max_depth > 0 && w.depth >= opts_.max_depth;
            Split split;
            if (n >= std::max<std::size_t>(2, opts_.min_samples_split) && !at_depth_cap && !pure(parent_, n)) {
                split = best_split(w.begin, w.end);
                if (split.found) {
                    const double gain = split.score - score_of(parent_.data(), static_cast<double>(n));
                    if (require_positive_gain && gain <= 1e-12 * std::max(1.0, std::abs(split.score))) {
                        split.found = false;
                    }
                }
            }
            if (!split.found) {
                nodes[w.node].value = leaf(node_rows, parent_);
                continue;
            }
            auto ranks = fr_.ranks(split.feature);
            auto mid = std::partition(rows_.begin() + static_cast<std::ptrdiff_t>(w.begin),
                rows_.begin() + static_cast<std::ptrdiff_t>(w.end),
                [&](std::uint32_t r) { return ranks[r] <= split.rank; });
            const auto m = static_cast<std::size_t>(mid - rows_.begin());
            const auto left = nodes.size();
            nodes.push_back({});
            nodes.push_back({});
            auto& node = nodes[w.node];
            node.feature = static_cast<std::int32_t>(split.feature);
            node.threshold = split.threshold;
            node.left = static_cast<std::int32_t>(left);
            node.right = static_cast<std::int32_t>(left + 1);
            stack.push_back({ m, w.end, w.depth + 1, left + 1 });
            stack.push_back({ w.begin, m, w.depth + 1, left });
        }
        return Tree(std::move(nodes));
    }

private:
    double score_of(const double* s, double n) const
    {
        double acc = 0.0;
        for (std::size_t k = 0; k < W_; ++k) {
            acc += s[k] * s[k];
        }
        return acc / n;
    }

    // Evaluates the boundary between rank `lo` (last rank on the left) and
    // rank `hi` (first rank on the right).
    void consider(Split& best, std::size_t feature, std::uint32_t lo, std::uint32_t hi, double n_left, double n)
    {
        const double n_right = n - n_left;
        double right_sq = 0.0;
        double left_sq = 0.0;
        for (std::size_t k = 0; k < W_; ++k) {
            const double r = parent_[k] - left_[k];
            left_sq += left_[k] * left_[k];
            right_sq += r * r;
        }
        const double score = left_sq / n_left + right_sq / n_right;
        if (!best.found || score > best.score) {
            auto values = fr_.distinct(feature);
            double thr = 0.5 * (values[lo] + values[hi]);
            if (!(thr < values[hi])) {
                thr = values[lo];
            }
            best = { true, feature, lo, thr, score };
        }
    }

    void scan_feature(Split& best, std::size_t j, std::size_t begin, std::size_t end)
    {
        const auto distinct = fr_.distinct(j).size();
        if (distinct < 2) {
            return;
        }
        const std::size_t n = end - begin;
        auto ranks = fr_.ranks(j);
        std::fill(left_.begin(), left_.end(), 0.0);
        const auto log_n = static_cast<std::size_t>(std::bit_width(n));
        if (distinct <= n * std::max<std::size_t>(1, log_n)) {
            std::fill_n(bucket_count_.begin(), distinct, 0U);
            std::fill_n(bucket_sum_.begin(), distinct * W_, 0.0);
            for (std::size_t i = begin; i < end; ++i) {
                const auto r = ranks[rows_[i]];
                ++bucket_count_[r];
                add_(rows_[i], bucket_sum_.data() + r * W_);
            }
            double n_left = 0.0;
            std::uint32_t prev = 0;
            bool have_prev = false;
            for (std::uint32_t r = 0; r < distinct; ++r) {
                if (bucket_count_[r] == 0) {
                    continue;
                }
                if (have_prev) {
                    consider(best, j, prev, r, n_left, static_cast<double>(n));
                }
                n_left += bucket_count_[r];
                for (std::size_t k = 0; k < W_; ++k) {
                    left_[k] += bucket_sum_[r * W_ + k];
                }
                prev = r;
                have_prev = true;
            }
        } else {
            sorted_.clear();
            for (std::size_t i = begin; i < end; ++i) {
                sorted_.emplace_back(ranks[rows_[i]], rows_[i]);
            }
            std::sort(sorted_.begin(), sorted_.end());
            double n_left = 0.0;
            for (std::size_t i = 0; i < sorted_.size(); ++i) {
                if (i > 0 && sorted_[i].first != sorted_[i - 1].first) {
                    consider(best, j, sorted_[i - 1].first, sorted_[i].first, n_left, static_cast<double>(n));
                }
                n_left += 1.0;
                add_(sorted_[i].second, left_.data());
            }
        }
    }

    Split best_split(std::size_t begin, std::size_t end)
    {
        Split best;
        const std::size_t m = features_.size();
        const bool subsample = opts_.max_features > 0 && opts_.max_features < m && rng_ != nullptr;
        if (!subsample) {
            for (std::size_t j = 0; j < m; ++j) {
                scan_feature(best, j, begin, end);
            }
            return best;
        }
        // Random feature order; keep drawing past max_features until some
        // feature yields a valid split.
        for (std::size_t t = 0; t < m; ++t) {
            std::swap(features_[t], features_[t + uniform_index(*rng_, m - t)]);
            scan_feature(best, features_[t], begin, end);
            if (t + 1 >= opts_.max_features && best.found) {
                break;
            }
        }
        return best;
    }

    const FeatureRanks& fr_;
    std::size_t W_;
    AddFn add_;
    const GrowOptions& opts_;
    Rng* rng_;
    const Deadline& deadline_;
    std::vector<std::size_t> features_;
    std::vector<std::uint32_t> rows_;
    std::vector<double> parent_;
    std::vector<double> left_;
    std::vector<std::uint32_t> bucket_count_;
    std::vector<double> bucket_sum_;
    std::vector<std::pair<std::uint32_t, std::uint32_t>> sorted_;
};

} // namespace

Tree grow_classifier(const FeatureRanks& ranks,
    std::span<const Label> labels,
    int class_count,
    std::vector<std::uint32_t> rows,
    const GrowOptions& opts,
    Rng* rng,
    const Deadline& deadline)
{
    require(!rows.empty(), ErrorKind::Training, "cannot grow a tree on zero rows");
    const auto W = static_cast<std::size_t>(class_count);
    auto add = [labels](std::uint32_t r, double* acc) { acc[labels[r]] += 1.0; };
    Grower<decltype(add)> g(ranks, W, add, opts, rng, deadline);
    auto leaf = [](std::span<const std::uint32_t>, const std::vector<double>& counts) {
        return static_cast<double>(std::max_element(counts.begin(), counts.end()) - counts.begin());
    };
    auto pure = [](const std::vector<double>& counts, std::size_t n) {
        return std::any_of(counts.begin(), counts.end(), [n](double c) { return c == static_cast<double>(n); });
    };
    return g.grow(std::move(rows), leaf, pure, false);
}

Tree grow_regressor(const FeatureRanks& ranks,
    std::span<const double> targets,
    std::vector<std::uint32_t> rows,
    const GrowOptions& opts,
    const std::function<double(std::span<const std::uint32_t>)>& leaf_value,
    const Deadline& deadline)
{
    require(!rows.empty(), ErrorKind::Training, "cannot grow a tree on zero rows");
    auto add = [targets](std::uint32_t r, double* acc) { acc[0] += targets[r]; };
    Grower<decltype(add)> g(ranks, 1, add, opts, nullptr, deadline);
    auto leaf = [&](std::span<const std::uint32_t> rs, const std::vector<double>&) { return leaf_value(rs); };
    auto pure = [](const std::vector<double>&, std::size_t) { return false; };
    return g.grow(std::move(rows), leaf, pure, true);
}

} // namespace tpot::tree
