#include "models.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "error.hpp"
#include "rng.hpp"

namespace tpot {

Label vote(std::span<const double> counts)
{
    return static_cast<Label>(std::max_element(counts.begin(), counts.end()) - counts.begin());
}

namespace {

std::size_t as_size(double v) { return static_cast<std::size_t>(std::max(0.0, v)); }

std::vector<std::uint32_t> all_rows(std::size_t n)
{
    std::vector<std::uint32_t> rows(n);
    std::iota(rows.begin(), rows.end(), 0U);
    return rows;
}

TreeState train_tree(const ParamVector& params, const Dataset& train, const Deadline& deadline)
{
    tree::FeatureRanks ranks(train);
    tree::GrowOptions opts;
    opts.max_depth = static_cast<int>(param_value(OperatorKind::DecisionTree, params, "max_depth"));
    return { tree::grow_classifier(ranks, train.labels(), train.class_count(), all_rows(train.rows()), opts, nullptr,
        deadline) };
}

ForestState train_forest(const ParamVector& params, const Dataset& train, std::uint64_t seed, const Deadline& deadline)
{
    const auto n_trees = as_size(param_value(OperatorKind::RandomForest, params, "n_trees"));
    tree::FeatureRanks ranks(train);
    tree::GrowOptions opts;
    opts.max_depth = static_cast<int>(param_value(OperatorKind::RandomForest, params, "max_depth"));
    opts.max_features = std::max<std::size_t>(1, static_cast<std::size_t>(std::sqrt(static_cast<double>(train.cols()))));
    const std::size_t n = train.rows();
    ForestState out;
    out.trees.reserve(n_trees);
    for (std::size_t t = 0; t < n_trees; ++t) {
        deadline.check();
        auto rng = make_rng(derive_seed(seed, { t }));
        std::vector<std::uint32_t> rows(n);
        for (auto& r : rows) {
            r = static_cast<std::uint32_t>(uniform_index(rng, n));
        }
        out.trees.push_back(
            tree::grow_classifier(ranks, train.labels(), train.class_count(), std::move(rows), opts, &rng, deadline));
    }
    return out;
}

// Raw scores F (n x R, row-major) to mean multinomial log loss. R = 1 is the
// binary logit of class 1.
double log_loss(const std::vector<double>& F, const LabelVector& y, std::size_t R)
{
    const std::size_t n = y.size();
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (R == 1) {
            const double f = F[i];
            const double softplus = f > 0 ? f + std::log1p(std::exp(-f)) : std::log1p(std::exp(f));
            total += softplus - (y[i] == 1 ? f : 0.0);
        } else {
            const double* row = F.data() + i * R;
            const double mx = *std::max_element(row, row + R);
            double s = 0.0;
            for (std::size_t k = 0; k < R; ++k) {
                s += std::exp(row[k] - mx);
            }
            total += mx + std::log(s) - row[static_cast<std::size_t>(y[i])];
        }
    }
    return total / static_cast<double>(n);
}

void probabilities(const std::vector<double>& F, std::size_t R, std::vector<double>& P)
{
    P.resize(F.size());
    const std::size_t n = F.size() / R;
    for (std::size_t i = 0; i < n; ++i) {
        if (R == 1) {
            P[i] = 1.0 / (1.0 + std::exp(-F[i]));
            continue;
        }
        const double* row = F.data() + i * R;
        const double mx = *std::max_element(row, row + R);
        double s = 0.0;
        for (std::size_t k = 0; k < R; ++k) {
            P[i * R + k] = std::exp(row[k] - mx);
            s += P[i * R + k];
        }
        for (std::size_t k = 0; k < R; ++k) {
            P[i * R + k] /= s;
        }
    }
}

BoostState train_boost(const ParamVector& params, const Dataset& train, const Deadline& deadline)
{
    const auto kind = OperatorKind::GradientBoosting;
    const auto n_trees = as_size(param_value(kind, params, "n_trees"));
    BoostState out;
    out.learning_rate = param_value(kind, params, "learning_rate");
    tree::GrowOptions opts;
    opts.max_depth = static_cast<int>(param_value(kind, params, "max_depth"));

    const auto& y = train.labels();
    const std::size_t n = train.rows();
    const auto K = static_cast<std::size_t>(train.class_count());
    const std::size_t R = K == 2 ? 1 : K;
    std::vector<double> prior(K, 0.0);
    for (auto l : y) {
        prior[static_cast<std::size_t>(l)] += 1.0 / static_cast<double>(n);
    }
    if (R == 1) {
        out.init = { std::log(prior[1] / prior[0]) };
    } else {
        for (auto p : prior) {
            out.init.push_back(std::log(p));
        }
    }

    tree::FeatureRanks ranks(train);
    std::vector<double> F(n * R);
    for (std::size_t i = 0; i < n; ++i) {
        std::copy(out.init.begin(), out.init.end(), F.begin() + static_cast<std::ptrdiff_t>(i * R));
    }
    double loss = log_loss(F, y, R);
    out.train_loss.push_back(loss);

    std::vector<double> P;
    std::vector<double> residual(n);
    std::vector<double> curvature(n);
    std::vector<double> delta(n * R);
    std::vector<double> candidate(n * R);
    const double leaf_scale = R == 1 ? 1.0 : static_cast<double>(K - 1) / static_cast<double>(K);
    auto leaf_value = [&](std::span<const std::uint32_t> rows) {
        double num = 0.0;
        double den = 0.0;
        for (auto r : rows) {
            num += residual[r];
            den += curvature[r];
        }
        return den > 1e-150 ? leaf_scale * num / den : 0.0;
    };

    for (std::size_t stage = 0; stage < n_trees; ++stage) {
        deadline.check();
        probabilities(F, R, P);
        std::vector<tree::Tree> trees;
        for (std::size_t k = 0; k < R; ++k) {
            for (std::size_t i = 0; i < n; ++i) {
                const double target = R == 1 ? (y[i] == 1 ? 1.0 : 0.0) : (static_cast<std::size_t>(y[i]) == k ? 1.0 : 0.0);
                const double p = P[i * R + k];
                residual[i] = target - p;
                const double a = std::abs(residual[i]);
                curvature[i] = R == 1 ? p * (1.0 - p) : a * (1.0 - a);
            }
            trees.push_back(tree::grow_regressor(ranks, residual, all_rows(n), opts, leaf_value, deadline));
            for (std::size_t i = 0; i < n; ++i) {
                delta[i * R + k] = trees.back().predict(train, i);
            }
        }
        // Shrink the step until the training loss does not increase.
        double step = out.learning_rate;
        double next = loss;
        for (int halving = 0; halving <= 30; ++halving) {
            for (std::size_t i = 0; i < F.size(); ++i) {
                candidate[i] = F[i] + step * delta[i];
            }
            next = log_loss(candidate, y, R);
            if (next <= loss) {
                break;
            }
            step *= 0.5;
        }
        if (!(next <= loss)) {
            break;
        }
        F.swap(candidate);
        loss = next;
        out.stages.push_back(std::move(trees));
        out.shrink.push_back(step);
        out.train_loss.push_back(loss);
    }
    return out;
}

KnnState train_knn(const ParamVector& params, const Dataset& train)
{
    KnnState out;
    out.k = std::min(as_size(param_value(OperatorKind::KNN, params, "n_neighbors")), train.rows());
    const std::size_t n = train.rows();
    const std::size_t m = train.cols();
    out.rows.resize(n * m);
    for (std::size_t j = 0; j < m; ++j) {
        auto col = train.column(j);
        for (std::size_t i = 0; i < n; ++i) {
            out.rows[i * m + j] = col[i];
        }
    }
    out.labels = train.labels();
    return out;
}

LabelVector predict_knn(const FittedModel& model, const KnnState& s, const Dataset& ds, const Deadline& deadline)
{
    const std::size_t m = model.input_width;
    const std::size_t n_train = s.labels.size();
    LabelVector out(ds.rows());
    std::vector<double> x(m);
    std::vector<std::pair<double, std::size_t>> dist(n_train);
    std::vector<double> counts(static_cast<std::size_t>(model.class_count));
    for (std::size_t i = 0; i < ds.rows(); ++i) {
        if (i % 64 == 0) {
            deadline.check();
        }
        for (std::size_t j = 0; j < m; ++j) {
            x[j] = ds.at(i, j);
        }
        for (std::size_t t = 0; t < n_train; ++t) {
            const double* r = s.rows.data() + t * m;
            double d = 0.0;
            for (std::size_t j = 0; j < m; ++j) {
                const double diff = x[j] - r[j];
                d += diff * diff;
            }
            dist[t] = { d, t };
        }
        std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(s.k), dist.end());
        std::fill(counts.begin(), counts.end(), 0.0);
        for (std::size_t t = 0; t < s.k; ++t) {
            counts[static_cast<std::size_t>(s.labels[dist[t].second])] += 1.0;
        }
        out[i] = vote(counts);
    }
    return out;
}

} // namespace

FittedModel train_model(OperatorKind kind,
    const ParamVector& params,
    const Dataset& train,
    std::uint64_t seed,
    const Deadline& deadline)
{
    require(is_model(kind), ErrorKind::Contract, std::string(name_of(kind)) + " is not a model");
    if (auto msg = check_params(kind, params); !msg.empty()) {
        fail(ErrorKind::Schema, std::string(name_of(kind)) + ": " + msg);
    }
    std::vector<std::size_t> per_class(static_cast<std::size_t>(train.class_count()), 0);
    for (auto l : train.labels()) {
        ++per_class[static_cast<std::size_t>(l)];
    }
    for (std::size_t c = 0; c < per_class.size(); ++c) {
        require(per_class[c] > 0, ErrorKind::Training, "class " + std::to_string(c) + " has no training rows");
    }

    FittedModel model;
    model.kind = kind;
    model.params = params;
    model.input_width = train.cols();
    model.class_count = train.class_count();
    switch (kind) {
    case OperatorKind::DecisionTree:
        model.state = train_tree(params, train, deadline);
        break;
    case OperatorKind::RandomForest:
        model.state = train_forest(params, train, seed, deadline);
        break;
    case OperatorKind::GradientBoosting:
        model.state = train_boost(params, train, deadline);
        break;
    case OperatorKind::LogisticRegression:
        model.state = linear::fit_logistic(train, param_value(kind, params, "C"), kLogisticIterations, deadline);
        break;
    case OperatorKind::LinearSVM:
        model.state = linear::fit_linear_svm(train, param_value(kind, params, "C"), kSvmIterations, deadline);
        break;
    case OperatorKind::KNN:
        model.state = train_knn(params, train);
        break;
    default:
        fail(ErrorKind::Contract, "unreachable model kind");
    }
    return model;
}

LabelVector predict(const FittedModel& model, const Dataset& ds, const Deadline& deadline)
{
    require(ds.cols() == model.input_width, ErrorKind::Shape,
        std::string(name_of(model.kind)) + " trained on width " + std::to_string(model.input_width) + ", got "
            + std::to_string(ds.cols()));
    const std::size_t n = ds.rows();
    const auto K = static_cast<std::size_t>(model.class_count);
    LabelVector out(n);
    if (const auto* s = std::get_if<TreeState>(&model.state)) {
        for (std::size_t i = 0; i < n; ++i) {
            out[i] = static_cast<Label>(s->tree.predict(ds, i));
        }
    } else if (const auto* s = std::get_if<ForestState>(&model.state)) {
        std::vector<double> counts(K);
        for (std::size_t i = 0; i < n; ++i) {
            if (i % 64 == 0) {
                deadline.check();
            }
            std::fill(counts.begin(), counts.end(), 0.0);
            for (const auto& t : s->trees) {
                counts[static_cast<std::size_t>(t.predict(ds, i))] += 1.0;
            }
            out[i] = vote(counts);
        }
    } else if (const auto* s = std::get_if<BoostState>(&model.state)) {
        const std::size_t R = s->init.size();
        std::vector<double> F(R);
        for (std::size_t i = 0; i < n; ++i) {
            F = s->init;
            for (std::size_t st = 0; st < s->stages.size(); ++st) {
                for (std::size_t k = 0; k < R; ++k) {
                    F[k] += s->shrink[st] * s->stages[st][k].predict(ds, i);
                }
            }
            out[i] = R == 1 ? (F[0] > 0.0 ? 1 : 0) : vote(F);
        }
    } else if (const auto* s = std::get_if<linear::Weights>(&model.state)) {
        out = linear::argmax_rows(linear::scores(*s, ds), K);
    } else {
        out = predict_knn(model, std::get<KnnState>(model.state), ds, deadline);
    }
    return out;
}

const std::vector<double>& boosting_train_loss(const FittedModel& model)
{
    static const std::vector<double> empty;
    const auto* s = std::get_if<BoostState>(&model.state);
    return s != nullptr ? s->train_loss : empty;
}

} // namespace tpot
