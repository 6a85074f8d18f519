#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "error.hpp"
#include "fixtures.hpp"
#include "linear.hpp"
#include "models.hpp"
#include "transforms.hpp"

using namespace tpot;

namespace {

double mean_of(std::span<const double> v) { return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size()); }

double pop_std(std::span<const double> v)
{
    const double mu = mean_of(v);
    double s = 0.0;
    for (double x : v) {
        s += (x - mu) * (x - mu);
    }
    return std::sqrt(s / static_cast<double>(v.size()));
}

double accuracy_on(const FittedModel& m, const Dataset& ds)
{
    auto p = predict(m, ds);
    std::size_t ok = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        ok += p[i] == ds.labels()[i];
    }
    return static_cast<double>(ok) / static_cast<double>(p.size());
}

template <class Fn>
ErrorKind kind_of_failure(Fn&& fn)
{
    try {
        fn();
    } catch (const Error& e) {
        return e.kind();
    }
    return ErrorKind::Usage;
}

// Random continuous data; every third column is log-normal.
Dataset random_dataset(std::size_t n, std::size_t m, int classes, std::uint64_t seed)
{
    auto rng = make_rng(seed);
    std::normal_distribution<double> g(0.0, 3.0);
    std::vector<std::vector<double>> rows(n, std::vector<double>(m));
    LabelVector labels(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
            rows[i][j] = (j % 3 == 2 ? std::exp(g(rng) / 3.0) : g(rng)) + static_cast<double>(j);
        }
        labels[i] = static_cast<Label>(i % static_cast<std::size_t>(classes));
    }
    return fixtures::from_rows(rows, labels, classes);
}

} // namespace

TEST_CASE("operator catalog")
{
    CHECK(category_of(OperatorKind::StandardScale) == OperatorCategory::Preprocessor);
    CHECK(category_of(OperatorKind::RandomizedPCA) == OperatorCategory::Decomposition);
    CHECK(category_of(OperatorKind::RFE) == OperatorCategory::Selector);
    CHECK(category_of(OperatorKind::KNN) == OperatorCategory::Model);
    CHECK(kinds_in(OperatorCategory::Model).size() == 6);
    CHECK(kinds_in(OperatorCategory::Selector).size() == 4);
    for (auto k : kAllOperatorKinds) {
        CHECK(kind_from_name(name_of(k)) == k);
    }
    CHECK_FALSE(kind_from_name("Nope").has_value());
}

TEST_CASE("sample_params stays in domain and is deterministic")
{
    auto rng = make_rng(5);
    for (int i = 0; i < 2000; ++i) {
        for (auto k : kAllOperatorKinds) {
            auto p = sample_params(k, rng);
            CHECK(check_params(k, p).empty());
        }
    }
    auto rf = make_rng(11);
    for (int i = 0; i < 500; ++i) {
        auto p = sample_params(OperatorKind::RandomForest, rf);
        const double trees = param_value(OperatorKind::RandomForest, p, "n_trees");
        CHECK(trees >= 10);
        CHECK(trees <= 500);
        CHECK(trees == std::floor(trees));
        auto knn = sample_params(OperatorKind::KNN, rf);
        CHECK(knn[0] >= 1);
        CHECK(knn[0] <= 50);
        CHECK(knn[0] == std::floor(knn[0]));
    }
    auto a = make_rng(3);
    auto b = make_rng(3);
    for (int i = 0; i < 100; ++i) {
        for (auto k : kAllOperatorKinds) {
            CHECK(sample_params(k, a) == sample_params(k, b));
        }
    }
    CHECK_FALSE(check_params(OperatorKind::KNN, ParamVector { 0.0 }).empty());
    CHECK_FALSE(check_params(OperatorKind::KNN, ParamVector { 2.5 }).empty());
    CHECK_FALSE(check_params(OperatorKind::KNN, ParamVector {}).empty());
}

TEST_CASE("StandardScale post-conditions")
{
    auto ds = random_dataset(37, 6, 2, 1);
    auto [t, out] = fit_transform(OperatorKind::StandardScale, {}, ds);
    for (std::size_t j = 0; j < out.cols(); ++j) {
        CHECK(std::abs(mean_of(out.column(j))) < 1e-9);
        CHECK(std::abs(pop_std(out.column(j)) - 1.0) < 1e-9);
    }
    CHECK(out.labels() == ds.labels());

    auto constant = fixtures::from_rows({ { 3, 1 }, { 3, 2 }, { 3, 4 } }, { 0, 1, 0 }, 2);
    auto [tc, oc] = fit_transform(OperatorKind::StandardScale, {}, constant);
    for (double v : oc.column(0)) {
        CHECK(v == 0.0);
    }
}

TEST_CASE("StandardScale applies train statistics to test rows")
{
    auto train = fixtures::from_rows({ { 1 }, { 2 }, { 3 }, { 4 } }, { 0, 0, 1, 1 }, 2);
    auto test = fixtures::from_rows({ { 5 }, { 0 } }, { 0, 1 }, 2);
    auto [t, _] = fit_transform(OperatorKind::StandardScale, {}, train);
    auto out = apply_transform(t, test);
    // train mean 2.5, population std sqrt(1.25)
    CHECK(out.at(0, 0) == doctest::Approx(2.5 / std::sqrt(1.25)).epsilon(1e-12));
    CHECK(out.at(1, 0) == doctest::Approx(-2.5 / std::sqrt(1.25)).epsilon(1e-12));
}

TEST_CASE("RobustScale post-conditions")
{
    auto ds = random_dataset(41, 5, 3, 2);
    auto [t, out] = fit_transform(OperatorKind::RobustScale, {}, ds);
    for (std::size_t j = 0; j < out.cols(); ++j) {
        std::vector<double> col(out.column(j).begin(), out.column(j).end());
        CHECK(std::abs(quantile(col, 0.5)) < 1e-9);
        CHECK(std::abs(quantile(col, 0.75) - quantile(col, 0.25) - 1.0) < 1e-9);
    }
    auto flat = fixtures::from_rows({ { 1, 0 }, { 1, 5 }, { 1, 5 }, { 1, 5 }, { 7, 5 } }, { 0, 1, 0, 1, 0 }, 2);
    auto [tf, of] = fit_transform(OperatorKind::RobustScale, {}, flat);
    for (std::size_t j = 0; j < 2; ++j) {
        for (double v : of.column(j)) {
            CHECK(v == 0.0);
        }
    }
}

TEST_CASE("scalers are row-order invariant")
{
    auto ds = random_dataset(20, 4, 2, 3);
    std::vector<std::size_t> perm(ds.rows());
    std::iota(perm.begin(), perm.end(), 0);
    auto rng = make_rng(8);
    std::shuffle(perm.begin(), perm.end(), rng);
    auto shuffled = ds.select_rows(perm);
    for (auto kind : { OperatorKind::StandardScale, OperatorKind::RobustScale }) {
        auto a = fit_transform(kind, {}, ds).second;
        auto b = fit_transform(kind, {}, shuffled).second;
        for (std::size_t i = 0; i < perm.size(); ++i) {
            for (std::size_t j = 0; j < a.cols(); ++j) {
                CHECK(b.at(i, j) == doctest::Approx(a.at(perm[i], j)).epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("PolynomialFeatures on three columns")
{
    auto ds = fixtures::from_rows({ { 1, 2, 3 }, { -1, 0.5, 2 } }, { 0, 1 }, 2);
    auto [t, out] = fit_transform(OperatorKind::PolynomialFeatures, {}, ds);
    CHECK(out.cols() == 10);
    // expected values enumerated independently: 1, a, b, c, and all a_i*a_j with i <= j
    for (std::size_t r = 0; r < 2; ++r) {
        std::vector<double> x { ds.at(r, 0), ds.at(r, 1), ds.at(r, 2) };
        std::vector<double> row { 1.0, x[0], x[1], x[2] };
        for (std::size_t i = 0; i < 3; ++i) {
            for (std::size_t j = i; j < 3; ++j) {
                row.push_back(x[i] * x[j]);
            }
        }
        std::vector<double> got;
        for (std::size_t j = 0; j < out.cols(); ++j) {
            got.push_back(out.at(r, j));
        }
        std::sort(row.begin(), row.end());
        std::sort(got.begin(), got.end());
        CHECK(got == row);
    }
    auto names = out.feature_names();
    std::sort(names.begin(), names.end());
    CHECK(std::adjacent_find(names.begin(), names.end()) == names.end());
}

TEST_CASE("VarianceThreshold")
{
    auto ds = fixtures::from_rows({ { 1, 4, 0 }, { 2, 4, 1 }, { 3, 4, 5 } }, { 0, 1, 0 }, 2);
    auto [t, out] = fit_transform(OperatorKind::VarianceThreshold, { 0.0 }, ds);
    CHECK(out.feature_names() == std::vector<std::string> { "x0", "x2" });

    auto distinct = fixtures::from_rows({ { 1, 7 }, { 2, 8 }, { 4, 9 } }, { 0, 1, 1 }, 2);
    auto [ti, same] = fit_transform(OperatorKind::VarianceThreshold, { 0.0 }, distinct);
    CHECK(apply_transform(ti, distinct) == distinct);

    auto flat = fixtures::from_rows({ { 1, 2 }, { 1, 2 }, { 1, 2 } }, { 0, 1, 0 }, 2);
    CHECK(kind_of_failure([&] { fit_transform(OperatorKind::VarianceThreshold, { 0.1 }, flat); })
        == ErrorKind::DegenerateOutput);
}

TEST_CASE("apply_transform width mismatch")
{
    auto ds = random_dataset(10, 3, 2, 4);
    auto [t, _] = fit_transform(OperatorKind::StandardScale, {}, ds);
    auto narrow = random_dataset(10, 2, 2, 4);
    CHECK(kind_of_failure([&] { apply_transform(t, narrow); }) == ErrorKind::Shape);
}

TEST_CASE("PCA with k = m reconstructs the training rows")
{
    for (std::size_t m : { std::size_t { 6 }, std::size_t { 80 } }) {
        auto ds = random_dataset(200, m, 2, 10 + m);
        auto [t, out] = fit_transform(OperatorKind::RandomizedPCA, { static_cast<double>(m) }, ds, 17);
        REQUIRE(out.cols() == m);
        const auto& s = std::get<ProjectionState>(t.state);
        double worst = 0.0;
        for (std::size_t i = 0; i < ds.rows(); ++i) {
            for (std::size_t j = 0; j < m; ++j) {
                double back = s.mean[j];
                for (std::size_t c = 0; c < s.k; ++c) {
                    back += out.at(i, c) * s.components[c * m + j];
                }
                worst = std::max(worst, std::abs(back - ds.at(i, j)));
            }
        }
        CHECK(worst < 1e-6);
    }
}

TEST_CASE("PCA components are orthonormal and ordered by variance")
{
    // five latent factors with well separated scales plus small noise
    auto rng = make_rng(21);
    std::normal_distribution<double> g(0.0, 1.0);
    std::vector<std::vector<double>> loadings(5, std::vector<double>(100));
    for (auto& l : loadings) {
        for (auto& v : l) {
            v = g(rng);
        }
    }
    std::vector<std::vector<double>> rows(150, std::vector<double>(100));
    for (auto& r : rows) {
        for (std::size_t f = 0; f < 5; ++f) {
            const double z = g(rng) * (10.0 - 2.0 * static_cast<double>(f));
            for (std::size_t j = 0; j < 100; ++j) {
                r[j] += z * loadings[f][j];
            }
        }
        for (auto& v : r) {
            v += 0.1 * g(rng);
        }
    }
    LabelVector labels(150);
    for (std::size_t i = 0; i < 150; ++i) {
        labels[i] = static_cast<Label>(i % 2);
    }
    auto ds = fixtures::from_rows(rows, labels, 2);
    auto [t, out] = fit_transform(OperatorKind::RandomizedPCA, { 5.0 }, ds, 3);
    const auto& s = std::get<ProjectionState>(t.state);
    REQUIRE(s.k == 5);
    for (std::size_t a = 0; a < 5; ++a) {
        for (std::size_t b = 0; b < 5; ++b) {
            double dot = 0.0;
            for (std::size_t j = 0; j < 100; ++j) {
                dot += s.components[a * 100 + j] * s.components[b * 100 + j];
            }
            CHECK(dot == doctest::Approx(a == b ? 1.0 : 0.0).epsilon(1e-9).scale(1.0));
        }
    }
    for (std::size_t c = 1; c < 5; ++c) {
        CHECK(pop_std(out.column(c)) <= pop_std(out.column(c - 1)) * (1 + 1e-3));
    }
}

TEST_CASE("selectors")
{
    auto ds = random_dataset(60, 7, 3, 5);
    auto names = ds.feature_names();
    std::sort(names.begin(), names.end());
    for (auto [kind, p] : { std::pair { OperatorKind::SelectKBest, 7.0 }, std::pair { OperatorKind::SelectPercentile, 100.0 },
             std::pair { OperatorKind::SelectKBest, 100.0 } }) {
        auto out = fit_transform(kind, { p }, ds).second;
        auto got = out.feature_names();
        std::sort(got.begin(), got.end());
        CHECK(got == names);
    }
    for (std::size_t k = 1; k <= 9; ++k) {
        auto out = fit_transform(OperatorKind::RFE, { static_cast<double>(k) }, ds).second;
        CHECK(out.cols() == std::min<std::size_t>(k, 7));
    }
    auto pct = fit_transform(OperatorKind::SelectPercentile, { 5.0 }, ds).second;
    CHECK(pct.cols() == 1);
}

TEST_CASE("SelectKBest keeps the informative column")
{
    auto rng = make_rng(9);
    std::normal_distribution<double> g(0.0, 1.0);
    std::vector<std::vector<double>> rows;
    LabelVector labels;
    for (int i = 0; i < 100; ++i) {
        const int c = i % 2;
        rows.push_back({ g(rng), g(rng) + 4.0 * c, g(rng) });
        labels.push_back(c);
    }
    auto ds = fixtures::from_rows(rows, labels, 2);
    auto out = fit_transform(OperatorKind::SelectKBest, { 1.0 }, ds).second;
    CHECK(out.feature_names() == std::vector<std::string> { "x1" });
    auto f = anova_f_scores(ds);
    CHECK(f[1] > f[0]);
    CHECK(f[1] > f[2]);
}

TEST_CASE("DecisionTree memorizes consistent data")
{
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        auto ds = random_dataset(120, 4, 3, 100 + seed);
        auto m = train_model(OperatorKind::DecisionTree, { kUncappedDepth }, ds, seed);
        CHECK(accuracy_on(m, ds) == 1.0);
    }
    auto ds = random_dataset(120, 4, 3, 7);
    auto stump = train_model(OperatorKind::DecisionTree, { 1.0 }, ds);
    CHECK(std::get<TreeState>(stump.state).tree.nodes().size() <= 3);
}

TEST_CASE("KNN with k = 1 reproduces training labels")
{
    auto ds = random_dataset(90, 5, 3, 12);
    auto m = train_model(OperatorKind::KNN, { 1.0 }, ds);
    CHECK(predict(m, ds) == ds.labels());
}

TEST_CASE("KNN ties go to the lowest class")
{
    auto ds = fixtures::from_rows({ { -1 }, { 1 } }, { 1, 0 }, 2);
    auto m = train_model(OperatorKind::KNN, { 2.0 }, ds);
    auto probe = fixtures::from_rows({ { 0 } }, { 0 }, 2);
    CHECK(predict(m, probe) == LabelVector { 0 });
}

TEST_CASE("vote breaks ties toward the lowest class")
{
    CHECK(vote(std::vector<double> { 2, 5, 5 }) == 1);
    CHECK(vote(std::vector<double> { 3, 3 }) == 0);
}

TEST_CASE("RandomForest separates blobs")
{
    auto ds = fixtures::blobs(150, 4, 2, 3.0, 77);
    auto split = stratified_split(ds, 0.75, 1);
    auto m = train_model(OperatorKind::RandomForest, { 500.0, kUncappedDepth }, split.train, 9);
    auto preds = predict(m, split.test);
    CHECK(balanced_accuracy(split.test.labels(), preds) > 0.95);
    auto again = train_model(OperatorKind::RandomForest, { 500.0, kUncappedDepth }, split.train, 9);
    CHECK(predict(again, split.test) == preds);
}

TEST_CASE("GradientBoosting training loss is non-increasing")
{
    for (int classes : { 2, 3 }) {
        auto ds = random_dataset(150, 5, classes, 30 + static_cast<std::uint64_t>(classes));
        for (double lr : { 0.05, 1.0 }) {
            auto m = train_model(OperatorKind::GradientBoosting, { 60.0, lr, 3.0 }, ds, 1);
            const auto& loss = boosting_train_loss(m);
            REQUIRE(loss.size() >= 2);
            for (std::size_t s = 1; s < loss.size(); ++s) {
                CHECK(loss[s] <= loss[s - 1]);
            }
            CHECK(loss.back() < loss.front());
        }
    }
    auto blobs = fixtures::blobs(80, 3, 3, 4.0, 5);
    auto m = train_model(OperatorKind::GradientBoosting, { 50.0, 0.3, 3.0 }, blobs);
    CHECK(accuracy_on(m, blobs) > 0.95);
}

TEST_CASE("logistic gradient matches central differences")
{
    auto rng = make_rng(44);
    for (int trial = 0; trial < 20; ++trial) {
        const int classes = 2 + trial % 3;
        auto ds = random_dataset(12 + static_cast<std::size_t>(trial), 3 + static_cast<std::size_t>(trial % 4), classes,
            static_cast<std::uint64_t>(trial));
        const std::size_t dim = (ds.cols() + 1) * static_cast<std::size_t>(classes);
        std::vector<double> w(dim);
        std::normal_distribution<double> g(0.0, 0.3);
        for (auto& v : w) {
            v = g(rng);
        }
        const double C = std::pow(10.0, -2.0 + 3.0 * uniform01(rng));
        auto obj = linear::logistic_objective(ds, C, w);
        double diff2 = 0.0;
        double norm2 = 0.0;
        for (std::size_t i = 0; i < dim; ++i) {
            const double h = 1e-6;
            auto plus = w;
            auto minus = w;
            plus[i] += h;
            minus[i] -= h;
            const double fd = (linear::logistic_objective(ds, C, plus).loss - linear::logistic_objective(ds, C, minus).loss)
                / (2 * h);
            diff2 += (fd - obj.grad[i]) * (fd - obj.grad[i]);
            norm2 += obj.grad[i] * obj.grad[i];
        }
        CHECK(std::sqrt(diff2 / norm2) < 1e-5);
    }
}

TEST_CASE("LogisticRegression on a 1-D threshold")
{
    std::vector<std::vector<double>> rows;
    LabelVector labels;
    for (int i = -20; i <= 20; ++i) {
        if (i == 0) {
            continue;
        }
        rows.push_back({ i / 4.0 });
        labels.push_back(i < 0 ? 0 : 1);
    }
    auto ds = fixtures::from_rows(rows, labels, 2);
    auto m = train_model(OperatorKind::LogisticRegression, { 100.0 }, ds);
    CHECK(predict(m, ds) == labels);
    const auto& w = std::get<linear::Weights>(m.state);
    CHECK(w.W[1] - w.W[0] > 0.0);
}

TEST_CASE("LinearSVM separates blobs")
{
    auto two = fixtures::blobs(60, 2, 2, 6.0, 3);
    CHECK(accuracy_on(train_model(OperatorKind::LinearSVM, { 1.0 }, two), two) > 0.95);

    // one-vs-rest needs every class on the hull, so place three blobs on a triangle
    auto rng = make_rng(4);
    std::normal_distribution<double> g(0.0, 1.0);
    const double centre[3][2] = { { 0, 0 }, { 8, 0 }, { 0, 8 } };
    std::vector<std::vector<double>> rows;
    LabelVector labels;
    for (int c = 0; c < 3; ++c) {
        for (int i = 0; i < 50; ++i) {
            rows.push_back({ centre[c][0] + g(rng), centre[c][1] + g(rng) });
            labels.push_back(c);
        }
    }
    auto three = fixtures::from_rows(rows, labels, 3);
    CHECK(accuracy_on(train_model(OperatorKind::LinearSVM, { 1.0 }, three), three) > 0.95);
}

TEST_CASE("model errors")
{
    auto ds = random_dataset(20, 3, 2, 1);
    auto m = train_model(OperatorKind::KNN, { 3.0 }, ds);
    auto narrow = random_dataset(5, 2, 2, 1);
    CHECK(kind_of_failure([&] { predict(m, narrow); }) == ErrorKind::Shape);

    Dataset missing({ "a" }, { 1, 2, 3 }, { 0, 0, 2 }, 3);
    CHECK(kind_of_failure([&] { train_model(OperatorKind::DecisionTree, { 0.0 }, missing); }) == ErrorKind::Training);
    CHECK(kind_of_failure([&] { train_model(OperatorKind::KNN, { 0.0 }, ds); }) == ErrorKind::Schema);
    CHECK(kind_of_failure([&] { train_model(OperatorKind::StandardScale, {}, ds); }) == ErrorKind::Contract);
}

TEST_CASE("every model predicts labels in range")
{
    auto rng = make_rng(1);
    auto ds = random_dataset(60, 4, 3, 2);
    auto probe = random_dataset(30, 4, 3, 3);
    for (auto kind : kinds_in(OperatorCategory::Model)) {
        for (int rep = 0; rep < 3; ++rep) {
            auto p = sample_params(kind, rng);
            if (kind == OperatorKind::RandomForest || kind == OperatorKind::GradientBoosting) {
                p[0] = 20.0;
            }
            auto m = train_model(kind, p, ds, 4);
            for (auto l : predict(m, probe)) {
                CHECK(l >= 0);
                CHECK(l < 3);
            }
        }
    }
}
