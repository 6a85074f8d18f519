#include <doctest.h>

#include <algorithm>

#include "error.hpp"
#include "fixtures.hpp"
#include "models.hpp"
#include "pipeline.hpp"
#include "transforms.hpp"

using namespace tpot;

namespace {

PipelineNode leaf() { return PipelineNode::leaf(); }

Dataset noisy_blobs(std::uint64_t seed)
{
    return fixtures::blobs(40, 3, 2, 1.5, seed);
}

// Brute-force 1-NN with the same tie rule (first index among equal distances).
LabelVector one_nn(const Dataset& train, const Dataset& test)
{
    LabelVector out;
    for (std::size_t i = 0; i < test.rows(); ++i) {
        double best = 1e300;
        Label label = 0;
        for (std::size_t t = 0; t < train.rows(); ++t) {
            double d = 0.0;
            for (std::size_t j = 0; j < train.cols(); ++j) {
                d += (test.at(i, j) - train.at(t, j)) * (test.at(i, j) - train.at(t, j));
            }
            if (d < best) {
                best = d;
                label = train.labels()[t];
            }
        }
        out.push_back(label);
    }
    return out;
}

// Fig 2's topology: PCA branch and polynomial + k-best branch combined,
// passed through an SVM whose guess feeds the random forest at the root.
Pipeline figure_two()
{
    auto pca = PipelineNode::transform(OperatorKind::RandomizedPCA, { 2 }, leaf());
    auto kbest = PipelineNode::transform(OperatorKind::SelectKBest, { 12 },
        PipelineNode::transform(OperatorKind::PolynomialFeatures, {}, leaf()));
    auto svm = PipelineNode::model(OperatorKind::LinearSVM, { 1.0 }, PipelineNode::combine(pca, kbest));
    return { PipelineNode::model(OperatorKind::RandomForest, { 50, kUncappedDepth }, svm) };
}

} // namespace

TEST_CASE("size and depth")
{
    Pipeline single { PipelineNode::model(OperatorKind::KNN, { 3 }, leaf()) };
    CHECK(single.size() == 1);
    CHECK(single.depth() == 1);
    auto fig = figure_two();
    CHECK(fig.size() == 6);
    CHECK(fig.depth() == 5);
}

TEST_CASE("validate")
{
    Pipeline ok { PipelineNode::model(OperatorKind::KNN, { 3 }, leaf()) };
    CHECK(validate(ok).empty());

    Pipeline transform_root { PipelineNode::transform(OperatorKind::StandardScale, {}, leaf()) };
    auto v = validate(transform_root);
    REQUIRE(v.size() == 1);
    CHECK(v[0].find("not a Model") != std::string::npos);

    Pipeline bad_params { PipelineNode::model(OperatorKind::KNN, { 3 },
        PipelineNode::transform(OperatorKind::SelectKBest, { 0 }, leaf())) };
    auto w = validate(bad_params);
    REQUIRE(w.size() == 1);
    CHECK(w[0].find("SelectKBest") != std::string::npos);
    CHECK(w[0].find("root.children[0]") != std::string::npos);

    CHECK(validate(figure_two(), { 4, 20 }).size() == 1);
    CHECK(validate(figure_two(), { 6, 5 }).size() == 1);
}

TEST_CASE("random pipelines")
{
    auto rng = make_rng(1);
    for (int i = 0; i < 200; ++i) {
        auto p = random_pipeline(rng, 1, 20);
        CHECK(p.size() == 1);
        CHECK(p.root.type == NodeType::Model);
        CHECK(p.root.children[0].type == NodeType::Leaf);
    }
    for (int i = 0; i < 1000; ++i) {
        auto p = random_pipeline(rng, 5, 20);
        CHECK(validate(p, { 5, 20 }).empty());
    }
    for (int i = 0; i < 200; ++i) {
        CHECK(random_pipeline(rng, 6, 2).size() <= 2);
    }
    auto a = make_rng(9);
    auto b = make_rng(9);
    for (int i = 0; i < 100; ++i) {
        CHECK(random_pipeline(a, 6, 20) == random_pipeline(b, 6, 20));
    }
}

TEST_CASE("serialize round trip")
{
    auto rng = make_rng(2);
    for (int i = 0; i < 1000; ++i) {
        auto p = random_pipeline(rng, 6, 20);
        CHECK(deserialize(serialize(p)) == p);
    }
    auto fig = figure_two();
    auto text = serialize(fig);
    CHECK(text.find("\"format\": \"tpot-tree/1\"") != std::string::npos);
    CHECK(deserialize(text) == fig);
    CHECK(render(fig)
        == "RandomForest(LinearSVM(Combine(RandomizedPCA(Leaf, n_components=2), SelectKBest(PolynomialFeatures(Leaf), "
           "k=12)), C=1), n_trees=50, max_depth=0)");
    Pipeline single { PipelineNode::model(OperatorKind::KNN, { 5 }, leaf()) };
    CHECK(render(single) == "KNN(Leaf, n_neighbors=5)");
}

TEST_CASE("deserialize rejects malformed documents")
{
    auto text = serialize(figure_two());
    for (std::size_t cut : { std::size_t { 0 }, std::size_t { 5 }, text.size() / 2, text.size() - 3 }) {
        try {
            deserialize(text.substr(0, cut));
            FAIL("expected a parse error");
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::Parse);
        }
    }
    const char* broken[] = {
        R"({"format":"tpot-tree/2","root":{"op":"Leaf","params":{},"children":[]}})",
        R"({"format":"tpot-tree/1","root":{"op":"Bogus","params":{},"children":[]}})",
        R"({"format":"tpot-tree/1","root":{"op":"KNN","params":{},"children":[{"op":"Leaf","params":{},"children":[]}]}})",
        R"({"format":"tpot-tree/1","root":{"op":"KNN","params":{"n_neighbors":3},"children":[]}})",
        R"({"format":"tpot-tree/1","root":{"op":"KNN","params":{"n_neighbors":"x"},"children":[{"op":"Leaf","params":{},"children":[]}]}})",
        R"([1,2])",
    };
    for (const char* doc : broken) {
        try {
            deserialize(doc);
            FAIL("expected a parse error");
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::Parse);
            CHECK(std::string(e.what()).find(" at ") != std::string::npos);
        }
    }
}

TEST_CASE("evaluate KNN against a brute-force oracle")
{
    auto ds = noisy_blobs(3);
    const std::uint64_t seed = 17;
    Pipeline p { PipelineNode::model(OperatorKind::KNN, { 1 }, leaf()) };
    auto rec = evaluate_pipeline(p, ds, seed, 0);
    REQUIRE_FALSE(rec.failed);
    auto split = stratified_split(ds, 0.75, seed);
    auto oracle = one_nn(split.train, split.test);
    CHECK(rec.balanced_accuracy == balanced_accuracy(split.test.labels(), oracle));
    CHECK(rec.size == 1);
    CHECK(one_nn(split.train, split.train) == split.train.labels());
}

TEST_CASE("decision tree predictions ignore standard scaling")
{
    auto ds = fixtures::blobs(50, 4, 3, 1.0, 8);
    auto split = stratified_split(ds, 0.75, 4);
    Pipeline raw { PipelineNode::model(OperatorKind::DecisionTree, { kUncappedDepth }, leaf()) };
    Pipeline scaled { PipelineNode::model(OperatorKind::DecisionTree, { kUncappedDepth },
        PipelineNode::transform(OperatorKind::StandardScale, {}, leaf())) };
    CHECK(fit_predict(raw, split.train, split.test, 1, 0) == fit_predict(scaled, split.train, split.test, 1, 0));
}

TEST_CASE("degenerate selector output fails the record")
{
    auto flat = fixtures::from_rows({ { 1, 1 }, { 1, 1 }, { 1, 1 }, { 1, 1 }, { 1, 1 }, { 1, 1 }, { 1, 1 }, { 1, 1 } },
        { 0, 0, 0, 0, 1, 1, 1, 1 }, 2);
    Pipeline p { PipelineNode::model(OperatorKind::KNN, { 1 },
        PipelineNode::transform(OperatorKind::VarianceThreshold, { 0.1 }, leaf())) };
    auto rec = evaluate_pipeline(p, flat, 1, 0);
    CHECK(rec.failed);
    CHECK(rec.balanced_accuracy == 0.0);
    CHECK(rec.size == 2);
}

TEST_CASE("evaluation failures never throw")
{
    auto tiny = fixtures::from_rows({ { 1 }, { 2 }, { 3 } }, { 0, 0, 1 }, 2);
    Pipeline p { PipelineNode::model(OperatorKind::KNN, { 1 }, leaf()) };
    auto rec = evaluate_pipeline(p, tiny, 1, 0);
    CHECK(rec.failed);
    Pipeline bad { PipelineNode::transform(OperatorKind::StandardScale, {}, leaf()) };
    CHECK(evaluate_pipeline(bad, noisy_blobs(1), 1, 0).failed);
}

TEST_CASE("budget exhaustion fails the record")
{
    auto ds = fixtures::blobs(300, 20, 2, 0.3, 5);
    Pipeline heavy { PipelineNode::model(OperatorKind::RandomForest, { 500, kUncappedDepth },
        PipelineNode::transform(OperatorKind::PolynomialFeatures, {}, leaf())) };
    auto rec = evaluate_pipeline(heavy, ds, 1, 5);
    CHECK(rec.failed);
    CHECK(rec.error.find("budget") != std::string::npos);
}

TEST_CASE("evaluation is deterministic")
{
    auto ds = noisy_blobs(6);
    auto rng = make_rng(5);
    for (int i = 0; i < 20; ++i) {
        auto p = random_pipeline(rng, 3, 20);
        auto a = evaluate_pipeline(p, ds, 42, 0);
        auto b = evaluate_pipeline(p, ds, 42, 0);
        CHECK(a.balanced_accuracy == b.balanced_accuracy);
        CHECK(a.failed == b.failed);
        CHECK(a.size == p.size());
    }
}

TEST_CASE("stacked classifiers demote earlier guesses to features")
{
    auto ds = noisy_blobs(2);
    auto split = stratified_split(ds, 0.75, 3);
    const auto knn = [](PipelineNode child) { return PipelineNode::model(OperatorKind::KNN, { 3 }, std::move(child)); };
    // With three models on a path the root trains on m + 2 features: one
    // per preceding model.
    Pipeline p { knn(knn(knn(leaf()))) };
    auto guess = fit_predict(p, split.train, split.test, 1, 0);
    CHECK(guess.size() == split.test.rows());

    // Manual replay of the same semantics.
    auto step = [](const Dataset& tr, const Dataset& te, const std::string& tag) {
        auto a = tr.guess() ? push_guess_to_feature(tr, tag) : tr;
        auto b = te.guess() ? push_guess_to_feature(te, tag) : te;
        auto m = train_model(OperatorKind::KNN, { 3 }, a);
        return std::pair { a.with_guess(predict(m, a)), b.with_guess(predict(m, b)) };
    };
    auto [tr2, te2] = step(split.train, split.test, "g2");
    auto [tr1, te1] = step(tr2, te2, "g1");
    auto [tr0, te0] = step(tr1, te1, "g0");
    CHECK(tr0.cols() == ds.cols() + 2);
    CHECK(*te0.guess() == guess);
}

TEST_CASE("Fig 2 topology evaluates")
{
    auto ds = fixtures::blobs(40, 5, 2, 2.0, 11);
    auto rec = evaluate_pipeline(figure_two(), ds, 1, 0);
    CHECK_FALSE(rec.failed);
    CHECK(rec.balanced_accuracy > 0.8);
}
