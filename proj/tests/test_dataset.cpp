#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>

#include "dataset.hpp"
#include "error.hpp"
#include "fixtures.hpp"

using namespace tpot;

namespace {

Dataset labelled(const LabelVector& labels, int classes)
{
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        rows.push_back({ static_cast<double>(i) });
    }
    return fixtures::from_rows(rows, labels, classes);
}

std::map<Label, int> class_counts(const Dataset& ds)
{
    std::map<Label, int> out;
    for (auto l : ds.labels()) {
        ++out[l];
    }
    return out;
}

} // namespace

TEST_CASE("dataset rejects broken invariants")
{
    CHECK_THROWS_AS(Dataset({ "a", "a" }, { 1, 2, 3, 4 }, { 0, 1 }, 2), Error);
    CHECK_THROWS_AS(Dataset({ "a" }, { 1, 2, 3 }, { 0, 1 }, 2), Error);
    CHECK_THROWS_AS(Dataset({ "a" }, { 1, 2 }, { 0, 2 }, 2), Error);
    CHECK_THROWS_AS(Dataset({ "a" }, { 1, 2 }, { 0, 1 }, 2, LabelVector { 0 }), Error);
    CHECK_THROWS_AS(Dataset({ "a" }, { 1, 2 }, { 0, 0 }, 1), Error);
}

TEST_CASE("stratified split of 8 rows at 0.75")
{
    auto ds = labelled({ 0, 0, 0, 0, 1, 1, 1, 1 }, 2);
    for (std::uint64_t seed : { 0u, 1u, 99u }) {
        auto s = stratified_split(ds, 0.75, seed);
        CHECK(class_counts(s.train) == std::map<Label, int> { { 0, 3 }, { 1, 3 } });
        CHECK(class_counts(s.test) == std::map<Label, int> { { 0, 1 }, { 1, 1 } });
    }
}

TEST_CASE("stratified split of 100 balanced rows")
{
    LabelVector labels(100);
    for (std::size_t i = 0; i < 100; ++i) {
        labels[i] = i < 50 ? 0 : 1;
    }
    auto ds = labelled(labels, 2);
    auto s = stratified_split(ds, 0.75, 7);
    CHECK(s.train.rows() == 75);
    auto counts = class_counts(s.train);
    for (auto [c, k] : counts) {
        CHECK((k == 37 || k == 38));
    }
    auto again = stratified_split(ds, 0.75, 7);
    CHECK(again.train == s.train);
    CHECK(again.test == s.test);
}

TEST_CASE("stratified split property over random datasets")
{
    auto rng = make_rng(2024);
    for (int trial = 0; trial < 200; ++trial) {
        const int classes = 2 + static_cast<int>(uniform_index(rng, 4));
        LabelVector labels;
        for (int c = 0; c < classes; ++c) {
            const auto k = 2 + uniform_index(rng, 30);
            labels.insert(labels.end(), k, c);
        }
        std::shuffle(labels.begin(), labels.end(), rng);
        auto ds = labelled(labels, classes);
        const double f = 0.05 + 0.9 * uniform01(rng);
        auto s = stratified_split(ds, f, rng());
        auto parent = class_counts(ds);
        auto train = class_counts(s.train);
        auto test = class_counts(s.test);
        for (auto [c, n] : parent) {
            CHECK(std::abs(f * n - train[c]) <= 1.0 + 1e-12);
            CHECK(train[c] >= 1);
            CHECK(test[c] >= 1);
        }
        // union of halves is the original multiset (feature 0 is the row id)
        std::vector<double> ids;
        for (const auto* half : { &s.train, &s.test }) {
            auto col = half->column(0);
            ids.insert(ids.end(), col.begin(), col.end());
        }
        std::sort(ids.begin(), ids.end());
        REQUIRE(ids.size() == ds.rows());
        for (std::size_t i = 0; i < ids.size(); ++i) {
            CHECK(ids[i] == static_cast<double>(i));
        }
    }
}

TEST_CASE("stratified split needs two rows per class")
{
    auto ds = labelled({ 0, 0, 0, 1 }, 2);
    try {
        stratified_split(ds, 0.75, 1);
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::SplitInfeasible);
    }
    CHECK_THROWS_AS(stratified_split(labelled({ 0, 0, 1, 1 }, 2), 1.0, 1), Error);
}

TEST_CASE("balanced accuracy examples")
{
    const LabelVector a { 0, 1, 2, 1, 0 };
    CHECK(balanced_accuracy(a, a) == 1.0);
    CHECK(balanced_accuracy(LabelVector { 0, 0, 1, 1 }, LabelVector { 0, 0, 0, 0 }) == 0.5);
    CHECK(balanced_accuracy(LabelVector { 0, 0, 0, 1, 1, 2 }, LabelVector { 0, 0, 1, 1, 0, 2 })
        == doctest::Approx((2.0 / 3.0 + 0.5 + 1.0) / 3.0).epsilon(1e-15));
    CHECK_THROWS_AS(balanced_accuracy(LabelVector { 0, 1 }, LabelVector { 0 }), Error);
}

TEST_CASE("balanced accuracy of a constant predictor is 1/C")
{
    for (int C = 2; C <= 6; ++C) {
        LabelVector truth;
        for (int c = 0; c < C; ++c) {
            truth.insert(truth.end(), static_cast<std::size_t>(c + 1), c);
        }
        LabelVector preds(truth.size(), C - 1);
        CHECK(balanced_accuracy(truth, preds) == doctest::Approx(1.0 / C).epsilon(1e-15));
    }
}

TEST_CASE("combine semantics")
{
    auto x = fixtures::from_rows({ { 1, 2 }, { 3, 4 } }, { 0, 1 }, 2);
    CHECK(combine(x, x) == x);

    Dataset a({ "f1", "f2" }, { 1, 2, 3, 4 }, { 0, 1 }, 2, LabelVector { 0, 0 });
    Dataset b({ "f2", "f3" }, { 9, 9, 5, 6 }, { 0, 1 }, 2, LabelVector { 1, 1 });
    auto ab = combine(a, b);
    CHECK(ab.feature_names() == std::vector<std::string> { "f1", "f2", "f3" });
    CHECK(ab.at(0, 1) == 3.0);
    CHECK(*ab.guess() == LabelVector { 0, 0 });
    auto ba = combine(b, a);
    CHECK(*ba.guess() == LabelVector { 1, 1 });
    CHECK(combine(a.with_guess(std::nullopt), b).guess() == b.guess());

    Dataset other({ "g" }, { 1, 2 }, { 1, 0 }, 2);
    try {
        combine(a, other);
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::IncompatibleCombine);
    }
    Dataset shorter({ "g" }, { 1 }, { 0 }, 2);
    CHECK_THROWS_AS(combine(a, shorter), Error);
}

TEST_CASE("combine is associative up to feature order")
{
    Dataset a({ "a", "s" }, { 1, 2, 3, 4 }, { 0, 1 }, 2);
    Dataset b({ "b", "s" }, { 5, 6, 7, 8 }, { 0, 1 }, 2);
    Dataset c({ "c", "a" }, { 9, 10, 11, 12 }, { 0, 1 }, 2);
    auto left = combine(combine(a, b), c);
    auto right = combine(a, combine(b, c));
    CHECK(left == right);
    CHECK(left.rows() == 2);
    CHECK(left.labels() == a.labels());
}

TEST_CASE("push guess to feature")
{
    Dataset ds({ "x" }, { 5, 6, 7 }, { 0, 1, 1 }, 2, LabelVector { 0, 1, 1 });
    auto once = push_guess_to_feature(ds, "guess_0");
    CHECK(once.feature_names() == std::vector<std::string> { "x", "guess_0" });
    CHECK(once.at(1, 1) == 1.0);
    CHECK_FALSE(once.guess().has_value());

    auto twice = push_guess_to_feature(once.with_guess(LabelVector { 1, 0, 0 }), "guess_0");
    CHECK(twice.feature_names() == std::vector<std::string> { "x", "guess_0", "guess_0_1" });
    CHECK(twice.at(0, 2) == 1.0);

    try {
        push_guess_to_feature(once, "guess_0");
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::NoGuess);
    }
}
