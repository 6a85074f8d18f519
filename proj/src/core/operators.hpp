#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rng.hpp"

namespace tpot {

enum class OperatorKind {
    StandardScale,
    RobustScale,
    PolynomialFeatures,
    RandomizedPCA,
    VarianceThreshold,
    SelectKBest,
    SelectPercentile,
    RFE,
    DecisionTree,
    RandomForest,
    GradientBoosting,
    LogisticRegression,
    LinearSVM,
    KNN,
};

inline constexpr std::array kAllOperatorKinds {
    OperatorKind::StandardScale,
    OperatorKind::RobustScale,
    OperatorKind::PolynomialFeatures,
    OperatorKind::RandomizedPCA,
    OperatorKind::VarianceThreshold,
    OperatorKind::SelectKBest,
    OperatorKind::SelectPercentile,
    OperatorKind::RFE,
    OperatorKind::DecisionTree,
    OperatorKind::RandomForest,
    OperatorKind::GradientBoosting,
    OperatorKind::LogisticRegression,
    OperatorKind::LinearSVM,
    OperatorKind::KNN,
};

enum class OperatorCategory { Preprocessor, Decomposition, Selector, Model };

OperatorCategory category_of(OperatorKind kind) noexcept;
inline bool is_model(OperatorKind kind) noexcept { return category_of(kind) == OperatorCategory::Model; }

std::string_view name_of(OperatorKind kind) noexcept;
std::optional<OperatorKind> kind_from_name(std::string_view name) noexcept;

std::vector<OperatorKind> kinds_in(OperatorCategory category);

// One sampled value per schema dimension, in schema order. Integer and choice
// domains store exact integral values.
using ParamVector = std::vector<double>;

struct ParamDomain {
    enum class Type { Integer, Real, LogReal, Choice };

    Type type = Type::Integer;
    double lo = 0.0;
    double hi = 0.0;
    std::vector<double> choices {};

    bool contains(double v) const;
    double sample(Rng& rng) const;
};

struct ParamSpec {
    std::string name;
    ParamDomain domain;
};

using ParamSchema = std::vector<ParamSpec>;

// Depth parameters use this value to mean "no depth cap".
inline constexpr double kUncappedDepth = 0.0;

// Upper bound for data-width dependent parameters (k-best, RFE target, PCA
// components). Pipelines are generated without seeing the data, so over-asks
// are clamped at fit time.
inline constexpr int kMaxFeatureParam = 100;

const ParamSchema& schema_of(OperatorKind kind);

ParamVector sample_params(OperatorKind kind, Rng& rng);

// Empty string when valid; otherwise a description of the first offending
// dimension.
std::string check_params(OperatorKind kind, std::span<const double> params);

// Looks up a parameter by name; throws Error(Schema) if the kind has none.
double param_value(OperatorKind kind, std::span<const double> params, std::string_view name);

} // namespace tpot
