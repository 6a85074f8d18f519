#include "operators.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "error.hpp"

namespace tpot {

OperatorCategory category_of(OperatorKind kind) noexcept
{
    switch (kind) {
    case OperatorKind::StandardScale:
    case OperatorKind::RobustScale:
    case OperatorKind::PolynomialFeatures:
        return OperatorCategory::Preprocessor;
    case OperatorKind::RandomizedPCA:
        return OperatorCategory::Decomposition;
    case OperatorKind::VarianceThreshold:
    case OperatorKind::SelectKBest:
    case OperatorKind::SelectPercentile:
    case OperatorKind::RFE:
        return OperatorCategory::Selector;
    default:
        return OperatorCategory::Model;
    }
}

std::string_view name_of(OperatorKind kind) noexcept
{
    switch (kind) {
    case OperatorKind::StandardScale: return "StandardScale";
    case OperatorKind::RobustScale: return "RobustScale";
    case OperatorKind::PolynomialFeatures: return "PolynomialFeatures";
    case OperatorKind::RandomizedPCA: return "RandomizedPCA";
    case OperatorKind::VarianceThreshold: return "VarianceThreshold";
    case OperatorKind::SelectKBest: return "SelectKBest";
    case OperatorKind::SelectPercentile: return "SelectPercentile";
    case OperatorKind::RFE: return "RFE";
    case OperatorKind::DecisionTree: return "DecisionTree";
    case OperatorKind::RandomForest: return "RandomForest";
    case OperatorKind::GradientBoosting: return "GradientBoosting";
    case OperatorKind::LogisticRegression: return "LogisticRegression";
    case OperatorKind::LinearSVM: return "LinearSVM";
    case OperatorKind::KNN: return "KNN";
    }
    return "?";
}

std::optional<OperatorKind> kind_from_name(std::string_view name) noexcept
{
    for (auto k : kAllOperatorKinds) {
        if (name_of(k) == name) {
            return k;
        }
    }
    return std::nullopt;
}

std::vector<OperatorKind> kinds_in(OperatorCategory category)
{
    std::vector<OperatorKind> out;
    for (auto k : kAllOperatorKinds) {
        if (category_of(k) == category) {
            out.push_back(k);
        }
    }
    return out;
}

bool ParamDomain::contains(double v) const
{
    if (!std::isfinite(v)) {
        return false;
    }
    switch (type) {
    case Type::Integer:
        return v == std::floor(v) && v >= lo && v <= hi;
    case Type::Real:
    case Type::LogReal:
        return v >= lo && v <= hi;
    case Type::Choice:
        return std::find(choices.begin(), choices.end(), v) != choices.end();
    }
    return false;
}

double ParamDomain::sample(Rng& rng) const
{
    switch (type) {
    case Type::Integer:
        return static_cast<double>(std::uniform_int_distribution<long long>(
            static_cast<long long>(lo), static_cast<long long>(hi))(rng));
    case Type::Real:
        return std::uniform_real_distribution<double>(lo, hi)(rng);
    case Type::LogReal: {
        const double u = std::uniform_real_distribution<double>(std::log(lo), std::log(hi))(rng);
        return std::clamp(std::exp(u), lo, hi);
    }
    case Type::Choice:
        return choices[uniform_index(rng, choices.size())];
    }
    return lo;
}

namespace {

ParamDomain integer(double lo, double hi) { return { ParamDomain::Type::Integer, lo, hi, {} }; }
ParamDomain real(double lo, double hi) { return { ParamDomain::Type::Real, lo, hi, {} }; }
ParamDomain log_real(double lo, double hi) { return { ParamDomain::Type::LogReal, lo, hi, {} }; }
ParamDomain choice(std::vector<double> values)
{
    ParamDomain d { ParamDomain::Type::Choice, 0, 0, std::move(values) };
    d.lo = *std::min_element(d.choices.begin(), d.choices.end());
    d.hi = *std::max_element(d.choices.begin(), d.choices.end());
    return d;
}

ParamDomain depth_or_uncapped()
{
    std::vector<double> v { kUncappedDepth };
    for (int d = 1; d <= 10; ++d) {
        v.push_back(d);
    }
    return choice(std::move(v));
}

ParamDomain percentiles()
{
    std::vector<double> v;
    for (int p = 5; p <= 100; p += 5) {
        v.push_back(p);
    }
    return choice(std::move(v));
}

std::map<OperatorKind, ParamSchema> build_schemas()
{
    const double kmax = kMaxFeatureParam;
    std::map<OperatorKind, ParamSchema> s;
    s[OperatorKind::StandardScale] = {};
    s[OperatorKind::RobustScale] = {};
    s[OperatorKind::PolynomialFeatures] = {};
    s[OperatorKind::RandomizedPCA] = { { "n_components", integer(1, kmax) } };
    s[OperatorKind::VarianceThreshold] = { { "threshold", real(0.0, 0.25) } };
    s[OperatorKind::SelectKBest] = { { "k", integer(1, kmax) } };
    s[OperatorKind::SelectPercentile] = { { "percentile", percentiles() } };
    s[OperatorKind::RFE] = { { "n_features", integer(1, kmax) } };
    s[OperatorKind::DecisionTree] = { { "max_depth", depth_or_uncapped() } };
    s[OperatorKind::RandomForest] = { { "n_trees", integer(10, 500) }, { "max_depth", depth_or_uncapped() } };
    s[OperatorKind::GradientBoosting] = {
        { "n_trees", integer(10, 500) },
        { "learning_rate", log_real(0.01, 1.0) },
        { "max_depth", integer(1, 10) },
    };
    s[OperatorKind::LogisticRegression] = { { "C", log_real(1e-4, 1e2) } };
    s[OperatorKind::LinearSVM] = { { "C", log_real(1e-4, 1e2) } };
    s[OperatorKind::KNN] = { { "n_neighbors", integer(1, 50) } };
    return s;
}

} // namespace

const ParamSchema& schema_of(OperatorKind kind)
{
    static const auto schemas = build_schemas();
    return schemas.at(kind);
}

ParamVector sample_params(OperatorKind kind, Rng& rng)
{
    ParamVector out;
    for (const auto& spec : schema_of(kind)) {
        out.push_back(spec.domain.sample(rng));
    }
    return out;
}

std::string check_params(OperatorKind kind, std::span<const double> params)
{
    const auto& schema = schema_of(kind);
    if (params.size() != schema.size()) {
        return std::string(name_of(kind)) + " expects " + std::to_string(schema.size()) + " parameters, got "
            + std::to_string(params.size());
    }
    for (std::size_t i = 0; i < schema.size(); ++i) {
        if (!schema[i].domain.contains(params[i])) {
            return std::string(name_of(kind)) + "." + schema[i].name + " = " + std::to_string(params[i])
                + " outside its domain";
        }
    }
    return {};
}

double param_value(OperatorKind kind, std::span<const double> params, std::string_view name)
{
    const auto& schema = schema_of(kind);
    for (std::size_t i = 0; i < schema.size() && i < params.size(); ++i) {
        if (schema[i].name == name) {
            return params[i];
        }
    }
    fail(ErrorKind::Schema, std::string(name_of(kind)) + " has no parameter '" + std::string(name) + "'");
}

} // namespace tpot
