#include "transforms.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <unordered_set>

#include <Eigen/Dense>

#include "error.hpp"
#include "linear.hpp"
#include "rng.hpp"

namespace tpot {

namespace {

using MatrixMap = Eigen::Map<const Eigen::MatrixXd>;

std::vector<std::string> wrap_names(const std::vector<std::string>& names, const char* fn)
{
    std::vector<std::string> out;
    out.reserve(names.size());
    for (const auto& n : names) {
        out.push_back(std::string(fn) + "(" + n + ")");
    }
    return out;
}

std::uint64_t name_digest(const std::vector<std::string>& names)
{
    std::uint64_t h = 0x84222325cbf29ce4ULL;
    for (const auto& n : names) {
        for (unsigned char c : n) {
            h = (h ^ c) * 0x100000001b3ULL;
        }
        h = mix64(h);
    }
    return h;
}

ScaleState fit_standard(const Dataset& ds)
{
    ScaleState s;
    const auto n = static_cast<double>(ds.rows());
    for (std::size_t j = 0; j < ds.cols(); ++j) {
        auto c = ds.column(j);
        const double mean = std::accumulate(c.begin(), c.end(), 0.0) / n;
        double ss = 0.0;
        for (double v : c) {
            ss += (v - mean) * (v - mean);
        }
        const double sd = std::sqrt(ss / n);
        s.center.push_back(mean);
        s.scale.push_back(sd > 1e-12 * std::max(1.0, std::abs(mean)) ? sd : 0.0);
    }
    return s;
}

ScaleState fit_robust(const Dataset& ds)
{
    ScaleState s;
    for (std::size_t j = 0; j < ds.cols(); ++j) {
        auto c = ds.column(j);
        std::vector<double> v(c.begin(), c.end());
        const double med = quantile(v, 0.5);
        const double iqr = quantile(v, 0.75) - quantile(v, 0.25);
        s.center.push_back(med);
        s.scale.push_back(iqr > 0.0 ? iqr : 0.0);
    }
    return s;
}

std::vector<double> apply_scale(const ScaleState& s, const Dataset& ds)
{
    std::vector<double> out(ds.values().size());
    const auto n = ds.rows();
    for (std::size_t j = 0; j < ds.cols(); ++j) {
        auto c = ds.column(j);
        for (std::size_t i = 0; i < n; ++i) {
            out[j * n + i] = s.scale[j] > 0.0 ? (c[i] - s.center[j]) / s.scale[j] : 0.0;
        }
    }
    return out;
}

std::vector<std::string> polynomial_names(const std::vector<std::string>& in)
{
    std::vector<std::string> out;
    std::unordered_set<std::string> taken;
    auto push = [&](const std::string& base) {
        auto name = base;
        for (std::size_t k = 1; taken.count(name) > 0; ++k) {
            name = base + "_" + std::to_string(k);
        }
        taken.insert(name);
        out.push_back(std::move(name));
    };
    push("1");
    for (const auto& n : in) {
        push(n);
    }
    for (std::size_t a = 0; a < in.size(); ++a) {
        for (std::size_t b = a; b < in.size(); ++b) {
            push(a == b ? in[a] + "^2" : in[a] + "*" + in[b]);
        }
    }
    return out;
}

// Expansion beyond this many output cells is refused as a resource failure.
constexpr std::size_t kMaxPolynomialCells = 20'000'000;

std::vector<double> apply_polynomial(const Dataset& ds, const Deadline& deadline)
{
    const auto n = ds.rows();
    const auto m = ds.cols();
    require(n * (m + 1) * (m + 2) / 2 <= kMaxPolynomialCells, ErrorKind::BudgetExceeded,
        "PolynomialFeatures output of " + std::to_string((m + 1) * (m + 2) / 2) + " columns is too large");
    std::vector<double> out;
    out.reserve(n * (m + 1) * (m + 2) / 2);
    out.insert(out.end(), n, 1.0);
    out.insert(out.end(), ds.values().begin(), ds.values().end());
    for (std::size_t a = 0; a < m; ++a) {
        deadline.check();
        auto ca = ds.column(a);
        for (std::size_t b = a; b < m; ++b) {
            auto cb = ds.column(b);
            for (std::size_t i = 0; i < n; ++i) {
                out.push_back(ca[i] * cb[i]);
            }
        }
    }
    return out;
}

Eigen::MatrixXd orthonormal_basis(const Eigen::MatrixXd& Y)
{
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(Y);
    return qr.householderQ() * Eigen::MatrixXd::Identity(Y.rows(), Y.cols());
}

// Leading right singular vectors of the centered matrix X (n x m), as an
// m x k matrix. Randomized range finder for wide inputs, dense covariance
// eigendecomposition for m <= 64.
Eigen::MatrixXd principal_axes(const Eigen::MatrixXd& X, std::size_t k, std::uint64_t seed)
{
    const auto m = static_cast<Eigen::Index>(X.cols());
    const auto kk = static_cast<Eigen::Index>(k);
    Eigen::MatrixXd axes;
    if (m <= 64) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(X.transpose() * X);
        // eigenvalues ascending: take the last k, largest first
        axes = eig.eigenvectors().rightCols(kk).rowwise().reverse();
    } else {
        const auto l = std::min<Eigen::Index>(kk + 10, std::min<Eigen::Index>(m, X.rows()));
        auto rng = make_rng(seed);
        std::normal_distribution<double> gauss(0.0, 1.0);
        Eigen::MatrixXd omega(m, l);
        for (Eigen::Index c = 0; c < l; ++c) {
            for (Eigen::Index r = 0; r < m; ++r) {
                omega(r, c) = gauss(rng);
            }
        }
        Eigen::MatrixXd Q = orthonormal_basis(X * omega);
        for (int it = 0; it < 2; ++it) {
            Eigen::MatrixXd Z = orthonormal_basis(X.transpose() * Q);
            Q = orthonormal_basis(X * Z);
        }
        Eigen::MatrixXd B = Q.transpose() * X; // l x m
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(B * B.transpose());
        const Eigen::MatrixXd U = eig.eigenvectors().rowwise().reverse();
        axes.resize(m, kk);
        for (Eigen::Index c = 0; c < kk; ++c) {
            Eigen::VectorXd v = B.transpose() * U.col(c);
            const double norm = v.norm();
            axes.col(c) = norm > 0.0 ? Eigen::VectorXd(v / norm) : Eigen::VectorXd::Zero(m);
        }
    }
    for (Eigen::Index c = 0; c < axes.cols(); ++c) {
        Eigen::Index arg = 0;
        axes.col(c).cwiseAbs().maxCoeff(&arg);
        if (axes(arg, c) < 0.0) {
            axes.col(c) *= -1.0;
        }
    }
    return axes;
}

ProjectionState fit_pca(const Dataset& ds, std::size_t requested, std::uint64_t seed)
{
    const auto n = ds.rows();
    const auto m = ds.cols();
    require(n >= 2 && m >= 1, ErrorKind::DegenerateOutput, "RandomizedPCA needs at least 2 rows and 1 column");
    const std::size_t k = std::clamp<std::size_t>(requested, 1, std::min(m, n - 1));
    MatrixMap X(ds.values().data(), static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(m));
    const Eigen::RowVectorXd mean = X.colwise().mean();
    const Eigen::MatrixXd centered = X.rowwise() - mean;
    const Eigen::MatrixXd axes = principal_axes(centered, k, seed);

    ProjectionState s;
    s.mean.assign(mean.data(), mean.data() + m);
    s.components.assign(axes.data(), axes.data() + axes.size());
    s.k = k;
    return s;
}

std::vector<double> apply_pca(const ProjectionState& s, const Dataset& ds)
{
    const auto n = static_cast<Eigen::Index>(ds.rows());
    const auto m = static_cast<Eigen::Index>(ds.cols());
    MatrixMap X(ds.values().data(), n, m);
    Eigen::Map<const Eigen::RowVectorXd> mean(s.mean.data(), m);
    MatrixMap V(s.components.data(), m, static_cast<Eigen::Index>(s.k));
    const Eigen::MatrixXd Z = (X.rowwise() - mean) * V;
    return { Z.data(), Z.data() + Z.size() };
}

std::vector<std::size_t> top_k_by_score(const std::vector<double>& scores, std::size_t k)
{
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), std::size_t { 0 });
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return scores[a] > scores[b]; });
    order.resize(std::min(k, order.size()));
    std::sort(order.begin(), order.end());
    return order;
}

SelectionState fit_rfe(const Dataset& ds, std::size_t target, const Deadline& deadline)
{
    std::vector<std::size_t> remaining(ds.cols());
    std::iota(remaining.begin(), remaining.end(), std::size_t { 0 });
    target = std::min(target, remaining.size());
    while (remaining.size() > target) {
        deadline.check();
        const auto sub = ds.select_columns(remaining);
        const auto w = linear::fit_logistic(sub, 1.0, 100, deadline);
        std::vector<double> importance(remaining.size(), 0.0);
        for (std::size_t j = 0; j < remaining.size(); ++j) {
            for (std::size_t c = 0; c < w.classes; ++c) {
                const double v = w.W[c * w.features + j];
                importance[j] += v * v;
            }
        }
        const std::size_t step = std::max<std::size_t>(1, remaining.size() / 10);
        const std::size_t drop = std::min(step, remaining.size() - target);
        std::vector<std::size_t> order(remaining.size());
        std::iota(order.begin(), order.end(), std::size_t { 0 });
        // weakest first; among equals drop the later column
        std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) {
            return importance[a] < importance[b] || (importance[a] == importance[b] && a > b);
        });
        std::vector<bool> dropped(remaining.size(), false);
        for (std::size_t t = 0; t < drop; ++t) {
            dropped[order[t]] = true;
        }
        std::vector<std::size_t> next;
        for (std::size_t j = 0; j < remaining.size(); ++j) {
            if (!dropped[j]) {
                next.push_back(remaining[j]);
            }
        }
        remaining = std::move(next);
    }
    return { remaining };
}

std::size_t as_count(double v) { return static_cast<std::size_t>(std::max(0.0, v)); }

} // namespace

double quantile(std::vector<double> values, double q)
{
    require(!values.empty(), ErrorKind::Contract, "quantile of an empty sample");
    std::sort(values.begin(), values.end());
    const double pos = q * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, values.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return values[lo] + frac * (values[hi] - values[lo]);
}

std::vector<double> anova_f_scores(const Dataset& ds)
{
    const auto n = ds.rows();
    const auto C = static_cast<std::size_t>(ds.class_count());
    std::vector<double> class_n(C, 0.0);
    for (auto l : ds.labels()) {
        class_n[static_cast<std::size_t>(l)] += 1.0;
    }
    std::size_t present = 0;
    for (double c : class_n) {
        present += c > 0.0 ? 1 : 0;
    }
    std::vector<double> scores(ds.cols(), 0.0);
    if (present < 2 || n <= present) {
        return scores;
    }
    std::vector<double> sum(C);
    for (std::size_t j = 0; j < ds.cols(); ++j) {
        auto col = ds.column(j);
        std::fill(sum.begin(), sum.end(), 0.0);
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            sum[static_cast<std::size_t>(ds.labels()[i])] += col[i];
            total += col[i];
        }
        const double grand = total / static_cast<double>(n);
        double ssb = 0.0;
        for (std::size_t c = 0; c < C; ++c) {
            if (class_n[c] > 0.0) {
                const double mu = sum[c] / class_n[c];
                ssb += class_n[c] * (mu - grand) * (mu - grand);
            }
        }
        double ssw = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const auto c = static_cast<std::size_t>(ds.labels()[i]);
            const double d = col[i] - sum[c] / class_n[c];
            ssw += d * d;
        }
        const double scale = std::max(1.0, grand * grand) * 1e-24 * static_cast<double>(n);
        if (ssb <= scale) {
            scores[j] = 0.0;
        } else if (ssw <= scale) {
            scores[j] = std::numeric_limits<double>::infinity();
        } else {
            const double dfb = static_cast<double>(present - 1);
            const double dfw = static_cast<double>(n - present);
            scores[j] = (ssb / dfb) / (ssw / dfw);
        }
    }
    return scores;
}

std::pair<FittedTransform, Dataset> fit_transform(OperatorKind kind,
    const ParamVector& params,
    const Dataset& train,
    std::uint64_t seed,
    const Deadline& deadline)
{
    require(!is_model(kind), ErrorKind::Contract, std::string(name_of(kind)) + " is a model, not a transform");
    if (auto msg = check_params(kind, params); !msg.empty()) {
        fail(ErrorKind::Schema, msg);
    }
    require(train.rows() >= 2, ErrorKind::Training, "transforms need at least 2 training rows");

    FittedTransform t;
    t.kind = kind;
    t.params = params;
    t.input_width = train.cols();
    const auto& names = train.feature_names();
    const auto m = train.cols();

    switch (kind) {
    case OperatorKind::StandardScale:
        t.state = fit_standard(train);
        t.output_names = wrap_names(names, "ss");
        break;
    case OperatorKind::RobustScale:
        t.state = fit_robust(train);
        t.output_names = wrap_names(names, "rs");
        break;
    case OperatorKind::PolynomialFeatures:
        require(train.rows() * (m + 1) * (m + 2) / 2 <= kMaxPolynomialCells, ErrorKind::BudgetExceeded,
            "PolynomialFeatures output of " + std::to_string((m + 1) * (m + 2) / 2) + " columns is too large");
        t.state = PolynomialState {};
        t.output_names = polynomial_names(names);
        break;
    case OperatorKind::RandomizedPCA: {
        auto s = fit_pca(train, as_count(param_value(kind, params, "n_components")), seed);
        char tag[32];
        std::snprintf(tag, sizeof tag, "@%08x", static_cast<unsigned>(name_digest(names) & 0xffffffffU));
        for (std::size_t c = 0; c < s.k; ++c) {
            t.output_names.push_back("pca" + std::to_string(c) + tag);
        }
        t.state = std::move(s);
        break;
    }
    case OperatorKind::VarianceThreshold: {
        const double threshold = param_value(kind, params, "threshold");
        SelectionState s;
        for (std::size_t j = 0; j < m; ++j) {
            auto c = train.column(j);
            const double mean = std::accumulate(c.begin(), c.end(), 0.0) / static_cast<double>(c.size());
            double var = 0.0;
            for (double v : c) {
                var += (v - mean) * (v - mean);
            }
            var /= static_cast<double>(c.size());
            if (var > threshold) {
                s.keep.push_back(j);
            }
        }
        t.state = std::move(s);
        break;
    }
    case OperatorKind::SelectKBest:
        t.state = SelectionState { top_k_by_score(anova_f_scores(train), as_count(param_value(kind, params, "k"))) };
        break;
    case OperatorKind::SelectPercentile: {
        const double pct = param_value(kind, params, "percentile");
        const auto k = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(static_cast<double>(m) * pct / 100.0 - 1e-9)));
        t.state = SelectionState { top_k_by_score(anova_f_scores(train), k) };
        break;
    }
    case OperatorKind::RFE:
        t.state = fit_rfe(train, std::max<std::size_t>(1, as_count(param_value(kind, params, "n_features"))), deadline);
        break;
    default:
        fail(ErrorKind::Contract, "unhandled transform kind");
    }
    if (auto* sel = std::get_if<SelectionState>(&t.state)) {
        for (auto j : sel->keep) {
            t.output_names.push_back(names[j]);
        }
    }
    auto out = apply_transform(t, train, deadline);
    return { std::move(t), std::move(out) };
}

Dataset apply_transform(const FittedTransform& t, const Dataset& ds, const Deadline& deadline)
{
    require(ds.cols() == t.input_width, ErrorKind::Shape,
        std::string(name_of(t.kind)) + " fitted on width " + std::to_string(t.input_width) + ", got "
            + std::to_string(ds.cols()));
    require(!t.output_names.empty(), ErrorKind::DegenerateOutput,
        std::string(name_of(t.kind)) + " produced zero columns");
    return std::visit(
        [&](const auto& s) -> Dataset {
            using S = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<S, ScaleState>) {
                return ds.with_features(t.output_names, apply_scale(s, ds));
            } else if constexpr (std::is_same_v<S, PolynomialState>) {
                return ds.with_features(t.output_names, apply_polynomial(ds, deadline));
            } else if constexpr (std::is_same_v<S, ProjectionState>) {
                return ds.with_features(t.output_names, apply_pca(s, ds));
            } else {
                return ds.select_columns(s.keep);
            }
        },
        t.state);
}

} // namespace tpot
