#include "linear.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>

#include "error.hpp"

namespace tpot::linear {

namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;
using MatrixMap = Eigen::Map<const MatrixXd>;

MatrixMap features_of(const Dataset& ds)
{
    return { ds.values().data(), static_cast<Index>(ds.rows()), static_cast<Index>(ds.cols()) };
}

// Largest eigenvalue of [X 1]^T [X 1] / n by power iteration.
double lipschitz_bound(const MatrixMap& X)
{
    const Index n = X.rows();
    const Index m = X.cols();
    VectorXd v = VectorXd::Ones(m + 1) / std::sqrt(static_cast<double>(m + 1));
    double lambda = 0.0;
    for (int it = 0; it < 30; ++it) {
        VectorXd Av = X * v.head(m) + VectorXd::Constant(n, v(m));
        VectorXd w(m + 1);
        w.head(m) = X.transpose() * Av;
        w(m) = Av.sum();
        w /= static_cast<double>(n);
        const double norm = w.norm();
        if (norm == 0.0) {
            return 1.0;
        }
        lambda = norm;
        v = w / norm;
    }
    return lambda;
}

struct LogisticState {
    double loss;
    MatrixXd gradW;
    VectorXd gradb;
};

LogisticState evaluate_logistic(const MatrixMap& X, const LabelVector& y, double C, const MatrixXd& W, const VectorXd& b)
{
    const Index n = X.rows();
    const Index K = W.cols();
    MatrixXd Z = X * W;
    Z.rowwise() += b.transpose();
    double loss = 0.0;
    for (Index i = 0; i < n; ++i) {
        const double zmax = Z.row(i).maxCoeff();
        double denom = 0.0;
        for (Index k = 0; k < K; ++k) {
            Z(i, k) = std::exp(Z(i, k) - zmax);
            denom += Z(i, k);
        }
        Z.row(i) /= denom;
        const double p = std::max(Z(i, y[static_cast<std::size_t>(i)]), 1e-300);
        loss -= std::log(p);
        Z(i, y[static_cast<std::size_t>(i)]) -= 1.0;
    }
    const double dn = static_cast<double>(n);
    const double reg = 1.0 / (C * dn);
    loss = loss / dn + 0.5 * reg * W.squaredNorm();
    Z /= dn;
    LogisticState s { loss, X.transpose() * Z + reg * W, Z.colwise().sum().transpose() };
    return s;
}

} // namespace

Objective logistic_objective(const Dataset& train, double C, std::span<const double> packed)
{
    const auto m = static_cast<Index>(train.cols());
    const auto K = static_cast<Index>(train.class_count());
    require(packed.size() == static_cast<std::size_t>(m * K + K), ErrorKind::Shape, "packed parameter size mismatch");
    const MatrixXd W = Eigen::Map<const MatrixXd>(packed.data(), m, K);
    const VectorXd b = Eigen::Map<const VectorXd>(packed.data() + m * K, K);
    auto s = evaluate_logistic(features_of(train), train.labels(), C, W, b);
    Objective out;
    out.loss = s.loss;
    out.grad.assign(s.gradW.data(), s.gradW.data() + s.gradW.size());
    out.grad.insert(out.grad.end(), s.gradb.data(), s.gradb.data() + s.gradb.size());
    return out;
}

Weights fit_logistic(const Dataset& train, double C, int max_iter, const Deadline& deadline)
{
    require(train.rows() > 0, ErrorKind::Training, "logistic regression on zero rows");
    const auto X = features_of(train);
    const Index m = X.cols();
    const Index K = train.class_count();
    const double n = static_cast<double>(train.rows());
    const double L = 0.5 * lipschitz_bound(X) * 1.01 + 1.0 / (C * n);
    const double step = 1.0 / L;

    MatrixXd W = MatrixXd::Zero(m, K);
    VectorXd b = VectorXd::Zero(K);
    MatrixXd W_prev = W;
    VectorXd b_prev = b;
    MatrixXd YW = W;
    VectorXd Yb = b;
    double t = 1.0;
    for (int it = 0; it < max_iter; ++it) {
        if (it % 8 == 0) {
            deadline.check();
        }
        auto s = evaluate_logistic(X, train.labels(), C, YW, Yb);
        const double gmax = std::max(s.gradW.size() ? s.gradW.cwiseAbs().maxCoeff() : 0.0, s.gradb.cwiseAbs().maxCoeff());
        if (gmax < 1e-7) {
            W = YW;
            b = Yb;
            break;
        }
        W_prev = W;
        b_prev = b;
        W = YW - step * s.gradW;
        b = Yb - step * s.gradb;
        // adaptive restart when momentum points uphill
        const double uphill = (s.gradW.array() * (W - W_prev).array()).sum() + s.gradb.dot(b - b_prev);
        if (uphill > 0.0) {
            t = 1.0;
        }
        const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
        const double beta = (t - 1.0) / t_next;
        YW = W + beta * (W - W_prev);
        Yb = b + beta * (b - b_prev);
        t = t_next;
    }
    Weights w;
    w.features = static_cast<std::size_t>(m);
    w.classes = static_cast<std::size_t>(K);
    w.W.assign(W.data(), W.data() + W.size());
    w.b.assign(b.data(), b.data() + b.size());
    return w;
}

namespace {

// Projected subgradient descent (Pegasos step schedule) for one binary
// problem with targets +-1; the bias is an extra regularized coordinate.
VectorXd fit_hinge(const MatrixMap& X, const VectorXd& y, double lambda, int max_iter, const Deadline& deadline)
{
    const Index n = X.rows();
    const Index m = X.cols();
    VectorXd w = VectorXd::Zero(m + 1);
    VectorXd best = w;
    double best_obj = std::numeric_limits<double>::infinity();
    const double radius = 1.0 / std::sqrt(lambda);
    for (int t = 1; t <= max_iter; ++t) {
        if (t % 8 == 0) {
            deadline.check();
        }
        VectorXd margin = (X * w.head(m)).array() + w(m);
        margin = margin.cwiseProduct(y);
        VectorXd coeff = VectorXd::Zero(n);
        double hinge = 0.0;
        for (Index i = 0; i < n; ++i) {
            if (margin(i) < 1.0) {
                hinge += 1.0 - margin(i);
                coeff(i) = y(i);
            }
        }
        const double obj = 0.5 * lambda * w.squaredNorm() + hinge / static_cast<double>(n);
        if (obj < best_obj) {
            best_obj = obj;
            best = w;
        }
        VectorXd g(m + 1);
        g.head(m) = lambda * w.head(m) - X.transpose() * coeff / static_cast<double>(n);
        g(m) = lambda * w(m) - coeff.sum() / static_cast<double>(n);
        w -= g / (lambda * static_cast<double>(t));
        const double norm = w.norm();
        if (norm > radius) {
            w *= radius / norm;
        }
    }
    return best;
}

} // namespace

Weights fit_linear_svm(const Dataset& train, double C, int max_iter, const Deadline& deadline)
{
    require(train.rows() > 0, ErrorKind::Training, "linear SVM on zero rows");
    const auto X = features_of(train);
    const Index n = X.rows();
    const Index m = X.cols();
    const auto K = static_cast<std::size_t>(train.class_count());
    const double lambda = 1.0 / (C * static_cast<double>(n));

    Weights w;
    w.features = static_cast<std::size_t>(m);
    w.classes = K;
    w.W.assign(static_cast<std::size_t>(m) * K, 0.0);
    w.b.assign(K, 0.0);
    auto store = [&](std::size_t c, const VectorXd& v, double sign) {
        for (Index j = 0; j < m; ++j) {
            w.W[c * static_cast<std::size_t>(m) + static_cast<std::size_t>(j)] = sign * v(j);
        }
        w.b[c] = sign * v(m);
    };
    const std::size_t problems = K == 2 ? 1 : K;
    for (std::size_t p = 0; p < problems; ++p) {
        const std::size_t positive = K == 2 ? 1 : p;
        VectorXd y(n);
        for (Index i = 0; i < n; ++i) {
            y(i) = static_cast<std::size_t>(train.labels()[static_cast<std::size_t>(i)]) == positive ? 1.0 : -1.0;
        }
        const VectorXd v = fit_hinge(X, y, lambda, max_iter, deadline);
        if (K == 2) {
            store(1, v, 1.0);
            store(0, v, -1.0);
        } else {
            store(p, v, 1.0);
        }
    }
    return w;
}

std::vector<double> scores(const Weights& w, const Dataset& ds)
{
    require(ds.cols() == w.features, ErrorKind::Shape,
        "linear model trained on width " + std::to_string(w.features) + ", got " + std::to_string(ds.cols()));
    const auto X = features_of(ds);
    const Eigen::Map<const MatrixXd> W(w.W.data(), static_cast<Index>(w.features), static_cast<Index>(w.classes));
    const Eigen::Map<const VectorXd> b(w.b.data(), static_cast<Index>(w.classes));
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> Z = X * W;
    Z.rowwise() += b.transpose();
    return { Z.data(), Z.data() + Z.size() };
}

LabelVector argmax_rows(std::span<const double> scores, std::size_t classes)
{
    const std::size_t n = scores.size() / classes;
    LabelVector out(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t best = 0;
        for (std::size_t c = 1; c < classes; ++c) {
            if (scores[i * classes + c] > scores[i * classes + best]) {
                best = c;
            }
        }
        out[i] = static_cast<Label>(best);
    }
    return out;
}

} // namespace tpot::linear
