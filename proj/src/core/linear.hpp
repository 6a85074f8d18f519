#pragma once

#include <span>
#include <vector>

#include "dataset.hpp"
#include "deadline.hpp"

namespace tpot::linear {

// Per-class linear scores: score_c(x) = x . W[:, c] + b[c].
struct Weights {
    std::size_t features = 0;
    std::size_t classes = 0;
    std::vector<double> W; // features x classes, column-major
    std::vector<double> b;
};

struct Objective {
    double loss = 0.0;
    std::vector<double> grad;
};

// Multinomial logistic objective with L2 penalty in the inverse-strength
// convention:  mean_i(-log softmax_i[y_i]) + ||W||^2 / (2 C n).
// `packed` holds W column-major followed by b.
Objective logistic_objective(const Dataset& train, double C, std::span<const double> packed);

// Accelerated gradient descent on logistic_objective.
Weights fit_logistic(const Dataset& train, double C, int max_iter, const Deadline& deadline);

// One-vs-rest hinge loss with L2 penalty lambda = 1 / (C n), full-batch
// projected subgradient descent (best iterate kept). Binary problems train a
// single separator stored as two mirrored columns.
Weights fit_linear_svm(const Dataset& train, double C, int max_iter, const Deadline& deadline);

// n x classes score matrix, row-major.
std::vector<double> scores(const Weights& w, const Dataset& ds);

// argmax per row, lowest class on ties.
LabelVector argmax_rows(std::span<const double> scores, std::size_t classes);

} // namespace tpot::linear
