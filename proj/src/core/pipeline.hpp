#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "dataset.hpp"
#include "operators.hpp"
#include "rng.hpp"

namespace tpot {

enum class NodeType { Leaf, Transform, Combine, Model };

// Value-semantic tree node. Transform and Model nodes have one child,
// Combine has two, Leaf none.
struct PipelineNode {
    NodeType type = NodeType::Leaf;
    OperatorKind kind {}; // meaningful for Transform and Model
    ParamVector params;
    std::vector<PipelineNode> children;

    static PipelineNode leaf() { return {}; }
    static PipelineNode transform(OperatorKind kind, ParamVector params, PipelineNode child);
    static PipelineNode combine(PipelineNode left, PipelineNode right);
    static PipelineNode model(OperatorKind kind, ParamVector params, PipelineNode child);

    bool operator==(const PipelineNode&) const = default;
};

struct Pipeline {
    PipelineNode root;

    // Operator count: every non-Leaf node, Combine included.
    std::size_t size() const;
    // Operator levels on the longest root-to-leaf path; Model(Leaf) has depth 1.
    int depth() const;

    bool operator==(const Pipeline&) const = default;
};

std::size_t size_of(const PipelineNode& node);
int depth_of(const PipelineNode& node);

struct PipelineLimits {
    int max_depth = 6;
    std::size_t max_operators = 20;
};

// Empty iff the root is a Model, every node has the right arity and
// in-schema params, and the depth/size caps hold.
std::vector<std::string> validate(const Pipeline& p, const PipelineLimits& limits = {});

// Grow-style random tree: the root is a Model; below it each position is a
// Leaf with probability kLeafProbability, otherwise an operator (Combine with
// the same weight as any single kind). Positions at the depth limit are
// Leaves. Trees above max_operators are redrawn.
Pipeline random_pipeline(Rng& rng, int max_depth, std::size_t max_operators);
PipelineNode random_subtree(Rng& rng, int levels);

inline constexpr double kLeafProbability = 1.0 / 3.0;

// Node list in preorder with the parent link and level (root = 0).
struct NodeRef {
    PipelineNode* node;
    PipelineNode* parent;
    std::size_t slot; // index in parent->children
    int level;
};
std::vector<NodeRef> preorder(PipelineNode& root);

struct FitnessRecord {
    double balanced_accuracy = 0.0;
    std::size_t size = 0;
    std::int64_t eval_millis = 0;
    bool failed = false;
    std::string error; // reason when failed

    bool operator==(const FitnessRecord&) const = default;
};

inline constexpr double kInternalTrainFraction = 0.75;
inline constexpr std::int64_t kDefaultEvalBudgetMillis = 20000;

// Fitness on an internal 75/25 stratified split of `data` drawn from `seed`.
// Never throws: every failure becomes failed = true with accuracy 0.
FitnessRecord evaluate_pipeline(const Pipeline& p, const Dataset& data, std::uint64_t seed, std::int64_t budget_millis);

// Same, on a split the caller already drew (one per run).
FitnessRecord evaluate_on_split(const Pipeline& p, const SplitPair& split, std::uint64_t seed, std::int64_t budget_millis);

// Fits the pipeline on `train` and returns the root guess for `test`. Throws
// on any operator failure. Used for outer-holdout scoring.
LabelVector fit_predict(const Pipeline& p, const Dataset& train, const Dataset& test, std::uint64_t seed,
    std::int64_t budget_millis);

// Serialized tree document (version tag "tpot-tree/1").
std::string serialize(const Pipeline& p);
// Throws Error(Parse) with a location on malformed input.
Pipeline deserialize(const std::string& text);

// One-line rendering, e.g. KNN(StandardScale(Leaf), n_neighbors=5).
std::string render(const Pipeline& p);

} // namespace tpot
