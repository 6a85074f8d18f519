#include "pipeline.hpp"

#include <algorithm>
#include <chrono>

#include "deadline.hpp"
#include "error.hpp"
#include "models.hpp"
#include "transforms.hpp"

namespace tpot {

PipelineNode PipelineNode::transform(OperatorKind kind, ParamVector params, PipelineNode child)
{
    PipelineNode n;
    n.type = NodeType::Transform;
    n.kind = kind;
    n.params = std::move(params);
    n.children.push_back(std::move(child));
    return n;
}

PipelineNode PipelineNode::combine(PipelineNode left, PipelineNode right)
{
    PipelineNode n;
    n.type = NodeType::Combine;
    n.children.push_back(std::move(left));
    n.children.push_back(std::move(right));
    return n;
}

PipelineNode PipelineNode::model(OperatorKind kind, ParamVector params, PipelineNode child)
{
    PipelineNode n = transform(kind, std::move(params), std::move(child));
    n.type = NodeType::Model;
    return n;
}

std::size_t size_of(const PipelineNode& node)
{
    std::size_t s = node.type == NodeType::Leaf ? 0 : 1;
    for (const auto& c : node.children) {
        s += size_of(c);
    }
    return s;
}

int depth_of(const PipelineNode& node)
{
    if (node.type == NodeType::Leaf) {
        return 0;
    }
    int d = 0;
    for (const auto& c : node.children) {
        d = std::max(d, depth_of(c));
    }
    return d + 1;
}

std::size_t Pipeline::size() const { return size_of(root); }
int Pipeline::depth() const { return depth_of(root); }

namespace {

const char* type_name(NodeType t)
{
    switch (t) {
    case NodeType::Leaf: return "Leaf";
    case NodeType::Transform: return "Transform";
    case NodeType::Combine: return "Combine";
    case NodeType::Model: return "Model";
    }
    return "?";
}

void check_node(const PipelineNode& n, const std::string& where, std::vector<std::string>& out)
{
    std::size_t arity = 0;
    switch (n.type) {
    case NodeType::Leaf:
        arity = 0;
        break;
    case NodeType::Combine:
        arity = 2;
        break;
    case NodeType::Transform:
        arity = 1;
        if (is_model(n.kind)) {
            out.push_back(where + ": Transform node holds model kind " + std::string(name_of(n.kind)));
        }
        break;
    case NodeType::Model:
        arity = 1;
        if (!is_model(n.kind)) {
            out.push_back(where + ": Model node holds non-model kind " + std::string(name_of(n.kind)));
        }
        break;
    }
    if (n.children.size() != arity) {
        out.push_back(where + ": " + type_name(n.type) + " expects " + std::to_string(arity) + " children, has "
            + std::to_string(n.children.size()));
    }
    if (n.type == NodeType::Transform || n.type == NodeType::Model) {
        if (auto msg = check_params(n.kind, n.params); !msg.empty()) {
            out.push_back(where + " (" + std::string(name_of(n.kind)) + "): " + msg);
        }
    } else if (!n.params.empty()) {
        out.push_back(where + ": " + type_name(n.type) + " takes no parameters");
    }
    for (std::size_t i = 0; i < n.children.size(); ++i) {
        check_node(n.children[i], where + ".children[" + std::to_string(i) + "]", out);
    }
}

} // namespace

std::vector<std::string> validate(const Pipeline& p, const PipelineLimits& limits)
{
    std::vector<std::string> out;
    if (p.root.type != NodeType::Model) {
        out.push_back("root: root is not a Model node");
    }
    check_node(p.root, "root", out);
    if (const int d = p.depth(); d > limits.max_depth) {
        out.push_back("depth " + std::to_string(d) + " exceeds max_depth " + std::to_string(limits.max_depth));
    }
    if (const auto s = p.size(); s > limits.max_operators) {
        out.push_back("size " + std::to_string(s) + " exceeds max_operators " + std::to_string(limits.max_operators));
    }
    return out;
}

PipelineNode random_subtree(Rng& rng, int levels)
{
    if (levels <= 0 || bernoulli(rng, kLeafProbability)) {
        return PipelineNode::leaf();
    }
    const std::size_t pick = uniform_index(rng, kAllOperatorKinds.size() + 1);
    if (pick == kAllOperatorKinds.size()) {
        auto left = random_subtree(rng, levels - 1);
        auto right = random_subtree(rng, levels - 1);
        return PipelineNode::combine(std::move(left), std::move(right));
    }
    const auto kind = kAllOperatorKinds[pick];
    auto params = sample_params(kind, rng);
    auto child = random_subtree(rng, levels - 1);
    return is_model(kind) ? PipelineNode::model(kind, std::move(params), std::move(child))
                          : PipelineNode::transform(kind, std::move(params), std::move(child));
}

Pipeline random_pipeline(Rng& rng, int max_depth, std::size_t max_operators)
{
    require(max_depth >= 1, ErrorKind::Contract, "max_depth must be at least 1");
    require(max_operators >= 1, ErrorKind::Contract, "max_operators must be at least 1");
    static const auto models = kinds_in(OperatorCategory::Model);
    for (int attempt = 0; attempt < 1000; ++attempt) {
        const auto kind = models[uniform_index(rng, models.size())];
        auto params = sample_params(kind, rng);
        Pipeline p { PipelineNode::model(kind, std::move(params), random_subtree(rng, max_depth - 1)) };
        if (p.size() <= max_operators) {
            return p;
        }
    }
    const auto kind = models[uniform_index(rng, models.size())];
    return { PipelineNode::model(kind, sample_params(kind, rng), PipelineNode::leaf()) };
}

namespace {

void collect(PipelineNode& n, PipelineNode* parent, std::size_t slot, int level, std::vector<NodeRef>& out)
{
    out.push_back({ &n, parent, slot, level });
    for (std::size_t i = 0; i < n.children.size(); ++i) {
        collect(n.children[i], &n, i, level + 1, out);
    }
}

struct Flow {
    Dataset train;
    Dataset test;
};

class Executor {
public:
    Executor(std::uint64_t seed, const Deadline& deadline)
        : seed_(seed)
        , deadline_(deadline)
    {
    }

    Flow run(const PipelineNode& n, const Flow& input)
    {
        const std::size_t id = next_id_++;
        deadline_.check();
        switch (n.type) {
        case NodeType::Leaf:
            return input;
        case NodeType::Combine: {
            auto a = run(n.children[0], input);
            auto b = run(n.children[1], input);
            return { combine(a.train, b.train), combine(a.test, b.test) };
        }
        case NodeType::Transform: {
            auto in = run(n.children[0], input);
            auto [t, train] = fit_transform(n.kind, n.params, in.train, derive_seed(seed_, { id }), deadline_);
            auto test = apply_transform(t, in.test, deadline_);
            return { std::move(train), std::move(test) };
        }
        case NodeType::Model: {
            auto in = run(n.children[0], input);
            // The previous classifier's guess becomes an ordinary feature
            // before this classifier trains.
            if (in.train.guess()) {
                const auto tag = "guess_n" + std::to_string(id);
                in.train = push_guess_to_feature(in.train, tag);
                in.test = push_guess_to_feature(in.test, tag);
            }
            auto model = train_model(n.kind, n.params, in.train, derive_seed(seed_, { id }), deadline_);
            auto train_guess = predict(model, in.train, deadline_);
            auto test_guess = predict(model, in.test, deadline_);
            return { in.train.with_guess(std::move(train_guess)), in.test.with_guess(std::move(test_guess)) };
        }
        }
        fail(ErrorKind::Contract, "unknown node type");
    }

private:
    std::uint64_t seed_;
    const Deadline& deadline_;
    std::size_t next_id_ = 0;
};

} // namespace

std::vector<NodeRef> preorder(PipelineNode& root)
{
    std::vector<NodeRef> out;
    collect(root, nullptr, 0, 0, out);
    return out;
}

LabelVector fit_predict(const Pipeline& p, const Dataset& train, const Dataset& test, std::uint64_t seed,
    std::int64_t budget_millis)
{
    require(p.root.type == NodeType::Model, ErrorKind::Contract, "root is not a Model node");
    const auto deadline = Deadline::after_millis(budget_millis);
    Executor exec(seed, deadline);
    auto out = exec.run(p.root, { train.with_guess(std::nullopt), test.with_guess(std::nullopt) });
    return *out.test.guess();
}

FitnessRecord evaluate_on_split(const Pipeline& p, const SplitPair& split, std::uint64_t seed, std::int64_t budget_millis)
{
    const auto start = std::chrono::steady_clock::now();
    FitnessRecord rec;
    rec.size = p.size();
    try {
        auto problems = validate(p, { std::max(p.depth(), 1), std::max<std::size_t>(rec.size, 1) });
        require(problems.empty(), ErrorKind::Schema, problems.empty() ? "" : problems.front());
        auto guess = fit_predict(p, split.train, split.test, seed, budget_millis);
        rec.balanced_accuracy = balanced_accuracy(split.test.labels(), guess);
    } catch (const std::exception& e) {
        rec.failed = true;
        rec.balanced_accuracy = 0.0;
        rec.error = e.what();
    }
    rec.eval_millis = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start).count();
    return rec;
}

FitnessRecord evaluate_pipeline(const Pipeline& p, const Dataset& data, std::uint64_t seed, std::int64_t budget_millis)
{
    SplitPair split;
    try {
        split = stratified_split(data, kInternalTrainFraction, seed);
    } catch (const std::exception& e) {
        FitnessRecord rec;
        rec.size = p.size();
        rec.failed = true;
        rec.error = e.what();
        return rec;
    }
    return evaluate_on_split(p, split, seed, budget_millis);
}

} // namespace tpot
