#include <utility>

#include "evolve.hpp"

namespace tpot {

namespace {

bool within(const Pipeline& p, const PipelineLimits& limits)
{
    return p.depth() <= limits.max_depth && p.size() <= limits.max_operators && p.root.type == NodeType::Model;
}

bool is_operator(const PipelineNode& n) { return n.type == NodeType::Transform || n.type == NodeType::Model; }

Pipeline point_mutation(const Pipeline& p, Rng& rng)
{
    Pipeline out = p;
    auto nodes = preorder(out.root);
    std::vector<PipelineNode*> targets;
    for (auto& ref : nodes) {
        if (is_operator(*ref.node)) {
            targets.push_back(ref.node);
        }
    }
    PipelineNode& n = *targets[uniform_index(rng, targets.size())];
    const auto kinds = kinds_in(category_of(n.kind));
    n.kind = kinds[uniform_index(rng, kinds.size())];
    n.params = sample_params(n.kind, rng);
    return out;
}

std::optional<Pipeline> insert_mutation(const Pipeline& p, Rng& rng)
{
    Pipeline out = p;
    auto nodes = preorder(out.root);
    const auto& ref = nodes[1 + uniform_index(rng, nodes.size() - 1)];
    PipelineNode& target = ref.parent->children[ref.slot];
    if (target.type == NodeType::Leaf && bernoulli(rng, 0.5)) {
        target = PipelineNode::combine(PipelineNode::leaf(), PipelineNode::leaf());
        return out;
    }
    static const auto transforms = [] {
        std::vector<OperatorKind> ks;
        for (auto k : kAllOperatorKinds) {
            if (!is_model(k)) {
                ks.push_back(k);
            }
        }
        return ks;
    }();
    const auto kind = transforms[uniform_index(rng, transforms.size())];
    auto params = sample_params(kind, rng);
    target = PipelineNode::transform(kind, std::move(params), std::move(target));
    return out;
}

std::optional<Pipeline> shrink_mutation(const Pipeline& p, Rng& rng)
{
    Pipeline out = p;
    auto nodes = preorder(out.root);
    std::vector<NodeRef> internal;
    for (std::size_t i = 1; i < nodes.size(); ++i) {
        if (nodes[i].node->type != NodeType::Leaf) {
            internal.push_back(nodes[i]);
        }
    }
    if (internal.empty()) {
        return std::nullopt;
    }
    const auto& ref = internal[uniform_index(rng, internal.size())];
    PipelineNode& target = ref.parent->children[ref.slot];
    const std::size_t keep = target.children.size() == 2 ? uniform_index(rng, 2) : 0;
    PipelineNode child = std::move(target.children[keep]);
    target = std::move(child);
    return out;
}

} // namespace

Pipeline mutate_with(const Pipeline& p, MutationKind kind, Rng& rng, const PipelineLimits& limits)
{
    std::optional<Pipeline> out;
    if (kind == MutationKind::Insert) {
        out = insert_mutation(p, rng);
    } else if (kind == MutationKind::Shrink) {
        out = shrink_mutation(p, rng);
    }
    if (out && within(*out, limits)) {
        return std::move(*out);
    }
    return point_mutation(p, rng);
}

Pipeline mutate(const Pipeline& p, Rng& rng, const PipelineLimits& limits)
{
    static constexpr MutationKind kinds[] = { MutationKind::Point, MutationKind::Insert, MutationKind::Shrink };
    return mutate_with(p, kinds[uniform_index(rng, 3)], rng, limits);
}

namespace {

enum class Slot { Model, Data, Leaf };

Slot slot_of(const PipelineNode& n)
{
    switch (n.type) {
    case NodeType::Model: return Slot::Model;
    case NodeType::Leaf: return Slot::Leaf;
    default: return Slot::Data;
    }
}

// model <-> model, non-model <-> non-model, leaf <-> non-model subtree.
bool compatible(Slot a, Slot b)
{
    if (a == Slot::Model || b == Slot::Model) {
        return a == b;
    }
    return !(a == Slot::Leaf && b == Slot::Leaf);
}

} // namespace

Pipeline crossover(const Pipeline& a, const Pipeline& b, Rng& rng, const PipelineLimits& limits)
{
    Pipeline a_copy = a;
    Pipeline b_copy = b;
    auto an = preorder(a_copy.root);
    auto bn = preorder(b_copy.root);
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t i = 0; i < an.size(); ++i) {
        for (std::size_t j = 0; j < bn.size(); ++j) {
            if (compatible(slot_of(*an[i].node), slot_of(*bn[j].node))) {
                pairs.emplace_back(i, j);
            }
        }
    }
    for (int attempt = 0; attempt < 20 && !pairs.empty(); ++attempt) {
        const auto [i, j] = pairs[uniform_index(rng, pairs.size())];
        Pipeline child = a;
        auto cn = preorder(child.root);
        if (i == 0) {
            child.root = *bn[j].node;
        } else {
            cn[i].parent->children[cn[i].slot] = *bn[j].node;
        }
        if (within(child, limits)) {
            return child;
        }
    }
    return a;
}

} // namespace tpot
