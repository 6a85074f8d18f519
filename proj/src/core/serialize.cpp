#include <cmath>
#include <cstdio>

#include <json.hpp>

#include "error.hpp"
#include "pipeline.hpp"

namespace tpot {

namespace {

using Json = nlohmann::ordered_json;

constexpr const char* kTreeFormat = "tpot-tree/1";

bool integral_domain(const ParamDomain& d)
{
    return d.type == ParamDomain::Type::Integer || d.type == ParamDomain::Type::Choice;
}

Json node_to_json(const PipelineNode& n)
{
    Json j;
    switch (n.type) {
    case NodeType::Leaf:
        j["op"] = "Leaf";
        break;
    case NodeType::Combine:
        j["op"] = "Combine";
        break;
    default:
        j["op"] = std::string(name_of(n.kind));
        break;
    }
    Json params = Json::object();
    if (n.type == NodeType::Transform || n.type == NodeType::Model) {
        const auto& schema = schema_of(n.kind);
        for (std::size_t i = 0; i < schema.size() && i < n.params.size(); ++i) {
            const double v = n.params[i];
            if (integral_domain(schema[i].domain) && v == std::floor(v) && std::abs(v) < 9e15) {
                params[schema[i].name] = static_cast<std::int64_t>(v);
            } else {
                params[schema[i].name] = v;
            }
        }
    }
    j["params"] = std::move(params);
    Json children = Json::array();
    for (const auto& c : n.children) {
        children.push_back(node_to_json(c));
    }
    j["children"] = std::move(children);
    return j;
}

[[noreturn]] void bad(const std::string& where, const std::string& what)
{
    fail(ErrorKind::Parse, "pipeline document: " + what + " at " + where);
}

PipelineNode node_from_json(const Json& j, const std::string& where)
{
    if (!j.is_object()) {
        bad(where, "expected an object");
    }
    for (const char* key : { "op", "params", "children" }) {
        if (!j.contains(key)) {
            bad(where, std::string("missing field '") + key + "'");
        }
    }
    if (!j["op"].is_string()) {
        bad(where + ".op", "expected a string");
    }
    if (!j["params"].is_object()) {
        bad(where + ".params", "expected an object");
    }
    if (!j["children"].is_array()) {
        bad(where + ".children", "expected an array");
    }
    const auto op = j["op"].get<std::string>();
    PipelineNode n;
    std::size_t arity = 0;
    if (op == "Leaf") {
        n.type = NodeType::Leaf;
    } else if (op == "Combine") {
        n.type = NodeType::Combine;
        arity = 2;
    } else if (auto kind = kind_from_name(op)) {
        n.type = is_model(*kind) ? NodeType::Model : NodeType::Transform;
        n.kind = *kind;
        arity = 1;
        const auto& schema = schema_of(*kind);
        for (const auto& spec : schema) {
            if (!j["params"].contains(spec.name)) {
                bad(where + ".params", "missing parameter '" + spec.name + "'");
            }
            const auto& v = j["params"][spec.name];
            if (!v.is_number()) {
                bad(where + ".params." + spec.name, "expected a number");
            }
            n.params.push_back(v.get<double>());
        }
        if (j["params"].size() != schema.size()) {
            bad(where + ".params", "unknown parameter for " + op);
        }
    } else {
        bad(where + ".op", "unknown operator '" + op + "'");
    }
    if (n.type == NodeType::Leaf || n.type == NodeType::Combine) {
        if (!j["params"].empty()) {
            bad(where + ".params", op + " takes no parameters");
        }
    }
    const auto& children = j["children"];
    if (children.size() != arity) {
        bad(where + ".children", op + " expects " + std::to_string(arity) + " children");
    }
    for (std::size_t i = 0; i < children.size(); ++i) {
        n.children.push_back(node_from_json(children[i], where + ".children[" + std::to_string(i) + "]"));
    }
    return n;
}

std::string format_param(const ParamDomain& d, double v)
{
    char buf[64];
    if (integral_domain(d) && v == std::floor(v)) {
        std::snprintf(buf, sizeof buf, "%.0f", v);
    } else {
        std::snprintf(buf, sizeof buf, "%.6g", v);
    }
    return buf;
}

void render_node(const PipelineNode& n, std::string& out)
{
    if (n.type == NodeType::Leaf) {
        out += "Leaf";
        return;
    }
    out += n.type == NodeType::Combine ? std::string("Combine") : std::string(name_of(n.kind));
    out += '(';
    for (std::size_t i = 0; i < n.children.size(); ++i) {
        if (i > 0) {
            out += ", ";
        }
        render_node(n.children[i], out);
    }
    if (n.type != NodeType::Combine) {
        const auto& schema = schema_of(n.kind);
        for (std::size_t i = 0; i < schema.size() && i < n.params.size(); ++i) {
            out += ", " + schema[i].name + "=" + format_param(schema[i].domain, n.params[i]);
        }
    }
    out += ')';
}

} // namespace

std::string serialize(const Pipeline& p)
{
    Json doc;
    doc["format"] = kTreeFormat;
    doc["root"] = node_to_json(p.root);
    return doc.dump(2) + "\n";
}

Pipeline deserialize(const std::string& text)
{
    Json doc;
    try {
        doc = Json::parse(text);
    } catch (const Json::parse_error& e) {
        fail(ErrorKind::Parse, std::string("pipeline document: ") + e.what());
    }
    if (!doc.is_object()) {
        bad("$", "expected an object");
    }
    if (!doc.contains("format") || doc["format"] != kTreeFormat) {
        bad("$.format", std::string("expected version tag \"") + kTreeFormat + "\"");
    }
    if (!doc.contains("root")) {
        bad("$", "missing field 'root'");
    }
    return { node_from_json(doc["root"], "$.root") };
}

std::string render(const Pipeline& p)
{
    std::string out;
    render_node(p.root, out);
    return out;
}

} // namespace tpot
