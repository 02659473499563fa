#include "kfp/pathway.hpp"

#include "kfp/common.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace kfp {

using nlohmann::json;

const char* to_string(EdgeKind k) {
    switch (k) {
    case EdgeKind::LabeledIn: return "labeled_in";
    case EdgeKind::UnlabeledIn: return "unlabeled_in";
    case EdgeKind::Exit: return "exit";
    case EdgeKind::Internal: return "internal";
    }
    return "?";
}

EdgeKind edge_kind_from_string(const std::string& s) {
    if (s == "labeled_in") return EdgeKind::LabeledIn;
    if (s == "unlabeled_in") return EdgeKind::UnlabeledIn;
    if (s == "exit") return EdgeKind::Exit;
    if (s == "internal") return EdgeKind::Internal;
    throw FormatError("unknown edge kind \"" + s + "\"");
}

int PathwayGraph::node_index(const std::string& name) const {
    for (int i = 0; i < size(); ++i)
        if (nodes[i] == name)
            return i;
    return -1;
}

bool PathwayGraph::all_fluxes_present() const {
    return std::all_of(edges.begin(), edges.end(),
                       [](const Edge& e) { return e.flux.has_value(); });
}

std::vector<int> PathwayGraph::labeled_targets() const {
    std::vector<int> out;
    for (const Edge& e : edges)
        if (e.kind == EdgeKind::LabeledIn)
            out.push_back(e.target);
    return out;
}

std::vector<bool> PathwayGraph::exit_mask() const {
    std::vector<bool> m(nodes.size(), false);
    for (const Edge& e : edges)
        if (e.kind == EdgeKind::Exit)
            m[e.source] = true;
    return m;
}

std::vector<bool> PathwayGraph::unlabeled_mask() const {
    std::vector<bool> m(nodes.size(), false);
    for (const Edge& e : edges)
        if (e.kind == EdgeKind::UnlabeledIn)
            m[e.target] = true;
    return m;
}

namespace {

void require_keys(const json& obj, const std::set<std::string>& allowed,
                  const std::string& where) {
    for (auto it = obj.begin(); it != obj.end(); ++it)
        if (!allowed.count(it.key()))
            throw FormatError("unknown key \"" + it.key() + "\" in " + where);
}

int resolve_node(const PathwayGraph& g, const json& e, const char* field,
                 const std::string& id) {
    if (!e.contains(field))
        throw FormatError("edge \"" + id + "\": missing \"" + field + "\"");
    if (!e[field].is_string())
        throw FormatError("edge \"" + id + "\": \"" + std::string(field) +
                          "\" must be a string");
    const std::string name = e[field].get<std::string>();
    const int idx = g.node_index(name);
    if (idx < 0)
        throw FormatError("edge \"" + id + "\": unknown node reference \"" +
                          name + "\"");
    return idx;
}

void forbid(const json& e, const char* field, const std::string& id,
            const char* kind) {
    if (e.contains(field))
        throw FormatError("edge \"" + id + "\": " + kind +
                          " edges must not have \"" + field + "\"");
}

} // namespace

PathwayGraph parse_pathway(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& err) {
        throw FormatError(std::string("pathway syntax error: ") + err.what());
    }
    if (!doc.is_object())
        throw FormatError("pathway document must be a JSON object");
    require_keys(doc, {"metabolites", "edges"}, "pathway document");
    if (!doc.contains("metabolites") || !doc["metabolites"].is_array())
        throw FormatError("pathway document needs a \"metabolites\" array");
    if (!doc.contains("edges") || !doc["edges"].is_array())
        throw FormatError("pathway document needs an \"edges\" array");

    PathwayGraph g;
    for (const json& m : doc["metabolites"]) {
        if (!m.is_string())
            throw FormatError("metabolite names must be strings");
        const std::string name = m.get<std::string>();
        if (g.node_index(name) >= 0)
            throw FormatError("duplicate metabolite \"" + name + "\"");
        g.nodes.push_back(name);
    }

    std::set<std::string> ids;
    // at most one entry/exit edge of a given kind per node
    std::set<std::pair<int, int>> per_node_kind; // (node, kind)
    for (const json& e : doc["edges"]) {
        if (!e.is_object())
            throw FormatError("each edge must be a JSON object");
        require_keys(e, {"id", "kind", "source", "target", "flux"}, "edge");
        if (!e.contains("id") || !e["id"].is_string())
            throw FormatError("edge missing string \"id\"");
        Edge edge;
        edge.id = e["id"].get<std::string>();
        if (!ids.insert(edge.id).second)
            throw FormatError("duplicate edge id \"" + edge.id + "\"");
        if (!e.contains("kind") || !e["kind"].is_string())
            throw FormatError("edge \"" + edge.id + "\": missing \"kind\"");
        edge.kind = edge_kind_from_string(e["kind"].get<std::string>());

        switch (edge.kind) {
        case EdgeKind::LabeledIn:
        case EdgeKind::UnlabeledIn:
            edge.target = resolve_node(g, e, "target", edge.id);
            forbid(e, "source", edge.id, "entry");
            break;
        case EdgeKind::Exit:
            edge.source = resolve_node(g, e, "source", edge.id);
            forbid(e, "target", edge.id, "exit");
            break;
        case EdgeKind::Internal:
            edge.source = resolve_node(g, e, "source", edge.id);
            edge.target = resolve_node(g, e, "target", edge.id);
            break;
        }

        if (edge.kind != EdgeKind::Internal) {
            const int node = edge.kind == EdgeKind::Exit ? edge.source : edge.target;
            if (!per_node_kind.insert({node, static_cast<int>(edge.kind)}).second)
                throw FormatError("edge \"" + edge.id + "\": node \"" +
                                  g.nodes[node] + "\" already has a " +
                                  to_string(edge.kind) + " edge");
        }

        if (e.contains("flux")) {
            if (!e["flux"].is_number())
                throw FormatError("edge \"" + edge.id + "\": \"flux\" must be a number");
            const double f = e["flux"].get<double>();
            if (!(f >= 0.0))
                throw FormatError("edge \"" + edge.id + "\": flux must be nonnegative");
            edge.flux = f;
        }
        g.edges.push_back(std::move(edge));
    }
    return g;
}

PathwayGraph load_pathway(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw FormatError("cannot open pathway file \"" + path + "\"");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_pathway(buf.str());
}

std::string serialize_pathway(const PathwayGraph& g) {
    json doc;
    doc["metabolites"] = g.nodes;
    json edges = json::array();
    for (const Edge& e : g.edges) {
        json je;
        je["id"] = e.id;
        je["kind"] = to_string(e.kind);
        if (e.source >= 0)
            je["source"] = g.nodes[e.source];
        if (e.target >= 0)
            je["target"] = g.nodes[e.target];
        if (e.flux)
            je["flux"] = *e.flux;
        edges.push_back(std::move(je));
    }
    doc["edges"] = std::move(edges);
    return doc.dump(2) + "\n";
}

ValidationReport validate_graph(const PathwayGraph& g) {
    ValidationReport rep;
    auto flag = [&](std::string code, std::string msg) {
        rep.violations.push_back({std::move(code), std::move(msg)});
    };

    if (g.nodes.empty())
        flag("no-metabolites", "graph has no metabolites");

    int labeled = 0, exits = 0;
    std::set<std::pair<int, int>> internal_pairs;
    for (const Edge& e : g.edges) {
        switch (e.kind) {
        case EdgeKind::LabeledIn: ++labeled; break;
        case EdgeKind::Exit: ++exits; break;
        case EdgeKind::Internal:
            if (e.source == e.target)
                flag("self-loop", "internal edge \"" + e.id + "\" is a self-loop");
            else if (!internal_pairs.insert({e.source, e.target}).second)
                flag("duplicate-internal-edge",
                     "more than one internal edge " + g.nodes[e.source] +
                         " -> " + g.nodes[e.target] + " (\"" + e.id + "\")");
            break;
        default: break;
        }
    }
    if (labeled == 0 && !g.nodes.empty())
        flag("no-labeled-input", "no labeled entry edge");
    if (exits == 0 && !g.nodes.empty())
        flag("no-exit", "no exit edge");

    // reachability from labeled entries along internal edges
    if (labeled > 0 && !g.nodes.empty()) {
        std::vector<bool> seen(g.nodes.size(), false);
        std::vector<int> stack = g.labeled_targets();
        for (int s : stack)
            seen[s] = true;
        while (!stack.empty()) {
            const int u = stack.back();
            stack.pop_back();
            for (const Edge& e : g.edges)
                if (e.kind == EdgeKind::Internal && e.source == u && !seen[e.target]) {
                    seen[e.target] = true;
                    stack.push_back(e.target);
                }
        }
        for (int i = 0; i < g.size(); ++i)
            if (!seen[i])
                flag("unreachable", "node \"" + g.nodes[i] +
                                        "\" is not reachable from any labeled entry");
    }
    return rep;
}

EdgeCensus edge_census(const PathwayGraph& g) {
    EdgeCensus c;
    c.nodes = g.size();
    c.edges = static_cast<int>(g.edges.size());
    for (const Edge& e : g.edges)
        switch (e.kind) {
        case EdgeKind::LabeledIn: ++c.labeled_in; break;
        case EdgeKind::UnlabeledIn: ++c.unlabeled_in; break;
        case EdgeKind::Exit: ++c.exits; break;
        case EdgeKind::Internal: ++c.internal; break;
        }
    return c;
}

std::vector<int> arborescence_parents(const PathwayGraph& g) {
    const int n = g.size();
    std::vector<int> parent(n, -2); // -2 = unassigned
    const std::vector<int> roots = g.labeled_targets();
    if (roots.size() != 1)
        return {};
    int internal = 0;
    for (const Edge& e : g.edges)
        if (e.kind == EdgeKind::Internal)
            ++internal;
    if (internal != n - 1)
        return {};
    parent[roots[0]] = -1;
    for (const Edge& e : g.edges) {
        if (e.kind != EdgeKind::Internal)
            continue;
        if (parent[e.target] != -2)
            return {}; // two parents (or edge into the root)
        parent[e.target] = e.source;
    }
    // all nodes assigned and acyclic: walk each node up to the root
    for (int i = 0; i < n; ++i) {
        if (parent[i] == -2)
            return {};
        int hops = 0;
        for (int v = i; parent[v] != -1; v = parent[v])
            if (++hops > n)
                return {};
    }
    return parent;
}

bool is_arborescence(const PathwayGraph& g) {
    return !arborescence_parents(g).empty();
}

} // namespace kfp
