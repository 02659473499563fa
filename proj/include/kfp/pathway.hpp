#pragma once

#include <optional>
#include <string>
#include <vector>

namespace kfp {

// A pathway graph distinguishes four edge classes around each metabolite pool:
// labeled external entry, unlabeled external entry, exit to sinks outside the
// network, and internal transfer between two pools.
enum class EdgeKind { LabeledIn, UnlabeledIn, Exit, Internal };

const char* to_string(EdgeKind k);
EdgeKind edge_kind_from_string(const std::string& s);

struct Edge {
    std::string id;
    EdgeKind kind = EdgeKind::Internal;
    int source = -1; // node index, -1 when the class has no source
    int target = -1; // node index, -1 when the class has no target
    std::optional<double> flux;
};

struct PathwayGraph {
    std::vector<std::string> nodes;
    std::vector<Edge> edges;

    int size() const { return static_cast<int>(nodes.size()); }
    int node_index(const std::string& name) const; // -1 if absent

    bool all_fluxes_present() const;
    // indices of nodes that receive a labeled external entry
    std::vector<int> labeled_targets() const;
    // true when node i has an exit edge
    std::vector<bool> exit_mask() const;
    // true when node i has an unlabeled external entry
    std::vector<bool> unlabeled_mask() const;
};

struct EdgeCensus {
    int nodes = 0;
    int edges = 0;
    int labeled_in = 0;
    int unlabeled_in = 0;
    int exits = 0;
    int internal = 0;
};

struct Violation {
    std::string code; // stable machine-readable tag
    std::string message;
};

struct ValidationReport {
    std::vector<Violation> violations;
    bool valid() const { return violations.empty(); }
};

// Parse a pathway document. Rejects malformed JSON (with position), unknown
// keys, unknown node references, duplicate edge ids, kind/source/target
// mismatches, and more than one entry or exit edge of the same kind per node.
// Throws FormatError.
PathwayGraph parse_pathway(const std::string& text);
PathwayGraph load_pathway(const std::string& path);

// Inverse of parse_pathway; flux values round-trip exactly.
std::string serialize_pathway(const PathwayGraph& g);

// Structural invariants beyond what parsing enforces: at least one labeled
// entry, at least one exit, no internal self-loops, at most one internal edge
// per ordered pair, every node reachable from some labeled entry.
ValidationReport validate_graph(const PathwayGraph& g);

EdgeCensus edge_census(const PathwayGraph& g);

// True when the graph carries exactly one labeled entry and its N-1 internal
// edges form a directed tree rooted at the labeled node, reaching every node.
bool is_arborescence(const PathwayGraph& g);

// parent[i] = internal predecessor of node i in the arborescence, -1 at root.
std::vector<int> arborescence_parents(const PathwayGraph& g);

} // namespace kfp
