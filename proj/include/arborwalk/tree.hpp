#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace arborwalk::tree {

// Finite truncation of a rooted tree. Vertices are dense indices 0..n-1 with
// the root at index 0; an edge is identified with its child endpoint, so edge
// |e| equals depth(e+) and edge arrays are indexed by child vertex.
class RootedTree {
public:
    static constexpr std::uint64_t kDefaultVertexBudget = 80'000'000;

    // Level n holds max(1, round(n^b)) vertices; children are assigned
    // round-robin by index with remainders going to the lowest parent indices.
    static RootedTree spherically_symmetric(double b, int depth,
                                            std::uint64_t vertex_budget = kDefaultVertexBudget);

    // Every vertex above the truncation has exactly `arity` children.
    static RootedTree regular(int arity, int depth,
                              std::uint64_t vertex_budget = kDefaultVertexBudget);

    static RootedTree path(int depth) { return regular(1, depth); }

    // Builds from explicit parent assignments: parent_of[i] is the parent of
    // vertex i+1 (vertex 0 is the root). Used by loaders and tests.
    static RootedTree from_parents(const std::vector<std::uint32_t>& parent_of_nonroot);

    std::uint32_t vertex_count() const { return static_cast<std::uint32_t>(parent_.size()); }
    std::uint32_t edge_count() const { return vertex_count() - 1; }
    int max_depth() const { return max_depth_; }

    std::uint64_t root() const { return 0; }
    std::uint32_t parent_of(std::uint64_t v) const { return parent_[v]; }
    int depth_of(std::uint64_t v) const { return depth_[v]; }
    int child_count(std::uint64_t v, int /*depth*/ = -1) const {
        return static_cast<int>(child_end_[v] - child_begin_[v]);
    }
    std::uint64_t child_at(std::uint64_t v, int /*depth*/, int k) const {
        return children_[child_begin_[v] + static_cast<std::uint32_t>(k)];
    }
    std::uint64_t child_at(std::uint64_t v, int k) const { return child_at(v, -1, k); }

    // Canonical 64-bit identity of the edge ending at child vertex v.
    std::uint64_t edge_key(std::uint64_t v) const { return v; }

    bool dense_indexable() const { return true; }
    std::uint64_t dense_count() const { return vertex_count(); }
    std::uint64_t dense_index(std::uint64_t v) const { return v; }

    // Vertices listed in non-decreasing depth (generation) order.
    const std::vector<std::uint32_t>& by_depth() const { return by_depth_; }
    const std::vector<std::uint32_t>& level_offsets() const { return level_offsets_; }
    std::uint32_t level_size(int n) const { return level_offsets_[n + 1] - level_offsets_[n]; }

    std::vector<std::uint64_t> level_sizes() const;

    // Vertices of the path from the root to v, root first.
    std::vector<std::uint32_t> path_from_root(std::uint64_t v) const;

private:
    RootedTree() = default;
    void finalize();

    std::vector<std::uint32_t> parent_;      // parent_[0] is unused
    std::vector<std::int32_t> depth_;
    std::vector<std::uint32_t> children_;    // CSR payload, sorted by id
    std::vector<std::uint32_t> child_begin_;
    std::vector<std::uint32_t> child_end_;
    std::vector<std::uint32_t> by_depth_;
    std::vector<std::uint32_t> level_offsets_;
    int max_depth_ = 0;
};

// Tree file format: first content line `root <id>`, then `<child> <parent>`
// lines; `#` starts a comment. Ids are compacted to 0..n-1 in order of first
// appearance. Duplicate children, cycles, orphans and a missing root raise
// ParseError naming the offending line.
RootedTree load_tree(std::istream& in);
RootedTree load_tree_file(const std::string& path);
RootedTree load_tree_string(const std::string& text);

// Canonical form: `root 0`, then edges sorted by child id.
std::string serialize(const RootedTree& t);

// Non-negative weight per edge, indexed by the edge's child endpoint
// (slot 0 is unused). The carrier for |e|^-gamma, Psi(e)^gamma, u_e*c(e), ...
struct EdgeWeighting {
    std::vector<double> value;

    static EdgeWeighting uniform(const RootedTree& t, double w) {
        return EdgeWeighting{std::vector<double>(t.vertex_count(), w)};
    }
    double operator[](std::uint64_t child_vertex) const { return value[child_vertex]; }
    double& operator[](std::uint64_t child_vertex) { return value[child_vertex]; }
};

enum class LevelKind { path, sphere, regular };

// Lazily indexed truncation of a symmetric tree; supports walks and per-level
// cutset aggregation at depths where materialization is impossible. Vertex
// keys pack (level, index-within-level); regular trees use a rolling hash for
// the index since their levels outgrow any dense index.
class LevelTree {
public:
    static LevelTree sphere(double b, int depth);
    static LevelTree regular(int arity, int depth);
    static LevelTree path(int depth);

    LevelKind kind() const { return kind_; }
    double growth() const { return growth_; }
    int max_depth() const { return depth_; }

    std::uint64_t root() const { return 0; }
    static int level_of(std::uint64_t key) { return static_cast<int>(key >> 44); }
    static std::uint64_t index_of(std::uint64_t key) { return key & ((1ULL << 44) - 1); }
    int depth_of(std::uint64_t key) const { return level_of(key); }

    int child_count(std::uint64_t key, int level) const;
    std::uint64_t child_at(std::uint64_t key, int level, int k) const;
    std::uint64_t edge_key(std::uint64_t child_key) const { return child_key; }

    // Exact level sizes for path/sphere; log-space size for any kind.
    const std::vector<std::uint64_t>& level_sizes() const { return sizes_; }
    double log_level_size(int n) const { return log_sizes_[n]; }

    bool dense_indexable() const { return kind_ != LevelKind::regular; }
    // Dense enumeration over path/sphere truncations (harmonic solves).
    std::uint64_t dense_count() const { return dense_offsets_.back(); }
    std::uint64_t dense_index(std::uint64_t key) const {
        return dense_offsets_[level_of(key)] + index_of(key);
    }
    std::uint64_t key_at(int level, std::uint64_t index) const {
        return (static_cast<std::uint64_t>(level) << 44) | index;
    }
    std::uint64_t parent_key(std::uint64_t key) const;

private:
    LevelTree(LevelKind kind, double growth, int depth);

    LevelKind kind_;
    double growth_; // b for sphere, arity for regular, unused for path
    int depth_;
    int arity_ = 1;
    std::vector<std::uint64_t> sizes_;
    std::vector<double> log_sizes_;
    std::vector<std::uint64_t> dense_offsets_;
};

} // namespace arborwalk::tree
