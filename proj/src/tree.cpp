#include "arborwalk/tree.hpp"

#include "arborwalk/errors.hpp"
#include "arborwalk/rng.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace arborwalk::tree {

namespace {

std::uint64_t sphere_level_size(int n, double b) {
    if (n == 0) return 1;
    const double s = std::pow(static_cast<double>(n), b);
    if (!std::isfinite(s) || s > 9e15) throw std::invalid_argument("sphere level size overflows");
    return std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::llround(s)));
}

} // namespace

void RootedTree::finalize() {
    const std::uint32_t n = vertex_count();
    depth_.assign(n, -1);
    std::vector<std::uint32_t> order;
    order.reserve(n);

    // Child CSR, children sorted by id: count, prefix, fill.
    std::vector<std::uint32_t> counts(n, 0);
    for (std::uint32_t v = 1; v < n; ++v) {
        if (parent_[v] >= n) throw std::invalid_argument("parent index out of range");
        ++counts[parent_[v]];
    }
    child_begin_.assign(n, 0);
    child_end_.assign(n, 0);
    std::uint32_t acc = 0;
    for (std::uint32_t v = 0; v < n; ++v) {
        child_begin_[v] = acc;
        child_end_[v] = acc;
        acc += counts[v];
    }
    children_.assign(acc, 0);
    for (std::uint32_t v = 1; v < n; ++v) children_[child_end_[parent_[v]]++] = v;
    for (std::uint32_t v = 0; v < n; ++v)
        std::sort(children_.begin() + child_begin_[v], children_.begin() + child_end_[v]);

    // BFS from the root assigns depths and the generation order.
    depth_[0] = 0;
    order.push_back(0);
    for (std::size_t head = 0; head < order.size(); ++head) {
        const std::uint32_t v = order[head];
        for (std::uint32_t i = child_begin_[v]; i < child_end_[v]; ++i) {
            depth_[children_[i]] = depth_[v] + 1;
            order.push_back(children_[i]);
        }
    }
    if (order.size() != n) throw std::invalid_argument("tree has vertices unreachable from the root");

    by_depth_ = std::move(order);
    max_depth_ = depth_[by_depth_.back()];
    level_offsets_.assign(static_cast<std::size_t>(max_depth_) + 2, 0);
    for (std::uint32_t v = 0; v < n; ++v) ++level_offsets_[static_cast<std::size_t>(depth_[v]) + 1];
    for (std::size_t i = 1; i < level_offsets_.size(); ++i) level_offsets_[i] += level_offsets_[i - 1];
}

RootedTree RootedTree::spherically_symmetric(double b, int depth, std::uint64_t vertex_budget) {
    if (depth < 1) throw std::invalid_argument("depth must be >= 1");
    if (!std::isfinite(b) || b < 0.0) throw std::invalid_argument("growth exponent must be finite and >= 0");

    std::uint64_t total = 1;
    std::vector<std::uint64_t> sizes(static_cast<std::size_t>(depth) + 1);
    sizes[0] = 1;
    for (int n = 1; n <= depth; ++n) {
        sizes[n] = sphere_level_size(n, b);
        total += sizes[n];
        if (total > vertex_budget) throw std::invalid_argument("tree exceeds the vertex budget");
    }

    RootedTree t;
    t.parent_.assign(total, 0);
    std::uint64_t level_base = 0, next_base = 1;
    for (int n = 1; n <= depth; ++n) {
        // Child j of level n attaches to parent j mod s_{n-1}.
        for (std::uint64_t j = 0; j < sizes[n]; ++j)
            t.parent_[next_base + j] = static_cast<std::uint32_t>(level_base + (j % sizes[n - 1]));
        level_base = next_base;
        next_base += sizes[n];
    }
    t.finalize();
    return t;
}

RootedTree RootedTree::regular(int arity, int depth, std::uint64_t vertex_budget) {
    if (arity < 1) throw std::invalid_argument("arity must be >= 1");
    if (depth < 1) throw std::invalid_argument("depth must be >= 1");

    std::uint64_t total = 1, level = 1;
    for (int n = 1; n <= depth; ++n) {
        if (level > vertex_budget / static_cast<std::uint64_t>(arity))
            throw std::invalid_argument("tree exceeds the vertex budget");
        level *= static_cast<std::uint64_t>(arity);
        total += level;
        if (total > vertex_budget) throw std::invalid_argument("tree exceeds the vertex budget");
    }

    RootedTree t;
    t.parent_.assign(total, 0);
    std::uint64_t level_base = 0, size = 1, next_base = 1;
    for (int n = 1; n <= depth; ++n) {
        const std::uint64_t next_size = size * static_cast<std::uint64_t>(arity);
        for (std::uint64_t j = 0; j < next_size; ++j)
            t.parent_[next_base + j] = static_cast<std::uint32_t>(level_base + j / static_cast<std::uint64_t>(arity));
        level_base = next_base;
        next_base += next_size;
        size = next_size;
    }
    t.finalize();
    return t;
}

RootedTree RootedTree::from_parents(const std::vector<std::uint32_t>& parent_of_nonroot) {
    RootedTree t;
    t.parent_.assign(parent_of_nonroot.size() + 1, 0);
    for (std::size_t i = 0; i < parent_of_nonroot.size(); ++i) t.parent_[i + 1] = parent_of_nonroot[i];
    t.finalize();
    return t;
}

std::vector<std::uint64_t> RootedTree::level_sizes() const {
    std::vector<std::uint64_t> s(static_cast<std::size_t>(max_depth_) + 1);
    for (int n = 0; n <= max_depth_; ++n) s[n] = level_size(n);
    return s;
}

std::vector<std::uint32_t> RootedTree::path_from_root(std::uint64_t v) const {
    std::vector<std::uint32_t> path;
    std::uint32_t cur = static_cast<std::uint32_t>(v);
    path.push_back(cur);
    while (cur != 0) {
        cur = parent_[cur];
        path.push_back(cur);
    }
    std::reverse(path.begin(), path.end());
    return path;
}

RootedTree load_tree(std::istream& in) {
    std::string line;
    int lineno = 0;
    bool have_root = false;
    long long root_id = -1;
    int root_line = 0;

    struct EdgeRec { long long child, parent; int line; };
    std::vector<EdgeRec> edges;

    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        std::string tok;
        if (!(ls >> tok)) continue;
        if (!have_root) {
            if (tok != "root") throw ParseError(lineno, "expected `root <id>` before edges");
            if (!(ls >> root_id) || root_id < 0) throw ParseError(lineno, "malformed root declaration");
            std::string extra;
            if (ls >> extra) throw ParseError(lineno, "trailing tokens after root declaration");
            have_root = true;
            root_line = lineno;
            continue;
        }
        if (tok == "root") throw ParseError(lineno, "root declared twice");
        EdgeRec rec{};
        rec.line = lineno;
        try {
            rec.child = std::stoll(tok);
        } catch (const std::exception&) {
            throw ParseError(lineno, "malformed child id `" + tok + "`");
        }
        if (rec.child < 0 || !(ls >> rec.parent) || rec.parent < 0)
            throw ParseError(lineno, "expected `<child_id> <parent_id>`");
        std::string extra;
        if (ls >> extra) throw ParseError(lineno, "trailing tokens after edge");
        edges.push_back(rec);
    }
    if (!have_root) throw ParseError(lineno + 1, "missing root declaration");

    // Compact ids in order of first appearance, root first.
    std::unordered_map<long long, std::uint32_t> id_of;
    std::vector<int> decl_line;
    id_of.emplace(root_id, 0);
    decl_line.push_back(root_line);
    auto intern = [&](long long raw, int at) {
        auto [it, inserted] = id_of.emplace(raw, static_cast<std::uint32_t>(id_of.size()));
        if (inserted) decl_line.push_back(at);
        return it->second;
    };

    std::vector<std::int64_t> parent_of; // -1 = not yet declared as a child
    parent_of.assign(1, -1);
    std::vector<int> child_line(1, 0);
    for (const auto& rec : edges) {
        const std::uint32_t c = intern(rec.child, rec.line);
        const std::uint32_t p = intern(rec.parent, rec.line);
        if (parent_of.size() < id_of.size()) {
            parent_of.resize(id_of.size(), -1);
            child_line.resize(id_of.size(), 0);
        }
        if (c == 0) throw ParseError(rec.line, "root cannot be declared as a child");
        if (rec.child == rec.parent) throw ParseError(rec.line, "cycle: vertex is its own parent");
        if (parent_of[c] >= 0) throw ParseError(rec.line, "duplicate child " + std::to_string(rec.child));
        parent_of[c] = p;
        child_line[c] = rec.line;
    }

    const std::uint32_t n = static_cast<std::uint32_t>(id_of.size());
    // Walk parent chains to classify unreachable vertices as cycles or orphans.
    for (std::uint32_t v = 1; v < n; ++v) {
        std::uint32_t cur = v;
        std::uint64_t hops = 0;
        while (cur != 0) {
            if (parent_of[cur] < 0)
                throw ParseError(decl_line[cur], "orphan: vertex unreachable from the root");
            cur = static_cast<std::uint32_t>(parent_of[cur]);
            if (++hops > n) throw ParseError(child_line[v], "cycle detected in parent chain");
        }
    }

    std::vector<std::uint32_t> parents(n > 0 ? n - 1 : 0);
    for (std::uint32_t v = 1; v < n; ++v) parents[v - 1] = static_cast<std::uint32_t>(parent_of[v]);
    const RootedTree staged = RootedTree::from_parents(parents);

    // Canonical ids are BFS ranks; appearance order breaks sibling ties. This
    // makes serialize(load(x)) a fixed point of the round trip.
    const auto& order = staged.by_depth();
    std::vector<std::uint32_t> rank(n, 0);
    for (std::uint32_t r = 0; r < n; ++r) rank[order[r]] = r;
    std::vector<std::uint32_t> canon(n > 0 ? n - 1 : 0);
    for (std::uint32_t r = 1; r < n; ++r) canon[r - 1] = rank[staged.parent_of(order[r])];
    return RootedTree::from_parents(canon);
}

RootedTree load_tree_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open tree file: " + path);
    return load_tree(f);
}

RootedTree load_tree_string(const std::string& text) {
    std::istringstream s(text);
    return load_tree(s);
}

std::string serialize(const RootedTree& t) {
    std::string out = "root 0\n";
    for (std::uint32_t v = 1; v < t.vertex_count(); ++v) {
        out += std::to_string(v);
        out += ' ';
        out += std::to_string(t.parent_of(v));
        out += '\n';
    }
    return out;
}

LevelTree::LevelTree(LevelKind kind, double growth, int depth)
    : kind_(kind), growth_(growth), depth_(depth) {
    if (depth < 1) throw std::invalid_argument("depth must be >= 1");
    log_sizes_.assign(static_cast<std::size_t>(depth) + 1, 0.0);
    if (kind == LevelKind::regular) {
        arity_ = static_cast<int>(growth);
        if (arity_ < 1) throw std::invalid_argument("arity must be >= 1");
        for (int n = 0; n <= depth; ++n) log_sizes_[n] = n * std::log(static_cast<double>(arity_));
        return;
    }
    sizes_.assign(static_cast<std::size_t>(depth) + 1, 1);
    dense_offsets_.assign(static_cast<std::size_t>(depth) + 2, 0);
    for (int n = 0; n <= depth; ++n) {
        sizes_[n] = (kind == LevelKind::path) ? 1 : sphere_level_size(n, growth);
        if (sizes_[n] >= (1ULL << 44)) throw std::invalid_argument("level size exceeds key space");
        log_sizes_[n] = std::log(static_cast<double>(sizes_[n]));
        dense_offsets_[n + 1] = dense_offsets_[n] + sizes_[n];
    }
}

LevelTree LevelTree::sphere(double b, int depth) {
    if (!std::isfinite(b) || b < 0.0) throw std::invalid_argument("growth exponent must be finite and >= 0");
    return LevelTree(LevelKind::sphere, b, depth);
}

LevelTree LevelTree::regular(int arity, int depth) {
    return LevelTree(LevelKind::regular, static_cast<double>(arity), depth);
}

LevelTree LevelTree::path(int depth) { return LevelTree(LevelKind::path, 0.0, depth); }

int LevelTree::child_count(std::uint64_t key, int level) const {
    if (level >= depth_) return 0;
    switch (kind_) {
        case LevelKind::path: return 1;
        case LevelKind::regular: return arity_;
        case LevelKind::sphere: {
            const std::uint64_t i = index_of(key);
            const std::uint64_t s = sizes_[level], s1 = sizes_[level + 1];
            if (i >= s1) return 0; // no child slot reaches this index
            return static_cast<int>((s1 - i + s - 1) / s);
        }
    }
    return 0;
}

std::uint64_t LevelTree::child_at(std::uint64_t key, int level, int k) const {
    switch (kind_) {
        case LevelKind::path: return key_at(level + 1, 0);
        case LevelKind::regular: {
            // Levels outgrow any dense index; identify vertices by a rolling hash.
            const std::uint64_t h = rng::mix(key | (static_cast<std::uint64_t>(level + 1) << 44),
                                             static_cast<std::uint64_t>(k));
            return (static_cast<std::uint64_t>(level + 1) << 44) | (h & ((1ULL << 44) - 1));
        }
        case LevelKind::sphere:
            return key_at(level + 1, index_of(key) + static_cast<std::uint64_t>(k) * sizes_[level]);
    }
    return 0;
}

std::uint64_t LevelTree::parent_key(std::uint64_t key) const {
    const int level = level_of(key);
    if (level == 0) throw std::invalid_argument("root has no parent");
    if (kind_ == LevelKind::regular)
        throw std::invalid_argument("regular LevelTree has no invertible parent map");
    if (kind_ == LevelKind::path) return key_at(level - 1, 0);
    return key_at(level - 1, index_of(key) % sizes_[level - 1]);
}

} // namespace arborwalk::tree
