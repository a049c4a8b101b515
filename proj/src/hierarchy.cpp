#include "rome/hierarchy.hpp"

#include <deque>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "rome/errors.hpp"

namespace rome {

std::vector<std::size_t> IndexRange::indices() const {
    std::vector<std::size_t> out(count);
    for (std::size_t i = 0; i < count; ++i) out[i] = first + i;
    return out;
}

IndexRange Hierarchy::level_range(const std::string& level) const {
    for (std::size_t l = 0; l < level_names_.size(); ++l) {
        if (level_names_[l] == level) return level_ranges_[l];
    }
    throw ValidationError("unknown level '" + level + "'");
}

Hierarchy build_hierarchy(const HierarchySpec& spec) {
    if (spec.levels.size() < 2) {
        throw ValidationError("hierarchy needs at least two levels");
    }
    {
        std::set<std::string> seen;
        for (const auto& l : spec.levels) {
            if (!seen.insert(l).second) throw ValidationError("duplicate level name '" + l + "'");
        }
    }

    std::unordered_map<std::string, const std::vector<std::string>*> kids;
    std::unordered_map<std::string, std::string> parent_of;
    std::set<std::string> nodes;
    for (const auto& [parent, list] : spec.children) {
        if (!kids.emplace(parent, &list).second) {
            throw ValidationError("duplicate node name '" + parent + "'");
        }
        if (list.empty()) {
            throw ValidationError("structural: aggregate node '" + parent + "' has no children");
        }
        nodes.insert(parent);
    }
    for (const auto& [parent, list] : spec.children) {
        for (const auto& child : list) {
            if (child == parent) throw ValidationError("structural: cycle at node '" + child + "'");
            auto [it, fresh] = parent_of.emplace(child, parent);
            if (!fresh) {
                throw ValidationError("duplicate node name '" + child + "' (listed under '" + it->second +
                                      "' and '" + parent + "')");
            }
            nodes.insert(child);
        }
    }

    std::vector<std::string> roots;
    for (const auto& node : nodes) {
        if (!parent_of.contains(node)) roots.push_back(node);
    }
    if (roots.empty()) throw ValidationError("structural: no root node (cycle)");
    if (roots.size() > 1) {
        throw ValidationError("structural: multiple roots ('" + roots[0] + "', '" + roots[1] + "')");
    }

    // Breadth-first walk from the root records series order and depth.
    std::vector<std::string> order;
    std::vector<std::size_t> depth;
    std::unordered_map<std::string, std::size_t> index;
    std::deque<std::pair<std::string, std::size_t>> queue{{roots.front(), 0}};
    while (!queue.empty()) {
        auto [node, d] = queue.front();
        queue.pop_front();
        if (index.contains(node)) throw ValidationError("structural: cycle through node '" + node + "'");
        index.emplace(node, order.size());
        order.push_back(node);
        depth.push_back(d);
        if (auto it = kids.find(node); it != kids.end()) {
            for (const auto& child : *it->second) queue.emplace_back(child, d + 1);
        }
    }
    if (order.size() != nodes.size()) {
        for (const auto& node : nodes) {
            if (!index.contains(node)) throw ValidationError("structural: orphan node '" + node + "'");
        }
    }

    const std::size_t bottom_depth = spec.levels.size() - 1;
    std::vector<std::string> leaves;
    for (std::size_t i = 0; i < order.size(); ++i) {
        const bool leaf = !kids.contains(order[i]);
        if (leaf && depth[i] != bottom_depth) {
            throw ValidationError("unbalanced hierarchy: leaf '" + order[i] + "' sits at level " +
                                  std::to_string(depth[i]) + " but the bottom level is " +
                                  std::to_string(bottom_depth));
        }
        if (!leaf && depth[i] >= bottom_depth) {
            throw ValidationError("structural: node '" + order[i] + "' is deeper than the declared levels");
        }
        if (leaf) leaves.push_back(order[i]);
    }
    if (spec.bottom_order != leaves) {
        throw ValidationError("bottom_order does not match the breadth-first leaf order of the tree");
    }

    Hierarchy h;
    h.spec_ = spec;
    h.labels_ = order;
    h.level_names_ = spec.levels;
    h.level_index_ = depth;
    h.level_ranges_.assign(spec.levels.size(), IndexRange{});
    for (std::size_t i = 0; i < order.size(); ++i) {
        auto& r = h.level_ranges_[depth[i]];
        if (r.count == 0) r.first = i;
        ++r.count;
    }

    const std::size_t n = order.size();
    const std::size_t nb = leaves.size();
    const std::size_t m = n - nb;
    h.summing_ = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(nb));
    for (std::size_t j = 0; j < nb; ++j) {
        // Walk from leaf to root, marking every ancestor.
        std::string node = leaves[j];
        while (true) {
            h.summing_(static_cast<Eigen::Index>(index.at(node)), static_cast<Eigen::Index>(j)) = 1.0;
            auto it = parent_of.find(node);
            if (it == parent_of.end()) break;
            node = it->second;
        }
    }
    const auto mi = static_cast<Eigen::Index>(m);
    const auto ni = static_cast<Eigen::Index>(n);
    const auto nbi = static_cast<Eigen::Index>(nb);
    h.constraint_ = Eigen::MatrixXd::Zero(mi, ni);
    h.constraint_.leftCols(mi).setIdentity();
    h.constraint_.rightCols(nbi) = -h.summing_.topRows(mi);
    h.selector_ = Eigen::MatrixXd::Zero(nbi, ni);
    h.selector_.rightCols(nbi).setIdentity();
    return h;
}

Eigen::MatrixXd constraint_matrix(const Hierarchy& h) { return h.constraint(); }

IndexRange level_indices(const Hierarchy& h, const std::string& level) { return h.level_range(level); }

HierarchySpec regular_hierarchy(std::size_t bottom, std::size_t fan_out) {
    if (bottom == 0 || fan_out == 0 || bottom % fan_out != 0) {
        throw ValidationError("regular hierarchy: bottom count " + std::to_string(bottom) +
                              " is not a multiple of fan-out " + std::to_string(fan_out));
    }
    HierarchySpec spec;
    std::vector<std::string> leaves;
    for (std::size_t i = 1; i <= bottom; ++i) leaves.push_back("L0-" + std::to_string(i));
    spec.bottom_order = leaves;
    const std::size_t middle = bottom / fan_out;
    if (middle == 1) {
        spec.levels = {"L1", "L0"};
        spec.children.emplace_back("L1-1", leaves);
        return spec;
    }
    spec.levels = {"L2", "L1", "L0"};
    std::vector<std::string> mids;
    for (std::size_t g = 1; g <= middle; ++g) mids.push_back("L1-" + std::to_string(g));
    spec.children.emplace_back("L2-1", mids);
    for (std::size_t g = 0; g < middle; ++g) {
        std::vector<std::string> group(leaves.begin() + static_cast<std::ptrdiff_t>(g * fan_out),
                                       leaves.begin() + static_cast<std::ptrdiff_t>((g + 1) * fan_out));
        spec.children.emplace_back(mids[g], std::move(group));
    }
    return spec;
}

HierarchySpec hierarchy_spec_from_json(const std::string& text) {
    nlohmann::ordered_json doc;
    try {
        doc = nlohmann::ordered_json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ValidationError(std::string("hierarchy file is not valid JSON: ") + e.what());
    }
    try {
        HierarchySpec spec;
        spec.levels = doc.at("levels").get<std::vector<std::string>>();
        const auto& children = doc.at("children");
        if (!children.is_object()) throw ValidationError("hierarchy 'children' must be an object");
        for (const auto& [parent, list] : children.items()) {
            spec.children.emplace_back(parent, list.get<std::vector<std::string>>());
        }
        spec.bottom_order = doc.at("bottom_order").get<std::vector<std::string>>();
        return spec;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("malformed hierarchy document: ") + e.what());
    }
}

std::string hierarchy_spec_to_json(const HierarchySpec& spec) {
    nlohmann::ordered_json doc;
    doc["levels"] = spec.levels;
    nlohmann::ordered_json children = nlohmann::ordered_json::object();
    for (const auto& [parent, list] : spec.children) children[parent] = list;
    doc["children"] = std::move(children);
    doc["bottom_order"] = spec.bottom_order;
    return doc.dump(2);
}

HierarchySpec load_hierarchy_spec(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open hierarchy file '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return hierarchy_spec_from_json(buf.str());
}

}  // namespace rome
