#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace rome {

/// Declarative description of a tree hierarchy, as read from a hierarchy file.
///
/// `levels` runs from the most aggregated level (the root) down to the bottom
/// level. `children` maps every aggregate node to its ordered children, and
/// `bottom_order` lists the leaves in the order they appear in the bottom rows
/// of the summing matrix.
struct HierarchySpec {
    std::vector<std::string> levels;
    std::vector<std::pair<std::string, std::vector<std::string>>> children;
    std::vector<std::string> bottom_order;

    friend bool operator==(const HierarchySpec&, const HierarchySpec&) = default;
};

/// Contiguous block of series belonging to one level.
struct IndexRange {
    std::size_t first = 0;
    std::size_t count = 0;

    std::size_t last() const { return first + count - 1; }
    std::vector<std::size_t> indices() const;
};

/// Immutable structural matrices of a hierarchy.
///
/// Series are ordered breadth-first from the root, so each level occupies a
/// contiguous block and the bottom level is the last `bottom_count()` rows.
class Hierarchy {
public:
    std::size_t size() const { return labels_.size(); }
    std::size_t bottom_count() const { return static_cast<std::size_t>(summing_.cols()); }
    std::size_t aggregate_count() const { return size() - bottom_count(); }

    /// n x n_b summing matrix.
    const Eigen::MatrixXd& summing() const { return summing_; }
    /// m* x n constraint matrix (I, -S0); constraint(y) == 0 iff y is coherent.
    const Eigen::MatrixXd& constraint() const { return constraint_; }
    /// n_b x n selector (0, I).
    const Eigen::MatrixXd& selector() const { return selector_; }

    const std::vector<std::string>& labels() const { return labels_; }
    const std::vector<std::string>& level_names() const { return level_names_; }
    const std::string& level_of(std::size_t series) const { return level_names_[level_index_[series]]; }
    const HierarchySpec& spec() const { return spec_; }

    /// Series indices of the named level.
    IndexRange level_range(const std::string& level) const;

    /// Indices of all series above the bottom level.
    IndexRange aggregate_range() const { return {0, aggregate_count()}; }
    IndexRange bottom_range() const { return {aggregate_count(), bottom_count()}; }

    friend Hierarchy build_hierarchy(const HierarchySpec& spec);

private:
    HierarchySpec spec_;
    std::vector<std::string> labels_;
    std::vector<std::string> level_names_;
    std::vector<std::size_t> level_index_;
    std::vector<IndexRange> level_ranges_;
    Eigen::MatrixXd summing_;
    Eigen::MatrixXd constraint_;
    Eigen::MatrixXd selector_;
};

/// Validates `spec` and assembles S, U and J. Throws ValidationError on
/// duplicate names, orphans, cycles, multiple roots or unbalanced trees.
Hierarchy build_hierarchy(const HierarchySpec& spec);

/// U = (I, -S0) for the hierarchy.
Eigen::MatrixXd constraint_matrix(const Hierarchy& h);

/// Contiguous index range of `level`; throws ValidationError for unknown names.
IndexRange level_indices(const Hierarchy& h, const std::string& level);

/// Regular two- or three-level tree used by the simulation designs: one root,
/// `bottom / fan_out` middle nodes each aggregating `fan_out` consecutive
/// leaves. With `fan_out == bottom` the middle level is omitted.
/// Leaves are named "L0-1".., middle "L1-1".., root "L2-1" (or "L1-1").
HierarchySpec regular_hierarchy(std::size_t bottom, std::size_t fan_out);

/// Parse / serialize the JSON hierarchy document
/// `{"levels": [...], "children": {parent: [child, ...]}, "bottom_order": [...]}`.
HierarchySpec hierarchy_spec_from_json(const std::string& text);
std::string hierarchy_spec_to_json(const HierarchySpec& spec);
HierarchySpec load_hierarchy_spec(const std::string& path);

}  // namespace rome
