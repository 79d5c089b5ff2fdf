#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mask.hpp"

namespace ureca {

struct TreeParams {
    double tau_contain = 0.90;    // min containment for a parent link
    double tau_dup = 0.95;        // IoU at or above which masks collapse as duplicates
    int main_depth_threshold = 2; // min subtree height of a root child to count as main object

    void validate() const;
};

struct MaskNode {
    int node_id = 0;
    std::optional<int> mask_ref; // index into the image's mask list; root has none
    std::optional<int> parent_id;
    std::vector<int> child_ids; // descending mask area, ties by ascending node_id
    int depth = 0;
    int subtree_height = 0;
};

class MaskTree {
  public:
    static constexpr int kRootId = 0;

    MaskTree() = default;
    MaskTree(std::string image_id, int width, int height, std::vector<MaskNode> nodes);

    const std::string& image_id() const { return image_id_; }
    int width() const { return width_; }
    int height() const { return height_; }
    int root_id() const { return kRootId; }
    std::size_t size() const { return nodes_.size(); }

    const MaskNode& node(int id) const;
    const std::vector<MaskNode>& nodes() const { return nodes_; }
    bool has_node(int id) const { return id >= 0 && static_cast<std::size_t>(id) < nodes_.size(); }

  private:
    std::string image_id_;
    int width_ = 0;
    int height_ = 0;
    std::vector<MaskNode> nodes_; // indexed by node_id; node 0 is the root
};

// Stage-1 construction. Node ids: root = 0, mask i = i + 1. Duplicates (pairwise
// IoU >= tau_dup against a lower-index survivor) are dropped and get no node;
// dropped masks can be recognized by their node missing from the tree.
MaskTree build_tree(const std::string& image_id, int width, int height,
                    const std::vector<BinaryMask>& masks, const TreeParams& params);

std::vector<int> main_objects(const MaskTree& tree, const TreeParams& params);
std::vector<int> topdown_order(const MaskTree& tree, const std::vector<int>& roots);
std::vector<int> bottomup_order(const MaskTree& tree);
std::vector<int> siblings(const MaskTree& tree, int node_id);

// Survivor indices after duplicate collapse, in input order (helper shared with
// the export path, which must know which annotations were dropped).
std::vector<int> duplicate_survivors(const std::vector<BinaryMask>& masks, double tau_dup);

} // namespace ureca
