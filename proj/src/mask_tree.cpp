#include "mask_tree.hpp"

#include <algorithm>
#include <functional>

namespace ureca {

void TreeParams::validate() const {
    if (!(tau_contain > 0.0 && tau_contain <= 1.0)) {
        throw InvalidArgument("tau_contain must be in (0,1]");
    }
    if (!(tau_dup > 0.0 && tau_dup <= 1.0)) {
        throw InvalidArgument("tau_dup must be in (0,1]");
    }
    if (main_depth_threshold < 1) {
        throw InvalidArgument("main_depth_threshold must be >= 1");
    }
}

MaskTree::MaskTree(std::string image_id, int width, int height, std::vector<MaskNode> nodes)
    : image_id_(std::move(image_id)), width_(width), height_(height), nodes_(std::move(nodes)) {
    if (nodes_.empty() || nodes_[0].node_id != kRootId || nodes_[0].parent_id.has_value()) {
        throw InvalidArgument("tree must start with a parentless root node id 0");
    }
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        if (nodes_[i].node_id != static_cast<int>(i)) {
            throw InvalidArgument("node ids must be dense and index-aligned");
        }
    }
}

const MaskNode& MaskTree::node(int id) const {
    if (!has_node(id)) {
        throw InvalidArgument("unknown node id " + std::to_string(id));
    }
    return nodes_[static_cast<std::size_t>(id)];
}

std::vector<int> duplicate_survivors(const std::vector<BinaryMask>& masks, double tau_dup) {
    std::vector<int> survivors;
    for (int i = 0; i < static_cast<int>(masks.size()); ++i) {
        bool dup = false;
        for (int j : survivors) {
            if (iou(masks[i], masks[j]) >= tau_dup) {
                dup = true;
                break;
            }
        }
        if (!dup) {
            survivors.push_back(i);
        }
    }
    return survivors;
}

MaskTree build_tree(const std::string& image_id, int width, int height,
                    const std::vector<BinaryMask>& masks, const TreeParams& params) {
    params.validate();
    for (std::size_t i = 0; i < masks.size(); ++i) {
        if (masks[i].width() != width || masks[i].height() != height) {
            throw DimensionMismatch("mask index " + std::to_string(i) + " is " +
                                    std::to_string(masks[i].width()) + "x" +
                                    std::to_string(masks[i].height()) + ", image is " +
                                    std::to_string(width) + "x" + std::to_string(height));
        }
    }

    const std::vector<int> survivors = duplicate_survivors(masks, params.tau_dup);

    std::vector<MaskNode> nodes(survivors.size() + 1);
    std::vector<std::int64_t> areas(survivors.size() + 1, 0);
    nodes[0].node_id = MaskTree::kRootId;
    areas[0] = static_cast<std::int64_t>(width) * height;
    for (std::size_t k = 0; k < survivors.size(); ++k) {
        const int id = static_cast<int>(k) + 1;
        nodes[id].node_id = id;
        nodes[id].mask_ref = survivors[k];
        areas[id] = area(masks[survivors[k]]);
    }

    // Attach in descending area so containers are placed before containees.
    std::vector<int> order;
    for (std::size_t k = 0; k < survivors.size(); ++k) {
        order.push_back(static_cast<int>(k) + 1);
    }
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return areas[a] != areas[b] ? areas[a] > areas[b] : a < b; });

    std::vector<int> placed;
    for (int id : order) {
        const BinaryMask& m = masks[*nodes[id].mask_ref];
        int best = MaskTree::kRootId;
        std::int64_t best_area = areas[0];
        for (int cand : placed) {
            if (containment(m, masks[*nodes[cand].mask_ref]) < params.tau_contain) {
                continue;
            }
            if (areas[cand] < best_area || (areas[cand] == best_area && cand < best)) {
                best = cand;
                best_area = areas[cand];
            }
        }
        nodes[id].parent_id = best;
        nodes[best].child_ids.push_back(id);
        placed.push_back(id);
    }

    for (auto& n : nodes) {
        std::sort(n.child_ids.begin(), n.child_ids.end(), [&](int a, int b) {
            return areas[a] != areas[b] ? areas[a] > areas[b] : a < b;
        });
    }

    // depth (top-down) and subtree height (bottom-up)
    std::function<void(int, int)> assign_depth = [&](int id, int depth) {
        nodes[id].depth = depth;
        for (int c : nodes[id].child_ids) {
            assign_depth(c, depth + 1);
        }
    };
    assign_depth(MaskTree::kRootId, 0);
    std::function<int(int)> height_of = [&](int id) -> int {
        int h = 0;
        for (int c : nodes[id].child_ids) {
            h = std::max(h, height_of(c) + 1);
        }
        nodes[id].subtree_height = h;
        return h;
    };
    height_of(MaskTree::kRootId);

    return MaskTree(image_id, width, height, std::move(nodes));
}

std::vector<int> main_objects(const MaskTree& tree, const TreeParams& params) {
    std::vector<int> out;
    for (int c : tree.node(MaskTree::kRootId).child_ids) {
        if (tree.node(c).subtree_height >= params.main_depth_threshold) {
            out.push_back(c);
        }
    }
    return out;
}

std::vector<int> topdown_order(const MaskTree& tree, const std::vector<int>& roots) {
    std::vector<int> out;
    std::vector<bool> seen(tree.size(), false);
    std::function<void(int)> visit = [&](int id) {
        if (seen[static_cast<std::size_t>(id)]) {
            return;
        }
        seen[static_cast<std::size_t>(id)] = true;
        out.push_back(id);
        for (int c : tree.node(id).child_ids) {
            visit(c);
        }
    };
    for (int r : roots) {
        if (!tree.has_node(r)) {
            throw InvalidArgument("unknown node id " + std::to_string(r));
        }
        visit(r);
    }
    return out;
}

std::vector<int> bottomup_order(const MaskTree& tree) {
    std::vector<int> out;
    std::function<void(int)> visit = [&](int id) {
        for (int c : tree.node(id).child_ids) {
            visit(c);
        }
        out.push_back(id);
    };
    visit(MaskTree::kRootId);
    return out;
}

std::vector<int> siblings(const MaskTree& tree, int node_id) {
    const MaskNode& n = tree.node(node_id);
    std::vector<int> out;
    if (!n.parent_id) {
        return out;
    }
    for (int c : tree.node(*n.parent_id).child_ids) {
        if (c != node_id) {
            out.push_back(c);
        }
    }
    return out;
}

} // namespace ureca
