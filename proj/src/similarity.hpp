#pragma once

#include <vector>

#include "image.hpp"
#include "mask.hpp"

namespace ureca {

struct SimilarityParams {
    double tau_sim = 0.85; // cosine threshold for an edge
    int max_group = 9;     // keeps set-of-mark indices single-digit

    void validate() const;
};

double cosine(const std::vector<double>& u, const std::vector<double>& v);

// Union-find over cosine edges. Components of size 1 are dropped; oversized
// components keep the max_group members closest to the component centroid.
// Groups come back sorted by smallest member id, members ascending.
std::vector<std::vector<int>> group_similar(const std::vector<int>& node_ids,
                                            const std::vector<std::vector<double>>& embeddings,
                                            const SimilarityParams& params);

// Rotate `group` so that `target` sits at index 0, preserving cyclic order.
std::vector<int> rotate_to_front(const std::vector<int>& group, int target);

// Region view sent to the embedding service: blurred context, tight crop.
RgbImage crop_for_embedding(const RgbImage& img, const BinaryMask& mask);

} // namespace ureca
