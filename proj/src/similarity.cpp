#include "similarity.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "render.hpp"

namespace ureca {

void SimilarityParams::validate() const {
    if (tau_sim < -1.0 || tau_sim > 1.0) {
        throw InvalidArgument("tau_sim must be in [-1,1]");
    }
    if (max_group < 2) {
        throw InvalidArgument("max_group must be >= 2");
    }
}

double cosine(const std::vector<double>& u, const std::vector<double>& v) {
    if (u.size() != v.size()) {
        throw DimensionMismatch("vector widths differ: " + std::to_string(u.size()) + " vs " +
                                std::to_string(v.size()));
    }
    double dot = 0.0, nu = 0.0, nv = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        dot += u[i] * v[i];
        nu += u[i] * u[i];
        nv += v[i] * v[i];
    }
    if (nu == 0.0 || nv == 0.0) {
        throw InvalidArgument("cosine of a zero vector is undefined");
    }
    return dot / (std::sqrt(nu) * std::sqrt(nv));
}

namespace {

struct UnionFind {
    std::vector<int> parent;
    explicit UnionFind(std::size_t n) : parent(n) {
        std::iota(parent.begin(), parent.end(), 0);
    }
    int find(int x) {
        while (parent[static_cast<std::size_t>(x)] != x) {
            parent[static_cast<std::size_t>(x)] =
                parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
            x = parent[static_cast<std::size_t>(x)];
        }
        return x;
    }
    void unite(int a, int b) {
        a = find(a);
        b = find(b);
        if (a != b) {
            parent[static_cast<std::size_t>(std::max(a, b))] = std::min(a, b);
        }
    }
};

} // namespace

std::vector<std::vector<int>> group_similar(const std::vector<int>& node_ids,
                                            const std::vector<std::vector<double>>& embeddings,
                                            const SimilarityParams& params) {
    params.validate();
    if (node_ids.size() != embeddings.size()) {
        throw InvalidArgument("one embedding per node id required");
    }
    const std::size_t n = node_ids.size();
    for (std::size_t i = 1; i < n; ++i) {
        if (embeddings[i].size() != embeddings[0].size()) {
            throw DimensionMismatch("embedding width mismatch at position " + std::to_string(i));
        }
    }

    UnionFind uf(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            if (cosine(embeddings[i], embeddings[j]) >= params.tau_sim) {
                uf.unite(static_cast<int>(i), static_cast<int>(j));
            }
        }
    }

    std::vector<std::vector<int>> members(n); // component root -> member positions
    for (std::size_t i = 0; i < n; ++i) {
        members[static_cast<std::size_t>(uf.find(static_cast<int>(i)))].push_back(
            static_cast<int>(i));
    }

    std::vector<std::vector<int>> groups;
    for (auto& comp : members) {
        if (comp.size() < 2) {
            continue;
        }
        if (static_cast<int>(comp.size()) > params.max_group) {
            // keep the members closest to the component centroid
            const std::size_t width = embeddings[0].size();
            std::vector<double> centroid(width, 0.0);
            for (int pos : comp) {
                for (std::size_t d = 0; d < width; ++d) {
                    centroid[d] += embeddings[static_cast<std::size_t>(pos)][d];
                }
            }
            for (auto& v : centroid) {
                v /= static_cast<double>(comp.size());
            }
            std::vector<std::pair<double, int>> ranked;
            for (int pos : comp) {
                ranked.emplace_back(cosine(embeddings[static_cast<std::size_t>(pos)], centroid),
                                    pos);
            }
            std::sort(ranked.begin(), ranked.end(), [&](const auto& a, const auto& b) {
                if (a.first != b.first) {
                    return a.first > b.first;
                }
                return node_ids[static_cast<std::size_t>(a.second)] <
                       node_ids[static_cast<std::size_t>(b.second)];
            });
            comp.clear();
            for (int k = 0; k < params.max_group; ++k) {
                comp.push_back(ranked[static_cast<std::size_t>(k)].second);
            }
        }
        std::vector<int> ids;
        for (int pos : comp) {
            ids.push_back(node_ids[static_cast<std::size_t>(pos)]);
        }
        std::sort(ids.begin(), ids.end());
        groups.push_back(std::move(ids));
    }
    std::sort(groups.begin(), groups.end(),
              [](const auto& a, const auto& b) { return a.front() < b.front(); });
    return groups;
}

std::vector<int> rotate_to_front(const std::vector<int>& group, int target) {
    auto it = std::find(group.begin(), group.end(), target);
    if (it == group.end()) {
        throw InvalidArgument("target id " + std::to_string(target) + " not in group");
    }
    std::vector<int> out = group;
    std::rotate(out.begin(), out.begin() + (it - group.begin()), out.end());
    return out;
}

RgbImage crop_for_embedding(const RgbImage& img, const BinaryMask& mask) {
    return crop_to_region(blur_outside(img, mask, 8.0), mask, 0.10);
}

} // namespace ureca
