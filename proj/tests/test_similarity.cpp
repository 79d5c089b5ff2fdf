#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "encoder.hpp" // splitmix64_next
#include "render.hpp"
#include "similarity.hpp"

using namespace ureca;

TEST_CASE("cosine: spec examples") {
    const std::vector<double> u{1, 1};
    CHECK(cosine(u, u) == doctest::Approx(1.0));
    CHECK(cosine({1, 0}, {0, 1}) == doctest::Approx(0.0));
    CHECK(cosine({1, 1}, {1, 0}) == doctest::Approx(0.70710678).epsilon(1e-6));
    CHECK_THROWS_AS(cosine({0, 0}, {1, 0}), InvalidArgument);
    CHECK_THROWS_AS(cosine({1, 0, 0}, {1, 0}), DimensionMismatch);
}

TEST_CASE("group_similar: spec examples") {
    SimilarityParams params; // tau 0.85, max_group 9

    // all pairs below threshold: no groups
    CHECK(group_similar({1, 2, 3}, {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}, params).empty());

    // two identical embeddings form one group of two
    const auto pair = group_similar({4, 9}, {{1, 2, 3}, {1, 2, 3}}, params);
    REQUIRE(pair.size() == 1);
    CHECK(pair[0] == std::vector<int>{4, 9});

    // transitivity through union-find: a~b, b~c but a!~c at tau 0.9
    const std::vector<double> a{1.0, 0.0};
    const std::vector<double> b{std::cos(0.4), std::sin(0.4)};
    const std::vector<double> c{std::cos(0.8), std::sin(0.8)};
    SimilarityParams tight;
    tight.tau_sim = 0.9;
    REQUIRE(cosine(a, b) >= 0.9);
    REQUIRE(cosine(b, c) >= 0.9);
    REQUIRE(cosine(a, c) < 0.9);
    const auto chain = group_similar({1, 2, 3}, {a, b, c}, tight);
    REQUIRE(chain.size() == 1);
    CHECK(chain[0] == std::vector<int>{1, 2, 3});

    CHECK_THROWS_AS(group_similar({1, 2}, {{1, 0}, {1, 0, 0}}, params), DimensionMismatch);
}

TEST_CASE("group_similar: oversized components truncate towards the centroid") {
    SimilarityParams params;
    params.tau_sim = 0.5;
    params.max_group = 2;
    // three near-identical vectors plus one slightly farther out
    std::vector<int> ids{10, 11, 12};
    std::vector<std::vector<double>> vecs{{1.0, 0.00}, {1.0, 0.02}, {1.0, 0.90}};
    const auto groups = group_similar(ids, vecs, params);
    REQUIRE(groups.size() == 1);
    CHECK(groups[0].size() == 2);
    // the two closest to the centroid survive
    CHECK(groups[0] == std::vector<int>{10, 11});
}

TEST_CASE("group_similar: partition properties and tau monotonicity") {
    std::uint64_t state = 77;
    for (int round = 0; round < 30; ++round) {
        const int n = 2 + static_cast<int>(splitmix64_next(state) % 12);
        std::vector<int> ids;
        std::vector<std::vector<double>> vecs;
        for (int i = 0; i < n; ++i) {
            ids.push_back(i * 3 + 1);
            std::vector<double> v(4);
            for (auto& x : v) {
                x = (static_cast<double>(splitmix64_next(state) % 1000) - 499.5) / 500.0;
            }
            if (std::abs(v[0]) + std::abs(v[1]) + std::abs(v[2]) + std::abs(v[3]) < 1e-9) {
                v[0] = 1.0;
            }
            vecs.push_back(std::move(v));
        }
        SimilarityParams loose;
        loose.tau_sim = 0.6;
        SimilarityParams strict;
        strict.tau_sim = 0.9;
        const auto groups_loose = group_similar(ids, vecs, loose);
        const auto groups_strict = group_similar(ids, vecs, strict);

        // disjoint groups, each of size >= 2
        std::set<int> seen;
        for (const auto& g : groups_loose) {
            CHECK(g.size() >= 2);
            for (int id : g) {
                CHECK(seen.insert(id).second);
            }
        }
        // raising tau never merges separate groups: every strict group sits
        // inside a single loose group
        for (const auto& sg : groups_strict) {
            const auto find_home = [&](int id) -> int {
                for (std::size_t gi = 0; gi < groups_loose.size(); ++gi) {
                    for (int member : groups_loose[gi]) {
                        if (member == id) {
                            return static_cast<int>(gi);
                        }
                    }
                }
                return -1;
            };
            const int home = find_home(sg[0]);
            CHECK(home >= 0);
            for (int id : sg) {
                CHECK(find_home(id) == home);
            }
        }
        // determinism
        CHECK(group_similar(ids, vecs, loose) == groups_loose);
    }
}

TEST_CASE("rotate_to_front preserves cyclic order") {
    CHECK(rotate_to_front({2, 5, 9}, 5) == std::vector<int>{5, 9, 2});
    CHECK(rotate_to_front({2, 5, 9}, 2) == std::vector<int>{2, 5, 9});
    CHECK_THROWS_AS(rotate_to_front({2, 5, 9}, 7), InvalidArgument);
}

TEST_CASE("crop_for_embedding: spec examples") {
    RgbImage img(40, 40, Rgb{50, 90, 130});
    // full-frame mask: whole image
    CHECK(crop_for_embedding(img, full_mask(40, 40)) == img);
    // same region twice: identical crops
    const BinaryMask region = rect_mask(40, 40, {8, 8, 24, 28});
    CHECK(crop_for_embedding(img, region) == crop_for_embedding(img, region));
    // margin arithmetic matches crop_to_region at margin 0.1
    const auto crop = crop_for_embedding(img, region);
    CHECK(crop.width() == crop_to_region(img, region, 0.10).width());
    CHECK(crop.height() == crop_to_region(img, region, 0.10).height());
    CHECK_THROWS_AS(crop_for_embedding(img, BinaryMask(40, 40)), EmptyRegion);
}
