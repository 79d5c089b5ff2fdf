#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "metrics.hpp"
#include "porter.hpp"

using namespace ureca;

namespace {

TokenSeq toks(const std::string& text) {
    return tokenize(text);
}

// independent LCS check: enumerate every subsequence of the shorter side and
// test membership in the other sequence
bool is_subsequence(const TokenSeq& sub, const TokenSeq& seq) {
    std::size_t i = 0;
    for (const auto& t : seq) {
        if (i < sub.size() && sub[i] == t) {
            ++i;
        }
    }
    return i == sub.size();
}

int brute_force_lcs(const TokenSeq& a, const TokenSeq& b) {
    const TokenSeq& small = a.size() <= b.size() ? a : b;
    const TokenSeq& large = a.size() <= b.size() ? b : a;
    int best = 0;
    const std::size_t n = small.size();
    for (std::size_t bits = 0; bits < (1u << n); ++bits) {
        TokenSeq sub;
        for (std::size_t i = 0; i < n; ++i) {
            if (bits & (1u << i)) {
                sub.push_back(small[i]);
            }
        }
        if (static_cast<int>(sub.size()) > best && is_subsequence(sub, large)) {
            best = static_cast<int>(sub.size());
        }
    }
    return best;
}

class FixedEmbedder : public TokenEmbedder {
  public:
    std::vector<std::vector<double>> embed_tokens(
        const std::vector<std::string>& tokens) override {
        std::vector<std::vector<double>> out;
        for (const auto& t : tokens) {
            // stable arbitrary direction per distinct token
            std::vector<double> v(8, 0.0);
            std::size_t h = std::hash<std::string>{}(t);
            v[h % 8] = 1.0;
            out.push_back(std::move(v));
        }
        return out;
    }
};

} // namespace

TEST_CASE("tokenize: spec examples") {
    CHECK(toks("The cat.") == TokenSeq{"the", "cat"});
    CHECK(toks("").empty());
    CHECK(toks("A  blue-gray roof,") == TokenSeq{"a", "blue-gray", "roof"});
    CHECK(toks("  \t\n ").empty());
    CHECK(toks("...!!!").empty());
    CHECK(toks("one two") == TokenSeq{"one", "two"}); // non-breaking space splits
}

TEST_CASE("porter stemmer: classic vocabulary") {
    CHECK(porter_stem("cats") == "cat");
    CHECK(porter_stem("caresses") == "caress");
    CHECK(porter_stem("ponies") == "poni");
    CHECK(porter_stem("running") == "run");
    CHECK(porter_stem("flies") == "fli");
    CHECK(porter_stem("relational") == "relat");
    CHECK(porter_stem("motoring") == "motor");
    CHECK(porter_stem("happy") == "happi");
    CHECK(porter_stem("at") == "at"); // too short to touch
}

TEST_CASE("bleu: spec examples") {
    const TokenSeq ref = toks("the small cat sat on the mat");
    const auto perfect = bleu(ref, ref, 4);
    for (double s : perfect) {
        CHECK(s == doctest::Approx(1.0));
    }

    const auto nothing = bleu(toks("dogs run fast"), toks("a blue chair"), 4);
    for (double s : nothing) {
        CHECK(s == 0.0);
    }

    // canonical clipping case: unigram precision 2/7, BP = 1 since |c| > |r|
    const TokenSeq cand = toks("the the the the the the the");
    const TokenSeq clip_ref = toks("the cat is on the mat");
    const auto clipped = bleu(cand, clip_ref, 4);
    CHECK(clipped[0] == doctest::Approx(2.0 / 7.0));
    CHECK(clipped[1] == 0.0); // no bigram matches

    CHECK(bleu({}, clip_ref, 4)[0] == 0.0); // empty candidate
}

TEST_CASE("bleu: brevity penalty and zero-precision handling") {
    // cand shorter than ref: BP = exp(1 - |r|/|c|)
    const TokenSeq cand = toks("the cat");
    const TokenSeq ref = toks("the cat sat on the mat");
    const auto scores = bleu(cand, ref, 2);
    const double bp = std::exp(1.0 - 6.0 / 2.0);
    CHECK(scores[0] == doctest::Approx(bp * 1.0));            // p1 = 2/2
    CHECK(scores[1] == doctest::Approx(bp * std::sqrt(1.0))); // p2 = 1/1
    // candidate shorter than n: that order scores zero
    CHECK(bleu(toks("cat"), ref, 4)[3] == 0.0);
}

TEST_CASE("bleu property: removing a matched token never raises clipped counts") {
    const TokenSeq ref = toks("a b c d e f g");
    TokenSeq cand = toks("a b c x y");
    auto clipped_unigrams = [&](const TokenSeq& c) {
        int count = 0;
        std::multiset<std::string> pool(ref.begin(), ref.end());
        for (const auto& t : c) {
            auto it = pool.find(t);
            if (it != pool.end()) {
                pool.erase(it);
                ++count;
            }
        }
        return count;
    };
    const int before = clipped_unigrams(cand);
    cand.erase(cand.begin()); // drop matched token "a"
    CHECK(clipped_unigrams(cand) <= before);
    CHECK(clipped_unigrams(cand) == before - 1);
}

TEST_CASE("rouge_l: spec examples") {
    const TokenSeq same = toks("a tall green tree");
    CHECK(rouge_l(same, same) == doctest::Approx(1.0));
    CHECK(rouge_l(toks("one two"), toks("three four")) == 0.0);

    // cand=[the,cat,sat], ref=[the,cat,ate,food] -> L=2, F=4/7
    CHECK(rouge_l(toks("the cat sat"), toks("the cat ate food")) ==
          doctest::Approx(4.0 / 7.0));
    CHECK(rouge_l({}, same) == 0.0);
}

TEST_CASE("rouge_l: exhaustive agreement with brute-force LCS") {
    // every pair of sequences up to length 5 over a binary vocabulary
    std::vector<TokenSeq> all;
    for (int len = 0; len <= 5; ++len) {
        for (int bits = 0; bits < (1 << len); ++bits) {
            TokenSeq s;
            for (int i = 0; i < len; ++i) {
                s.push_back((bits >> i) & 1 ? "b" : "a");
            }
            all.push_back(std::move(s));
        }
    }
    for (const auto& a : all) {
        for (const auto& b : all) {
            const int lcs = brute_force_lcs(a, b);
            double expected = 0.0;
            if (lcs > 0) {
                const double p = static_cast<double>(lcs) / a.size();
                const double r = static_cast<double>(lcs) / b.size();
                expected = 2 * p * r / (p + r);
            }
            CHECK(rouge_l(a, b) == doctest::Approx(expected));
        }
    }
}

TEST_CASE("meteor: spec examples") {
    // identical 4-token sentence: one chunk, penalty 0.5/64
    const TokenSeq four = toks("a red car drives");
    CHECK(meteor(four, four) == doctest::Approx(0.9921875).epsilon(1e-12));

    CHECK(meteor(toks("dog"), toks("cat")) == 0.0);

    // stem match: cand=[cats], ref=[cat] -> m=1, chunks=1, score=0.5
    CHECK(meteor(toks("cats"), toks("cat")) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("meteor: fragmentation raises the penalty") {
    // same matched tokens, contiguous vs scrambled
    const TokenSeq ref = toks("a b c d");
    const double contiguous = meteor(toks("a b c d"), ref);
    const double scrambled = meteor(toks("d c b a"), ref);
    CHECK(contiguous > scrambled);
    // hand value for the scrambled case: m=4, chunks=4, F=1
    CHECK(scrambled == doctest::Approx(1.0 - 0.5));
}

TEST_CASE("bert score: identity, orthogonal, and greedy hand case") {
    const std::vector<std::vector<double>> id{{1, 0}, {0, 1}};
    CHECK(bert_score_from_embeddings(id, id) == doctest::Approx(1.0));

    CHECK(bert_score_from_embeddings({{1, 0}}, {{0, 1}}) == 0.0);

    // hand-set 2x2 cosine table: P = R = (1 + 0.8)/2 -> F = 0.9
    const std::vector<std::vector<double>> cand{{1, 0}, {0, 1}};
    const std::vector<std::vector<double>> ref{{1, 0}, {0.6, 0.8}};
    CHECK(bert_score_from_embeddings(cand, ref) == doctest::Approx(0.9));
}

TEST_CASE("evaluate_corpus: joins, means, and error paths") {
    const std::vector<CaptionEntry> refs{{"img1", 1, "a red bouncing ball"},
                                         {"img1", 2, "the blue wooden chair"},
                                         {"img2", 1, "two tall green trees"}};
    SUBCASE("identical pred/ref -> means 1.0 (meteor at its identity value)") {
        FixedEmbedder embedder;
        const MetricReport report = evaluate_corpus(refs, refs, &embedder);
        CHECK(report.pair_count == 3);
        CHECK(report.means.at("bleu1") == doctest::Approx(1.0));
        CHECK(report.means.at("bleu4") == doctest::Approx(1.0));
        CHECK(report.means.at("rouge_l") == doctest::Approx(1.0));
        CHECK(report.means.at("bert_f") == doctest::Approx(1.0));
        // meteor's fragmentation penalty leaves identical m-token sentences
        // at 1 - 0.5/m^3; assert the closed-form mean
        const double expected =
            (3.0 * (1.0 - 0.5 / 64.0)) / 3.0;
        CHECK(report.means.at("meteor") == doctest::Approx(expected).epsilon(1e-12));
        CHECK(report.unmatched_pred.empty());
        CHECK(report.unmatched_ref.empty());
    }
    SUBCASE("bert mean is absent without a client") {
        const MetricReport report =
            evaluate_corpus({{"img1", 1, "a red ball"}}, {{"img1", 1, "a red ball"}}, nullptr);
        CHECK(report.means.at("bleu1") == doctest::Approx(1.0));
        CHECK(report.means.at("rouge_l") == doctest::Approx(1.0));
        CHECK(report.means.count("bert_f") == 0);
    }
    SUBCASE("disjoint keys error out") {
        const std::vector<CaptionEntry> preds{{"other", 9, "words"}};
        CHECK_THROWS_AS(evaluate_corpus(preds, refs, nullptr), MalformedInput);
    }
    SUBCASE("two-pair fixture: means equal the hand average") {
        const std::vector<CaptionEntry> preds{{"img1", 1, "a red ball"},
                                              {"img1", 2, "a wooden table"}};
        const std::vector<CaptionEntry> two_refs{{"img1", 1, "a red ball"},
                                                 {"img1", 2, "a blue chair"}};
        const MetricReport report = evaluate_corpus(preds, two_refs, nullptr);
        REQUIRE(report.pair_count == 2);
        const double pair1 = report.pairs[0].bleu1;
        const double pair2 = report.pairs[1].bleu1;
        CHECK(report.means.at("bleu1") == doctest::Approx((pair1 + pair2) / 2));
        CHECK(pair1 == doctest::Approx(1.0));
        CHECK(pair2 == doctest::Approx(1.0 / 3.0)); // only "a" matches
    }
    SUBCASE("unmatched keys are listed") {
        const std::vector<CaptionEntry> preds{{"img1", 1, "a red ball"},
                                              {"img9", 9, "extra"}};
        const MetricReport report = evaluate_corpus(preds, refs, nullptr);
        CHECK(report.unmatched_pred == std::vector<std::string>{"img9/9"});
        CHECK(report.unmatched_ref ==
              std::vector<std::string>{"img1/2", "img2/1"});
    }
}

TEST_CASE("scores stay within [0,1] on random pairs") {
    std::uint64_t state = 12345;
    auto next_word = [&]() {
        static const char* words[] = {"a", "b", "c", "d", "e", "f"};
        state = state * 6364136223846793005ULL + 1442695040888963407ULL;
        return std::string(words[(state >> 33) % 6]);
    };
    for (int round = 0; round < 200; ++round) {
        TokenSeq cand, ref;
        for (int i = 0; i < static_cast<int>((state >> 20) % 8); ++i) {
            cand.push_back(next_word());
        }
        for (int i = 0; i < static_cast<int>((state >> 23) % 8) + 1; ++i) {
            ref.push_back(next_word());
        }
        for (double s : bleu(cand, ref, 4)) {
            CHECK(s >= 0.0);
            CHECK(s <= 1.0);
        }
        CHECK(rouge_l(cand, ref) >= 0.0);
        CHECK(rouge_l(cand, ref) <= 1.0);
        CHECK(meteor(cand, ref) >= 0.0);
        CHECK(meteor(cand, ref) <= 1.0);
    }
}
