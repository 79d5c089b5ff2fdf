#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "errors.hpp"

namespace ureca {

using TokenSeq = std::vector<std::string>;

// Lowercase, split on Unicode whitespace, strip leading/trailing ASCII
// punctuation per token, drop empties.
TokenSeq tokenize(const std::string& text);

// BLEU@1..max_n with clipped n-gram precision, geometric mean and brevity
// penalty. Any zero precision zeroes that order; empty candidate scores 0.
std::vector<double> bleu(const TokenSeq& cand, const TokenSeq& ref, int max_n);

// LCS-based F-score.
double rouge_l(const TokenSeq& cand, const TokenSeq& ref);

// Two-pass greedy alignment (exact, then Porter stem), fragmentation penalty
// 0.5 * (chunks/m)^3 over F = 10PR / (R + 9P).
double meteor(const TokenSeq& cand, const TokenSeq& ref);

// Greedy-matching F over per-token embeddings; negative similarities clamp to 0.
double bert_score_from_embeddings(const std::vector<std::vector<double>>& cand,
                                  const std::vector<std::vector<double>>& ref);

// Provider of per-token embedding vectors (HTTP client in production, fixtures
// in tests). Returns one vector per input token.
class TokenEmbedder {
  public:
    virtual ~TokenEmbedder() = default;
    virtual std::vector<std::vector<double>> embed_tokens(const std::vector<std::string>& tokens) = 0;
};

struct CaptionEntry {
    std::string image_id;
    int node_id = 0;
    std::string caption;
};

std::vector<CaptionEntry> load_caption_jsonl(const std::filesystem::path& path);

struct PairScores {
    std::string image_id;
    int node_id = 0;
    double bleu1 = 0, bleu2 = 0, bleu3 = 0, bleu4 = 0;
    double rouge_l = 0;
    double meteor = 0;
    std::optional<double> bert_f;
};

struct MetricReport {
    std::vector<PairScores> pairs;
    std::map<std::string, double> means; // metric name -> arithmetic mean
    int pair_count = 0;
    std::vector<std::string> unmatched_pred; // "image_id/node_id" keys without a partner
    std::vector<std::string> unmatched_ref;
};

// Inner-join on (image_id, node_id); embedder may be null (BERTScore absent).
MetricReport evaluate_corpus(const std::vector<CaptionEntry>& preds,
                             const std::vector<CaptionEntry>& refs, TokenEmbedder* embedder);

nlohmann::ordered_json report_to_json(const MetricReport& report, bool percent);

} // namespace ureca
