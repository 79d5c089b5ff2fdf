#include "metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <unordered_map>

#include "porter.hpp"

namespace ureca {

namespace {

bool is_unicode_space(char32_t cp) {
    switch (cp) {
    case 0x09:
    case 0x0A:
    case 0x0B:
    case 0x0C:
    case 0x0D:
    case 0x20:
    case 0x85:
    case 0xA0:
    case 0x1680:
    case 0x2028:
    case 0x2029:
    case 0x202F:
    case 0x205F:
    case 0x3000:
        return true;
    default:
        return cp >= 0x2000 && cp <= 0x200A;
    }
}

bool is_ascii_punct(char32_t cp) {
    return cp < 0x80 && std::ispunct(static_cast<unsigned char>(cp));
}

// Minimal UTF-8 decoding; invalid bytes pass through as single code units.
std::vector<char32_t> decode_utf8(const std::string& s) {
    std::vector<char32_t> out;
    std::size_t i = 0;
    while (i < s.size()) {
        const unsigned char b = static_cast<unsigned char>(s[i]);
        char32_t cp = b;
        std::size_t len = 1;
        if ((b & 0xE0) == 0xC0) {
            len = 2;
            cp = b & 0x1F;
        } else if ((b & 0xF0) == 0xE0) {
            len = 3;
            cp = b & 0x0F;
        } else if ((b & 0xF8) == 0xF0) {
            len = 4;
            cp = b & 0x07;
        }
        if (i + len > s.size()) {
            len = 1;
            cp = b;
        } else {
            for (std::size_t k = 1; k < len; ++k) {
                const unsigned char cont = static_cast<unsigned char>(s[i + k]);
                if ((cont & 0xC0) != 0x80) {
                    len = 1;
                    cp = b;
                    break;
                }
                cp = (cp << 6) | (cont & 0x3F);
            }
        }
        out.push_back(cp);
        i += len;
    }
    return out;
}

void append_utf8(std::string& out, char32_t cp) {
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
}

} // namespace

TokenSeq tokenize(const std::string& text) {
    TokenSeq out;
    std::vector<char32_t> current;
    auto flush = [&]() {
        if (current.empty()) {
            return;
        }
        std::size_t begin = 0;
        std::size_t end = current.size();
        while (begin < end && is_ascii_punct(current[begin])) {
            ++begin;
        }
        while (end > begin && is_ascii_punct(current[end - 1])) {
            --end;
        }
        if (end > begin) {
            std::string token;
            for (std::size_t k = begin; k < end; ++k) {
                char32_t cp = current[k];
                if (cp >= 'A' && cp <= 'Z') {
                    cp += 'a' - 'A';
                }
                append_utf8(token, cp);
            }
            out.push_back(std::move(token));
        }
        current.clear();
    };
    for (char32_t cp : decode_utf8(text)) {
        if (is_unicode_space(cp)) {
            flush();
        } else {
            current.push_back(cp);
        }
    }
    flush();
    return out;
}

namespace {

std::unordered_map<std::string, int> ngram_counts(const TokenSeq& tokens, int n) {
    std::unordered_map<std::string, int> counts;
    if (static_cast<int>(tokens.size()) < n) {
        return counts;
    }
    for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
        std::string key;
        for (int k = 0; k < n; ++k) {
            if (k) {
                key.push_back('\x1f');
            }
            key += tokens[i + static_cast<std::size_t>(k)];
        }
        ++counts[key];
    }
    return counts;
}

} // namespace

std::vector<double> bleu(const TokenSeq& cand, const TokenSeq& ref, int max_n) {
    if (max_n < 1 || max_n > 4) {
        throw InvalidArgument("max_n must be in 1..4");
    }
    std::vector<double> scores(static_cast<std::size_t>(max_n), 0.0);
    if (cand.empty()) {
        return scores;
    }
    std::vector<double> precisions;
    for (int n = 1; n <= max_n; ++n) {
        const auto cc = ngram_counts(cand, n);
        const auto rc = ngram_counts(ref, n);
        std::int64_t total = 0;
        std::int64_t clipped = 0;
        for (const auto& [gram, count] : cc) {
            total += count;
            const auto it = rc.find(gram);
            if (it != rc.end()) {
                clipped += std::min(count, it->second);
            }
        }
        precisions.push_back(total > 0 ? static_cast<double>(clipped) / total : 0.0);
    }
    const double bp =
        cand.size() > ref.size()
            ? 1.0
            : std::exp(1.0 - static_cast<double>(ref.size()) / static_cast<double>(cand.size()));
    for (int k = 1; k <= max_n; ++k) {
        bool zero = false;
        double log_sum = 0.0;
        for (int n = 0; n < k; ++n) {
            if (precisions[static_cast<std::size_t>(n)] <= 0.0) {
                zero = true;
                break;
            }
            log_sum += std::log(precisions[static_cast<std::size_t>(n)]);
        }
        scores[static_cast<std::size_t>(k - 1)] = zero ? 0.0 : bp * std::exp(log_sum / k);
    }
    return scores;
}

double rouge_l(const TokenSeq& cand, const TokenSeq& ref) {
    if (cand.empty() || ref.empty()) {
        return 0.0;
    }
    const std::size_t n = cand.size();
    const std::size_t m = ref.size();
    std::vector<int> prev(m + 1, 0), cur(m + 1, 0);
    for (std::size_t i = 1; i <= n; ++i) {
        for (std::size_t j = 1; j <= m; ++j) {
            cur[j] = cand[i - 1] == ref[j - 1] ? prev[j - 1] + 1
                                               : std::max(prev[j], cur[j - 1]);
        }
        std::swap(prev, cur);
    }
    const int lcs = prev[m];
    if (lcs == 0) {
        return 0.0;
    }
    const double p = static_cast<double>(lcs) / static_cast<double>(n);
    const double r = static_cast<double>(lcs) / static_cast<double>(m);
    return 2.0 * p * r / (p + r);
}

double meteor(const TokenSeq& cand, const TokenSeq& ref) {
    if (cand.empty() || ref.empty()) {
        return 0.0;
    }
    const std::size_t n = cand.size();
    const std::size_t m = ref.size();
    std::vector<int> cand_to_ref(n, -1);
    std::vector<bool> ref_used(m, false);

    // pass 1: exact matches, leftmost-greedy
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
            if (!ref_used[j] && cand[i] == ref[j]) {
                cand_to_ref[i] = static_cast<int>(j);
                ref_used[j] = true;
                break;
            }
        }
    }
    // pass 2: stem matches among the leftovers
    std::vector<std::string> cand_stem(n), ref_stem(m);
    for (std::size_t i = 0; i < n; ++i) {
        cand_stem[i] = porter_stem(cand[i]);
    }
    for (std::size_t j = 0; j < m; ++j) {
        ref_stem[j] = porter_stem(ref[j]);
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (cand_to_ref[i] >= 0) {
            continue;
        }
        for (std::size_t j = 0; j < m; ++j) {
            if (!ref_used[j] && cand_stem[i] == ref_stem[j]) {
                cand_to_ref[i] = static_cast<int>(j);
                ref_used[j] = true;
                break;
            }
        }
    }

    int matches = 0;
    int chunks = 0;
    int prev_ref = -2;
    for (std::size_t i = 0; i < n; ++i) {
        if (cand_to_ref[i] < 0) {
            continue;
        }
        ++matches;
        if (cand_to_ref[i] != prev_ref + 1) {
            ++chunks;
        }
        prev_ref = cand_to_ref[i];
    }
    if (matches == 0) {
        return 0.0;
    }
    const double p = static_cast<double>(matches) / static_cast<double>(n);
    const double r = static_cast<double>(matches) / static_cast<double>(m);
    const double f = 10.0 * p * r / (r + 9.0 * p);
    const double frag = static_cast<double>(chunks) / static_cast<double>(matches);
    const double penalty = 0.5 * frag * frag * frag;
    return f * (1.0 - penalty);
}

namespace {

double safe_cosine(const std::vector<double>& u, const std::vector<double>& v) {
    double dot = 0.0, nu = 0.0, nv = 0.0;
    for (std::size_t i = 0; i < u.size() && i < v.size(); ++i) {
        dot += u[i] * v[i];
        nu += u[i] * u[i];
        nv += v[i] * v[i];
    }
    if (nu == 0.0 || nv == 0.0) {
        return 0.0;
    }
    return dot / (std::sqrt(nu) * std::sqrt(nv));
}

} // namespace

double bert_score_from_embeddings(const std::vector<std::vector<double>>& cand,
                                  const std::vector<std::vector<double>>& ref) {
    if (cand.empty() || ref.empty()) {
        return 0.0;
    }
    auto greedy = [](const std::vector<std::vector<double>>& from,
                     const std::vector<std::vector<double>>& to) {
        double sum = 0.0;
        for (const auto& u : from) {
            double best = 0.0;
            for (const auto& v : to) {
                best = std::max(best, safe_cosine(u, v));
            }
            sum += best;
        }
        return sum / static_cast<double>(from.size());
    };
    const double p = greedy(cand, ref);
    const double r = greedy(ref, cand);
    if (p + r == 0.0) {
        return 0.0;
    }
    return 2.0 * p * r / (p + r);
}

std::vector<CaptionEntry> load_caption_jsonl(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open: " + path.string());
    }
    std::vector<CaptionEntry> out;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) {
            continue;
        }
        nlohmann::json doc;
        try {
            doc = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw MalformedInput(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
        }
        CaptionEntry entry;
        if (doc.at("image_id").is_string()) {
            entry.image_id = doc.at("image_id").get<std::string>();
        } else {
            entry.image_id = std::to_string(doc.at("image_id").get<std::int64_t>());
        }
        entry.node_id = doc.at("node_id").get<int>();
        entry.caption = doc.at("caption").get<std::string>();
        out.push_back(std::move(entry));
    }
    return out;
}

MetricReport evaluate_corpus(const std::vector<CaptionEntry>& preds,
                             const std::vector<CaptionEntry>& refs, TokenEmbedder* embedder) {
    auto key = [](const CaptionEntry& e) { return e.image_id + "/" + std::to_string(e.node_id); };
    std::map<std::string, const CaptionEntry*> ref_by_key;
    for (const auto& r : refs) {
        ref_by_key[key(r)] = &r;
    }

    MetricReport report;
    std::map<std::string, bool> ref_matched;
    for (const auto& p : preds) {
        const auto it = ref_by_key.find(key(p));
        if (it == ref_by_key.end()) {
            report.unmatched_pred.push_back(key(p));
            continue;
        }
        ref_matched[it->first] = true;
        const TokenSeq cand = tokenize(p.caption);
        const TokenSeq ref = tokenize(it->second->caption);
        PairScores scores;
        scores.image_id = p.image_id;
        scores.node_id = p.node_id;
        const auto b = bleu(cand, ref, 4);
        scores.bleu1 = b[0];
        scores.bleu2 = b[1];
        scores.bleu3 = b[2];
        scores.bleu4 = b[3];
        scores.rouge_l = rouge_l(cand, ref);
        scores.meteor = meteor(cand, ref);
        if (embedder && !cand.empty() && !ref.empty()) {
            try {
                scores.bert_f =
                    bert_score_from_embeddings(embedder->embed_tokens(cand),
                                               embedder->embed_tokens(ref));
            } catch (const std::exception&) {
                scores.bert_f.reset(); // metric absent, run continues
            }
        }
        report.pairs.push_back(std::move(scores));
    }
    for (const auto& [k, entry] : ref_by_key) {
        if (!ref_matched.count(k)) {
            report.unmatched_ref.push_back(k);
        }
    }
    if (report.pairs.empty()) {
        throw MalformedInput("no (image_id, node_id) keys shared between pred and ref files");
    }
    report.pair_count = static_cast<int>(report.pairs.size());

    auto mean_of = [&](auto getter) {
        double sum = 0.0;
        for (const auto& s : report.pairs) {
            sum += getter(s);
        }
        return sum / report.pairs.size();
    };
    report.means["bleu1"] = mean_of([](const PairScores& s) { return s.bleu1; });
    report.means["bleu2"] = mean_of([](const PairScores& s) { return s.bleu2; });
    report.means["bleu3"] = mean_of([](const PairScores& s) { return s.bleu3; });
    report.means["bleu4"] = mean_of([](const PairScores& s) { return s.bleu4; });
    report.means["rouge_l"] = mean_of([](const PairScores& s) { return s.rouge_l; });
    report.means["meteor"] = mean_of([](const PairScores& s) { return s.meteor; });
    int bert_count = 0;
    double bert_sum = 0.0;
    for (const auto& s : report.pairs) {
        if (s.bert_f) {
            ++bert_count;
            bert_sum += *s.bert_f;
        }
    }
    if (bert_count > 0) {
        report.means["bert_f"] = bert_sum / bert_count;
    }
    return report;
}

nlohmann::ordered_json report_to_json(const MetricReport& report, bool percent) {
    const double scale = percent ? 100.0 : 1.0;
    nlohmann::ordered_json out;
    out["pair_count"] = report.pair_count;
    auto& means = out["mean"] = nlohmann::ordered_json::object();
    for (const auto& [name, value] : report.means) {
        means[name] = value * scale;
    }
    auto& pairs = out["pairs"] = nlohmann::ordered_json::array();
    for (const auto& s : report.pairs) {
        nlohmann::ordered_json p;
        p["image_id"] = s.image_id;
        p["node_id"] = s.node_id;
        p["bleu1"] = s.bleu1 * scale;
        p["bleu2"] = s.bleu2 * scale;
        p["bleu3"] = s.bleu3 * scale;
        p["bleu4"] = s.bleu4 * scale;
        p["rouge_l"] = s.rouge_l * scale;
        p["meteor"] = s.meteor * scale;
        if (s.bert_f) {
            p["bert_f"] = *s.bert_f * scale;
        }
        pairs.push_back(std::move(p));
    }
    out["unmatched_pred"] = report.unmatched_pred;
    out["unmatched_ref"] = report.unmatched_ref;
    return out;
}

} // namespace ureca
