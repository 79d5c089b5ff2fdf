#include "mock_server.hpp"

#include <fstream>
#include <regex>

#include <httplib.h>

#include "encoder.hpp" // splitmix64_next
#include "errors.hpp"
#include "sha256.hpp"

namespace ureca {

namespace {

MockRule rule_from_json(const nlohmann::json& doc) {
    MockRule rule;
    rule.route = doc.value("route", std::string("complete"));
    if (doc.contains("prompt_contains")) {
        if (doc.at("prompt_contains").is_string()) {
            rule.prompt_contains.push_back(doc.at("prompt_contains").get<std::string>());
        } else {
            rule.prompt_contains = doc.at("prompt_contains").get<std::vector<std::string>>();
        }
    }
    rule.model = doc.value("model", std::string{});
    rule.status = doc.value("status", 200);
    if (doc.contains("text")) {
        rule.text = doc.at("text").get<std::string>();
    }
    if (doc.contains("text_template")) {
        rule.text_template = doc.at("text_template").get<std::string>();
    }
    if (doc.contains("text_sequence")) {
        rule.text_sequence = doc.at("text_sequence").get<std::vector<std::string>>();
    }
    if (doc.contains("json")) {
        rule.json_body = doc.at("json");
    }
    if (doc.contains("vector")) {
        rule.vector = doc.at("vector").get<std::vector<double>>();
    }
    rule.vector_mode = doc.value("vector_mode", std::string{});
    if (doc.contains("vectors")) {
        rule.vectors = doc.at("vectors").get<std::vector<std::vector<double>>>();
    }
    rule.tokens_mode = doc.value("tokens_mode", std::string{});
    rule.dim = doc.value("dim", 32);
    rule.fail_first = doc.value("fail_first", 0);
    return rule;
}

std::string replace_all(std::string text, const std::string& from, const std::string& to) {
    std::size_t pos = 0;
    while ((pos = text.find(from, pos)) != std::string::npos) {
        text.replace(pos, from.size(), to);
        pos += to.size();
    }
    return text;
}

struct Marker {
    std::string image = "?";
    std::string node = "?";
    std::string tpl = "?";
};

Marker parse_marker(const std::string& prompt) {
    Marker m;
    static const std::regex re(
        R"(\[request-context image=([^ \]]+) node=([^ \]]+) template=([^ \]]+)\])");
    std::smatch match;
    if (std::regex_search(prompt, match, re)) {
        m.image = match[1];
        m.node = match[2];
        m.tpl = match[3];
    }
    return m;
}

std::vector<double> content_hash_vector(const std::string& payload, int dim) {
    const auto digest = sha256(payload.data(), payload.size());
    std::vector<double> v(static_cast<std::size_t>(dim));
    for (int i = 0; i < dim; ++i) {
        v[static_cast<std::size_t>(i)] =
            (static_cast<double>(digest[static_cast<std::size_t>(i) % digest.size()]) - 127.5) /
            128.0;
    }
    return v;
}

std::vector<double> one_hot_vector(const std::string& token, int dim) {
    const auto digest = sha256(token.data(), token.size());
    std::vector<double> v(static_cast<std::size_t>(dim), 0.0);
    v[digest[0] % static_cast<std::size_t>(dim)] = 1.0;
    return v;
}

} // namespace

MockScript MockScript::from_json(const nlohmann::json& doc) {
    MockScript script;
    if (doc.contains("rules")) {
        for (const auto& r : doc.at("rules")) {
            script.rules.push_back(rule_from_json(r));
        }
    }
    if (doc.contains("catch_all")) {
        script.catch_all = rule_from_json(doc.at("catch_all"));
    }
    script.jitter_ms_max = doc.value("jitter_ms_max", 0);
    return script;
}

MockScript MockScript::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open mock script: " + path.string());
    }
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw MalformedInput("invalid mock script " + path.string() + ": " + e.what());
    }
    return from_json(doc);
}

struct MockServer::Impl {
    MockScript script;
    std::uint64_t jitter_state;
    httplib::Server server;
    std::thread thread;
    std::string host = "127.0.0.1";

    mutable std::mutex mutex;
    std::vector<nlohmann::json> log;
    std::vector<int> fail_budget;   // per rule, remaining forced failures
    std::vector<std::size_t> sequence_pos; // per rule, next text_sequence index
    std::ofstream log_file;

    explicit Impl(MockScript s, std::uint64_t seed) : script(std::move(s)), jitter_state(seed) {
        for (const auto& rule : script.rules) {
            fail_budget.push_back(rule.fail_first);
            sequence_pos.push_back(0);
        }
        fail_budget.push_back(script.catch_all ? script.catch_all->fail_first : 0);
        sequence_pos.push_back(0);
    }

    void record(const std::string& route, const nlohmann::json& body) {
        nlohmann::json entry{{"route", route}, {"body", body}};
        std::lock_guard<std::mutex> lock(mutex);
        log.push_back(entry);
        if (log_file.is_open()) {
            log_file << entry.dump() << '\n';
            log_file.flush();
        }
    }

    void maybe_jitter() {
        if (script.jitter_ms_max <= 0) {
            return;
        }
        std::uint64_t ms;
        {
            std::lock_guard<std::mutex> lock(mutex);
            ms = splitmix64_next(jitter_state) %
                 static_cast<std::uint64_t>(script.jitter_ms_max + 1);
        }
        std::this_thread::sleep_for(std::chrono::milliseconds(ms));
    }

    // returns rule index into rules (or rules.size() for catch_all), -1 if none
    int match(const std::string& route, const std::string& prompt, const std::string& model) {
        for (std::size_t i = 0; i < script.rules.size(); ++i) {
            const MockRule& rule = script.rules[i];
            if (rule.route != route) {
                continue;
            }
            if (!rule.model.empty() && rule.model != model) {
                continue;
            }
            bool ok = true;
            for (const auto& needle : rule.prompt_contains) {
                if (prompt.find(needle) == std::string::npos) {
                    ok = false;
                    break;
                }
            }
            if (ok) {
                return static_cast<int>(i);
            }
        }
        return script.catch_all ? static_cast<int>(script.rules.size()) : -1;
    }

    const MockRule& rule_at(int idx) const {
        return idx == static_cast<int>(script.rules.size()) ? *script.catch_all
                                                            : script.rules[static_cast<std::size_t>(idx)];
    }

    bool consume_failure(int idx) {
        std::lock_guard<std::mutex> lock(mutex);
        if (fail_budget[static_cast<std::size_t>(idx)] > 0) {
            --fail_budget[static_cast<std::size_t>(idx)];
            return true;
        }
        return false;
    }

    std::string next_sequence_text(int idx, const MockRule& rule) {
        std::lock_guard<std::mutex> lock(mutex);
        auto& pos = sequence_pos[static_cast<std::size_t>(idx)];
        const std::string text =
            rule.text_sequence[std::min(pos, rule.text_sequence.size() - 1)];
        ++pos;
        return text;
    }

    void handle_complete(const httplib::Request& req, httplib::Response& res) {
        maybe_jitter();
        nlohmann::json body = nlohmann::json::parse(req.body, nullptr, false);
        if (body.is_discarded()) {
            res.status = 400;
            res.set_content(R"({"error":"invalid JSON"})", "application/json");
            return;
        }
        record("complete", body);
        const std::string prompt = body.value("prompt", std::string{});
        const std::string model = body.value("model", std::string{});
        const int idx = match("complete", prompt, model);
        if (idx < 0) {
            res.status = 500;
            res.set_content(R"({"error":"unmatched request"})", "application/json");
            return;
        }
        const MockRule& rule = rule_at(idx);
        if (consume_failure(idx)) {
            res.status = 500;
            res.set_content(R"({"error":"scripted failure"})", "application/json");
            return;
        }
        res.status = rule.status;
        if (rule.json_body) {
            res.set_content(rule.json_body->dump(), "application/json");
            return;
        }
        std::string text;
        if (!rule.text_sequence.empty()) {
            text = next_sequence_text(idx, rule);
        } else if (rule.text_template) {
            const Marker m = parse_marker(prompt);
            text = replace_all(*rule.text_template, "{image}", m.image);
            text = replace_all(text, "{node}", m.node);
            text = replace_all(text, "{template}", m.tpl);
        } else if (rule.text) {
            text = *rule.text;
        } else {
            text = "ok";
        }
        res.set_content(nlohmann::json{{"text", text}}.dump(), "application/json");
    }

    void handle_embed(const httplib::Request& req, httplib::Response& res) {
        maybe_jitter();
        nlohmann::json body = nlohmann::json::parse(req.body, nullptr, false);
        if (body.is_discarded()) {
            res.status = 400;
            res.set_content(R"({"error":"invalid JSON"})", "application/json");
            return;
        }
        const bool tokens_request = body.contains("tokens");
        const std::string route = tokens_request ? "embed_tokens" : "embed_image";
        record(route, body);
        const std::string model = body.value("model", std::string{});
        const int idx = match(route, req.body, model);
        if (idx < 0) {
            res.status = 500;
            res.set_content(R"({"error":"unmatched request"})", "application/json");
            return;
        }
        const MockRule& rule = rule_at(idx);
        if (consume_failure(idx)) {
            res.status = 500;
            res.set_content(R"({"error":"scripted failure"})", "application/json");
            return;
        }
        res.status = rule.status;
        if (rule.json_body) {
            res.set_content(rule.json_body->dump(), "application/json");
            return;
        }
        if (tokens_request) {
            const auto tokens = body.at("tokens").get<std::vector<std::string>>();
            std::vector<std::vector<double>> vectors;
            if (rule.vectors) {
                vectors = *rule.vectors;
            } else {
                for (const auto& token : tokens) {
                    vectors.push_back(one_hot_vector(token, rule.dim));
                }
            }
            res.set_content(nlohmann::json{{"vectors", vectors}}.dump(), "application/json");
        } else {
            std::vector<double> vector;
            if (rule.vector) {
                vector = *rule.vector;
            } else {
                // content_hash is the default: deterministic per image payload
                vector = content_hash_vector(body.value("image_b64", std::string{}), rule.dim);
            }
            res.set_content(nlohmann::json{{"vector", vector}}.dump(), "application/json");
        }
    }
};

MockServer::MockServer(MockScript script, std::uint64_t seed)
    : impl_(std::make_unique<Impl>(std::move(script), seed)) {
    impl_->server.Post("/v1/complete", [this](const httplib::Request& req,
                                              httplib::Response& res) {
        impl_->handle_complete(req, res);
    });
    impl_->server.Post("/v1/embed",
                       [this](const httplib::Request& req, httplib::Response& res) {
                           impl_->handle_embed(req, res);
                       });
    impl_->server.Post("/_shutdown", [this](const httplib::Request&, httplib::Response& res) {
        res.set_content(R"({"ok":true})", "application/json");
        impl_->server.stop();
    });
}

MockServer::~MockServer() {
    stop();
}

int MockServer::start(const std::string& host, int port) {
    impl_->host = host;
    if (port == 0) {
        port_ = impl_->server.bind_to_any_port(host);
    } else {
        if (!impl_->server.bind_to_port(host, port)) {
            throw IoError("cannot bind mock server to port " + std::to_string(port));
        }
        port_ = port;
    }
    impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
    impl_->server.wait_until_ready();
    return port_;
}

void MockServer::stop() {
    if (impl_->thread.joinable()) {
        impl_->server.stop();
        impl_->thread.join();
    }
}

void MockServer::wait() {
    if (impl_->thread.joinable()) {
        impl_->thread.join();
    }
}

bool MockServer::running() const {
    return impl_->server.is_running();
}

std::string MockServer::endpoint() const {
    return "http://" + impl_->host + ":" + std::to_string(port_);
}

void MockServer::set_log_file(const std::filesystem::path& path) {
    std::lock_guard<std::mutex> lock(impl_->mutex);
    impl_->log_file.open(path, std::ios::trunc);
    if (!impl_->log_file) {
        throw IoError("cannot open mock log file: " + path.string());
    }
}

std::vector<nlohmann::json> MockServer::requests() const {
    std::lock_guard<std::mutex> lock(impl_->mutex);
    return impl_->log;
}

} // namespace ureca
