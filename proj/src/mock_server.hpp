#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

namespace ureca {

// One scripted response rule. Routes: "complete", "embed_image", "embed_tokens".
// Completion rules match when every prompt_contains substring appears in the
// request prompt (and the model matches, when given). First matching rule wins.
struct MockRule {
    std::string route = "complete";
    std::vector<std::string> prompt_contains;
    std::string model; // empty = any

    int status = 200;
    std::optional<std::string> text;                 // fixed completion text
    std::optional<std::string> text_template;        // {image},{node},{template} placeholders
    std::vector<std::string> text_sequence;          // consumed per request; last repeats
    std::optional<nlohmann::json> json_body;         // verbatim response body
    std::optional<std::vector<double>> vector;       // embed_image response
    std::string vector_mode;                         // "content_hash"
    std::optional<std::vector<std::vector<double>>> vectors; // embed_tokens response
    std::string tokens_mode;                         // "one_hot"
    int dim = 32;
    int fail_first = 0; // respond 500 this many times before honoring the rule
};

struct MockScript {
    std::vector<MockRule> rules;
    std::optional<MockRule> catch_all;
    int jitter_ms_max = 0;

    static MockScript from_json(const nlohmann::json& doc);
    static MockScript load(const std::filesystem::path& path);
};

// Deterministic scripted stand-in for the completion/embedding services.
// Serves POST /v1/complete and /v1/embed (the judge talks to /v1/complete too)
// plus POST /_shutdown for orderly teardown. Logs every request body.
class MockServer {
  public:
    explicit MockServer(MockScript script, std::uint64_t seed = 0);
    ~MockServer();

    MockServer(const MockServer&) = delete;
    MockServer& operator=(const MockServer&) = delete;

    int start(const std::string& host, int port); // port 0 picks a free one
    void stop();
    void wait(); // blocks until the serve loop exits (stop() or POST /_shutdown)
    bool running() const;
    int port() const { return port_; }
    std::string endpoint() const;

    void set_log_file(const std::filesystem::path& path);

    // Request log: {"route": ..., "body": {...}} per request, arrival order.
    std::vector<nlohmann::json> requests() const;

  private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
    int port_ = 0;
};

} // namespace ureca
