#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "metrics.hpp"

namespace ureca {

struct ClientConfig {
    std::string endpoint; // e.g. http://127.0.0.1:8080
    std::string model;
    double temperature = 0.2;
    int timeout_s = 60;
    int max_attempts = 5;     // total tries per request
    int retry_base_ms = 1000; // exponential backoff base, doubles per retry
    int max_tokens = 512;
};

// Completion service boundary: POST {endpoint}/v1/complete.
class MllmClient {
  public:
    virtual ~MllmClient() = default;
    virtual std::string complete(const std::string& prompt,
                                 const std::vector<std::string>& images_b64) = 0;
};

// Image-embedding service boundary: POST {endpoint}/v1/embed.
class EmbeddingClient {
  public:
    virtual ~EmbeddingClient() = default;
    virtual std::vector<double> embed_image(const std::vector<std::uint8_t>& png_bytes) = 0;
};

class HttpMllmClient final : public MllmClient {
  public:
    explicit HttpMllmClient(ClientConfig cfg) : cfg_(std::move(cfg)) {}
    std::string complete(const std::string& prompt,
                         const std::vector<std::string>& images_b64) override;

  private:
    ClientConfig cfg_;
};

class HttpEmbeddingClient final : public EmbeddingClient, public TokenEmbedder {
  public:
    explicit HttpEmbeddingClient(ClientConfig cfg) : cfg_(std::move(cfg)) {}
    std::vector<double> embed_image(const std::vector<std::uint8_t>& png_bytes) override;
    std::vector<std::vector<double>> embed_tokens(const std::vector<std::string>& tokens) override;

  private:
    ClientConfig cfg_;
};

// Shared retry loop: non-200 and transport failures back off (base * 2^k) and
// retry up to max_attempts, then throw HttpError. Returns the response body.
std::string post_json_with_retry(const ClientConfig& cfg, const std::string& route,
                                 const std::string& body);

} // namespace ureca
