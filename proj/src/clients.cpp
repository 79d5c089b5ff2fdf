#include "clients.hpp"

#include <chrono>
#include <cmath>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "base64.hpp"
#include "errors.hpp"

namespace ureca {

std::string post_json_with_retry(const ClientConfig& cfg, const std::string& route,
                                 const std::string& body) {
    if (cfg.endpoint.empty()) {
        throw InvalidArgument("client endpoint is not configured");
    }
    std::string last_error;
    for (int attempt = 0; attempt < std::max(1, cfg.max_attempts); ++attempt) {
        if (attempt > 0) {
            const auto delay = std::chrono::milliseconds(
                static_cast<std::int64_t>(cfg.retry_base_ms) << (attempt - 1));
            std::this_thread::sleep_for(delay);
        }
        httplib::Client client(cfg.endpoint);
        client.set_connection_timeout(cfg.timeout_s, 0);
        client.set_read_timeout(cfg.timeout_s, 0);
        auto res = client.Post(route, body, "application/json");
        if (!res) {
            last_error = "transport error: " + httplib::to_string(res.error());
            continue;
        }
        if (res->status != 200) {
            last_error = "HTTP " + std::to_string(res->status) + ": " + res->body;
            continue;
        }
        return res->body;
    }
    throw HttpError("POST " + cfg.endpoint + route + " failed after " +
                    std::to_string(std::max(1, cfg.max_attempts)) + " attempts; last: " +
                    last_error);
}

std::string HttpMllmClient::complete(const std::string& prompt,
                                     const std::vector<std::string>& images_b64) {
    nlohmann::ordered_json req;
    req["model"] = cfg_.model;
    req["prompt"] = prompt;
    req["images_b64"] = images_b64;
    req["temperature"] = cfg_.temperature;
    req["max_tokens"] = cfg_.max_tokens;
    const std::string body = post_json_with_retry(cfg_, "/v1/complete", req.dump());
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(body);
    } catch (const nlohmann::json::exception& e) {
        throw HttpError(std::string("completion response is not JSON: ") + e.what());
    }
    if (!doc.contains("text") || !doc.at("text").is_string()) {
        throw HttpError("completion response lacks a \"text\" string");
    }
    const std::string text = doc.at("text").get<std::string>();
    if (text.empty()) {
        throw HttpError("completion response text is empty");
    }
    return text;
}

std::vector<double> HttpEmbeddingClient::embed_image(const std::vector<std::uint8_t>& png_bytes) {
    nlohmann::ordered_json req;
    req["model"] = cfg_.model;
    req["image_b64"] = base64_encode(png_bytes);
    const std::string body = post_json_with_retry(cfg_, "/v1/embed", req.dump());
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(body);
    } catch (const nlohmann::json::exception& e) {
        throw HttpError(std::string("embed response is not JSON: ") + e.what());
    }
    if (!doc.contains("vector") || !doc.at("vector").is_array()) {
        throw HttpError("embed response lacks a \"vector\" array");
    }
    return doc.at("vector").get<std::vector<double>>();
}

std::vector<std::vector<double>> HttpEmbeddingClient::embed_tokens(
    const std::vector<std::string>& tokens) {
    nlohmann::ordered_json req;
    req["model"] = cfg_.model;
    req["tokens"] = tokens;
    const std::string body = post_json_with_retry(cfg_, "/v1/embed", req.dump());
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(body);
    } catch (const nlohmann::json::exception& e) {
        throw HttpError(std::string("embed response is not JSON: ") + e.what());
    }
    if (!doc.contains("vectors") || !doc.at("vectors").is_array()) {
        throw HttpError("token embed response lacks a \"vectors\" array");
    }
    auto out = doc.at("vectors").get<std::vector<std::vector<double>>>();
    if (out.size() != tokens.size()) {
        throw HttpError("token embed response has " + std::to_string(out.size()) +
                        " vectors for " + std::to_string(tokens.size()) + " tokens");
    }
    return out;
}

} // namespace ureca
