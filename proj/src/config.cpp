#include "config.hpp"

#include <fstream>

#include "errors.hpp"

namespace ureca {

namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) {
        return {};
    }
    const auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

} // namespace

void Config::load_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open config file: " + path.string());
    }
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string stripped = trim(line);
        if (stripped.empty() || stripped[0] == '#') {
            continue;
        }
        const auto eq = stripped.find('=');
        if (eq == std::string::npos) {
            throw MalformedInput(path.string() + ":" + std::to_string(line_no) +
                                 ": expected key = value");
        }
        const std::string key = trim(stripped.substr(0, eq));
        const std::string value = trim(stripped.substr(eq + 1));
        if (key.empty()) {
            throw MalformedInput(path.string() + ":" + std::to_string(line_no) + ": empty key");
        }
        file_values_[key] = value;
    }
}

void Config::set_override(const std::string& key, const std::string& value) {
    overrides_[key] = value;
}

std::optional<std::string> Config::get(const std::string& key) const {
    if (const auto it = overrides_.find(key); it != overrides_.end()) {
        return it->second;
    }
    if (const auto it = file_values_.find(key); it != file_values_.end()) {
        return it->second;
    }
    return std::nullopt;
}

namespace {

template <typename T>
T parse_number(const std::string& key, const std::string& value);

template <> double parse_number<double>(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        const double v = std::stod(value, &used);
        if (used != value.size()) {
            throw std::invalid_argument("trailing junk");
        }
        return v;
    } catch (const std::exception&) {
        throw InvalidArgument("config key " + key + ": not a number: \"" + value + "\"");
    }
}

template <> int parse_number<int>(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        const int v = std::stoi(value, &used);
        if (used != value.size()) {
            throw std::invalid_argument("trailing junk");
        }
        return v;
    } catch (const std::exception&) {
        throw InvalidArgument("config key " + key + ": not an integer: \"" + value + "\"");
    }
}

template <>
std::uint64_t parse_number<std::uint64_t>(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        const std::uint64_t v = std::stoull(value, &used);
        if (used != value.size()) {
            throw std::invalid_argument("trailing junk");
        }
        return v;
    } catch (const std::exception&) {
        throw InvalidArgument("config key " + key + ": not an unsigned integer: \"" + value +
                              "\"");
    }
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1" || value == "yes" || value == "on") {
        return true;
    }
    if (value == "false" || value == "0" || value == "no" || value == "off") {
        return false;
    }
    throw InvalidArgument("config key " + key + ": not a boolean: \"" + value + "\"");
}

struct Resolver {
    const Config& cfg;

    void str(const std::string& key, std::string& out) const {
        if (const auto v = cfg.get(key)) {
            out = *v;
        }
    }
    void path(const std::string& key, std::filesystem::path& out) const {
        if (const auto v = cfg.get(key)) {
            out = *v;
        }
    }
    void num(const std::string& key, double& out) const {
        if (const auto v = cfg.get(key)) {
            out = parse_number<double>(key, *v);
        }
    }
    void num(const std::string& key, int& out) const {
        if (const auto v = cfg.get(key)) {
            out = parse_number<int>(key, *v);
        }
    }
    void num(const std::string& key, std::uint64_t& out) const {
        if (const auto v = cfg.get(key)) {
            out = parse_number<std::uint64_t>(key, *v);
        }
    }
    void flag(const std::string& key, bool& out) const {
        if (const auto v = cfg.get(key)) {
            out = parse_bool(key, *v);
        }
    }
    void client(const std::string& section, ClientConfig& out) const {
        str(section + ".endpoint", out.endpoint);
        str(section + ".model", out.model);
        num(section + ".temperature", out.temperature);
        num(section + ".timeout_s", out.timeout_s);
        num(section + ".max_attempts", out.max_attempts);
        num(section + ".retry_base_ms", out.retry_base_ms);
        num(section + ".max_tokens", out.max_tokens);
    }
};

} // namespace

RunConfig RunConfig::resolve(const Config& cfg) {
    RunConfig run;
    run.mllm.model = "annotator";
    run.judge.model = "judge";
    run.embed.model = "embedder";

    const Resolver r{cfg};
    r.path("workdir", run.workdir);
    r.num("seed", run.seed);
    r.flag("verbose", run.verbose);
    r.flag("verify", run.verify);
    r.client("mllm", run.mllm);
    r.client("judge", run.judge);
    r.client("embed", run.embed);
    r.num("tree.tau_contain", run.tree.tau_contain);
    r.num("tree.tau_dup", run.tree.tau_dup);
    r.num("tree.main_depth_threshold", run.tree.main_depth_threshold);
    r.num("split.tile", run.split.tile);
    r.num("split.max_tiles", run.split.max_tiles);
    r.flag("split.global_tile", run.split.global_tile);
    r.num("encoder.dim", run.encoder_dim);
    r.num("encoder.token_len", run.encoder_token_len);
    r.num("render.sigma", run.render.sigma);
    r.num("render.thickness", run.render.thickness);
    r.num("render.margin", run.render.margin);
    r.num("sim.tau", run.sim.tau_sim);
    r.num("sim.max_group", run.sim.max_group);
    r.num("pipeline.embed_concurrency", run.embed_concurrency);
    r.num("pipeline.mllm_concurrency", run.mllm_concurrency);
    r.num("pipeline.image_concurrency", run.image_concurrency);
    r.path("prompts.dir", run.prompts_dir);

    run.tree.validate();
    run.split.validate();
    run.sim.validate();
    if (run.encoder_dim < 1) {
        throw InvalidArgument("encoder.dim must be >= 1");
    }
    if (run.encoder_token_len != 4 && run.encoder_token_len != 8 &&
        run.encoder_token_len != 16) {
        throw InvalidArgument("encoder.token_len must be one of {4, 8, 16}");
    }
    if (run.render.sigma <= 0) {
        throw InvalidArgument("render.sigma must be > 0");
    }
    if (run.render.margin < 0) {
        throw InvalidArgument("render.margin must be >= 0");
    }
    if (run.embed_concurrency < 1 || run.mllm_concurrency < 1 || run.image_concurrency < 1) {
        throw InvalidArgument("concurrency limits must be >= 1");
    }
    return run;
}

} // namespace ureca
