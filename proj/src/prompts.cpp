#include "prompts.hpp"

#include <fstream>

namespace ureca {

namespace detail {
extern const char* kDefaultTopDown;
extern const char* kDefaultBottomUp;
extern const char* kDefaultUniqueness;
extern const char* kDefaultVerify;
} // namespace detail

std::string template_name(TemplateId id) {
    switch (id) {
    case TemplateId::top_down:
        return "top_down";
    case TemplateId::bottom_up:
        return "bottom_up";
    case TemplateId::uniqueness:
        return "uniqueness";
    case TemplateId::verify:
        return "verify";
    }
    return "unknown";
}

const PromptTemplate& PromptSet::get(TemplateId id) const {
    switch (id) {
    case TemplateId::top_down:
        return top_down;
    case TemplateId::bottom_up:
        return bottom_up;
    case TemplateId::uniqueness:
        return uniqueness;
    case TemplateId::verify:
        return verify;
    }
    throw InvalidArgument("unknown template id");
}

PromptSet PromptSet::embedded_defaults() {
    PromptSet set;
    set.top_down = {TemplateId::top_down, detail::kDefaultTopDown};
    set.bottom_up = {TemplateId::bottom_up, detail::kDefaultBottomUp};
    set.uniqueness = {TemplateId::uniqueness, detail::kDefaultUniqueness};
    set.verify = {TemplateId::verify, detail::kDefaultVerify};
    return set;
}

PromptSet PromptSet::load_dir(const std::filesystem::path& dir) {
    PromptSet set = embedded_defaults();
    auto load_into = [&](PromptTemplate& tpl) {
        const auto path = dir / (template_name(tpl.id) + ".txt");
        if (!std::filesystem::exists(path)) {
            return; // keep the embedded default for this template
        }
        std::ifstream in(path);
        if (!in) {
            throw IoError("cannot read template: " + path.string());
        }
        tpl.body.assign((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    };
    load_into(set.top_down);
    load_into(set.bottom_up);
    load_into(set.uniqueness);
    load_into(set.verify);
    return set;
}

std::string render_template(const PromptTemplate& tpl,
                            const std::map<std::string, std::string>& slots) {
    std::string out;
    out.reserve(tpl.body.size());
    std::size_t i = 0;
    while (i < tpl.body.size()) {
        const char c = tpl.body[i];
        if (c != '{') {
            out.push_back(c);
            ++i;
            continue;
        }
        // a slot marker is exactly {lower_snake_case}
        std::size_t j = i + 1;
        while (j < tpl.body.size() &&
               ((tpl.body[j] >= 'a' && tpl.body[j] <= 'z') || tpl.body[j] == '_')) {
            ++j;
        }
        if (j > i + 1 && j < tpl.body.size() && tpl.body[j] == '}') {
            const std::string name = tpl.body.substr(i + 1, j - i - 1);
            const auto it = slots.find(name);
            if (it == slots.end()) {
                throw InvalidArgument("template " + template_name(tpl.id) +
                                      " references missing slot {" + name + "}");
            }
            out += it->second;
            i = j + 1;
        } else {
            out.push_back(c);
            ++i;
        }
    }
    return out;
}

} // namespace ureca
