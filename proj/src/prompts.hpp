#pragma once

#include <filesystem>
#include <map>
#include <string>

#include "errors.hpp"

namespace ureca {

enum class TemplateId { top_down, bottom_up, uniqueness, verify };

std::string template_name(TemplateId id);

struct PromptTemplate {
    TemplateId id = TemplateId::top_down;
    std::string body;
};

// The four stage templates. Defaults are compiled in; a prompts directory with
// <name>.txt files overrides individual templates.
struct PromptSet {
    PromptTemplate top_down;
    PromptTemplate bottom_up;
    PromptTemplate uniqueness;
    PromptTemplate verify;

    const PromptTemplate& get(TemplateId id) const;

    static PromptSet embedded_defaults();
    static PromptSet load_dir(const std::filesystem::path& dir);
};

// Fills {slot} markers. A referenced slot missing from `slots` is an error;
// entries in `slots` that the template does not reference are ignored.
std::string render_template(const PromptTemplate& tpl,
                            const std::map<std::string, std::string>& slots);

} // namespace ureca
