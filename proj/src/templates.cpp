#include "mmrec/templates.hpp"

#include "mmrec/error.hpp"

#include <array>
#include <sstream>
#include <utility>
#include <vector>

namespace mmrec {

const TemplateCatalog& default_catalog() {
    static const TemplateCatalog catalog = [] {
        TemplateCatalog c;
        c.version = "v1";

        c.summary_visual = "What's in this image?";
        c.summary_visual_title_based =
            "This is an image related to {title}. Please provide a detailed description of the "
            "given image.";
        c.summary_title = "Title: {title}. What information can you get from the title?";

        c.ranking_history_header =
            "Here is a chronological list of my purchase history for some products including the "
            "title and the description of each product.";
        c.ranking_history_header_icl = "Here is a chronological list of my purchase history:";
        c.ranking_icl_demonstration =
            "Then if I ask you to recommend a new product, you should recommend {title}. Now I've "
            "just purchased {title}, I want to buy a new product.";
        c.entry_title = "{index}. {title}";
        c.entry_title_summary = "{index}. {title}: {summary}";
        c.entry_summary = "{index}. {summary}";
        c.entry_title_titlesum_summary = "{index}. {title}: {title_summary}; {summary}";

        c.ranking_candidates_header = "There are {n} candidate products I am considering to buy:";
        c.candidate_line = "{index}. {title}";
        c.ranking_instruction =
            "Please rank these {n} candidate products based on the likelihood that I would like "
            "to purchase next most according to the given purchase history. You cannot generate "
            "products that are not in the given candidate list.";
        c.ranking_cot_suffix = "Please think step by step.";
        return c;
    }();
    return catalog;
}

namespace {

using Field = std::pair<const char*, std::string TemplateCatalog::*>;

const std::vector<Field>& fields() {
    static const std::vector<Field> f = {
        {"version", &TemplateCatalog::version},
        {"summary_visual", &TemplateCatalog::summary_visual},
        {"summary_visual_title_based", &TemplateCatalog::summary_visual_title_based},
        {"summary_title", &TemplateCatalog::summary_title},
        {"ranking_history_header", &TemplateCatalog::ranking_history_header},
        {"ranking_history_header_icl", &TemplateCatalog::ranking_history_header_icl},
        {"ranking_icl_demonstration", &TemplateCatalog::ranking_icl_demonstration},
        {"entry_title", &TemplateCatalog::entry_title},
        {"entry_title_summary", &TemplateCatalog::entry_title_summary},
        {"entry_summary", &TemplateCatalog::entry_summary},
        {"entry_title_titlesum_summary", &TemplateCatalog::entry_title_titlesum_summary},
        {"ranking_candidates_header", &TemplateCatalog::ranking_candidates_header},
        {"candidate_line", &TemplateCatalog::candidate_line},
        {"ranking_instruction", &TemplateCatalog::ranking_instruction},
        {"ranking_cot_suffix", &TemplateCatalog::ranking_cot_suffix},
    };
    return f;
}

} // namespace

std::string catalog_to_text(const TemplateCatalog& catalog) {
    std::ostringstream out;
    out << "# prompt template catalog\n";
    for (const auto& [name, member] : fields()) out << "\n[" << name << "]\n" << catalog.*member << "\n";
    return out.str();
}

TemplateCatalog catalog_from_text(const std::string& text) {
    TemplateCatalog catalog;
    std::vector<bool> seen(fields().size(), false);
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (line.front() != '[' || line.back() != ']')
            throw SchemaError("template catalog: expected [name] header, got: " + line);
        std::string name = line.substr(1, line.size() - 2);
        std::string value;
        if (!std::getline(in, value))
            throw SchemaError("template catalog: missing value for " + name);
        bool known = false;
        for (size_t i = 0; i < fields().size(); ++i) {
            if (name == fields()[i].first) {
                catalog.*(fields()[i].second) = value;
                seen[i] = true;
                known = true;
                break;
            }
        }
        if (!known) throw SchemaError("template catalog: unknown template name: " + name);
    }
    for (size_t i = 0; i < fields().size(); ++i)
        if (!seen[i])
            throw SchemaError(std::string("template catalog: missing template: ") +
                              fields()[i].first);
    return catalog;
}

std::string substitute(std::string tmpl, const std::string& key, const std::string& value) {
    const std::string pat = "{" + key + "}";
    size_t pos = 0;
    while ((pos = tmpl.find(pat, pos)) != std::string::npos) {
        tmpl.replace(pos, pat.size(), value);
        pos += value.size();
    }
    return tmpl;
}

} // namespace mmrec
