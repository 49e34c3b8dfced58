#pragma once

#include <string>

namespace mmrec {

// Every prompt segment the renderer emits, by name. Placeholders use literal
// {name} interpolation with no escaping; braces in titles pass through.
// The shipped templates/catalog.txt is the same data in a diffable text form
// and must stay byte-identical to default_catalog() (enforced by tests).
struct TemplateCatalog {
    std::string version;

    // summary phase
    std::string summary_visual;
    std::string summary_visual_title_based;
    std::string summary_title;

    // ranking phase: history segment
    std::string ranking_history_header;
    std::string ranking_history_header_icl;
    std::string ranking_icl_demonstration;
    std::string entry_title;
    std::string entry_title_summary;
    std::string entry_summary;
    std::string entry_title_titlesum_summary;

    // ranking phase: candidate segment
    std::string ranking_candidates_header;
    std::string candidate_line;
    std::string ranking_instruction;
    std::string ranking_cot_suffix;
};

const TemplateCatalog& default_catalog();

std::string catalog_to_text(const TemplateCatalog& catalog);
TemplateCatalog catalog_from_text(const std::string& text); // throws on unknown/missing keys

// {placeholder} substitution, every occurrence, no escaping.
std::string substitute(std::string tmpl, const std::string& key, const std::string& value);

} // namespace mmrec
