#include "mmrec/prompting.hpp"

#include "mmrec/error.hpp"

#include <algorithm>

namespace mmrec {

const std::vector<StrategyId>& all_strategies() {
    static const std::vector<StrategyId> all = {
        StrategyId::TitleOnly,    StrategyId::MM,           StrategyId::MM_ICL,
        StrategyId::MM_CoT,       StrategyId::VST,          StrategyId::VST_SummaryOnly,
        StrategyId::TitleSum_VST, StrategyId::TitleBased_VST,
    };
    return all;
}

std::string strategy_name(StrategyId s) {
    switch (s) {
        case StrategyId::TitleOnly: return "title_only";
        case StrategyId::MM: return "mm";
        case StrategyId::MM_ICL: return "mm_icl";
        case StrategyId::MM_CoT: return "mm_cot";
        case StrategyId::VST: return "vst";
        case StrategyId::VST_SummaryOnly: return "vst_summary_only";
        case StrategyId::TitleSum_VST: return "title_sum_vst";
        case StrategyId::TitleBased_VST: return "title_based_vst";
    }
    return "?";
}

std::string strategy_label(StrategyId s) {
    switch (s) {
        case StrategyId::TitleOnly: return "Title-only";
        case StrategyId::MM: return "MM";
        case StrategyId::MM_ICL: return "MM-ICL";
        case StrategyId::MM_CoT: return "MM-CoT";
        case StrategyId::VST: return "VST";
        case StrategyId::VST_SummaryOnly: return "VST-SummaryOnly";
        case StrategyId::TitleSum_VST: return "TitleSum-VST";
        case StrategyId::TitleBased_VST: return "TitleBased-VST";
    }
    return "?";
}

std::optional<StrategyId> parse_strategy(std::string_view name) {
    std::string lower(name);
    std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) {
        return c == '-' ? '_' : static_cast<char>(std::tolower(c));
    });
    for (StrategyId s : all_strategies())
        if (lower == strategy_name(s)) return s;
    return std::nullopt;
}

bool is_mm_family(StrategyId s) {
    return s == StrategyId::MM || s == StrategyId::MM_ICL || s == StrategyId::MM_CoT;
}

bool is_vst_family(StrategyId s) {
    return s == StrategyId::VST || s == StrategyId::VST_SummaryOnly ||
           s == StrategyId::TitleSum_VST || s == StrategyId::TitleBased_VST;
}

bool has_summary_phase(StrategyId s) { return is_vst_family(s); }

bool needs_title_summary(StrategyId s) { return s == StrategyId::TitleSum_VST; }

bool needs_title_conditioned_summary(StrategyId s) { return s == StrategyId::TitleBased_VST; }

std::string RenderedPrompt::joined_text() const {
    std::string out;
    for (const auto& p : parts) {
        if (p.kind != PromptPart::Kind::Text) continue;
        if (!out.empty()) out += '\n';
        out += p.value;
    }
    return out;
}

std::size_t RenderedPrompt::image_count() const {
    std::size_t n = 0;
    for (const auto& p : parts)
        if (p.kind == PromptPart::Kind::Image) ++n;
    return n;
}

RenderedPrompt render_summary_prompt(const HistoryEntryView& entry, StrategyId variant,
                                     const TemplateCatalog& catalog) {
    if (!has_summary_phase(variant))
        throw Error("strategy has no summary phase: " + strategy_name(variant));
    if (!entry.image_ref)
        throw Error("render_summary_prompt: entry \"" + entry.title + "\" has no image");

    RenderedPrompt p;
    p.purpose = PromptPurpose::Summary;
    p.parts.push_back({PromptPart::Kind::Image, *entry.image_ref});
    std::string question = variant == StrategyId::TitleBased_VST
                               ? substitute(catalog.summary_visual_title_based, "title", entry.title)
                               : catalog.summary_visual;
    p.parts.push_back({PromptPart::Kind::Text, std::move(question)});
    return p;
}

RenderedPrompt render_title_summary_prompt(const HistoryEntryView& entry,
                                           const TemplateCatalog& catalog) {
    if (entry.title.empty()) throw Error("render_title_summary_prompt: empty title");
    RenderedPrompt p;
    p.purpose = PromptPurpose::Summary;
    p.parts.push_back(
        {PromptPart::Kind::Text, substitute(catalog.summary_title, "title", entry.title)});
    return p;
}

namespace {

// Accumulates text lines and flushes them as one Text part whenever an Image
// part must be interleaved. Text-only prompts end up as a single part.
class PartBuilder {
public:
    void line(const std::string& s) {
        if (!buffer_.empty()) buffer_ += '\n';
        buffer_ += s;
    }
    void append(const std::string& s) { buffer_ += s; }
    void image(const std::string& ref) {
        flush();
        parts_.push_back({PromptPart::Kind::Image, ref});
    }
    std::vector<PromptPart> take() {
        flush();
        return std::move(parts_);
    }

private:
    void flush() {
        if (buffer_.empty()) return;
        parts_.push_back({PromptPart::Kind::Text, std::move(buffer_)});
        buffer_.clear();
    }
    std::string buffer_;
    std::vector<PromptPart> parts_;
};

const std::string& require(const std::optional<std::string>& field, const char* what,
                           const std::string& title) {
    if (!field) throw Error(std::string("render_ranking_prompt: entry \"") + title +
                            "\" is missing its " + what);
    return *field;
}

std::string entry_line(const TemplateCatalog& catalog, StrategyId strategy,
                       const HistoryEntryView& e, size_t index) {
    const std::string idx = std::to_string(index);
    switch (strategy) {
        case StrategyId::TitleOnly:
        case StrategyId::MM:
        case StrategyId::MM_ICL:
        case StrategyId::MM_CoT:
            return substitute(substitute(catalog.entry_title, "index", idx), "title", e.title);
        case StrategyId::VST:
        case StrategyId::TitleBased_VST: {
            std::string line = substitute(catalog.entry_title_summary, "index", idx);
            line = substitute(line, "title", e.title);
            return substitute(line, "summary", require(e.visual_summary, "visual summary", e.title));
        }
        case StrategyId::VST_SummaryOnly: {
            std::string line = substitute(catalog.entry_summary, "index", idx);
            return substitute(line, "summary", require(e.visual_summary, "visual summary", e.title));
        }
        case StrategyId::TitleSum_VST: {
            std::string line = substitute(catalog.entry_title_titlesum_summary, "index", idx);
            line = substitute(line, "title", e.title);
            line = substitute(line, "title_summary",
                              require(e.title_summary, "title summary", e.title));
            return substitute(line, "summary", require(e.visual_summary, "visual summary", e.title));
        }
    }
    throw Error("render_ranking_prompt: unknown strategy");
}

} // namespace

RenderedPrompt render_ranking_prompt(StrategyId strategy,
                                     const std::vector<HistoryEntryView>& history,
                                     const std::vector<std::string>& candidates,
                                     const RenderOptions& opts, const TemplateCatalog& catalog) {
    if (history.empty()) throw Error("render_ranking_prompt: history is empty");
    if (candidates.size() < 2) throw Error("render_ranking_prompt: need at least 2 candidates");

    // Keep the most recent entries when capped.
    size_t begin = 0;
    if (opts.history_cap > 0 && history.size() > opts.history_cap)
        begin = history.size() - opts.history_cap;
    const size_t count = history.size() - begin;

    const bool icl = strategy == StrategyId::MM_ICL;
    if (icl && count < 2) throw Error("ICL needs a demonstration successor");

    PartBuilder b;
    b.line(icl ? catalog.ranking_history_header_icl : catalog.ranking_history_header);

    const size_t listed = icl ? count - 1 : count; // ICL holds the last entry out as the demo
    for (size_t i = 0; i < listed; ++i) {
        const HistoryEntryView& e = history[begin + i];
        b.line(entry_line(catalog, strategy, e, i + 1));
        if (is_mm_family(strategy) && e.image_ref) b.image(*e.image_ref);
    }
    if (icl) {
        const HistoryEntryView& demo = history[begin + count - 1];
        b.line(substitute(catalog.ranking_icl_demonstration, "title", demo.title));
    }

    const std::string n = std::to_string(candidates.size());
    b.line(substitute(catalog.ranking_candidates_header, "n", n));
    for (size_t i = 0; i < candidates.size(); ++i) {
        std::string line = substitute(catalog.candidate_line, "index", std::to_string(i + 1));
        b.line(substitute(line, "title", candidates[i]));
    }
    b.line(substitute(catalog.ranking_instruction, "n", n));
    if (strategy == StrategyId::MM_CoT) b.append(" " + catalog.ranking_cot_suffix);

    RenderedPrompt p;
    p.purpose = PromptPurpose::Ranking;
    p.parts = b.take();
    return p;
}

} // namespace mmrec
