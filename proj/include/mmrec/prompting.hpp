#pragma once

#include "mmrec/templates.hpp"

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace mmrec {

// One experiment leg. The MM family sends raw images; the VST family replaces
// every image with its textual summary and sends text only.
enum class StrategyId {
    TitleOnly,
    MM,
    MM_ICL,
    MM_CoT,
    VST,
    VST_SummaryOnly,
    TitleSum_VST,
    TitleBased_VST,
};

constexpr std::size_t kStrategyCount = 8;
const std::vector<StrategyId>& all_strategies();

std::string strategy_name(StrategyId s);  // config token, e.g. "mm_icl"
std::string strategy_label(StrategyId s); // display label, e.g. "MM-ICL"
std::optional<StrategyId> parse_strategy(std::string_view name);

bool is_mm_family(StrategyId s);  // sends image parts
bool is_vst_family(StrategyId s); // needs visual summaries, sends text only
bool has_summary_phase(StrategyId s);
bool needs_title_summary(StrategyId s);         // TitleSum_VST
bool needs_title_conditioned_summary(StrategyId s); // TitleBased_VST

// What the renderer sees for one history entry. Strategies declare which of
// the optional fields they need; rendering fails fast when one is missing.
struct HistoryEntryView {
    std::string title;
    std::optional<std::string> image_ref;
    std::optional<std::string> visual_summary;
    std::optional<std::string> title_summary;
};

struct PromptPart {
    enum class Kind { Text, Image };
    Kind kind;
    std::string value; // text content, or the image reference
};

enum class PromptPurpose { Summary, Ranking };

struct RenderedPrompt {
    std::vector<PromptPart> parts;
    PromptPurpose purpose = PromptPurpose::Ranking;

    std::string joined_text() const; // text parts joined with '\n'
    std::size_t image_count() const;
};

struct RenderOptions {
    std::size_t history_cap = 15; // keep the most recent entries; 0 = unlimited
};

// Summary-phase prompt for one imaged entry. VST / VST_SummaryOnly /
// TitleSum_VST ask the plain question; TitleBased_VST conditions on the title.
RenderedPrompt render_summary_prompt(const HistoryEntryView& entry, StrategyId variant,
                                     const TemplateCatalog& catalog = default_catalog());

// Text-only prompt distilling the title itself (TitleSum_VST).
RenderedPrompt render_title_summary_prompt(const HistoryEntryView& entry,
                                           const TemplateCatalog& catalog = default_catalog());

// Two segments: chronological history rendered per strategy, then the
// numbered candidate list with the ranking instruction.
RenderedPrompt render_ranking_prompt(StrategyId strategy,
                                     const std::vector<HistoryEntryView>& history,
                                     const std::vector<std::string>& candidates,
                                     const RenderOptions& opts = {},
                                     const TemplateCatalog& catalog = default_catalog());

} // namespace mmrec
