#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace mmrec {

// Canonical form used for all title comparisons: lowercase, common unicode
// punctuation folded, ASCII punctuation mapped to spaces, whitespace
// collapsed, leading enumeration markers ("3.", "-", "(2)", "Rank 4:")
// stripped.
std::string normalize_title(std::string_view s);

struct ParserOptions {
    double jaccard_threshold = 0.6; // tier-3 minimum token-set similarity
    double jaccard_margin = 0.1;    // best must beat runner-up by this much
};

// Precomputed normalized candidate titles. The corpus guarantees the
// normalized forms are pairwise distinct.
class CandidateIndex {
public:
    explicit CandidateIndex(const std::vector<std::string>& candidates);
    size_t size() const { return norms_.size(); }
    const std::string& norm(size_t i) const { return norms_[i]; }

private:
    std::vector<std::string> norms_;
};

// Resolves one text fragment to at most one candidate:
//   tier 1: exact normalized match
//   tier 2: unique token-boundary containment in either direction
//   tier 3: best token-set Jaccard >= threshold, beating the runner-up by
//           >= margin; ambiguous containment also lands here
std::optional<size_t> match_candidate(std::string_view fragment, const CandidateIndex& index,
                                      const ParserOptions& opts = {});
std::optional<size_t> match_candidate(std::string_view fragment,
                                      const std::vector<std::string>& candidates,
                                      const ParserOptions& opts = {});

struct ParsedRanking {
    std::vector<int> indices; // distinct, first-mention order
    int matched_count = 0;
    int hallucinated_count = 0; // item-like lines matching no candidate
    std::vector<std::string> residual_text_lines;
};

// Recovers a (partial) ranking from free-form model output. Never throws on
// content: a fully unmatched output yields empty indices.
ParsedRanking parse_ranking(const std::string& text, const std::vector<std::string>& candidates,
                            const ParserOptions& opts = {});

struct CompletedRanking {
    std::vector<int> order; // permutation of 0..n-1
    int boundary = 0;       // indices before this came from the parse
};

// Appends every unmentioned candidate index in candidate order, yielding a
// full permutation for rank-based metrics.
CompletedRanking complete_ranking(const ParsedRanking& parsed, int n);

} // namespace mmrec
