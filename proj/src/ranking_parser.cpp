#include "mmrec/ranking_parser.hpp"

#include "mmrec/error.hpp"

#include <algorithm>
#include <cctype>
#include <regex>
#include <set>
#include <unordered_set>

namespace mmrec {

namespace {

// Unicode punctuation folded to a space before the ASCII pass.
const char* kUnicodeFolds[] = {
    "‐", "‑", "‒", "–", "—", "―", // hyphens/dashes
    "‘", "’", "“", "”",                     // curly quotes
    "…", "·", "•", " ",                     // ellipsis, dot, bullet, nbsp
};

std::string fold_unicode(std::string_view s) {
    std::string out(s);
    for (const char* u : kUnicodeFolds) {
        size_t pos = 0;
        const size_t ulen = std::char_traits<char>::length(u);
        while ((pos = out.find(u, pos)) != std::string::npos) out.replace(pos, ulen, " ");
    }
    return out;
}

// "3.", "(2)", "- ", "* ", "Rank 4:". Bullet "•" is folded to a space earlier.
const std::regex& marker_re() {
    static const std::regex re(
        R"(^\s*(?:[Rr][Aa][Nn][Kk]\s*\d+\s*[:.)\-]?|\(\d+\)|\d+\s*[.:)\]\-]|[-*+])\s+)");
    return re;
}

// Same shapes, but also matches when nothing follows the marker.
const std::regex& marker_prefix_re() {
    static const std::regex re(
        R"(^\s*(?:[Rr][Aa][Nn][Kk]\s*\d+\s*[:.)\-]?|\(\d+\)|\d+\s*[.:)\]\-]|[-*+])\s*)");
    return re;
}

std::string strip_marker(const std::string& s) {
    std::smatch m;
    if (std::regex_search(s, m, marker_prefix_re())) return m.suffix().str();
    return s;
}

bool is_item_like(const std::string& s) {
    return std::regex_search(s, marker_re());
}

std::vector<std::string> tokens_of(const std::string& norm) {
    std::vector<std::string> toks;
    size_t i = 0;
    while (i < norm.size()) {
        size_t j = norm.find(' ', i);
        if (j == std::string::npos) j = norm.size();
        if (j > i) toks.push_back(norm.substr(i, j - i));
        i = j + 1;
    }
    return toks;
}

double token_set_jaccard(const std::vector<std::string>& a, const std::vector<std::string>& b) {
    if (a.empty() && b.empty()) return 0.0;
    std::set<std::string> sa(a.begin(), a.end()), sb(b.begin(), b.end());
    size_t inter = 0;
    for (const auto& t : sa) inter += sb.count(t);
    size_t uni = sa.size() + sb.size() - inter;
    return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

// Token-boundary containment: does `hay` contain `needle`'s token sequence?
bool contains_tokens(const std::string& hay, const std::string& needle) {
    if (needle.empty() || hay.size() < needle.size()) return false;
    std::string padded_hay = " " + hay + " ";
    std::string padded_needle = " " + needle + " ";
    return padded_hay.find(padded_needle) != std::string::npos;
}

std::string trim(const std::string& s) {
    size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

// Newlines first, then inline enumerations ("1. x 2. y"), then semicolons.
std::vector<std::string> split_fragments(const std::string& text) {
    std::vector<std::string> lines;
    size_t start = 0;
    while (start <= text.size()) {
        size_t nl = text.find('\n', start);
        if (nl == std::string::npos) nl = text.size();
        lines.push_back(text.substr(start, nl - start));
        start = nl + 1;
        if (start > text.size()) break;
    }

    static const std::regex inline_marker(R"((^|\s)\(?(\d+)[.)\]:]\s+)");
    std::vector<std::string> out;
    for (const auto& line : lines) {
        std::vector<std::string> chunks;
        std::vector<size_t> starts;
        long expected = -1;
        bool consecutive = true;
        for (auto it = std::sregex_iterator(line.begin(), line.end(), inline_marker);
             it != std::sregex_iterator(); ++it) {
            size_t pos = static_cast<size_t>(it->position(0));
            if (pos > 0) ++pos; // skip the leading whitespace capture
            const std::string digits = (*it)[2].str();
            const long value = digits.size() <= 9 ? std::stol(digits) : -2;
            if (expected >= 0 && value != expected) consecutive = false;
            expected = value + 1;
            starts.push_back(pos);
        }
        // Sentences ending in a number ("Lantern 450. Next...") look like
        // markers; only a consecutive run reads as a real enumeration.
        if (!consecutive) starts.clear();
        if (starts.size() >= 2) {
            if (starts.front() != 0) chunks.push_back(line.substr(0, starts.front()));
            for (size_t i = 0; i < starts.size(); ++i) {
                size_t end = i + 1 < starts.size() ? starts[i + 1] : line.size();
                chunks.push_back(line.substr(starts[i], end - starts[i]));
            }
        } else {
            chunks.push_back(line);
        }
        for (const auto& chunk : chunks) {
            if (chunk.find(';') != std::string::npos) {
                size_t b = 0;
                while (b <= chunk.size()) {
                    size_t sc = chunk.find(';', b);
                    if (sc == std::string::npos) sc = chunk.size();
                    std::string piece = trim(chunk.substr(b, sc - b));
                    if (!piece.empty()) out.push_back(piece);
                    b = sc + 1;
                    if (b > chunk.size()) break;
                }
            } else {
                std::string piece = trim(chunk);
                if (!piece.empty()) out.push_back(piece);
            }
        }
    }
    return out;
}

struct Mention {
    size_t pos;
    size_t idx;
};

// All non-overlapping candidate occurrences in a normalized fragment, longest
// candidates claiming their spans first so contained titles don't double-count.
std::vector<Mention> scan_mentions(const std::string& norm_fragment, const CandidateIndex& index) {
    std::vector<Mention> found;
    std::string padded = " " + norm_fragment + " ";
    std::vector<std::pair<size_t, size_t>> claimed; // [begin, end)

    std::vector<size_t> order(index.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
        return index.norm(a).size() > index.norm(b).size();
    });

    for (size_t i : order) {
        const std::string& norm = index.norm(i);
        if (norm.empty()) continue;
        std::string needle = " " + norm + " ";
        size_t pos = 0;
        while ((pos = padded.find(needle, pos)) != std::string::npos) {
            size_t begin = pos + 1, end = pos + 1 + norm.size();
            bool overlaps = false;
            for (auto [cb, ce] : claimed)
                if (begin < ce && cb < end) {
                    overlaps = true;
                    break;
                }
            if (!overlaps) {
                claimed.emplace_back(begin, end);
                found.push_back({begin, i});
            }
            pos = end; // continue after this occurrence
        }
    }
    std::sort(found.begin(), found.end(), [](const Mention& a, const Mention& b) {
        return a.pos < b.pos;
    });
    return found;
}

} // namespace

std::string normalize_title(std::string_view s) {
    std::string folded = fold_unicode(s);
    folded = strip_marker(folded);
    std::string out;
    out.reserve(folded.size());
    bool pending_space = false;
    for (unsigned char c : folded) {
        char mapped;
        if (c >= 0x80) {
            mapped = static_cast<char>(c); // non-ASCII passes through
        } else if (std::isalnum(c)) {
            mapped = static_cast<char>(std::tolower(c));
        } else {
            mapped = ' ';
        }
        if (mapped == ' ') {
            pending_space = !out.empty();
        } else {
            if (pending_space) out.push_back(' ');
            pending_space = false;
            out.push_back(mapped);
        }
    }
    return out;
}

CandidateIndex::CandidateIndex(const std::vector<std::string>& candidates) {
    norms_.reserve(candidates.size());
    for (const auto& c : candidates) norms_.push_back(normalize_title(c));
}

std::optional<size_t> match_candidate(std::string_view fragment, const CandidateIndex& index,
                                      const ParserOptions& opts) {
    std::string nf = normalize_title(fragment);
    if (nf.empty()) return std::nullopt;

    for (size_t i = 0; i < index.size(); ++i)
        if (!index.norm(i).empty() && nf == index.norm(i)) return i;

    size_t contain_hits = 0, contain_idx = 0;
    for (size_t i = 0; i < index.size(); ++i) {
        const std::string& cn = index.norm(i);
        if (cn.empty()) continue;
        if (contains_tokens(nf, cn) || contains_tokens(cn, nf)) {
            ++contain_hits;
            contain_idx = i;
            if (contain_hits > 1) break; // ambiguous: fall through to tier 3
        }
    }
    if (contain_hits == 1) return contain_idx;

    auto ftoks = tokens_of(nf);
    double best = -1.0, second = -1.0;
    size_t best_idx = 0;
    for (size_t i = 0; i < index.size(); ++i) {
        double j = token_set_jaccard(ftoks, tokens_of(index.norm(i)));
        if (j > best) {
            second = best;
            best = j;
            best_idx = i;
        } else if (j > second) {
            second = j;
        }
    }
    if (best >= opts.jaccard_threshold && (second < 0 || best - second >= opts.jaccard_margin))
        return best_idx;
    return std::nullopt;
}

std::optional<size_t> match_candidate(std::string_view fragment,
                                      const std::vector<std::string>& candidates,
                                      const ParserOptions& opts) {
    return match_candidate(fragment, CandidateIndex(candidates), opts);
}

ParsedRanking parse_ranking(const std::string& text, const std::vector<std::string>& candidates,
                            const ParserOptions& opts) {
    if (candidates.size() < 2) throw Error("parse_ranking: need at least 2 candidates");
    CandidateIndex index(candidates);
    ParsedRanking out;
    std::unordered_set<int> seen;
    auto push = [&](size_t idx) {
        int i = static_cast<int>(idx);
        if (seen.insert(i).second) out.indices.push_back(i);
    };

    for (const auto& frag : split_fragments(text)) {
        if (auto m = match_candidate(frag, index, opts)) {
            push(*m);
            continue;
        }
        auto mentions = scan_mentions(normalize_title(frag), index);
        if (!mentions.empty()) {
            for (const auto& m : mentions) push(m.idx);
        } else if (is_item_like(frag)) {
            ++out.hallucinated_count;
        } else {
            out.residual_text_lines.push_back(frag);
        }
    }
    out.matched_count = static_cast<int>(out.indices.size());
    return out;
}

CompletedRanking complete_ranking(const ParsedRanking& parsed, int n) {
    CompletedRanking full;
    std::vector<bool> present(static_cast<size_t>(n), false);
    for (int i : parsed.indices) {
        if (i < 0 || i >= n) throw Error("complete_ranking: index out of range");
        if (present[static_cast<size_t>(i)]) throw Error("complete_ranking: duplicate index");
        present[static_cast<size_t>(i)] = true;
        full.order.push_back(i);
    }
    full.boundary = static_cast<int>(full.order.size());
    for (int i = 0; i < n; ++i)
        if (!present[static_cast<size_t>(i)]) full.order.push_back(i);
    return full;
}

} // namespace mmrec
