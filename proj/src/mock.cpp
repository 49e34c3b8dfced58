#include "mmrec/mock.hpp"

#include "mmrec/digest.hpp"
#include "mmrec/error.hpp"
#include "mmrec/rng.hpp"

#include "json.hpp"

#include <numeric>
#include <thread>

namespace mmrec {

namespace {

std::uint64_t request_fingerprint(const ChatRequest& request) {
    std::uint64_t h = fnv1a64(request.joined_text());
    h = mix_seed(h, static_cast<std::uint64_t>(request.decoding.seed.value_or(0)));
    return h;
}

std::string summary_reply(const ChatRequest& request) {
    Sha256 h;
    h.field("mock-summary", request.joined_text());
    const std::string tag = h.hex().substr(0, 8);
    return "A close-up studio photograph of the product on a plain background, catalog view " +
           tag + ". The item appears new and its key features are clearly visible.";
}

std::vector<size_t> permutation(const ChatRequest& request, std::uint64_t seed, size_t n) {
    std::vector<size_t> order(n);
    std::iota(order.begin(), order.end(), size_t{0});
    Rng rng(mix_seed(seed, request_fingerprint(request)));
    shuffle_vec(order, rng);
    return order;
}

std::string nonsense_title(Rng& rng) {
    auto token = [&] {
        char buf[16];
        std::snprintf(buf, sizeof buf, "zq%05llx",
                      static_cast<unsigned long long>(rng.next() & 0xfffff));
        return std::string(buf);
    };
    return token() + " " + token() + " " + token();
}

std::string numbered_list(const std::vector<std::string>& titles) {
    std::string out;
    for (size_t i = 0; i < titles.size(); ++i)
        out += std::to_string(i + 1) + ". " + titles[i] + "\n";
    if (!out.empty()) out.pop_back();
    return out;
}

std::string oracle_reply(const RankingHint& hint) {
    std::vector<std::string> titles;
    titles.reserve(hint.candidates.size());
    titles.push_back(hint.candidates[hint.target_index]);
    for (size_t i = 0; i < hint.candidates.size(); ++i)
        if (static_cast<int>(i) != hint.target_index) titles.push_back(hint.candidates[i]);
    return numbered_list(titles);
}

std::string random_reply(const ChatRequest& request, const RankingHint& hint,
                         std::uint64_t seed) {
    std::vector<std::string> titles;
    for (size_t i : permutation(request, seed, hint.candidates.size()))
        titles.push_back(hint.candidates[i]);
    return numbered_list(titles);
}

std::string hallucinate_reply(const ChatRequest& request, const RankingHint& hint,
                              std::uint64_t seed, double rate) {
    Rng rng(mix_seed(mix_seed(seed, 0x68616c6cULL), request_fingerprint(request)));
    std::vector<std::string> titles;
    for (size_t i : permutation(request, seed, hint.candidates.size()))
        titles.push_back(rng.unit() < rate ? nonsense_title(rng) : hint.candidates[i]);
    return numbered_list(titles);
}

std::string malformed_reply(const ChatRequest& request, const RankingHint& hint,
                            std::uint64_t seed, MalformedFormat format) {
    std::vector<std::string> titles;
    for (size_t i : permutation(request, seed, hint.candidates.size()))
        titles.push_back(hint.candidates[i]);
    switch (format) {
        case MalformedFormat::Prose: {
            std::string out = "Looking at your history, my first pick would be " + titles[0] + ".";
            for (size_t i = 1; i < titles.size(); ++i)
                out += " After that I would go with " + titles[i] + ".";
            out += " Those are all the candidates ranked by fit.";
            return out;
        }
        case MalformedFormat::Json: {
            nlohmann::json arr = nlohmann::json::array();
            for (const auto& t : titles) arr.push_back(t);
            return arr.dump();
        }
        case MalformedFormat::Punct: {
            std::string out;
            for (size_t i = 0; i < titles.size(); ++i)
                out += std::to_string(i + 1) + ") **\"" + titles[i] + "\"!!**\n";
            if (!out.empty()) out.pop_back();
            return out;
        }
    }
    throw Error("mock: unknown malformed format");
}

} // namespace

MockBackend::MockBackend(MockSpec spec) : spec_(spec), gate_(spec.max_inflight) {}

std::string MockBackend::render(const ChatRequest& request) const {
    if (!request.hint) return summary_reply(request);
    const RankingHint& hint = *request.hint;
    if (hint.candidates.empty()) throw Error("mock: ranking hint has no candidates");
    if (hint.target_index < 0 || hint.target_index >= static_cast<int>(hint.candidates.size()))
        throw Error("mock: ranking hint target out of range");
    switch (spec_.behavior) {
        case MockBehavior::Oracle: return oracle_reply(hint);
        case MockBehavior::UniformRandom: return random_reply(request, hint, spec_.seed);
        case MockBehavior::Hallucinate:
            return hallucinate_reply(request, hint, spec_.seed, spec_.rate);
        case MockBehavior::Malformed:
            return malformed_reply(request, hint, spec_.seed, spec_.format);
    }
    throw Error("mock: unknown behavior");
}

CompletionResult MockBackend::complete(const ChatRequest& request) {
    GateLease lease(gate_);
    const int now = inflight_.fetch_add(1) + 1;
    struct Dec {
        std::atomic<int>& n;
        ~Dec() { n.fetch_sub(1); }
    } dec{inflight_};
    int prev = peak_.load();
    while (now > prev && !peak_.compare_exchange_weak(prev, now)) {
    }
    calls_.fetch_add(1);

    if (spec_.max_delay_ms > 0) {
        const auto ms =
            request_fingerprint(request) % (static_cast<std::uint64_t>(spec_.max_delay_ms) + 1);
        std::this_thread::sleep_for(std::chrono::milliseconds(ms));
    }

    CompletionResult out;
    out.text = render(request);
    out.latency_ms = 0;
    return out;
}

std::shared_ptr<MockBackend> make_mock_backend(const MockSpec& spec) {
    return std::make_shared<MockBackend>(spec);
}

} // namespace mmrec
