#pragma once

#include "mmrec/client.hpp"

#include <atomic>
#include <cstdint>
#include <memory>

namespace mmrec {

enum class MockBehavior { Oracle, UniformRandom, Hallucinate, Malformed };

enum class MalformedFormat { Prose, Json, Punct };

struct MockSpec {
    MockBehavior behavior = MockBehavior::Oracle;
    std::uint64_t seed = 0;
    double rate = 1.0;              // Hallucinate: per-line probability
    MalformedFormat format = MalformedFormat::Prose;
    int max_inflight = 4;
    int max_delay_ms = 0;           // per-request pseudo-random delay, scrambles completion order
};

// Deterministic in-process backend: identical requests always yield identical
// text. Ranking requests are recognized by the RankingHint; requests without
// one get a fixed summary-style reply derived from the request digest.
class MockBackend : public Backend {
public:
    explicit MockBackend(MockSpec spec);

    CompletionResult complete(const ChatRequest& request) override;
    int max_inflight() const override { return spec_.max_inflight; }

    int peak_inflight() const { return peak_.load(); }
    long long calls() const { return calls_.load(); }

private:
    std::string render(const ChatRequest& request) const;

    MockSpec spec_;
    InflightGate gate_;
    std::atomic<int> inflight_{0};
    std::atomic<int> peak_{0};
    std::atomic<long long> calls_{0};
};

std::shared_ptr<MockBackend> make_mock_backend(const MockSpec& spec);

} // namespace mmrec
