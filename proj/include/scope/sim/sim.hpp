#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "scope/core/model.hpp"
#include "scope/llm/gateway.hpp"

namespace scope::sim {

// Offline stand-in for a chat model. Answers every prompt template of the
// toolchain with a grammar-conforming completion computed from the request
// bindings alone, so identical requests always get identical answers. Used to
// record mock scripts and to build fixtures without network access.

/// Surface features of a transcript that the heuristics key on.
struct Cues {
    bool tool_called = false;
    bool tool_error = false;
    bool error_ack = false;
    bool success_after_error = false;
    bool gave_up = false;
    bool alternative = false;
    bool misreport = false;
    bool wrong_tool = false;
    bool bad_params = false;
    bool claims_without_call = false;
    bool redundant = false;
    bool security = false;
    bool verbose = false;
    bool raw_trace = false;
    bool repeated_question = false;
    bool incomplete = false;
    bool user_thanks = false;
    bool user_frustrated = false;

    /// Any agent-side problem the judge would hold against an "appropriate" agent.
    bool agent_fault() const;
};

Cues detect(const std::vector<Turn>& turns);

/// Builds a conversation for a catalog situation using tools from `tool_names`.
/// `variant` picks among the scenarios available for those tools.
std::vector<Turn> generate_conversation(const std::string& situation_id, const std::vector<std::string>& tool_names,
                                        const std::vector<std::string>& names, std::uint64_t variant);

class SimulatedProvider : public Provider {
public:
    std::string complete(const LlmRequest& request) override;
    std::string describe() const override { return "sim-1"; }
};

}  // namespace scope::sim
