#pragma once

#include <string>
#include <vector>

#include "scope/core/model.hpp"

namespace scope {

// Tagged-block transcript grammar shared by prompts and generated
// conversations. One header per turn at the start of a line:
//
//   USER: <text>
//   AGENT: <text>
//   TOOL_CALL <name> <json-object>: [<text>]
//   TOOL_RESULT <name>: <text>
//
// Lines without a header continue the previous turn.

std::string render_transcript(const std::vector<Turn>& turns);

/// Strict parse. Non-blank text before the first header, malformed headers or
/// argument objects raise ParseError with the offending line.
std::vector<Turn> parse_transcript(const std::string& text);

}  // namespace scope
