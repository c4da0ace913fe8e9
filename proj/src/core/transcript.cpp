#include "scope/core/transcript.hpp"

#include <cctype>

#include "scope/core/util.hpp"
#include "scope/errors.hpp"

namespace scope {

namespace {

bool is_name_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.';
}

// Returns the index one past the closing brace of the object starting at
// `open`, honouring string literals, or npos.
std::size_t match_object(const std::string& s, std::size_t open) {
    int depth = 0;
    bool in_string = false;
    for (std::size_t i = open; i < s.size(); ++i) {
        const char c = s[i];
        if (in_string) {
            if (c == '\\') ++i;
            else if (c == '"') in_string = false;
            continue;
        }
        if (c == '"') in_string = true;
        else if (c == '{') ++depth;
        else if (c == '}' && --depth == 0) return i + 1;
    }
    return std::string::npos;
}

std::string after_colon(const std::string& line, std::size_t pos) {
    std::string rest = line.substr(pos);
    if (!rest.empty() && rest.front() == ' ') rest.erase(0, 1);
    return rest;
}

// Parses a header line; returns false when the line is a continuation.
bool parse_header(const std::string& line, std::size_t lineno, Turn& turn) {
    if (line.rfind("USER:", 0) == 0) {
        turn = Turn{Role::User, after_colon(line, 5), {}, {}};
        return true;
    }
    if (line.rfind("AGENT:", 0) == 0) {
        turn = Turn{Role::Agent, after_colon(line, 6), {}, {}};
        return true;
    }
    const bool call = line.rfind("TOOL_CALL ", 0) == 0;
    const bool result = line.rfind("TOOL_RESULT ", 0) == 0;
    if (!call && !result) return false;

    std::size_t pos = call ? 10 : 12;
    std::size_t end = pos;
    while (end < line.size() && is_name_char(line[end])) ++end;
    if (end == pos) throw ParseError("tool header without a tool name", lineno);
    const std::string name = line.substr(pos, end - pos);

    if (result) {
        if (end >= line.size() || line[end] != ':') throw ParseError("expected ':' after TOOL_RESULT name", lineno);
        turn = Turn{Role::ToolResult, after_colon(line, end + 1), name, {}};
        return true;
    }
    if (end >= line.size() || line[end] != ' ') throw ParseError("expected arguments after TOOL_CALL name", lineno);
    pos = end + 1;
    if (pos >= line.size() || line[pos] != '{') throw ParseError("TOOL_CALL arguments must be a JSON object", lineno);
    const std::size_t close = match_object(line, pos);
    if (close == std::string::npos || close >= line.size() || line[close] != ':')
        throw ParseError("unterminated TOOL_CALL arguments", lineno);
    std::map<std::string, std::string> args;
    try {
        const json obj = json::parse(line.substr(pos, close - pos));
        for (const auto& [k, v] : obj.items()) args[k] = v.is_string() ? v.get<std::string>() : v.dump();
    } catch (const json::exception& e) {
        throw ParseError(std::string("bad TOOL_CALL arguments: ") + e.what(), lineno);
    }
    turn = Turn{Role::ToolCall, after_colon(line, close + 1), name, std::move(args)};
    return true;
}

}  // namespace

std::string render_transcript(const std::vector<Turn>& turns) {
    std::string out;
    for (const auto& t : turns) {
        switch (t.role) {
            case Role::User: out += "USER: " + t.content; break;
            case Role::Agent: out += "AGENT: " + t.content; break;
            case Role::ToolCall: {
                json args = json::object();
                if (t.arguments)
                    for (const auto& [k, v] : *t.arguments) args[k] = v;
                out += "TOOL_CALL " + t.tool_name.value_or("") + " " + args.dump() + ":";
                if (!t.content.empty()) out += " " + t.content;
                break;
            }
            case Role::ToolResult: out += "TOOL_RESULT " + t.tool_name.value_or("") + ": " + t.content; break;
        }
        out += '\n';
    }
    return out;
}

std::vector<Turn> parse_transcript(const std::string& text) {
    std::vector<Turn> turns;
    std::size_t lineno = 0;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t nl = text.find('\n', start);
        if (nl == std::string::npos) nl = text.size();
        std::string line = text.substr(start, nl - start);
        if (!line.empty() && line.back() == '\r') line.pop_back();
        ++lineno;
        start = nl + 1;

        Turn turn;
        if (parse_header(line, lineno, turn)) {
            turns.push_back(std::move(turn));
        } else if (turns.empty()) {
            if (!trim(line).empty()) throw ParseError("text before the first turn marker", lineno);
        } else {
            turns.back().content += "\n" + line;
        }
        if (nl == text.size()) break;
    }
    // Blank separator lines end up as trailing newlines.
    for (auto& t : turns)
        while (!t.content.empty() && t.content.back() == '\n') t.content.pop_back();
    if (turns.empty()) throw ParseError("no turn markers found");
    return turns;
}

}  // namespace scope
