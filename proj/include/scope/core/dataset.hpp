#pragma once

#include <map>
#include <string>
#include <vector>

#include "scope/core/model.hpp"

namespace scope {

struct Dataset {
    std::string name;
    std::vector<Conversation> conversations;

    std::size_t size() const noexcept { return conversations.size(); }
    const Conversation* find(const std::string& id) const;
};

struct DatasetCounts {
    std::size_t total = 0;
    std::size_t pos = 0;
    std::size_t neg = 0;
    std::map<Tier, std::size_t> by_tier;
    std::size_t easy = 0;
    std::size_t hard_negative = 0;
};

DatasetCounts count(const Dataset& d);

/// Validates ids, situation references, label/situation consistency and turns.
/// With `released`, also rejects tier=unfiltered.
void validate_dataset(const Dataset& d, bool released = false);

/// Line-delimited JSON, one conversation per line. Blank lines are skipped.
/// Throws ParseError (with line number) or ValidationError.
Dataset load_dataset(const std::string& path, bool released = false);
Dataset parse_dataset(const std::string& text, const std::string& name);

std::string serialize_dataset(const Dataset& d);
void save_dataset(const std::string& path, const Dataset& d);

/// Generic JSONL helpers.
std::vector<json> read_jsonl(const std::string& path);
std::vector<json> parse_jsonl(const std::string& text);
void write_jsonl(const std::string& path, const std::vector<json>& records);
std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace scope
