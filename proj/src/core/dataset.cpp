#include "scope/core/dataset.hpp"

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "scope/core/situations.hpp"
#include "scope/core/util.hpp"
#include "scope/errors.hpp"

namespace scope {

const Conversation* Dataset::find(const std::string& id) const {
    for (const auto& c : conversations)
        if (c.id == id) return &c;
    return nullptr;
}

DatasetCounts count(const Dataset& d) {
    DatasetCounts out;
    for (const auto& c : d.conversations) {
        ++out.total;
        ++(c.labels.overall == Label::Pos ? out.pos : out.neg);
        ++out.by_tier[c.tier];
        ++(classify_subset(c) == Subset::Easy ? out.easy : out.hard_negative);
    }
    return out;
}

void validate_dataset(const Dataset& d, bool released) {
    std::set<std::string> ids;
    for (const auto& c : d.conversations) {
        if (c.id.empty()) throw ValidationError("conversation id nonempty", "<empty>");
        if (!ids.insert(c.id).second) throw ValidationError("id unique within a dataset", c.id);
        const SituationSpec* spec = try_find_situation(c.situation_id);
        if (!spec) throw ValidationError("situation_id resolves in the catalog", c.id + ": " + c.situation_id);
        if (spec->expected_labels != c.labels)
            throw ValidationError("labels consistent with the situation",
                                  c.id + ": " + describe(c.labels) + " vs " + describe(spec->expected_labels));
        if (released && c.tier == Tier::Unfiltered)
            throw ValidationError("released data carries tier gold or silver", c.id);
        validate_turns(c);
    }
}

Dataset parse_dataset(const std::string& text, const std::string& name) {
    Dataset d;
    d.name = name;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        try {
            d.conversations.push_back(json::parse(line).get<Conversation>());
        } catch (const json::exception& e) {
            throw ParseError(std::string("malformed record: ") + e.what(), lineno);
        } catch (const ParseError& e) {
            throw ParseError(e.what(), lineno);
        }
    }
    return d;
}

Dataset load_dataset(const std::string& path, bool released) {
    Dataset d = parse_dataset(read_text_file(path), std::filesystem::path(path).stem().string());
    validate_dataset(d, released);
    return d;
}

std::string serialize_dataset(const Dataset& d) {
    std::string out;
    for (const auto& c : d.conversations) {
        out += json(c).dump();
        out += '\n';
    }
    return out;
}

void save_dataset(const std::string& path, const Dataset& d) { write_text_file(path, serialize_dataset(d)); }

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::string& path, const std::string& text) {
    const auto parent = std::filesystem::path(path).parent_path();
    if (!parent.empty()) std::filesystem::create_directories(parent);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write '" + path + "'");
    out << text;
}

std::vector<json> parse_jsonl(const std::string& text) {
    std::vector<json> out;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        try {
            out.push_back(json::parse(line));
        } catch (const json::exception& e) {
            throw ParseError(std::string("malformed record: ") + e.what(), lineno);
        }
    }
    return out;
}

std::vector<json> read_jsonl(const std::string& path) { return parse_jsonl(read_text_file(path)); }

void write_jsonl(const std::string& path, const std::vector<json>& records) {
    std::string out;
    for (const auto& r : records) {
        out += r.dump();
        out += '\n';
    }
    write_text_file(path, out);
}

}  // namespace scope
