#pragma once

#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "scope/core/model.hpp"

namespace scope {

struct ToolParameter {
    std::string name;
    std::string type;
    bool required = false;
    std::string description;

    bool operator==(const ToolParameter&) const = default;
};

struct ToolOutputField {
    std::string name;
    std::string description;

    bool operator==(const ToolOutputField&) const = default;
};

struct ToolSpec {
    std::string name;
    std::string group;
    std::string description;
    std::vector<ToolParameter> parameters;
    std::vector<ToolOutputField> output_fields;

    bool operator==(const ToolSpec&) const = default;
};

void to_json(json& j, const ToolSpec& t);
void from_json(const json& j, ToolSpec& t);

/// The nine tool groups.
const std::vector<std::string>& tool_groups();

class ToolCatalog {
public:
    ToolCatalog() = default;
    /// Validates every ToolSpec invariant; throws ValidationError.
    explicit ToolCatalog(std::vector<ToolSpec> tools);

    const std::vector<ToolSpec>& tools() const noexcept { return tools_; }
    bool empty() const noexcept { return tools_.empty(); }

    /// Groups with at least one tool, sorted.
    std::vector<std::string> groups() const;
    std::vector<ToolSpec> group(std::string_view name) const;
    const ToolSpec* find(std::string_view name) const;

    static ToolCatalog builtin();
    static ToolCatalog load(const std::string& path);
    void save(const std::string& path) const;

private:
    std::vector<ToolSpec> tools_;
};

}  // namespace scope
