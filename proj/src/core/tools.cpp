#include "scope/core/tools.hpp"

#include <algorithm>
#include <set>

#include "scope/core/dataset.hpp"
#include "scope/errors.hpp"

namespace scope {

namespace {

using P = ToolParameter;
using O = ToolOutputField;

std::vector<ToolSpec> make_builtin() {
    return {
        // account
        {"ChangePassword", "account", "Changes the password of an account.",
         {P{"old_password", "string", true, "The old password of the user."},
          P{"new_password", "string", true, "The new password of the user."}},
         {O{"success", "Whether the password was changed successfully."}}},
        {"DeleteAccount", "account", "Deletes a user's account, requires user to be logged in.",
         {P{"password", "string", true, "The password of the user."}},
         {O{"success", "Whether the account was deleted successfully."}}},
        {"GetAccountInformation", "account", "Retrieves account information of logged in user.", {},
         {O{"user", "The account information: username, email, phone, name."}}},
        {"LogoutUser", "account", "Logs user out.", {}, {O{"success", "Whether the user was logged out."}}},
        {"QueryUser", "account", "Finds users given a username or email.",
         {P{"username", "string", false, "The username of the user."},
          P{"email", "string", false, "The email of the user."}},
         {O{"users", "Matching users with username, email and name."}}},
        {"RegisterUser", "account", "Register a new user.",
         {P{"username", "string", true, "The username of the user."},
          P{"password", "string", true, "The password of the user."},
          P{"email", "string", true, "The email of the user."},
          P{"name", "string", false, "The name of the user."},
          P{"phone", "string", false, "The phone of the user in the format xxx-xxx-xxxx."}},
         {O{"session_token", "The token of the new session."}, O{"user", "The created account."}}},
        {"ResetPassword", "account", "Resets the password of a user using a verification code.",
         {P{"username", "string", true, "The username of the user."},
          P{"verification_code", "string", true, "The 6 digit verification code sent to the user."},
          P{"new_password", "string", true, "The new password of the user."}},
         {O{"success", "Whether the password was reset successfully."}}},
        {"SendVerificationCode", "account", "Initiates a password reset for a user by sending a verification code.",
         {P{"username", "string", true, "The username of the user."},
          P{"email", "string", true, "The email of the user."}},
         {O{"status", "success or failure."}}},
        {"UpdateAccountInformation", "account", "Updates account information of a user.",
         {P{"password", "string", true, "The password of the user."},
          P{"new_email", "string", false, "The new email of the user."},
          P{"new_phone_number", "string", false, "The new phone number of the user in the format xxx-xxx-xxxx."},
          P{"new_name", "string", false, "The new name of the user."}},
         {O{"success", "Whether the account information was updated."}}},
        {"UserLogin", "account", "Logs in a user returns a token.",
         {P{"username", "string", true, "The username of the user."},
          P{"password", "string", true, "The password of the user."}},
         {O{"session_token", "The token of the session."}}},
        // alarm
        {"AddAlarm", "alarm", "Adds an alarm for a set time.",
         {P{"time", "string", true, "Time format %H:%M:%S."}},
         {O{"alarm_id", "ID like xxxx-xxxx."}}},
        {"DeleteAlarm", "alarm", "Deletes an alarm given an alarm_id.",
         {P{"alarm_id", "string", true, "8 digit alarm ID."}},
         {O{"status", "success or failed."}}},
        {"FindAlarms", "alarm", "Finds alarms the user has set.",
         {P{"start_range", "string", false, "Optional starting time range for alarms, format %H:%M:%S."},
          P{"end_range", "string", false, "Optional ending time range for alarms, format %H:%M:%S."}},
         {O{"alarms", "A list of alarms with alarm_id and time."}}},
        // calendar
        {"CreateEvent", "calendar", "Adds events to a user's calendar.",
         {P{"name", "string", true, "The name of the event."},
          P{"event_type", "string", true, "The type of the event, either 'meeting' or 'event'."},
          P{"start_time", "string", true, "The start time of the event, in the pattern of %Y-%m-%d %H:%M:%S."},
          P{"end_time", "string", true, "The end time of the event, in the pattern of %Y-%m-%d %H:%M:%S."},
          P{"description", "string", false, "The description of the event."},
          P{"attendees", "array", false, "The attendee usernames; only for meetings."}},
         {O{"event_id", "The ID of the created event."}}},
        {"DeleteEvent", "calendar", "Deletes events from a user's calendar.",
         {P{"event_id", "string", true, "The id of the event to be deleted."}},
         {O{"status", "success or failed."}}},
        {"ModifyEvent", "calendar", "Allows modification of an existing event.",
         {P{"event_id", "string", true, "The id of the event to be modified."},
          P{"new_name", "string", false, "The new name of the event."},
          P{"new_start_time", "string", false, "The new start time, in the pattern of %Y-%m-%d %H:%M:%S."},
          P{"new_end_time", "string", false, "The new end time, in the pattern of %Y-%m-%d %H:%M:%S."},
          P{"new_description", "string", false, "The new description of the event."}},
         {O{"status", "success or failed."}}},
        {"QueryCalendar", "calendar", "Query for events that occur in a time range.",
         {P{"start_time", "string", true, "The start time of the range, in the pattern of %Y-%m-%d %H:%M:%S."},
          P{"end_time", "string", true, "The end time of the range, in the pattern of %Y-%m-%d %H:%M:%S."}},
         {O{"events", "Events in the range with event_id, name, start_time and end_time."}}},
        // email
        {"SearchInbox", "email", "Searches for emails matching filters returning 5 most recent results.",
         {P{"query", "string", false, "Query containing keywords to search for."},
          P{"match_type", "string", false, "Whether to match any or all keywords."},
          P{"sender", "string", false, "Email address of the sender."},
          P{"start_date", "string", false, "Start of the date range, %Y-%m-%d %H:%M:%S."},
          P{"end_date", "string", false, "End of the date range, %Y-%m-%d %H:%M:%S."}},
         {O{"emails", "Matching emails with sender, subject, body and date."}}},
        {"SendEmail", "email", "Sends an email on behalf of a given user.",
         {P{"to", "array", true, "Receiving addresses of the email."},
          P{"subject", "string", true, "The subject of the email."},
          P{"body", "string", true, "The content of the email."}},
         {O{"status", "success or failed."}}},
        // message
        {"SearchMessages", "message", "Searches messages matching filters returning 5 most recent results.",
         {P{"query", "string", false, "Query containing keywords to search for."},
          P{"match_type", "string", false, "Whether to match any or all keywords."},
          P{"sender_username", "string", false, "Username of the sender."},
          P{"start_date", "string", false, "Start of the date range, %Y-%m-%d %H:%M:%S."},
          P{"end_date", "string", false, "End of the date range, %Y-%m-%d %H:%M:%S."}},
         {O{"messages", "Matching messages with sender, content and timestamp."}}},
        {"SendMessage", "message", "Sends a message to another user.",
         {P{"receiver", "string", true, "The receiver's username."},
          P{"message", "string", true, "The message content."}},
         {O{"message_id", "The ID of the sent message."}}},
        // reminder
        {"AddReminder", "reminder", "Add a reminder.",
         {P{"task", "string", true, "The task to be reminded of."},
          P{"due_date", "string", false, "Date the task is due, in the format of %Y-%m-%d %H:%M:%S."}},
         {O{"reminder_id", "The ID of the created reminder."}}},
        {"CompleteReminder", "reminder", "Complete a reminder.",
         {P{"reminder_id", "string", true, "The ID of the reminder to be completed."}},
         {O{"status", "success or failed."}}},
        {"DeleteReminder", "reminder", "Delete a reminder.",
         {P{"reminder_id", "string", true, "The ID of the reminder to be deleted."}},
         {O{"status", "success or failed."}}},
        {"GetReminders", "reminder", "Get a list of reminders.", {},
         {O{"reminders", "Reminders with reminder_id, task, due_date and status."}}},
        // weather
        {"CurrentWeather", "weather", "Get the current weather of a location.",
         {P{"location", "string", true, "The city name, or latitude/longitude pair."}},
         {O{"weather", "Current conditions: temperature, humidity, wind and description."}}},
        {"ForecastWeather", "weather", "Get the 3-day forecast weather of a location.",
         {P{"location", "string", true, "The city name, or latitude/longitude pair."},
          P{"days", "integer", false, "Number of forecast days, at most 3."}},
         {O{"forecast", "Daily forecast with date, high, low and conditions."}}},
        {"HistoricWeather", "weather", "Get historic weather information of a location by month.",
         {P{"location", "string", true, "The city name, or latitude/longitude pair."},
          P{"month", "string", true, "The month to get weather for, e.g. January."}},
         {O{"weather", "Monthly averages: temperature, precipitation and description."}}},
        // reasoning
        {"wikipedia_search", "reasoning",
         "The Wikipedia Search tool provides access to a vast collection of articles covering a wide range of "
         "topics. Can query specific keywords or topics to retrieve accurate and comprehensive information.",
         {P{"query", "str", true, "The search query or keywords to find relevant articles on Wikipedia."}},
         {O{"title", "A summary or excerpt from the Wikipedia article that matches the search query."}}},
        // api_bank
        {"calculator", "api_bank", "Basic arithmetic operations: addition, subtraction, multiplication, division.",
         {P{"formula", "str", true, "Integer-only expression. Operators: + - * / ( ). Example: (1 + 2) * 3."}},
         {}},
    };
}

}  // namespace

const std::vector<std::string>& tool_groups() {
    static const std::vector<std::string> groups{"account", "alarm",  "calendar",  "email",   "message",
                                                 "reminder", "weather", "reasoning", "api_bank"};
    return groups;
}

void to_json(json& j, const ToolSpec& t) {
    json params = json::array();
    for (const auto& p : t.parameters)
        params.push_back({{"name", p.name}, {"type", p.type}, {"required", p.required}, {"description", p.description}});
    json outputs = json::array();
    for (const auto& o : t.output_fields) outputs.push_back({{"name", o.name}, {"description", o.description}});
    j = json{{"name", t.name},
             {"group", t.group},
             {"description", t.description},
             {"parameters", params},
             {"output_fields", outputs}};
}

void from_json(const json& j, ToolSpec& t) {
    try {
        t.name = j.at("name").get<std::string>();
        t.group = j.at("group").get<std::string>();
        t.description = j.at("description").get<std::string>();
        t.parameters.clear();
        for (const auto& p : j.at("parameters"))
            t.parameters.push_back({p.at("name").get<std::string>(), p.at("type").get<std::string>(),
                                    p.value("required", false), p.value("description", std::string{})});
        t.output_fields.clear();
        for (const auto& o : j.value("output_fields", json::array()))
            t.output_fields.push_back({o.at("name").get<std::string>(), o.value("description", std::string{})});
    } catch (const json::exception& e) {
        throw ParseError(std::string("tool record: ") + e.what());
    }
}

ToolCatalog::ToolCatalog(std::vector<ToolSpec> tools) : tools_(std::move(tools)) {
    const auto& known = tool_groups();
    std::set<std::string> names;
    for (const auto& t : tools_) {
        if (t.name.empty()) throw ValidationError("tool name nonempty", "<unnamed>");
        if (!names.insert(t.name).second) throw ValidationError("tool name unique within the catalog", t.name);
        if (std::find(known.begin(), known.end(), t.group) == known.end())
            throw ValidationError("tool group is one of the declared groups", t.name + ": " + t.group);
        for (const auto& p : t.parameters)
            if (p.required && p.description.empty())
                throw ValidationError("required parameters have a description", t.name + "." + p.name);
    }
}

std::vector<std::string> ToolCatalog::groups() const {
    std::set<std::string> gs;
    for (const auto& t : tools_) gs.insert(t.group);
    return {gs.begin(), gs.end()};
}

std::vector<ToolSpec> ToolCatalog::group(std::string_view name) const {
    std::vector<ToolSpec> out;
    for (const auto& t : tools_)
        if (t.group == name) out.push_back(t);
    return out;
}

const ToolSpec* ToolCatalog::find(std::string_view name) const {
    for (const auto& t : tools_)
        if (t.name == name) return &t;
    return nullptr;
}

ToolCatalog ToolCatalog::builtin() { return ToolCatalog(make_builtin()); }

ToolCatalog ToolCatalog::load(const std::string& path) {
    std::vector<ToolSpec> tools;
    for (const auto& rec : read_jsonl(path)) tools.push_back(rec.get<ToolSpec>());
    return ToolCatalog(std::move(tools));
}

void ToolCatalog::save(const std::string& path) const {
    std::vector<json> records(tools_.begin(), tools_.end());
    write_jsonl(path, records);
}

}  // namespace scope
