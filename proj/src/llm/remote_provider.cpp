#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include "scope/errors.hpp"
#include "scope/llm/gateway.hpp"

namespace scope {

namespace {

struct Endpoint {
    std::string base;  // scheme://host[:port]
    std::string path;
};

Endpoint split_url(const std::string& url) {
    const auto scheme = url.find("://");
    if (scheme == std::string::npos) throw ConfigError("provider URL needs a scheme: '" + url + "'");
    const auto slash = url.find('/', scheme + 3);
    if (slash == std::string::npos) return {url, "/v1/chat/completions"};
    return {url.substr(0, slash), url.substr(slash)};
}

}  // namespace

RemoteProvider::RemoteProvider(RemoteSettings settings) : settings_(std::move(settings)) {
    if (settings_.url.empty()) throw ConfigError("remote provider needs a URL (SCOPE_PROVIDER_URL)");
    split_url(settings_.url);
}

json RemoteProvider::request_body(const LlmRequest& request, const std::string& model_id) {
    return json{{"model", model_id.empty() ? request.config.model_id : model_id},
                {"messages", json::array({json{{"role", "user"}, {"content", request.prompt}}})},
                {"temperature", request.config.temperature},
                {"top_p", request.config.top_p},
                {"max_tokens", request.config.max_tokens}};
}

std::string RemoteProvider::parse_response(const std::string& body) {
    try {
        const json j = json::parse(body);
        const auto& content = j.at("choices").at(0).at("message").at("content");
        if (!content.is_string()) throw ProviderRejected("completion content is not text");
        return content.get<std::string>();
    } catch (const json::exception& e) {
        throw ProviderRejected(std::string("unexpected provider response: ") + e.what());
    }
}

std::string RemoteProvider::complete(const LlmRequest& request) {
    const Endpoint ep = split_url(settings_.url);
    httplib::Client client(ep.base);
    const auto secs = static_cast<time_t>(settings_.timeout.count());
    client.set_connection_timeout(secs, 0);
    client.set_read_timeout(secs, 0);
    client.set_write_timeout(secs, 0);

    httplib::Headers headers;
    if (!settings_.api_key.empty()) headers.emplace("Authorization", "Bearer " + settings_.api_key);
    const std::string body = request_body(request, settings_.model_id).dump();

    auto res = client.Post(ep.path, headers, body, "application/json");
    if (!res) throw TransportError("request failed: " + httplib::to_string(res.error()));
    const int status = res->status;
    if (status == 408 || status == 429 || status >= 500)
        throw TransportError("provider returned HTTP " + std::to_string(status));
    if (status < 200 || status >= 300)
        throw ProviderRejected("provider returned HTTP " + std::to_string(status) + ": " + res->body.substr(0, 200));
    return parse_response(res->body);
}

std::string RemoteProvider::describe() const {
    return "remote:" + settings_.url + ":" + settings_.model_id;
}

}  // namespace scope
