#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "http_client.hpp"

#include <httplib.h>

#include <cstdlib>
#include <thread>

#include "tsgen/errors.hpp"

namespace tsgen::detail {

namespace {

struct ParsedUrl {
    std::string base;  // scheme://host[:port]
    std::string path;
};

ParsedUrl split_url(const std::string& url) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) {
        throw ValidationError("endpoint URL must include a scheme: " + url);
    }
    const auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {url, "/"};
    return {url.substr(0, path_start), url.substr(path_start)};
}

}  // namespace

std::string bearer_token(const char* specific_env) {
    if (const char* v = std::getenv(specific_env); v != nullptr && *v != '\0') return v;
    if (const char* v = std::getenv("TSGEN_API_KEY"); v != nullptr && *v != '\0') return v;
    return {};
}

std::string post_json(const std::string& endpoint, const std::string& json_body,
                      const std::string& bearer, const RetryPolicy& retry,
                      const char* what) {
    const ParsedUrl url = split_url(endpoint);
    httplib::Client client(url.base);
    client.set_connection_timeout(10, 0);
    client.set_read_timeout(60, 0);
    if (!bearer.empty()) client.set_bearer_token_auth(bearer);

    auto backoff = retry.initial_backoff;
    std::string last_error;
    for (int attempt = 0; attempt <= retry.retries; ++attempt) {
        if (attempt > 0) {
            std::this_thread::sleep_for(backoff);
            backoff *= 2;
        }
        auto res = client.Post(url.path, json_body, "application/json");
        if (!res) {
            last_error = "transport error: " + httplib::to_string(res.error());
            continue;
        }
        if (res->status >= 500) {
            last_error = "server error, status " + std::to_string(res->status);
            continue;
        }
        if (res->status == 401 || res->status == 403) {
            throw BackendError(std::string(what) + " authentication failed at " + endpoint +
                               " (status " + std::to_string(res->status) + ")");
        }
        if (res->status < 200 || res->status >= 300) {
            throw BackendError(std::string(what) + " request rejected by " + endpoint +
                               " (status " + std::to_string(res->status) + ")");
        }
        return res->body;
    }
    throw BackendError(std::string(what) + " failed at " + endpoint + " after " +
                       std::to_string(retry.retries + 1) + " attempts: " + last_error);
}

}  // namespace tsgen::detail
