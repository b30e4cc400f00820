#pragma once

#include <string>

#include "tsgen/embedding.hpp"

namespace tsgen::detail {

// Reads the bearer token for a service: `specific_env` first, then the
// shared TSGEN_API_KEY. Empty when neither is set.
std::string bearer_token(const char* specific_env);

// POSTs a JSON body and returns the response body. Retries transport
// failures and 5xx responses per the policy; throws BackendError carrying
// the endpoint and status otherwise.
std::string post_json(const std::string& endpoint, const std::string& json_body,
                      const std::string& bearer, const RetryPolicy& retry,
                      const char* what);

}  // namespace tsgen::detail
