#pragma once

#include <string>
#include <utility>
#include <vector>

namespace capcom::detail {

struct HttpResponse {
  int status = 0;
  std::string body;
};

using Headers = std::vector<std::pair<std::string, std::string>>;

// POSTs a JSON body. Transport failures and 429/5xx answers are retried up to
// `max_retries` times with exponential backoff starting at `backoff_ms`; a
// response that arrived with any other status is returned as-is. Throws
// TransportError when no usable response was obtained.
HttpResponse post_json_raw(const std::string& base_url, const std::string& path,
                           const std::string& body, double timeout_s, int max_retries,
                           const Headers& headers, int backoff_ms = 100);

// As post_json_raw, but any non-2xx status becomes a TransportError.
std::string post_json(const std::string& base_url, const std::string& path,
                      const std::string& body, double timeout_s, int max_retries,
                      const Headers& headers, int backoff_ms = 100);

}  // namespace capcom::detail
