#include "http_util.hpp"

#include "httplib.h"

#include <chrono>
#include <cmath>
#include <thread>

#include "capcom/errors.hpp"

namespace capcom::detail {
namespace {

bool retryable_status(int status) { return status == 429 || status >= 500; }

}  // namespace

HttpResponse post_json_raw(const std::string& base_url, const std::string& path,
                           const std::string& body, double timeout_s, int max_retries,
                           const Headers& headers, int backoff_ms) {
  httplib::Client cli(base_url);
  const auto secs = static_cast<time_t>(timeout_s);
  const auto usecs = static_cast<time_t>((timeout_s - static_cast<double>(secs)) * 1e6);
  cli.set_connection_timeout(secs, usecs);
  cli.set_read_timeout(secs, usecs);
  cli.set_write_timeout(secs, usecs);
  httplib::Headers hdrs;
  for (const auto& [k, v] : headers) hdrs.emplace(k, v);

  std::string last_error = "no attempt made";
  HttpResponse last;
  bool have_response = false;
  for (int attempt = 0; attempt <= max_retries; ++attempt) {
    if (attempt > 0 && backoff_ms > 0)
      std::this_thread::sleep_for(std::chrono::milliseconds(backoff_ms << (attempt - 1)));
    auto res = cli.Post(path, hdrs, body, "application/json");
    if (!res) {
      last_error = httplib::to_string(res.error());
      continue;
    }
    last = HttpResponse{res->status, res->body};
    have_response = true;
    if (!retryable_status(res->status)) return last;
    last_error = "HTTP " + std::to_string(res->status);
  }
  if (have_response) return last;
  throw TransportError("POST " + base_url + path + " failed after " +
                       std::to_string(max_retries + 1) + " attempts: " + last_error);
}

std::string post_json(const std::string& base_url, const std::string& path,
                      const std::string& body, double timeout_s, int max_retries,
                      const Headers& headers, int backoff_ms) {
  auto res = post_json_raw(base_url, path, body, timeout_s, max_retries, headers, backoff_ms);
  if (res.status < 200 || res.status >= 300)
    throw TransportError("POST " + base_url + path + " returned HTTP " +
                         std::to_string(res.status) + ": " + res.body.substr(0, 200));
  return std::move(res.body);
}

}  // namespace capcom::detail
