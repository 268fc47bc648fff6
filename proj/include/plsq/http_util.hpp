#pragma once

#include <chrono>
#include <string>
#include <utility>
#include <vector>

namespace plsq::http {

struct Url {
    std::string scheme;  // http or https
    std::string host;
    int port{0};
    std::string path;  // begins with '/'

    /// scheme://host:port, the base httplib clients are constructed from.
    [[nodiscard]] std::string origin() const;
};

/// Throws Error(bad_request) for anything that is not an http(s) URL.
Url parse_url(const std::string& url);

using Headers = std::vector<std::pair<std::string, std::string>>;

/// POSTs a JSON body and returns the response body. Connection failures,
/// timeouts and non-2xx statuses raise Error(network_error).
std::string post_json(const std::string& url, const std::string& body, std::chrono::milliseconds timeout,
                      const Headers& headers);

}  // namespace plsq::http
