#include "plsq/http_util.hpp"

#include "plsq/error.hpp"

#include <httplib.h>

namespace plsq::http {

std::string Url::origin() const { return scheme + "://" + host + ":" + std::to_string(port); }

Url parse_url(const std::string& url) {
    Url out;
    const auto sep = url.find("://");
    if (sep == std::string::npos) throw Error(ErrorCode::bad_request, "not a URL: '" + url + "'");
    out.scheme = url.substr(0, sep);
    if (out.scheme != "http" && out.scheme != "https") {
        throw Error(ErrorCode::bad_request, "unsupported URL scheme '" + out.scheme + "'");
    }
    std::string rest = url.substr(sep + 3);
    const auto slash = rest.find('/');
    out.path = slash == std::string::npos ? "/" : rest.substr(slash);
    std::string authority = rest.substr(0, slash);
    const auto colon = authority.rfind(':');
    if (colon != std::string::npos) {
        try {
            out.port = std::stoi(authority.substr(colon + 1));
        } catch (const std::exception&) {
            throw Error(ErrorCode::bad_request, "bad port in URL '" + url + "'");
        }
        out.host = authority.substr(0, colon);
    } else {
        out.host = authority;
        out.port = out.scheme == "https" ? 443 : 80;
    }
    if (out.host.empty()) throw Error(ErrorCode::bad_request, "missing host in URL '" + url + "'");
    return out;
}

std::string post_json(const std::string& url, const std::string& body, std::chrono::milliseconds timeout,
                      const Headers& headers) {
    const Url target = parse_url(url);
    httplib::Client client(target.origin());
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(timeout);
    const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(timeout - secs);
    client.set_connection_timeout(secs.count(), usecs.count());
    client.set_read_timeout(secs.count(), usecs.count());
    client.set_write_timeout(secs.count(), usecs.count());
    httplib::Headers h;
    for (const auto& [k, v] : headers) h.emplace(k, v);
    auto res = client.Post(target.path, h, body, "application/json");
    if (!res) {
        throw Error(ErrorCode::network_error, "request to " + url + " failed: " + httplib::to_string(res.error()));
    }
    if (res->status < 200 || res->status >= 300) {
        throw Error(ErrorCode::network_error, "request to " + url + " returned HTTP " + std::to_string(res->status));
    }
    return res->body;
}

}  // namespace plsq::http
