#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "httplib.h"

#include "sentinel/chain/transport.hpp"

#include <chrono>
#include <fstream>

#include "sentinel/common/keccak.hpp"
#include "sentinel/common/text.hpp"

namespace sentinel::chain {

namespace {

std::int64_t now_seconds() {
  return std::chrono::duration_cast<std::chrono::seconds>(std::chrono::system_clock::now().time_since_epoch()).count();
}

struct SplitUrl {
  std::string origin;  // scheme://host[:port]
  std::string path;    // starts with '/'
};

SplitUrl split_url(const std::string& url) {
  const auto scheme = url.find("://");
  if (scheme == std::string::npos) throw TransportError("endpoint URL lacks a scheme: " + url);
  const auto slash = url.find('/', scheme + 3);
  if (slash == std::string::npos) return {url, "/"};
  return {url.substr(0, slash), url.substr(slash)};
}

std::string query_value(const Json& v) { return v.is_string() ? v.get<std::string>() : v.dump(); }

Json parse_body(const httplib::Result& res, const std::string& what) {
  if (!res) throw TransportError(what + ": " + httplib::to_string(res.error()));
  if (res->status < 200 || res->status >= 300)
    throw TransportError(what + ": HTTP " + std::to_string(res->status));
  try {
    return Json::parse(res->body);
  } catch (const Json::parse_error& e) {
    throw TransportError(what + ": malformed JSON response: " + e.what());
  }
}

}  // namespace

TransportResponse HttpTransport::call(const std::string& service, const Json& request) {
  const Endpoint* ep = nullptr;
  if (service == "rpc") {
    ep = &endpoints_.rpc;
  } else if (service == "explorer") {
    ep = &endpoints_.explorer;
  } else if (service == "signatures") {
    ep = &endpoints_.signatures;
  } else {
    throw TransportError("service '" + service + "' has no network endpoint");
  }
  if (ep->url.empty()) throw TransportError("no endpoint configured for service '" + service + "'");
  const auto url = split_url(ep->url);
  httplib::Client client(url.origin);
  client.set_connection_timeout(endpoints_.timeout_seconds);
  client.set_read_timeout(endpoints_.timeout_seconds);
  client.set_follow_location(true);

  TransportResponse out;
  if (service == "rpc") {
    Json body = {{"jsonrpc", "2.0"}, {"id", 1}, {"method", request.at("method")}, {"params", request.at("params")}};
    out.body = parse_body(client.Post(url.path, body.dump(), "application/json"), service);
  } else {
    httplib::Params params;
    for (const auto& [k, v] : request.items()) params.emplace(k, query_value(v));
    if (!ep->api_key.empty()) params.emplace("apikey", ep->api_key);
    out.body = parse_body(client.Get(url.path, params, httplib::Headers{}), service);
  }
  out.timestamp = now_seconds();
  return out;
}

Hash32 request_key(const std::string& service, const Json& request) {
  return keccak256(service + "\n" + request.dump());
}

SnapshotStore::SnapshotStore(std::string path) : path_(std::move(path)) {
  std::ifstream in(path_);
  if (!in) return;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    try {
      const auto rec = Json::parse(line);
      const auto key = request_key(rec.at("service").get<std::string>(), rec.at("request"));
      records_.emplace(key, TransportResponse{rec.at("response"), rec.at("timestamp").get<std::int64_t>()});
    } catch (const Json::exception& e) {
      throw std::runtime_error(path_ + ":" + std::to_string(line_no) + ": bad snapshot record: " + e.what());
    }
  }
}

std::optional<TransportResponse> SnapshotStore::find(const std::string& service, const Json& request) const {
  std::lock_guard lock(mutex_);
  auto it = records_.find(request_key(service, request));
  if (it == records_.end()) return std::nullopt;
  return it->second;
}

void SnapshotStore::put(const std::string& service, const Json& request, const TransportResponse& response) {
  std::lock_guard lock(mutex_);
  const auto key = request_key(service, request);
  if (!records_.emplace(key, response).second) return;
  if (path_.empty()) return;
  std::ofstream out(path_, std::ios::app);
  if (!out) throw std::runtime_error("cannot append to snapshot " + path_);
  Json rec = {{"key", key.hex()},
              {"service", service},
              {"request", request},
              {"response", response.body},
              {"timestamp", response.timestamp}};
  out << rec.dump() << '\n';
}

std::size_t SnapshotStore::size() const {
  std::lock_guard lock(mutex_);
  return records_.size();
}

Mode parse_mode(std::string_view name) {
  const auto n = to_lower(name);
  if (n == "live") return Mode::Live;
  if (n == "record") return Mode::Record;
  if (n == "replay" || n == "replay-strict") return Mode::Replay;
  throw std::invalid_argument("unknown mode '" + std::string(name) + "' (live|record|replay)");
}

std::string_view mode_name(Mode m) {
  switch (m) {
    case Mode::Live: return "live";
    case Mode::Record: return "record";
    case Mode::Replay: return "replay";
  }
  return "replay";
}

SnapshotTransport::SnapshotTransport(Mode mode, std::shared_ptr<SnapshotStore> store, std::shared_ptr<Transport> upstream)
    : mode_(mode), store_(std::move(store)), upstream_(std::move(upstream)) {
  if (mode_ != Mode::Replay && !upstream_) throw std::invalid_argument("live and record modes need an upstream transport");
  if (mode_ != Mode::Live && !store_) throw std::invalid_argument("record and replay modes need a snapshot store");
}

TransportResponse SnapshotTransport::call(const std::string& service, const Json& request) {
  if (mode_ != Mode::Live) {
    if (auto hit = store_->find(service, request)) return *hit;
    if (mode_ == Mode::Replay)
      throw ReplayMiss("snapshot has no response for " + service + " " + request.dump());
  }
  ++upstream_calls_;
  auto response = upstream_->call(service, request);
  if (mode_ == Mode::Record) store_->put(service, request, response);
  return response;
}

}  // namespace sentinel::chain
