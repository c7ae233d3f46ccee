#pragma once

#include <atomic>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>

#include "json.hpp"
#include "sentinel/common/bytes.hpp"

namespace sentinel::chain {

using Json = nlohmann::json;

class TransportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A request absent from the snapshot while replaying.
class ReplayMiss : public TransportError {
 public:
  using TransportError::TransportError;
};

struct TransportResponse {
  Json body;
  std::int64_t timestamp = 0;  ///< unix seconds when the response was obtained
};

/// Services: "rpc" ({"method", "params"}), "explorer" (query parameters),
/// "signatures" ({"hex_signature"}).
class Transport {
 public:
  virtual ~Transport() = default;
  virtual TransportResponse call(const std::string& service, const Json& request) = 0;
};

struct Endpoint {
  std::string url;
  std::string api_key;
};

struct Endpoints {
  Endpoint rpc;
  Endpoint explorer;
  Endpoint signatures{"https://www.4byte.directory/api/v1/signatures/", ""};
  int timeout_seconds = 10;
};

/// Network transport over HTTP(S). "rpc" is POSTed as JSON-RPC; "explorer" and "signatures" become GET
/// query strings (the explorer API key is appended as `apikey`).
class HttpTransport : public Transport {
 public:
  explicit HttpTransport(Endpoints endpoints) : endpoints_(std::move(endpoints)) {}
  TransportResponse call(const std::string& service, const Json& request) override;

 private:
  Endpoints endpoints_;
};

/// Content key of a request: keccak256(service + "\n" + canonical JSON).
Hash32 request_key(const std::string& service, const Json& request);

/// Append-only JSON-lines store of request/response pairs. Each line holds
/// {"key", "service", "request", "response", "timestamp"}.
class SnapshotStore {
 public:
  SnapshotStore() = default;
  /// Loads an existing file (missing file = empty store) and appends new
  /// records to it.
  explicit SnapshotStore(std::string path);

  std::optional<TransportResponse> find(const std::string& service, const Json& request) const;
  /// Stores a record. A key that is already present keeps its first value.
  void put(const std::string& service, const Json& request, const TransportResponse& response);
  std::size_t size() const;

 private:
  std::string path_;
  mutable std::mutex mutex_;
  std::map<Hash32, TransportResponse> records_;
};

enum class Mode { Live, Record, Replay };

Mode parse_mode(std::string_view name);
std::string_view mode_name(Mode m);

/// Live: forwards to `upstream`. Record: answers from the store when
/// possible, otherwise forwards and stores. Replay: store only; a miss
/// throws ReplayMiss and no network call is made.
class SnapshotTransport : public Transport {
 public:
  SnapshotTransport(Mode mode, std::shared_ptr<SnapshotStore> store, std::shared_ptr<Transport> upstream = nullptr);
  TransportResponse call(const std::string& service, const Json& request) override;
  std::size_t upstream_calls() const { return upstream_calls_; }

 private:
  Mode mode_;
  std::shared_ptr<SnapshotStore> store_;
  std::shared_ptr<Transport> upstream_;
  std::atomic<std::size_t> upstream_calls_{0};
};

}  // namespace sentinel::chain
