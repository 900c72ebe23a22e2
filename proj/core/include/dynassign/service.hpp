#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <stdexcept>
#include <string>
#include <vector>

#include "dynassign/io.hpp"
#include "dynassign/mechanisms.hpp"
#include "dynassign/predictor.hpp"
#include "dynassign/stochastic.hpp"

namespace dynassign {

// Failure classes of the HTTP API. Each maps to one status code.
enum class ApiError {
  kValidation,  // 400
  kNotFound,    // 404
  kConflict,    // 409: stale ordinal, exhausted agent, closed session
  kInfeasible,  // 422
  kInternal,    // 500
};

const char* ToString(ApiError error);
int HttpStatus(ApiError error);

class ApiFailure : public std::runtime_error {
 public:
  ApiFailure(ApiError error, const std::string& message, std::string details_json = "{}")
      : std::runtime_error(message), error_(error), details_(std::move(details_json)) {}

  ApiError error() const noexcept { return error_; }
  const std::string& details() const noexcept { return details_; }

 private:
  ApiError error_;
  std::string details_;
};

// Everything needed to rebuild a session from its genesis record.
// Pool and arrival vectors are in `direction` units. A mechanism without a
// seed gets one derived from the session id at creation.
struct SessionSpec {
  std::size_t n = 0;  // declared number of arrivals
  AgentPool agents;
  std::vector<std::vector<double>> pool;  // aligned with agents
  Direction direction = Direction::kMin;
  MechanismConfig mechanism;
  bool seeded = false;

  void Validate() const;
};

struct RecommendRequest {
  std::vector<double> vector;  // arriving item, in the session's direction
  bool what_if = true;
  std::vector<int> excluded;   // agents barred for this item only
  std::vector<std::vector<double>> later;  // observed later batch members
};

// One live session. Methods lock internally: recommendations share the lock,
// commits take it exclusively, so every recommendation sees a committed
// state.
class Session {
 public:
  Session(std::string id, SessionSpec spec);

  const std::string& id() const { return id_; }
  const SessionSpec& spec() const { return spec_; }

  // Ordinal of the next arrival, 1-based.
  std::uint64_t next_ordinal() const;
  std::uint64_t sequence() const;
  bool closed() const;
  std::string StateHash() const;
  DynamicState Snapshot() const;

  Recommendation Recommend(const RecommendRequest& request) const;

  // Recommendation on record for the next ordinal, from the last
  // non-what-if request; -1 when there is none.
  int PendingRecommendation() const;

  // Validates and applies a commit; returns the recommended agent on record.
  int Commit(std::uint64_t ordinal, int agent, const std::string& item_id);

  // Exclusive lock for a journaled mutation spanning several calls.
  std::unique_lock<std::shared_mutex> Lock() const {
    return std::unique_lock<std::shared_mutex>(mutex_);
  }

 private:
  std::string HashUnlocked() const;
  Recommendation RecommendUnlocked(const RecommendRequest& request) const;
  int CommitUnlocked(std::uint64_t ordinal, int agent, const std::string& item_id);

  std::string id_;
  SessionSpec spec_;
  HistoricalPool pool_;
  QuantileTable table_;
  std::unique_ptr<Ensemble> ensemble_;
  DynamicState state_;
  std::uint64_t sequence_ = 0;
  std::uint64_t pending_ordinal_ = 0;
  int pending_agent_ = -1;
  mutable std::shared_mutex mutex_;

  friend class SessionStore;
};

// Sessions keyed by id with an append-only JSON Lines journal per session
// under `dir` (`<id>.jsonl`). Each event line is
//   {"seq", "kind", "payload", "wall_clock", "state_hash"}
// where state_hash is the hash after the event. Opening a store replays
// every journal and verifies each recorded hash; a torn final line is
// ignored. An empty `dir` keeps sessions in memory only. A session created
// without a mechanism seed gets Mix64(default_seed ^ FNV-1a(id)).
class SessionStore {
 public:
  explicit SessionStore(std::filesystem::path dir = {}, std::uint64_t default_seed = 0);

  std::string Create(const SessionSpec& spec);
  std::shared_ptr<Session> Find(const std::string& id) const;

  // Non-what-if recommendations are journaled and become the recommendation
  // on record for the ordinal, which is stored in `ordinal` when given.
  Recommendation Recommend(const std::string& id, const RecommendRequest& request,
                           std::uint64_t* ordinal = nullptr);
  void Commit(const std::string& id, std::uint64_t ordinal, int agent,
              const std::string& item_id);

  std::vector<std::string> Ids() const;

 private:
  void Append(Session& session, const std::string& kind,
              const std::string& payload_json);
  void Replay(const std::filesystem::path& file);

  std::filesystem::path dir_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  std::uint64_t default_seed_ = 0;
  std::uint64_t next_id_ = 1;
  mutable std::shared_mutex mutex_;
};

// State hashes recorded in a journal, one per event, in sequence order.
std::vector<std::string> JournalStateHashes(const std::filesystem::path& file);

// Transport-independent HTTP API: routes a request to the store and returns
// the status code and JSON body. Every body carries "schema": "v1"; errors
// use {"schema", "code", "message", "details"}. Session specs that omit
// "direction" get `default_direction`.
struct ApiResponse {
  int status = 200;
  std::string body;
};

class ServiceApi {
 public:
  explicit ServiceApi(SessionStore& store, Direction default_direction = Direction::kMin)
      : store_(store), default_direction_(default_direction) {}

  ApiResponse Handle(const std::string& method, const std::string& path,
                     const std::string& body);

 private:
  SessionStore& store_;
  Direction default_direction_;
};

// Serves ServiceApi over HTTP until Stop(). Port 0 binds any free port.
class HttpServer {
 public:
  explicit HttpServer(ServiceApi& api);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  // Binds and returns the port.
  int Bind(const std::string& host, int port);
  // Blocks serving requests.
  bool Listen();
  void Stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace dynassign
