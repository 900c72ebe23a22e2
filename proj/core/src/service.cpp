#include "dynassign/service.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <nlohmann/json.hpp>
#include <regex>
#include <sstream>

#include "dynassign/batch.hpp"
#include "dynassign/error.hpp"

namespace dynassign {
namespace {

using Json = nlohmann::ordered_json;
namespace fs = std::filesystem;

constexpr int kDefaultPredictorRuns = 20;

[[noreturn]] void Fail(ApiError error, const std::string& message) {
  throw ApiFailure(error, message);
}

ApiError FromLibrary(ErrorCode code) {
  switch (code) {
    case ErrorCode::kValidation:
      return ApiError::kValidation;
    case ErrorCode::kInfeasible:
      return ApiError::kInfeasible;
    case ErrorCode::kIo:
      return ApiError::kInternal;
  }
  return ApiError::kInternal;
}

std::string WallClock() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

bool IsSimulation(MechanismKind kind) {
  return kind == MechanismKind::kMinRisk || kind == MechanismKind::kApproxMinRisk;
}

// ---- JSON conversion -------------------------------------------------------

template <typename T>
T Field(const Json& j, const char* key) {
  if (!j.contains(key)) Fail(ApiError::kValidation, std::string("missing field '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    Fail(ApiError::kValidation, std::string("field '") + key + "' has the wrong type");
  }
}

template <typename T>
T FieldOr(const Json& j, const char* key, T fallback) {
  return j.contains(key) && !j.at(key).is_null() ? Field<T>(j, key) : fallback;
}

Json MechanismJson(const MechanismConfig& c) {
  return Json{{"kind", ToString(c.kind)}, {"m", c.m},         {"lambda", c.lambda},
              {"t", c.t},                 {"seed", c.seed},   {"threads", c.threads}};
}

MechanismConfig ParseMechanism(const Json& j, bool& seeded) {
  if (!j.is_object()) Fail(ApiError::kValidation, "mechanism must be an object");
  MechanismConfig c;
  try {
    c.kind = ParseMechanismKind(Field<std::string>(j, "kind"));
  } catch (const Error& e) {
    Fail(ApiError::kValidation, e.what());
  }
  c.m = FieldOr<int>(j, "m", 0);
  c.lambda = FieldOr<double>(j, "lambda", c.lambda);
  c.t = FieldOr<int>(j, "t", c.t);
  c.threads = FieldOr<int>(j, "threads", 1);
  seeded = j.contains("seed") && !j.at("seed").is_null();
  c.seed = FieldOr<std::uint64_t>(j, "seed", 0);
  return c;
}

Json SpecJson(const SessionSpec& spec) {
  Json agents = Json::array();
  for (std::size_t a = 0; a < spec.agents.size(); ++a) {
    agents.push_back(Json{{"id", spec.agents.agents[a]},
                          {"capacity", spec.agents.capacities[a]}});
  }
  return Json{{"schema", "v1"},
              {"n", spec.n},
              {"direction", ToString(spec.direction)},
              {"agents", std::move(agents)},
              {"pool", spec.pool},
              {"mechanism", MechanismJson(spec.mechanism)}};
}

SessionSpec ParseSpec(const Json& j, Direction fallback = Direction::kMin) {
  if (!j.is_object()) Fail(ApiError::kValidation, "session spec must be an object");
  SessionSpec spec;
  spec.n = Field<std::size_t>(j, "n");
  try {
    spec.direction = ParseDirection(FieldOr<std::string>(j, "direction", ToString(fallback)));
  } catch (const Error& e) {
    Fail(ApiError::kValidation, e.what());
  }
  const Json& agents = j.contains("agents") ? j.at("agents") : Json();
  if (!agents.is_array() || agents.empty()) {
    Fail(ApiError::kValidation, "agents must be a nonempty array");
  }
  std::vector<std::string> ids;
  std::vector<int> caps;
  for (const auto& a : agents) {
    ids.push_back(Field<std::string>(a, "id"));
    caps.push_back(Field<int>(a, "capacity"));
  }
  try {
    spec.agents = AgentPool(std::move(ids), std::move(caps));
  } catch (const Error& e) {
    Fail(ApiError::kValidation, e.what());
  }
  spec.pool = Field<std::vector<std::vector<double>>>(j, "pool");
  spec.mechanism = ParseMechanism(j.contains("mechanism") ? j.at("mechanism") : Json(),
                                  spec.seeded);
  return spec;
}

RecommendRequest ParseRecommend(const Json& j, const AgentPool& agents) {
  if (!j.is_object()) Fail(ApiError::kValidation, "request must be an object");
  RecommendRequest r;
  r.vector = Field<std::vector<double>>(j, "vector");
  r.what_if = FieldOr<bool>(j, "what_if", true);
  for (const auto& id : FieldOr<std::vector<std::string>>(j, "exclude", {})) {
    const int a = agents.IndexOf(id);
    if (a < 0) Fail(ApiError::kValidation, "unknown agent '" + id + "'");
    r.excluded.push_back(a);
  }
  r.later = FieldOr<std::vector<std::vector<double>>>(j, "later", {});
  return r;
}

Json RecommendJson(const Recommendation& rec, const AgentPool& agents) {
  Json scores = Json::array();
  for (std::size_t k = 0; k < rec.per_agent_score.size(); ++k) {
    const auto& s = rec.per_agent_score[k];
    Json entry{{"agent", agents.agents[static_cast<std::size_t>(s.agent)]},
               {"score", s.score}};
    if (k < rec.score_stderr.size()) entry["stderr"] = rec.score_stderr[k];
    scores.push_back(std::move(entry));
  }
  Json j{{"kind", ToString(rec.kind)},
         {"chosen_agent", agents.agents[static_cast<std::size_t>(rec.chosen_agent)]},
         {"per_agent_score", std::move(scores)},
         {"expected_loss_estimate", nullptr},
         {"draws_used", rec.draws_used}};
  if (rec.expected_loss_estimate) j["expected_loss_estimate"] = *rec.expected_loss_estimate;
  return j;
}

std::vector<double> ToCosts(const std::vector<double>& v, Direction direction) {
  std::vector<double> out(v.size());
  for (std::size_t k = 0; k < v.size(); ++k) out[k] = ToCost(v[k], direction);
  return out;
}

void CheckVector(const std::vector<double>& v, std::size_t dim, const char* what) {
  if (v.size() != dim) {
    Fail(ApiError::kValidation, std::string(what) + " has length " + std::to_string(v.size()) +
                                    ", expected " + std::to_string(dim));
  }
  for (double x : v) {
    if (!std::isfinite(x)) Fail(ApiError::kValidation, std::string(what) + " is not finite");
  }
}

}  // namespace

const char* ToString(ApiError error) {
  switch (error) {
    case ApiError::kValidation:
      return "validation";
    case ApiError::kNotFound:
      return "not_found";
    case ApiError::kConflict:
      return "conflict";
    case ApiError::kInfeasible:
      return "infeasible";
    case ApiError::kInternal:
      return "internal";
  }
  return "internal";
}

int HttpStatus(ApiError error) {
  switch (error) {
    case ApiError::kValidation:
      return 400;
    case ApiError::kNotFound:
      return 404;
    case ApiError::kConflict:
      return 409;
    case ApiError::kInfeasible:
      return 422;
    case ApiError::kInternal:
      return 500;
  }
  return 500;
}

// ---- SessionSpec / Session -------------------------------------------------

void SessionSpec::Validate() const {
  if (n == 0) Fail(ApiError::kValidation, "n must be >= 1");
  if (agents.size() == 0) Fail(ApiError::kValidation, "at least one agent is required");
  for (int z : agents.capacities) {
    if (z < 0) Fail(ApiError::kValidation, "capacities must be nonnegative");
  }
  if (agents.TotalCapacity() < static_cast<long>(n)) {
    Fail(ApiError::kInfeasible, "total capacity " + std::to_string(agents.TotalCapacity()) +
                                    " is below n = " + std::to_string(n));
  }
  if (pool.empty()) Fail(ApiError::kValidation, "pool must be nonempty");
  for (const auto& v : pool) CheckVector(v, agents.size(), "pool vector");
  try {
    mechanism.Validate();
  } catch (const Error& e) {
    Fail(FromLibrary(e.code()), e.what());
  }
}

Session::Session(std::string id, SessionSpec spec) : id_(std::move(id)), spec_(std::move(spec)) {
  spec_.Validate();
  std::vector<std::vector<double>> costs;
  costs.reserve(spec_.pool.size());
  for (const auto& v : spec_.pool) costs.push_back(ToCosts(v, spec_.direction));
  pool_ = HistoricalPool(spec_.agents.agents, std::move(costs));
  table_ = QuantileTable(pool_);
  state_ = DynamicState(spec_.agents);
  if (spec_.mechanism.kind == MechanismKind::kPredicted) {
    TrainOptions train;
    train.n = spec_.n;
    train.m = spec_.mechanism.m > 0 ? spec_.mechanism.m : kDefaultPredictorRuns;
    train.seed = spec_.mechanism.seed;
    train.threads = spec_.mechanism.threads;
    try {
      ensemble_ = std::make_unique<Ensemble>(TrainEnsemble(pool_, spec_.agents, train));
    } catch (const Error& e) {
      Fail(FromLibrary(e.code()), e.what());
    }
  }
}

std::uint64_t Session::next_ordinal() const {
  std::shared_lock lock(mutex_);
  return state_.history().size() + 1;
}

std::uint64_t Session::sequence() const {
  std::shared_lock lock(mutex_);
  return sequence_;
}

bool Session::closed() const {
  std::shared_lock lock(mutex_);
  return state_.closed();
}

std::string Session::StateHash() const {
  std::shared_lock lock(mutex_);
  return HashUnlocked();
}

DynamicState Session::Snapshot() const {
  std::shared_lock lock(mutex_);
  return state_;
}

int Session::PendingRecommendation() const {
  std::shared_lock lock(mutex_);
  return pending_ordinal_ == state_.history().size() + 1 ? pending_agent_ : -1;
}

std::string Session::HashUnlocked() const {
  std::ostringstream os;
  os << "n=" << spec_.n << ";closed=" << state_.closed() << ";remaining=";
  for (int z : state_.remaining()) os << z << ',';
  os << ";history=";
  for (const auto& h : state_.history()) {
    os << h.item_id.size() << ':' << h.item_id << ':' << h.agent << ':' << h.recommended << ';';
  }
  return HexDigest(Fnv1a64(os.str()));
}

Recommendation Session::Recommend(const RecommendRequest& request) const {
  std::shared_lock lock(mutex_);
  return RecommendUnlocked(request);
}

Recommendation Session::RecommendUnlocked(const RecommendRequest& request) const {
  if (state_.closed()) Fail(ApiError::kConflict, "session " + id_ + " is closed");
  const std::size_t dim = spec_.agents.size();
  CheckVector(request.vector, dim, "vector");
  for (const auto& v : request.later) CheckVector(v, dim, "later vector");
  for (int a : request.excluded) {
    if (a < 0 || static_cast<std::size_t>(a) >= dim) Fail(ApiError::kValidation, "bad exclusion");
  }
  const std::uint64_t ordinal = state_.history().size() + 1;
  const std::size_t future = spec_.n - static_cast<std::size_t>(ordinal);
  if (request.later.size() > future) {
    Fail(ApiError::kValidation, "more later vectors than arrivals left after this one");
  }
  const DynamicState state =
      request.excluded.empty() ? state_ : state_.WithExcluded(request.excluded);
  if (state.Candidates().empty()) {
    Fail(ApiError::kConflict, "no agent with remaining capacity is eligible");
  }
  const std::vector<double> costs = ToCosts(request.vector, spec_.direction);
  const MechanismConfig& config = spec_.mechanism;
  try {
    if (!request.later.empty()) {
      if (!IsSimulation(config.kind)) {
        Fail(ApiError::kValidation, "later vectors need min_risk or approx_min_risk");
      }
      std::vector<std::vector<double>> later;
      for (const auto& v : request.later) later.push_back(ToCosts(v, spec_.direction));
      return RecommendInBatch(state, costs, later, pool_, ordinal, spec_.n, config);
    }
    const ArrivalContext arrival{ordinal, spec_.n};
    switch (config.kind) {
      case MechanismKind::kMinRisk:
        return AssignMinRisk(state, costs, pool_, arrival, config);
      case MechanismKind::kApproxMinRisk:
        return AssignApproxMinRisk(state, costs, pool_, arrival, config);
      case MechanismKind::kGreedy:
        return AssignGreedy(state, costs);
      case MechanismKind::kWeightedCq:
        return AssignWeightedCq(state, costs, table_.QuantileVector(costs), config.lambda);
      case MechanismKind::kSequentialCq:
        return AssignSequentialCq(state, costs, table_.QuantileVector(costs), config.t);
      case MechanismKind::kPredicted:
        return AssignPredicted(state, costs, table_.QuantileVector(costs), *ensemble_);
    }
  } catch (const Error& e) {
    Fail(FromLibrary(e.code()), e.what());
  }
  Fail(ApiError::kInternal, "unknown mechanism");
}

int Session::Commit(std::uint64_t ordinal, int agent, const std::string& item_id) {
  std::unique_lock lock(mutex_);
  return CommitUnlocked(ordinal, agent, item_id);
}

int Session::CommitUnlocked(std::uint64_t ordinal, int agent, const std::string& item_id) {
  if (state_.closed()) Fail(ApiError::kConflict, "session " + id_ + " is closed");
  const std::uint64_t expected = state_.history().size() + 1;
  if (ordinal != expected) {
    Fail(ApiError::kConflict, "ordinal " + std::to_string(ordinal) +
                                  " is not next; expected " + std::to_string(expected));
  }
  if (agent < 0 || static_cast<std::size_t>(agent) >= spec_.agents.size()) {
    Fail(ApiError::kValidation, "unknown agent");
  }
  if (!state_.available(static_cast<std::size_t>(agent))) {
    Fail(ApiError::kConflict,
         "agent " + spec_.agents.agents[static_cast<std::size_t>(agent)] + " has no capacity left");
  }
  const int recommended = pending_ordinal_ == ordinal ? pending_agent_ : -1;
  state_.Commit(item_id.empty() ? "item-" + std::to_string(ordinal) : item_id, agent,
                recommended);
  pending_ordinal_ = 0;
  pending_agent_ = -1;
  if (state_.history().size() == spec_.n) state_.Close();
  return recommended;
}

// ---- SessionStore ------------------------------------------------------------

SessionStore::SessionStore(fs::path dir, std::uint64_t default_seed)
    : dir_(std::move(dir)), default_seed_(default_seed) {
  if (dir_.empty()) return;
  std::error_code ec;
  fs::create_directories(dir_, ec);
  if (ec) ThrowIo("cannot create journal directory '" + dir_.string() + "'");
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir_)) {
    if (entry.path().extension() == ".jsonl") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& f : files) Replay(f);
}

std::string SessionStore::Create(const SessionSpec& spec) {
  std::unique_lock lock(mutex_);
  char buf[16];
  std::snprintf(buf, sizeof buf, "s%06llu", static_cast<unsigned long long>(next_id_));
  const std::string id = buf;
  SessionSpec resolved = spec;
  if (!resolved.seeded) {
    resolved.mechanism.seed = Mix64(default_seed_ ^ Fnv1a64(id));
    resolved.seeded = true;
  }
  auto session = std::make_shared<Session>(id, std::move(resolved));
  ++next_id_;
  {
    auto session_lock = session->Lock();
    Append(*session, "genesis", SpecJson(session->spec_).dump());
  }
  sessions_.emplace(id, std::move(session));
  return id;
}

std::shared_ptr<Session> SessionStore::Find(const std::string& id) const {
  std::shared_lock lock(mutex_);
  auto it = sessions_.find(id);
  if (it == sessions_.end()) Fail(ApiError::kNotFound, "no session '" + id + "'");
  return it->second;
}

Recommendation SessionStore::Recommend(const std::string& id, const RecommendRequest& request,
                                       std::uint64_t* ordinal_out) {
  auto session = Find(id);
  if (request.what_if) {
    std::shared_lock lock(session->mutex_);
    if (ordinal_out) *ordinal_out = session->state_.history().size() + 1;
    return session->RecommendUnlocked(request);
  }
  auto lock = session->Lock();
  Recommendation rec = session->RecommendUnlocked(request);
  const std::uint64_t ordinal = session->state_.history().size() + 1;
  if (ordinal_out) *ordinal_out = ordinal;
  session->pending_ordinal_ = ordinal;
  session->pending_agent_ = rec.chosen_agent;
  Json payload{{"ordinal", ordinal},
               {"vector", request.vector},
               {"exclude", request.excluded},
               {"later", request.later},
               {"chosen_agent", rec.chosen_agent}};
  Append(*session, "recommend", payload.dump());
  return rec;
}

void SessionStore::Commit(const std::string& id, std::uint64_t ordinal, int agent,
                          const std::string& item_id) {
  auto session = Find(id);
  auto lock = session->Lock();
  const int recommended = session->CommitUnlocked(ordinal, agent, item_id);
  const auto& entry = session->state_.history().back();
  Json payload{{"ordinal", ordinal},
               {"item_id", entry.item_id},
               {"agent", agent},
               {"recommended", recommended},
               {"override", recommended >= 0 && recommended != agent}};
  Append(*session, "commit", payload.dump());
}

std::vector<std::string> SessionStore::Ids() const {
  std::shared_lock lock(mutex_);
  std::vector<std::string> ids;
  for (const auto& [id, s] : sessions_) ids.push_back(id);
  return ids;
}

void SessionStore::Append(Session& session, const std::string& kind,
                          const std::string& payload_json) {
  const std::uint64_t seq = session.sequence_ + 1;
  if (!dir_.empty()) {
    Json line{{"seq", seq},
              {"kind", kind},
              {"payload", Json::parse(payload_json)},
              {"wall_clock", WallClock()},
              {"state_hash", session.HashUnlocked()}};
    std::ofstream out(dir_ / (session.id() + ".jsonl"), std::ios::app | std::ios::binary);
    out << line.dump() << '\n';
    out.flush();
    if (!out) Fail(ApiError::kInternal, "failed to append to the journal of " + session.id());
  }
  session.sequence_ = seq;
}

void SessionStore::Replay(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) ThrowIo("cannot open journal '" + file.string() + "'");
  const std::string id = file.stem().string();
  std::shared_ptr<Session> session;
  std::string line;
  std::uint64_t good_bytes = 0;
  std::uint64_t offset = 0;
  bool torn = false;
  while (std::getline(in, line)) {
    // A line without its newline was never acknowledged to a client.
    if (in.eof()) {
      torn = true;
      break;
    }
    offset += line.size() + 1;
    Json event;
    try {
      event = Json::parse(line);
    } catch (const nlohmann::json::exception&) {
      ThrowIo("corrupt journal line in '" + file.string() + "'");
    }
    const auto seq = event.at("seq").get<std::uint64_t>();
    const auto kind = event.at("kind").get<std::string>();
    const Json& payload = event.at("payload");
    if (!session) {
      if (kind != "genesis") ThrowIo("journal '" + file.string() + "' lacks a genesis event");
      SessionSpec spec = ParseSpec(payload);
      spec.seeded = true;
      session = std::make_shared<Session>(id, std::move(spec));
    } else if (kind == "recommend") {
      session->pending_ordinal_ = payload.at("ordinal").get<std::uint64_t>();
      session->pending_agent_ = payload.at("chosen_agent").get<int>();
    } else if (kind == "commit") {
      session->CommitUnlocked(payload.at("ordinal").get<std::uint64_t>(),
                              payload.at("agent").get<int>(),
                              payload.at("item_id").get<std::string>());
    } else {
      ThrowIo("unknown journal event '" + kind + "' in '" + file.string() + "'");
    }
    if (seq != session->sequence_ + 1) ThrowIo("journal sequence gap in '" + file.string() + "'");
    session->sequence_ = seq;
    if (session->HashUnlocked() != event.at("state_hash").get<std::string>()) {
      ThrowIo("state hash mismatch at seq " + std::to_string(seq) + " in '" + file.string() + "'");
    }
    good_bytes = offset;
  }
  in.close();
  if (torn) fs::resize_file(file, good_bytes);
  if (!session) return;
  unsigned long long number = 0;
  if (std::sscanf(id.c_str(), "s%llu", &number) == 1 && number >= next_id_) next_id_ = number + 1;
  sessions_.emplace(id, std::move(session));
}

std::vector<std::string> JournalStateHashes(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) ThrowIo("cannot open journal '" + file.string() + "'");
  std::vector<std::string> hashes;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    hashes.push_back(Json::parse(line).at("state_hash").get<std::string>());
  }
  return hashes;
}

// ---- ServiceApi ----------------------------------------------------------------

namespace {

Json SessionView(const Session& s) {
  const DynamicState state = s.Snapshot();
  const auto& agents = s.spec().agents;
  Json list = Json::array();
  for (std::size_t a = 0; a < agents.size(); ++a) {
    list.push_back(Json{{"id", agents.agents[a]},
                        {"capacity", agents.capacities[a]},
                        {"remaining", state.remaining(a)}});
  }
  return Json{{"schema", "v1"},
              {"id", s.id()},
              {"n", s.spec().n},
              {"direction", ToString(s.spec().direction)},
              {"committed", state.history().size()},
              {"next_ordinal", state.history().size() + 1},
              {"closed", state.closed()},
              {"agents", std::move(list)},
              {"mechanism", MechanismJson(s.spec().mechanism)},
              {"sequence", s.sequence()},
              {"state_hash", s.StateHash()}};
}

Json TraceView(const Session& s) {
  const DynamicState state = s.Snapshot();
  const auto& ids = s.spec().agents.agents;
  Json entries = Json::array();
  std::uint64_t ordinal = 0;
  for (const auto& h : state.history()) {
    entries.push_back(Json{
        {"ordinal", ++ordinal},
        {"item_id", h.item_id},
        {"agent", ids[static_cast<std::size_t>(h.agent)]},
        {"recommended",
         h.recommended < 0 ? Json(nullptr) : Json(ids[static_cast<std::size_t>(h.recommended)])},
        {"override", h.recommended >= 0 && h.recommended != h.agent}});
  }
  return Json{{"schema", "v1"}, {"id", s.id()}, {"entries", std::move(entries)}};
}

ApiResponse Ok(int status, const Json& body) { return {status, body.dump()}; }

ApiResponse ErrorResponse(ApiError error, const std::string& message,
                          const std::string& details) {
  Json d = Json::object();
  try {
    d = Json::parse(details);
  } catch (const nlohmann::json::exception&) {
  }
  return Ok(HttpStatus(error), Json{{"schema", "v1"},
                                    {"code", ToString(error)},
                                    {"message", message},
                                    {"details", d}});
}

Json ParseBody(const std::string& body) {
  try {
    return Json::parse(body.empty() ? std::string("{}") : body);
  } catch (const nlohmann::json::exception& e) {
    Fail(ApiError::kValidation, std::string("malformed JSON body: ") + e.what());
  }
}

}  // namespace

ApiResponse ServiceApi::Handle(const std::string& method, const std::string& path,
                               const std::string& body) {
  static const std::regex kSession(R"(^/sessions/([A-Za-z0-9_-]+)(/(recommend|commit|trace))?/?$)");
  try {
    if (path == "/sessions" || path == "/sessions/") {
      if (method != "POST") Fail(ApiError::kNotFound, "use POST /sessions");
      const std::string id = store_.Create(ParseSpec(ParseBody(body), default_direction_));
      return Ok(201, SessionView(*store_.Find(id)));
    }
    std::smatch m;
    if (!std::regex_match(path, m, kSession)) Fail(ApiError::kNotFound, "no route " + path);
    const std::string id = m[1];
    const std::string action = m[3];
    if (action.empty() && method == "GET") return Ok(200, SessionView(*store_.Find(id)));
    if (action == "trace" && method == "GET") return Ok(200, TraceView(*store_.Find(id)));
    if (action == "recommend" && method == "POST") {
      auto session = store_.Find(id);
      const RecommendRequest request = ParseRecommend(ParseBody(body), session->spec().agents);
      std::uint64_t ordinal = 0;
      const Recommendation rec = store_.Recommend(id, request, &ordinal);
      Json out = RecommendJson(rec, session->spec().agents);
      out["schema"] = "v1";
      out["session"] = id;
      out["ordinal"] = ordinal;
      out["what_if"] = request.what_if;
      out["state_hash"] = session->StateHash();
      return Ok(200, out);
    }
    if (action == "commit" && method == "POST") {
      auto session = store_.Find(id);
      const Json j = ParseBody(body);
      const auto ordinal = Field<std::uint64_t>(j, "ordinal");
      const auto agent_id = Field<std::string>(j, "agent");
      const int agent = session->spec().agents.IndexOf(agent_id);
      if (agent < 0) Fail(ApiError::kValidation, "unknown agent '" + agent_id + "'");
      store_.Commit(id, ordinal, agent, FieldOr<std::string>(j, "item_id", ""));
      Json out = SessionView(*session);
      out["committed_ordinal"] = ordinal;
      return Ok(200, out);
    }
    Fail(ApiError::kNotFound, "no route " + method + " " + path);
  } catch (const ApiFailure& f) {
    return ErrorResponse(f.error(), f.what(), f.details());
  } catch (const Error& e) {
    return ErrorResponse(FromLibrary(e.code()), e.what(), "{}");
  } catch (const std::exception& e) {
    return ErrorResponse(ApiError::kInternal, e.what(), "{}");
  }
}

}  // namespace dynassign
