#include "medsched/service.hpp"

#include <filesystem>
#include <thread>

#include "httplib.h"
#include "json.hpp"
#include "medsched/pipeline.hpp"

namespace medsched {

namespace {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

struct HttpError {
  int status;
  std::string message;
  std::string where;
};

[[noreturn]] void fail(int status, std::string message, std::string where = {}) {
  throw HttpError{status, std::move(message), std::move(where)};
}

Response reply(int status, const ojson& j) { return {status, j.dump(2) + "\n"}; }
Response reply_text(int status, std::string text) { return {status, std::move(text)}; }

json body_json(const std::string& body) {
  if (body.empty()) return json::object();
  try {
    json j = json::parse(body);
    if (!j.is_object()) fail(400, "request body must be a JSON object");
    return j;
  } catch (const json::parse_error& e) {
    fail(400, std::string("malformed JSON: ") + e.what());
  }
}

std::vector<std::string> split_path(const std::string& path) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : path.substr(0, path.find('?'))) {
    if (c == '/') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

}  // namespace

struct Service::State {
  std::mutex mu;
  std::string id;
  Instance initial;
  Instance current;
  std::vector<json> edits;  // patch documents as received
  std::vector<std::string> background;
  std::vector<ojson> analyses;
  long long revision = 0;
  bool solving = false;
  bool stale = false;
  std::optional<SolutionDoc> outcome;
  std::optional<Assignment> assignment;
  PeakMetric metric = PeakMetric::Starts;

  // Instance encoding plus the background lines so far.
  Problem problem() const {
    Problem p(current, metric);
    std::vector<ConstraintInstance> extra;
    for (std::size_t i = 0; i < background.size(); ++i)
      extra.push_back(parse_background(p.model(), background[i], static_cast<int>(i) + 1));
    p.add_constraints(extra);
    return p;
  }

  ojson doc(bool with_outcome) const {
    ojson j;
    j["format"] = "medsched-session";
    j["version"] = kFormatVersion;
    j["id"] = id;
    j["kind"] = kind_tag(kind_of(current));
    j["revision"] = revision;
    j["instance"] = ojson::parse(write_instance(current));
    j["initial"] = ojson::parse(write_instance(initial));
    j["edits"] = ojson::array();
    for (const auto& e : edits) j["edits"].push_back(ojson::parse(e.dump()));
    j["background"] = background;
    j["analyses"] = analyses;
    j["solving"] = with_outcome && solving;
    j["stale"] = with_outcome && stale;
    j["outcome"] = with_outcome && outcome ? ojson::parse(write_solution(*outcome, current)) : ojson(nullptr);
    return j;
  }
};

struct Service::Http {
  httplib::Server server;
  std::thread thread;
};

Service::Service(ServiceOptions options) : options_(std::move(options)) {
  if (options_.state_dir) {
    std::filesystem::create_directories(*options_.state_dir);
    load_all();
  }
}

Service::~Service() { stop(); }

std::size_t Service::session_count() const {
  std::lock_guard lock(mu_);
  return sessions_.size();
}

std::shared_ptr<Service::State> Service::find(const std::string& id) const {
  std::lock_guard lock(mu_);
  auto it = sessions_.find(id);
  if (it == sessions_.end()) fail(404, "unknown session " + id);
  return it->second;
}

void Service::save(const State& s) const {
  if (!options_.state_dir) return;
  write_file_atomic(*options_.state_dir + "/" + s.id + ".json", s.doc(false).dump(2) + "\n");
}

// Rebuilds each saved session by replaying its edits from the initial
// instance; a file whose replay disagrees with its recorded instance is
// skipped rather than trusted.
void Service::load_all() {
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(*options_.state_dir))
    if (e.path().extension() == ".json") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  for (const auto& f : files) {
    try {
      json j = json::parse(read_file(f.string()));
      if (j.at("format") != "medsched-session") continue;
      auto s = std::make_shared<State>();
      s->id = j.at("id").get<std::string>();
      s->initial = parse_instance(j.at("initial").dump());
      s->current = s->initial;
      for (const auto& e : j.at("edits")) {
        s->current = apply_patch(s->current, e.dump());
        s->edits.push_back(e);
      }
      if (!(s->current == parse_instance(j.at("instance").dump()))) continue;
      s->background = j.at("background").get<std::vector<std::string>>();
      for (const auto& a : j.at("analyses")) s->analyses.push_back(ojson::parse(a.dump()));
      s->revision = j.at("revision").get<long long>();
      if (s->id.size() > 1 && s->id[0] == 's') next_id_ = std::max(next_id_, std::stoi(s->id.substr(1)) + 1);
      sessions_[s->id] = s;
    } catch (const std::exception&) {
      continue;
    }
  }
}

Response Service::handle(const std::string& method, const std::string& path, const std::string& body) {
  try {
    auto parts = split_path(path);
    if (parts.size() == 1 && parts[0] == "health" && method == "GET") {
      ojson j;
      j["status"] = "ok";
      j["sessions"] = session_count();
      return reply(200, j);
    }
    if (parts.empty() || parts[0] != "sessions") fail(404, "no route " + path);

    if (parts.size() == 1) {
      if (method != "POST") fail(405, "use POST to create a session");
      auto s = std::make_shared<State>();
      s->initial = s->current = parse_instance(body);
      {
        std::lock_guard lock(mu_);
        s->id = "s" + std::to_string(next_id_++);
        sessions_[s->id] = s;
      }
      std::lock_guard lock(s->mu);
      save(*s);
      return reply(201, s->doc(true));
    }

    auto s = find(parts[1]);
    const std::string action = parts.size() > 2 ? parts[2] : "";
    if (parts.size() > 3) fail(404, "no route " + path);

    if (action.empty()) {
      if (method == "GET") {
        std::lock_guard lock(s->mu);
        return reply(200, s->doc(true));
      }
      if (method == "DELETE") {
        std::lock_guard lock(mu_);
        sessions_.erase(s->id);
        if (options_.state_dir) std::filesystem::remove(*options_.state_dir + "/" + s->id + ".json");
        return {204, ""};
      }
      fail(405, "use GET or DELETE on a session");
    }
    if (method != "POST") fail(405, "use POST for " + action);
    json req = body_json(body);

    if (action == "solve") {
      SolveOptions opt;
      opt.time_limit_s = req.value("time_limit_s", options_.default_time_limit_s);
      if (req.contains("node_limit")) opt.node_limit = req["node_limit"].get<long long>();
      if (req.contains("metric")) {
        auto m = parse_metric(req["metric"].get<std::string>());
        if (!m) fail(400, "unknown metric", "metric");
        opt.metric = *m;
      }
      if (opt.time_limit_s <= 0) fail(400, "time_limit_s must be positive", "time_limit_s");
      std::optional<Problem> problem;
      long long revision;
      {
        std::lock_guard lock(s->mu);
        if (s->solving) fail(409, "a solve is already running for session " + s->id);
        s->metric = opt.metric;
        problem.emplace(s->problem());
        revision = s->revision;
        s->solving = true;
      }
      Solved solved;
      try {
        solved = solve_problem(*problem, opt);
      } catch (...) {
        std::lock_guard lock(s->mu);
        s->solving = false;
        throw;
      }
      std::lock_guard lock(s->mu);
      s->solving = false;
      s->outcome = solved.doc;
      s->assignment = solved.outcome.assignment;
      s->stale = s->revision != revision;
      return reply_text(200, write_solution(solved.doc, problem->instance()));
    }

    std::lock_guard lock(s->mu);
    if (action == "edits") {
      Instance next = apply_patch(s->current, body);
      s->current = std::move(next);
      s->edits.push_back(req);
      ++s->revision;
      s->stale = s->outcome.has_value();
      save(*s);
      return reply(200, s->doc(true));
    }
    if (action == "background") {
      if (!req.contains("lines") || !req["lines"].is_array()) fail(400, "expected {\"lines\": [...]}", "lines");
      auto lines = req["lines"].get<std::vector<std::string>>();
      Problem base(s->current, s->metric);
      Session session;
      session.base = base.model();
      for (std::size_t i = 0; i < s->background.size(); ++i)
        session.background.push_back(parse_background(base.model(), s->background[i], static_cast<int>(i) + 1));
      std::vector<ConstraintInstance> facts;
      for (std::size_t i = 0; i < lines.size(); ++i)
        facts.push_back(parse_background(base.model(), lines[i], static_cast<int>(s->background.size() + i) + 1));
      SolveConfig cfg;
      cfg.time_limit_s = options_.default_time_limit_s;
      const auto& entry = add_background(session, facts, cfg);
      ojson a;
      a["lines"] = lines;
      a["added"] = entry.added;
      a["sat"] = entry.sat;
      a["mus"] = ojson::array();
      if (entry.mus)
        for (const auto& e : make_mus_doc(session.augmented(), *entry.mus).entries)
          a["mus"].push_back({{"label", e.label}, {"description", e.description}});
      s->background.insert(s->background.end(), lines.begin(), lines.end());
      s->analyses.push_back(a);
      ++s->revision;
      s->stale = s->outcome.has_value();
      save(*s);
      ojson out;
      out["format"] = "medsched-analysis";
      out["version"] = kFormatVersion;
      for (const auto& [k, v] : a.items()) out[k] = v;
      return reply(200, out);
    }

    SolveOptions eopt;
    eopt.time_limit_s = req.value("time_limit_s", options_.default_time_limit_s);
    eopt.metric = s->metric;
    if (action == "explain-unsat") return reply_text(200, write_mus(explain_unsat(s->problem(), eopt)));
    if (action == "explain-why" || action == "explain-contrast") {
      if (!s->assignment || s->stale) fail(409, "no current solution; solve the session first");
      if (action == "explain-why") {
        if (!req.contains("atoms") || !req["atoms"].is_array()) fail(400, "expected {\"atoms\": [...]}", "atoms");
        return reply_text(200, write_justification(explain_why(s->problem(), *s->assignment,
                                                               req["atoms"].get<std::vector<std::string>>(), eopt)));
      }
      if (!req.contains("a") || !req.contains("b")) fail(400, "expected {\"a\": atom, \"b\": atom}");
      return reply_text(200, write_contrast(explain_contrast(s->problem(), *s->assignment, req["a"].get<std::string>(),
                                                             req["b"].get<std::string>(), eopt)));
    }
    fail(404, "no route " + path);
  } catch (const HttpError& e) {
    ojson j;
    j["error"] = {{"status", e.status}, {"message", e.message}, {"where", e.where}};
    return reply(e.status, j);
  } catch (const ParseError& e) {
    ojson j;
    j["error"] = {{"status", 400}, {"message", e.what()}, {"where", e.where()}};
    return reply(400, j);
  } catch (const ExplainError& e) {
    const int status = e.code() == ExplainErrc::Timeout ? 503 : 400;
    ojson j;
    j["error"] = {{"status", status}, {"message", e.what()}, {"where", ""}};
    return reply(status, j);
  } catch (const nlohmann::json::exception& e) {
    ojson j;
    j["error"] = {{"status", 400}, {"message", std::string("bad request field: ") + e.what()}, {"where", ""}};
    return reply(400, j);
  } catch (const std::exception& e) {
    ojson j;
    j["error"] = {{"status", 500}, {"message", e.what()}, {"where", ""}};
    return reply(500, j);
  }
}

namespace {

void route(httplib::Server& server, Service& svc) {
  auto forward = [&svc](const char* method) {
    return [&svc, method](const httplib::Request& req, httplib::Response& res) {
      auto r = svc.handle(method, req.path, req.body);
      res.status = r.status;
      if (!r.body.empty()) res.set_content(r.body, "application/json");
    };
  };
  server.Get(".*", forward("GET"));
  server.Post(".*", forward("POST"));
  server.Delete(".*", forward("DELETE"));
}

}  // namespace

bool Service::listen(const std::string& host, int port) {
  http_ = std::make_unique<Http>();
  route(http_->server, *this);
  return http_->server.listen(host, port);
}

int Service::start(const std::string& host, int port) {
  http_ = std::make_unique<Http>();
  route(http_->server, *this);
  int bound = port == 0 ? http_->server.bind_to_any_port(host) : (http_->server.bind_to_port(host, port) ? port : -1);
  if (bound < 0) return -1;
  http_->thread = std::thread([this] { http_->server.listen_after_bind(); });
  http_->server.wait_until_ready();
  return bound;
}

void Service::stop() {
  if (!http_) return;
  http_->server.stop();
  if (http_->thread.joinable()) http_->thread.join();
  http_.reset();
}

}  // namespace medsched
