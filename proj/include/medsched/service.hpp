#ifndef MEDSCHED_SERVICE_HPP
#define MEDSCHED_SERVICE_HPP

// Session service behind the planner UI. Requests and responses are the
// JSON documents from io.hpp; routes and status codes are listed in
// docs/api.md.

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

namespace medsched {

struct ServiceOptions {
  /// When set, every session is saved there and reloaded on start.
  std::optional<std::string> state_dir;
  double default_time_limit_s = 60.0;
};

struct Response {
  int status = 200;
  std::string body;
};

class Service {
 public:
  explicit Service(ServiceOptions options = {});
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  /// Transport-independent entry point; the HTTP server forwards here.
  Response handle(const std::string& method, const std::string& path, const std::string& body);

  /// Serves until stop(); returns false if the address cannot be bound.
  bool listen(const std::string& host, int port);
  /// Serves on a background thread; returns the bound port (or -1).
  int start(const std::string& host = "127.0.0.1", int port = 0);
  void stop();

  std::size_t session_count() const;

 private:
  struct State;
  struct Http;
  std::shared_ptr<State> find(const std::string& id) const;
  void save(const State& s) const;
  void load_all();

  ServiceOptions options_;
  mutable std::mutex mu_;
  std::map<std::string, std::shared_ptr<State>> sessions_;
  int next_id_ = 1;
  std::unique_ptr<Http> http_;
};

}  // namespace medsched

#endif  // MEDSCHED_SERVICE_HPP
