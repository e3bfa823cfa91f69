#include <filesystem>
#include <sstream>
#include <thread>
#include <unistd.h>

#include "cli.hpp"
#include "doctest.h"
#include "httplib.h"
#include "json.hpp"
#include "medsched/pipeline.hpp"
#include "medsched/service.hpp"

using namespace medsched;
using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

const std::string kFixtures = MEDSCHED_FIXTURES;

std::string fixture(const std::string& name) { return read_file(kFixtures + "/" + name); }

json body(const Response& r) { return json::parse(r.body); }

std::string create(Service& svc, const std::string& doc) {
  auto r = svc.handle("POST", "/sessions", doc);
  REQUIRE(r.status == 201);
  return body(r)["id"].get<std::string>();
}

}  // namespace

TEST_CASE("health and routing") {
  Service svc;
  auto r = svc.handle("GET", "/health", "");
  CHECK(r.status == 200);
  CHECK(body(r)["status"] == "ok");
  CHECK(svc.handle("GET", "/nowhere", "").status == 404);
  CHECK(svc.handle("GET", "/sessions/s404", "").status == 404);
  CHECK(svc.handle("POST", "/sessions/s404/solve", "").status == 404);
  CHECK(svc.handle("GET", "/sessions", "").status == 405);
}

TEST_CASE("create rejects bad documents with a field path") {
  Service svc;
  auto doc = fixture("poac_small.json");
  auto p = doc.find("\"area\": \"a1\"");
  REQUIRE(p != std::string::npos);
  doc.replace(p, 12, "\"area\": \"zz\"");
  auto r = svc.handle("POST", "/sessions", doc);
  CHECK(r.status == 400);
  CHECK(body(r)["error"]["where"].get<std::string>().rfind("instance.exams[", 0) == 0);
  CHECK(svc.handle("POST", "/sessions", "{oops").status == 400);
  CHECK(svc.session_count() == 0);
}

TEST_CASE("service solve matches CLI solve byte for byte") {
  auto dir = fs::temp_directory_path() / ("medsched-svc-" + std::to_string(::getpid()));
  fs::create_directories(dir);
  for (auto name : {"cts_small.json", "ors_small.json", "poac_small.json"}) {
    INFO(name);
    std::istringstream in;
    std::ostringstream out, err;
    auto sol_path = (dir / "sol.json").string();
    REQUIRE(cli::run({"solve", "-i", kFixtures + "/" + name, "-o", sol_path, "--time-limit", "30"}, in, out, err) == 0);

    Service svc;
    auto id = create(svc, fixture(name));
    auto r = svc.handle("POST", "/sessions/" + id + "/solve", R"({"time_limit_s": 30})");
    REQUIRE(r.status == 200);
    CHECK(r.body == read_file(sol_path));
    auto state = body(svc.handle("GET", "/sessions/" + id, ""));
    CHECK(state["outcome"]["objective"] == json::parse(r.body)["objective"]);
    CHECK_FALSE(state["stale"].get<bool>());
  }
  fs::remove_all(dir);
}

TEST_CASE("edit after solve marks the outcome stale") {
  Service svc;
  auto id = create(svc, fixture("ors_small.json"));
  REQUIRE(svc.handle("POST", "/sessions/" + id + "/solve", "").status == 200);
  auto r = svc.handle("POST", "/sessions/" + id + "/edits",
                      R"({"ops":[{"op":"modify","target":"registration","id":"r1","value":{"duration":60}}]})");
  REQUIRE(r.status == 200);
  auto state = body(svc.handle("GET", "/sessions/" + id, ""));
  CHECK(state["stale"].get<bool>());
  CHECK(state["revision"] == 1);
  CHECK(state["edits"].size() == 1);
  CHECK(svc.handle("POST", "/sessions/" + id + "/explain-why", R"({"atoms":["shift(r1)=unassigned"]})").status == 409);

  auto bad = svc.handle("POST", "/sessions/" + id + "/edits", R"({"ops":[{"op":"remove","target":"shift","id":"s99"}]})");
  CHECK(bad.status == 400);
  CHECK(body(svc.handle("GET", "/sessions/" + id, ""))["revision"] == 1);
}

TEST_CASE("what-if on the unsat ORS fixture") {
  Service svc;
  auto id = create(svc, fixture("ors_unsat.json"));
  auto r = svc.handle("POST", "/sessions/" + id + "/solve", "");
  REQUIRE(r.status == 200);
  CHECK(json::parse(r.body)["status"] == "unsat");

  r = svc.handle("POST", "/sessions/" + id + "/explain-unsat", "");
  REQUIRE(r.status == 200);
  auto mus = parse_mus(r.body);
  CHECK(mus.minimal);
  CHECK_FALSE(mus.entries.empty());
  // same MUS as the pipeline computes directly
  CHECK(mus == explain_unsat(Problem(parse_instance(fixture("ors_unsat.json")))));

  r = svc.handle("POST", "/sessions/" + id + "/edits", R"({"ops":[{"op":"remove","target":"registration","id":"r3"}]})");
  REQUIRE(r.status == 200);
  r = svc.handle("POST", "/sessions/" + id + "/solve", "");
  REQUIRE(r.status == 200);
  CHECK(json::parse(r.body)["status"] == "optimal");
  CHECK(svc.handle("POST", "/sessions/" + id + "/explain-unsat", "").status == 400);
}

TEST_CASE("explanations over a solved session") {
  Service svc;
  auto id = create(svc, fixture("ors_small.json"));
  CHECK(svc.handle("POST", "/sessions/" + id + "/explain-why", R"({"atoms":["shift(r1)=s5"]})").status == 409);
  auto sol = json::parse(svc.handle("POST", "/sessions/" + id + "/solve", "").body);
  auto shift = sol["schedule"]["assignments"][0]["shift"];
  const std::string held = "shift(r1)=" + (shift.is_null() ? std::string("unassigned") : shift.get<std::string>());
  const std::string other = shift.is_null() ? "shift(r1)=s5" : "shift(r1)=unassigned";

  auto r = svc.handle("POST", "/sessions/" + id + "/explain-why", json{{"atoms", {held}}}.dump());
  REQUIRE(r.status == 200);
  CHECK(parse_justification(r.body).nodes[0].text == held);
  CHECK(svc.handle("POST", "/sessions/" + id + "/explain-why", json{{"atoms", {other}}}.dump()).status == 400);
  CHECK(svc.handle("POST", "/sessions/" + id + "/explain-why", "{}").status == 400);

  r = svc.handle("POST", "/sessions/" + id + "/explain-contrast", json{{"a", held}, {"b", other}}.dump());
  REQUIRE(r.status == 200);
  CHECK(parse_contrast(r.body).b == other);
}

TEST_CASE("background facts re-analyse the session") {
  Service svc;
  auto id = create(svc, fixture("ors_small.json"));
  REQUIRE(svc.handle("POST", "/sessions/" + id + "/solve", "").status == 200);
  auto r = svc.handle("POST", "/sessions/" + id + "/background", R"({"lines":["keep: shift(r1)!=unassigned"]})");
  REQUIRE(r.status == 200);
  CHECK(body(r)["sat"].get<bool>());
  r = svc.handle("POST", "/sessions/" + id + "/background",
                 R"({"lines":["no5: shift(r1)!=s5", "no6: shift(r1)!=s6"]})");
  REQUIRE(r.status == 200);
  auto a = body(r);
  CHECK_FALSE(a["sat"].get<bool>());
  std::set<std::string> labels;
  for (const auto& m : a["mus"]) labels.insert(m["label"].get<std::string>());
  CHECK(labels.count("keep"));
  auto state = body(svc.handle("GET", "/sessions/" + id, ""));
  CHECK(state["stale"].get<bool>());
  CHECK(state["background"].size() == 3);
  CHECK(state["analyses"].size() == 2);
  // the session now solves with the background facts in force
  auto sol = json::parse(svc.handle("POST", "/sessions/" + id + "/solve", "").body);
  CHECK(sol["status"] == "unsat");
  CHECK(svc.handle("POST", "/sessions/" + id + "/background", R"({"lines":["keep: shift(r2)=s1"]})").status == 400);
}

TEST_CASE("a second solve on a busy session is refused") {
  Service svc;
  auto inst = generate_cts(CtsGenParams{.seed = 3, .patients = 50, .tightness = 2.5});
  auto id = create(svc, write_instance(inst));
  Response first;
  std::thread t([&] { first = svc.handle("POST", "/sessions/" + id + "/solve", R"({"time_limit_s": 2})"); });
  bool busy = false;
  for (int i = 0; i < 400 && !busy; ++i) {
    busy = body(svc.handle("GET", "/sessions/" + id, ""))["solving"].get<bool>();
    if (!busy) std::this_thread::sleep_for(std::chrono::milliseconds(5));
  }
  if (busy) CHECK(svc.handle("POST", "/sessions/" + id + "/solve", "").status == 409);
  t.join();
  CHECK(first.status == 200);
  CHECK(busy);
}

TEST_CASE("sessions persist and replay their edits") {
  auto dir = fs::temp_directory_path() / ("medsched-state-" + std::to_string(::getpid()));
  fs::remove_all(dir);
  std::string id, before;
  {
    Service svc({.state_dir = dir.string()});
    id = create(svc, fixture("poac_small.json"));
    REQUIRE(svc.handle("POST", "/sessions/" + id + "/edits",
                       R"({"ops":[{"op":"remove","target":"patient","id":"p2"}]})").status == 200);
    REQUIRE(svc.handle("POST", "/sessions/" + id + "/edits",
                       R"({"ops":[{"op":"modify","target":"capacity","field":"doctors_per_day","value":2}]})")
                .status == 200);
    before = body(svc.handle("GET", "/sessions/" + id, ""))["instance"].dump();
  }
  Service again({.state_dir = dir.string()});
  CHECK(again.session_count() == 1);
  auto state = body(again.handle("GET", "/sessions/" + id, ""));
  CHECK(state["instance"].dump() == before);
  CHECK(state["revision"] == 2);
  // replaying the history by hand gives the same instance
  Instance replay = parse_instance(state["initial"].dump());
  for (const auto& e : state["edits"]) replay = apply_patch(replay, e.dump());
  CHECK(write_instance(replay) == write_instance(parse_instance(state["instance"].dump())));
  // new ids do not collide with loaded ones
  CHECK(create(again, fixture("cts_small.json")) != id);
  CHECK(again.handle("DELETE", "/sessions/" + id, "").status == 204);
  CHECK(again.handle("GET", "/sessions/" + id, "").status == 404);
  fs::remove_all(dir);
}

TEST_CASE("HTTP round trip") {
  Service svc;
  int port = svc.start("127.0.0.1", 0);
  REQUIRE(port > 0);
  httplib::Client client("127.0.0.1", port);
  auto h = client.Get("/health");
  REQUIRE(h);
  CHECK(h->status == 200);
  auto c = client.Post("/sessions", fixture("ors_unsat.json"), "application/json");
  REQUIRE(c);
  CHECK(c->status == 201);
  auto id = json::parse(c->body)["id"].get<std::string>();
  auto s = client.Post("/sessions/" + id + "/solve", "{}", "application/json");
  REQUIRE(s);
  CHECK(json::parse(s->body)["status"] == "unsat");
  auto m = client.Post("/sessions/" + id + "/explain-unsat", "", "application/json");
  REQUIRE(m);
  CHECK(m->status == 200);
  CHECK(parse_mus(m->body).minimal);
  auto missing = client.Get("/sessions/nope");
  REQUIRE(missing);
  CHECK(missing->status == 404);
  svc.stop();
}
