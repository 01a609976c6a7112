#include <gtest/gtest.h>
#include <httplib.h>

#include <filesystem>
#include <fstream>
#include <thread>

#include "findrl/client.hpp"
#include "findrl/service.hpp"

using namespace findrl;

namespace {

std::shared_ptr<PolicyRegistry> registry() {
  auto r = std::make_shared<PolicyRegistry>();
  r->add("expert", expert_live_policy(), "scripted expert");
  r->add("untrained", net_policy(init_policy(3)), "random weights");
  return r;
}

std::shared_ptr<Lexicon> lexicon() {
  return std::make_shared<Lexicon>(Lexicon::load(default_data_dir() + "/lexicon.txt"));
}

std::shared_ptr<Templates> templates() {
  return std::make_shared<Templates>(Templates::load(default_data_dir() + "/templates.txt"));
}

SessionManager make_manager(std::uint64_t seed = 1, SessionOptions opts = {}) {
  return SessionManager(registry(), lexicon(), templates(), seed, opts);
}

int status_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const ServiceError& e) {
    return e.status;
  }
  return 0;
}

// Plays the cooperative client to the end; returns the final view.
json play(SessionManager& m, const std::string& id) {
  json view = m.get(id);
  CooperativeClient client(view);
  json last = view["transcript"].back();
  for (int guard = 0; guard < 100 && m.get(id)["status"] == "active"; ++guard) {
    const auto mv = client.respond(last);
    last = m.move(id, mv.utterance, mv.pointing)["reply"];
  }
  return m.get(id);
}

}  // namespace

TEST(Sessions, CreateReturnsInventoryWithoutPlacement) {
  auto m = make_manager();
  const json s = m.create("expert", std::nullopt);
  EXPECT_EQ(s["status"], "active");
  EXPECT_EQ(s["turn"], 0);
  EXPECT_EQ(s["objects"].size(), 7u);
  EXPECT_EQ(s["locations"].size(), 3u);
  EXPECT_FALSE(s.contains("placement"));
  EXPECT_EQ(s["transcript"].size(), 1u);
  EXPECT_EQ(s["transcript"][0]["text"], "What would you like me to find?");
  EXPECT_EQ(status_of([&] { m.create("nope", std::nullopt); }), 404);
  EXPECT_EQ(status_of([&] { m.get("0123"); }), 404);
}

TEST(Sessions, DistinctIdsAndIndependentWorlds) {
  auto m = make_manager();
  const json a = m.create("expert", 5);
  const json b = m.create("expert", 6);
  EXPECT_NE(a["id"], b["id"]);
  m.move(a["id"], "please find the red cup", std::nullopt);
  EXPECT_EQ(m.get(b["id"])["transcript"].size(), 1u);
  EXPECT_EQ(m.size(), 2u);
}

TEST(Sessions, FirstReplyIsLegal) {
  for (const char* policy : {"expert", "untrained"}) {
    auto m = make_manager();
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const json s = m.create(policy, seed);
      const json r = m.move(s["id"], "please find the green ball", std::nullopt)["reply"];
      const auto a = parse_hel_action(r["move"]["action"].get<std::string>());
      EXPECT_NE(a, HelActionLabel::VerifyL) << policy;
      EXPECT_NE(a, HelActionLabel::VerifyO) << policy;
      DialogueFlags after_opening;
      after_opening.ot_uttered = true;
      EXPECT_EQ(check_preconditions(after_opening, a), PreconditionResult::Ok) << policy;
    }
  }
}

TEST(Sessions, CooperativeClientSucceedsWithinFifteenTurns) {
  auto m = make_manager();
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const json s = m.create("expert", seed);
    const json v = play(m, s["id"]);
    EXPECT_EQ(v["status"], "success") << seed;
    EXPECT_LE(v["turn"].get<int>(), 15);
  }
}

TEST(Sessions, TranscriptAlternatesAndReadsAreIdempotent) {
  auto m = make_manager();
  const json s = m.create("expert", 11);
  const std::string id = s["id"];
  CooperativeClient client(s);
  json last = s["transcript"].back();
  for (int k = 1; m.get(id)["status"] == "active"; ++k) {
    const auto mv = client.respond(last);
    last = m.move(id, mv.utterance, mv.pointing)["reply"];
    const json v = m.get(id);
    ASSERT_EQ(v["transcript"].size(), static_cast<std::size_t>(2 * k + 1));
    for (std::size_t i = 0; i < v["transcript"].size(); ++i) {
      EXPECT_EQ(v["transcript"][i]["speaker"], i % 2 == 0 ? "hel" : "eld");
    }
    EXPECT_EQ(m.get(id).dump(), v.dump());
  }
}

TEST(Sessions, FinishedAndUnparsableMoves) {
  auto m = make_manager();
  const json s = m.create("expert", 2);
  const std::string id = s["id"];
  EXPECT_EQ(status_of([&] { m.move(id, "yes", std::nullopt); }), 422);
  EXPECT_EQ(status_of([&] { m.move(id, "hmm", std::nullopt); }), 422);
  EXPECT_EQ(m.get(id)["transcript"].size(), 1u);
  EXPECT_EQ(play(m, id)["status"], "success");
  EXPECT_EQ(status_of([&] { m.move(id, "please find the red cup", std::nullopt); }), 409);
}

TEST(Sessions, TurnCapEndsInFailure) {
  auto m = make_manager(1, SessionOptions{3, 0.0});
  const json s = m.create("expert", 4);
  const std::string id = s["id"];
  m.move(id, "please find the red cup", std::nullopt);
  for (int i = 0; i < 5 && m.get(id)["status"] == "active"; ++i) m.move(id, "no", std::nullopt);
  const json v = m.get(id);
  EXPECT_EQ(v["status"], "failure");
  EXPECT_EQ(v["turn"], 3);
}

TEST(Sessions, ConcurrentSessionsAreIsolated) {
  const std::vector<std::string> pool = {"please find the red cup", "the yellow ball", "look in the shelf",
                                         "yes", "no", "in the drawer", "the cabinet", "thank you"};
  const int n = 8;
  auto shared = make_manager(3);
  std::vector<std::string> ids;
  for (int i = 0; i < n; ++i) ids.push_back(shared.create("expert", 100 + i)["id"]);
  std::vector<std::vector<std::string>> scripts(n);
  std::vector<std::thread> threads;
  for (int i = 0; i < n; ++i) {
    threads.emplace_back([&, i] {
      Rng rng(derive_seed(77, "fuzz", static_cast<std::uint64_t>(i)));
      for (int k = 0; k < 40; ++k) {
        const std::string u = pool[rng.below(pool.size())];
        try {
          shared.move(ids[static_cast<std::size_t>(i)], u, std::nullopt);
          scripts[static_cast<std::size_t>(i)].push_back(u);
        } catch (const ServiceError&) {
        }
      }
    });
  }
  for (auto& t : threads) t.join();
  for (int i = 0; i < n; ++i) {
    auto solo = make_manager(3);
    const std::string id = solo.create("expert", 100 + i)["id"];
    for (const auto& u : scripts[static_cast<std::size_t>(i)]) solo.move(id, u, std::nullopt);
    json a = shared.get(ids[static_cast<std::size_t>(i)]);
    json b = solo.get(id);
    a.erase("id");
    b.erase("id");
    EXPECT_EQ(a.dump(), b.dump()) << i;
  }
}

// ---------------------------------------------------------------------------

class Http : public ::testing::Test {
 protected:
  void SetUp() override {
    static_dir_ = std::filesystem::temp_directory_path() / "findrl_static_test";
    std::filesystem::create_directories(static_dir_);
    std::ofstream(static_dir_ / "index.html") << "<html>find</html>";
    manager_ = std::make_unique<SessionManager>(registry(), lexicon(), templates(), 9, SessionOptions{});
    install_routes(server_, *manager_, static_dir_.string());
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
    client_ = std::make_unique<httplib::Client>("127.0.0.1", port_);
  }
  void TearDown() override {
    server_.stop();
    thread_.join();
    std::filesystem::remove_all(static_dir_);
  }

  json post(const std::string& path, const json& body, int expect) {
    auto r = client_->Post(path, body.dump(), "application/json");
    EXPECT_TRUE(r) << path;
    if (!r) return {};
    EXPECT_EQ(r->status, expect) << path << " " << r->body;
    return json::parse(r->body);
  }

  json get(const std::string& path, int expect) {
    auto r = client_->Get(path);
    EXPECT_TRUE(r) << path;
    if (!r) return {};
    EXPECT_EQ(r->status, expect) << path << " " << r->body;
    return json::parse(r->body);
  }

  std::filesystem::path static_dir_;
  std::unique_ptr<SessionManager> manager_;
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
  std::unique_ptr<httplib::Client> client_;
};

TEST_F(Http, HealthPoliciesAndStaticFiles) {
  EXPECT_EQ(get("/healthz", 200)["status"], "ok");
  const json p = get("/policies", 200);
  ASSERT_EQ(p["policies"].size(), 2u);
  EXPECT_EQ(p["policies"][0]["id"], "expert");
  auto r = client_->Get("/index.html");
  ASSERT_TRUE(r);
  EXPECT_EQ(r->body, "<html>find</html>");
}

TEST_F(Http, CooperativeSessionEndToEnd) {
  const json s = post("/sessions", {{"policy", "expert"}, {"seed", 21}}, 201);
  const std::string id = s["id"];
  CooperativeClient client(s);
  json last = s["transcript"].back();
  int moves = 0;
  for (; moves < 40; ++moves) {
    const auto mv = client.respond(last);
    json body = {{"utterance", mv.utterance}};
    if (mv.pointing) body["pointing"] = to_string(*mv.pointing);
    const json r = post("/sessions/" + id + "/moves", body, 200);
    last = r["reply"];
    if (r["session"]["status"] != "active") break;
  }
  const json v = get("/sessions/" + id, 200);
  EXPECT_EQ(v["status"], "success");
  EXPECT_LE(v["turn"].get<int>(), 15);
  EXPECT_EQ(v["transcript"].size(), static_cast<std::size_t>(2 * (moves + 1) + 1));
}

TEST_F(Http, ErrorsMapToStatusCodes) {
  EXPECT_TRUE(post("/sessions", {{"policy", "nope"}}, 404).contains("error"));
  const json s = post("/sessions", {{"policy", "expert"}}, 201);
  const std::string id = s["id"];
  get("/sessions/abc123", 404);
  auto r = client_->Post("/sessions/" + id + "/moves", "{not json", "application/json");
  ASSERT_TRUE(r);
  EXPECT_EQ(r->status, 400);
  post("/sessions/" + id + "/moves", json::object(), 400);
  post("/sessions/" + id + "/moves", {{"utterance", "x"}, {"pointing", "garage"}}, 400);
  post("/sessions/" + id + "/moves", {{"utterance", "hmm"}}, 422);
  const json m = post("/sessions/" + id + "/moves", {{"utterance", ""}, {"pointing", "shelf"}}, 200);
  EXPECT_EQ(m["session"]["turn"], 1);
}
