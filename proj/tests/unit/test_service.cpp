#include <spdlog/spdlog.h>

#include <csignal>
#include <fstream>
#include <sstream>
#include <thread>

#include "doctest.h"
#include "pairit/analytics/metrics.hpp"
#include "pairit/core/error.hpp"
#include "pairit/core/replay.hpp"
#include "pairit/core/text.hpp"
#include "pairit/fieldkit/synthetic.hpp"
#include "pairit/service/analyze.hpp"
#include "pairit/service/server.hpp"
#include "pairit/service/simulate.hpp"

// after the Eigen-based headers: asio pulls in <termios.h>, whose CR1 and
// friends are macros
#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>

#include "httplib.h"

using namespace pairit;
using namespace pairit::service;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const bool quiet = [] {
  spdlog::set_level(spdlog::level::off);
  return true;
}();

template <typename F>
ErrorCode code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return ErrorCode::ClientError;
}

fs::path fresh_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("pairit-test-" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ExperimentConfig test_config(double pHumanAI, const fs::path& out) {
  ExperimentConfig c;
  c.pHumanAI = pHumanAI;
  c.outputDir = out.string();
  c.agent.mockLatencySec = 1.0;
  return c;
}

// Collects every frame sent to one participant.
struct Inbox {
  std::vector<json> frames;
  Experiment::FrameSink sink() {
    return [this](const std::string& f) { frames.push_back(json::parse(f)); };
  }
  std::vector<json> of_type(const std::string& type) const {
    std::vector<json> out;
    for (const auto& f : frames) {
      if (f.value("type", "") == type) out.push_back(f);
    }
    return out;
  }
  std::vector<json> events(const std::string& kind) const {
    std::vector<json> out;
    for (const auto& f : frames) {
      if (f.contains("event") && f["event"]["kind"] == kind) out.push_back(f["event"]);
    }
    return out;
  }
};

std::string frame(const std::string& op, json payload = json::object()) {
  return json{{"op", op}, {"payload", std::move(payload)}}.dump();
}

EventLog load_log(const fs::path& p) { return analytics::load_record(p.string()).log; }

}  // namespace

TEST_CASE("config validation names the offending field") {
  ExperimentConfig c;
  c.pHumanAI = 1.5;
  try {
    c.validate();
    FAIL("expected BadConfig");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::BadConfig);
    CHECK(std::string(e.what()).find("pHumanAI") != std::string::npos);
  }
}

TEST_CASE("join validates its body") {
  const auto dir = fresh_dir("join");
  auto config = test_config(0.0, dir);
  config.joinToken = "secret";
  SimulatedClock clock;
  Experiment ex(config, clock, make_clients(config), dir);
  CHECK(code_of([&] { ex.join(json::object()); }) == ErrorCode::BadRequest);
  CHECK(code_of([&] { ex.join({{"participantId", "p1"}, {"token", "wrong"}}); }) == ErrorCode::Unauthorized);
  CHECK(code_of([&] { ex.join({{"participantId", "p1"}}); }) == ErrorCode::Unauthorized);
  CHECK(code_of([&] { ex.join({{"participantId", "p1"}, {"token", "secret"}, {"survey", 3}}); }) ==
        ErrorCode::BadRequest);
  CHECK(ex.join({{"participantId", "p1"}, {"token", "secret"}}).status == "queued");
  CHECK(code_of([&] { ex.join({{"participantId", "p1"}, {"token", "secret"}}); }) == ErrorCode::AlreadyAssigned);
  CHECK(code_of([&] { ex.connect("nobody", [](const std::string&) {}); }) == ErrorCode::NotAssigned);
  CHECK(ex.health()["queued"] == 1);
}

TEST_CASE("human-human session over frames") {
  const auto dir = fresh_dir("hh");
  auto config = test_config(0.0, dir);
  SimulatedClock clock(5'000);
  Experiment ex(config, clock, make_clients(config), dir);
  Inbox a, b;
  ex.join({{"participantId", "alice"}, {"survey", {{"age", 30}, {"female", 1}}}});
  const auto ca = ex.connect("alice", a.sink());
  CHECK(a.frames.back()["type"] == "queued");
  ex.join({{"participantId", "bob"}});
  const auto cb = ex.connect("bob", b.sink());
  ex.step();

  const auto sid = ex.session_of("alice");
  REQUIRE(sid);
  CHECK(ex.session_of("bob") == sid);
  const auto snap = a.of_type("snapshot").back();
  CHECK(snap["status"] == "Active");
  CHECK(snap["remainingMs"] == 2'400'000);
  REQUIRE(snap["stockImages"].size() == 7);
  CHECK(snap["stockImages"][2]["ref"] == "stock:2");
  CHECK(snap["stockImages"][2]["asset"] == config.stockImageIds[2]);

  ex.handle_frame(ca, frame("editText", {{"field", "headline"}, {"position", 0}, {"inserted", "Vote"},
                                         {"baseSeq", snap["lastSeq"]}}));
  const auto mine = a.events("TextEdit");
  const auto theirs = b.events("TextEdit");
  REQUIRE(mine.size() == 1);
  REQUIRE(theirs.size() == 1);
  CHECK(mine[0]["actor"] == "you");
  CHECK(theirs[0]["actor"] == "partner");
  CHECK(theirs[0]["payload"]["inserted"] == "Vote");

  ex.handle_frame(cb, frame("chat", {{"text", "nice"}}));
  CHECK(a.events("ChatMessage").back()["payload"]["text"] == "nice");
  ex.handle_frame(cb, frame("selectImage", {{"image", "stock:2"}}));
  ex.handle_frame(cb, frame("selectImage", {{"image", "stock:999"}}));
  CHECK(b.of_type("error").back()["code"] == "UnknownImage");
  ex.handle_frame(ca, frame("teleport"));
  CHECK(a.of_type("error").back()["code"] == "BadRequest");
  ex.handle_frame(ca, "not json");
  CHECK(a.of_type("error").back()["code"] == "BadRequest");

  // a submission in a human-human team waits for the partner's confirmation
  ex.handle_frame(ca, frame("submit"));
  CHECK(ex.log_jsonl(*sid)->find("SubmissionFinalized") == std::string::npos);
  ex.handle_frame(cb, frame("submit"));
  CHECK(ex.log_jsonl(*sid)->find("SubmissionFinalized") != std::string::npos);

  clock.advance(2'400'000);
  ex.step();
  CHECK(a.events("SessionStatus").back()["payload"]["status"] == "Completed");
  ex.handle_frame(ca, frame("survey", {{"item", "partner_is_ai"}, {"value", 2}}));
  CHECK(a.of_type("reveal").back()["partner"] == "human");
  CHECK(b.of_type("reveal").empty());

  // the file on disk is the log the endpoint serves, and it validates
  const auto path = session_log_path(dir, *sid);
  CHECK(slurp(path) == *ex.log_jsonl(*sid));
  const auto log = load_log(path);
  CHECK(validate_log(log).ok());
  const auto st = replay(log);
  CHECK(st.submissions.size() == 1);
  CHECK(st.survey.at("alice").at("age") == 30);
  CHECK(st.survey.at("alice").at("partner_is_ai") == 2);
  CHECK(fs::exists(session_manifest_path(dir, *sid)));
  CHECK_FALSE(ex.log_jsonl("missing"));
}

TEST_CASE("human-AI frames never expose the agent") {
  const auto dir = fresh_dir("hai");
  auto config = test_config(1.0, dir);
  SimulatedClock clock;
  Experiment ex(config, clock, make_clients(config), dir);
  Inbox h;
  ex.join({{"participantId", "solo"}});
  const auto c = ex.connect("solo", h.sink());
  // human-AI matches wait out a simulated queue delay first
  for (int i = 0; i < 600 && !ex.session_of("solo"); ++i) {
    clock.advance(1'000);
    ex.step();
  }
  const auto sid = ex.session_of("solo");
  REQUIRE(sid);
  for (int i = 0; i < 120; ++i) {
    clock.advance(1'000);
    ex.step();
  }
  CHECK_FALSE(h.events("ChatMessage").empty());
  CHECK_FALSE(h.events("TextEdit").empty());
  for (const auto& f : h.frames) {
    const auto s = f.dump();
    CHECK(s.find("agent-") == std::string::npos);
    CHECK(s.find("AgentDecision") == std::string::npos);
    CHECK(s.find("CanvasSnapshot") == std::string::npos);
  }
  for (const auto& e : h.events("ChatMessage")) CHECK(e["actor"] == "partner");

  // the server log keeps the full record
  const auto log = *ex.log_jsonl(*sid);
  CHECK(log.find("AgentDecision") != std::string::npos);

  ex.handle_frame(c, frame("genImage", {{"prompt", "a ballot box at dawn"}}));
  for (int i = 0; i < 50 && h.events("ImageGenResult").empty(); ++i) {
    std::this_thread::sleep_for(std::chrono::milliseconds(5));
    ex.step();
  }
  CHECK(h.events("ImageGenResult").size() == 1);

  ex.handle_frame(c, frame("leave"));
  // the only human leaving ends a human-AI session normally
  const auto closed = h.events("SessionStatus").back()["payload"];
  CHECK(closed["status"] == "Completed");
  CHECK(closed["cause"] == "Leave:solo");
  ex.handle_frame(c, frame("survey", {{"item", "partner_is_ai"}, {"value", 6}}));
  CHECK(h.of_type("reveal").back()["partner"] == "ai");
  CHECK(validate_log(load_log(session_log_path(dir, *sid))).ok());
}

TEST_CASE("shutdown excludes active sessions and flushes their logs") {
  const auto dir = fresh_dir("shutdown");
  auto config = test_config(0.0, dir);
  SimulatedClock clock;
  Experiment ex(config, clock, make_clients(config), dir);
  ex.join({{"participantId", "a"}});
  ex.join({{"participantId", "b"}});
  ex.step();
  const auto sid = *ex.session_of("a");
  ex.shutdown();
  ex.shutdown();
  const auto st = replay(load_log(session_log_path(dir, sid)));
  CHECK(st.status == SessionStatus::Excluded);
  CHECK(st.statusCause == "ServerShutdown");
  CHECK(ex.health()["status"] == "stopping");
}

TEST_CASE("mock and http client selection") {
  ExperimentConfig c;
  CHECK(make_clients(c).chat != nullptr);
  c.clients.chat = "http";
  ::unsetenv("CHAT_API_BASE");
  CHECK(code_of([&] { make_clients(c); }) == ErrorCode::BadConfig);
}

namespace {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace websocket = beast::websocket;

struct WsClient {
  asio::io_context io;
  websocket::stream<asio::ip::tcp::socket> ws{io};
  beast::flat_buffer buffer;

  WsClient(unsigned short port, const std::string& participant) {
    asio::ip::tcp::resolver resolver(io);
    asio::connect(ws.next_layer(), resolver.resolve("127.0.0.1", std::to_string(port)));
    ws.handshake("127.0.0.1", "/ws?participant=" + participant);
  }
  json read() {
    buffer.clear();
    ws.read(buffer);
    return json::parse(beast::buffers_to_string(buffer.data()));
  }
  // Reads until a frame satisfies `pred`.
  template <typename Pred>
  json read_until(Pred&& pred) {
    for (int i = 0; i < 500; ++i) {
      auto f = read();
      if (pred(f)) return f;
    }
    FAIL("frame never arrived");
    return {};
  }
  void send(const std::string& text) { ws.write(asio::buffer(text)); }
};

}  // namespace

TEST_CASE("HTTP and WebSocket endpoints, then SIGTERM") {
  const auto dir = fresh_dir("server");
  auto config = test_config(0.0, dir);
  SystemClock clock;
  Experiment ex(config, clock, make_clients(config), dir);
  Server server(ex, "127.0.0.1", 0);
  const auto port = server.port();
  CHECK(port > 0);
  std::thread loop([&] { server.run(true); });

  httplib::Client http("127.0.0.1", port);
  auto health = http.Get("/health");
  REQUIRE(health);
  CHECK(health->status == 200);
  CHECK(json::parse(health->body)["status"] == "ok");

  CHECK(http.Post("/join", "{", "application/json")->status == 400);
  CHECK(http.Post("/join", R"({"token":"x"})", "application/json")->status == 400);
  CHECK(http.Post("/join", R"({"participantId":"w1"})", "application/json")->status == 200);
  CHECK(http.Post("/join", R"({"participantId":"w1"})", "application/json")->status == 409);
  CHECK(http.Post("/join", R"({"participantId":"w2"})", "application/json")->status == 200);
  CHECK(http.Get("/sessions/nope/log")->status == 404);
  CHECK(http.Get("/elsewhere")->status == 404);

  WsClient w1(port, "w1"), w2(port, "w2");
  auto is_snapshot = [](const json& f) { return f.value("type", "") == "snapshot"; };
  const auto snap = w1.read_until(is_snapshot);
  w2.read_until(is_snapshot);
  const std::string sid = snap["sessionId"];

  w1.send(frame("chat", {{"text", "hello over the wire"}}));
  const auto got = w2.read_until([](const json& f) { return f.contains("event"); });
  CHECK(got["event"]["kind"] == "ChatMessage");
  CHECK(got["event"]["actor"] == "partner");

  const auto log = http.Get("/sessions/" + sid + "/log");
  REQUIRE(log);
  CHECK(log->status == 200);
  CHECK(log->get_header_value("Content-Type") == "application/x-ndjson");
  std::istringstream lines(log->body);
  std::string line;
  std::size_t n = 0;
  while (std::getline(lines, line)) {
    CHECK(json::parse(line).contains("seq"));
    ++n;
  }
  CHECK(n >= 3);

  std::raise(SIGTERM);
  loop.join();
  const auto st = replay(load_log(session_log_path(dir, sid)));
  CHECK(st.status == SessionStatus::Excluded);
  CHECK(st.statusCause == "ServerShutdown");
  CHECK(st.chat.size() == 1);
}

TEST_CASE("binding a taken port fails cleanly") {
  const auto dir = fresh_dir("bind");
  auto config = test_config(0.0, dir);
  SystemClock clock;
  Experiment ex(config, clock, make_clients(config), dir);
  Server first(ex, "127.0.0.1", 0);
  CHECK(code_of([&] { Server second(ex, "127.0.0.1", first.port()); }) == ErrorCode::BindFailure);
  CHECK(code_of([&] { Server bad(ex, "not-an-address", 0); }) == ErrorCode::BindFailure);
}

TEST_CASE("scenarios") {
  CHECK(load_scenario("hh-basic").pHumanAI == 0.0);
  CHECK(load_scenario("hai-basic").pHumanAI == 1.0);
  const auto mixed = load_scenario("mixed");
  CHECK(mixed.pHumanAI == 0.5);
  CHECK(code_of([] { load_scenario("/no/such/scenario.json"); }) == ErrorCode::ScenarioError);

  const auto dir = fresh_dir("scenario");
  std::ofstream(dir / "s.json") << R"({"name":"custom","submissionEffect":3.5,"pHumanAI":0.25})";
  const auto custom = load_scenario((dir / "s.json").string());
  CHECK(custom.submissionEffect == 3.5);
  CHECK(custom.pHumanAI == 0.25);
  CHECK(custom.actionGapSec == mixed.actionGapSec);
}

TEST_CASE("simulate is byte-deterministic per seed") {
  const auto a = fresh_dir("sim-a"), b = fresh_dir("sim-b"), c = fresh_dir("sim-c");
  const ExperimentConfig config;
  const auto scenario = load_scenario("hh-basic");
  simulate(config, scenario, 4, 7, a);
  simulate(config, scenario, 4, 7, b);
  simulate(config, scenario, 4, 8, c);
  std::size_t files = 0;
  for (const auto& e : fs::recursive_directory_iterator(a)) {
    if (!e.is_regular_file()) continue;
    const auto rel = fs::relative(e.path(), a);
    CHECK_MESSAGE(slurp(e.path()) == slurp(b / rel), rel.string());
    ++files;
  }
  CHECK(files == 4 * 2 + 2);
  CHECK(slurp(a / "sessions/sim-00001.jsonl") != slurp(c / "sessions/sim-00001.jsonl"));
  const auto run = json::parse(slurp(a / "run.json"));
  CHECK(run["seed"] == 7);
  CHECK(run["configHash"] == config.hash());
  CHECK(run["codeVersion"] == kCodeVersion);
}

TEST_CASE("simulated logs validate and delegation matches the script's truth") {
  const auto dir = fresh_dir("sim-truth");
  ExperimentConfig config;
  simulate(config, load_scenario("mixed"), 16, 3, dir);
  const auto truth = json::parse(slurp(dir / "truth.json"));
  std::size_t hai = 0, hh = 0, jumps = 0, correct = 0;
  for (const auto& rec : load_run(dir)) {
    CHECK(validate_log(rec.log).ok());
    const auto& expected = truth.at(rec.sessionId);
    const auto labels = analytics::character_contribution(rec);
    for (const auto& [actor, chars] : expected.items()) {
      const std::size_t got = labels.count(actor) ? labels.at(actor) : 0;
      CHECK_MESSAGE(got == chars.get<std::size_t>(), actor);
    }
    if (rec.arm == Arm::HumanAI) {
      ++hai;
      // every edit the jump rule hands to the agent really is the agent's
      for (const auto& e : rec.log.events()) {
        const auto* te = e.as<ev::TextEdit>();
        if (!te || char_count(te->inserted) <= 10) continue;
        ++jumps;
        correct += e.actor.rfind("agent-", 0) == 0;
      }
    } else {
      ++hh;
    }
  }
  CHECK(hai > 0);
  CHECK(hh > 0);
  CHECK(jumps > 0);
  CHECK(correct == jumps);
}

TEST_CASE("analyze: missing inputs, stages and byte-identical reruns") {
  const auto empty = fresh_dir("an-empty");
  CHECK(code_of([&] { analyze(empty, Stage::Metrics); }) == ErrorCode::MissingInputs);
  CHECK(code_of([&] { analyze(empty, Stage::Field); }) == ErrorCode::MissingInputs);
  CHECK(code_of([] { stage_from_string("everything"); }) == ErrorCode::BadRequest);

  const auto dir = fresh_dir("an-run");
  simulate(ExperimentConfig{}, load_scenario("mixed"), 12, 11, dir);
  const auto metrics = analyze(dir, Stage::Metrics);
  const auto models = analyze(dir, Stage::Models);
  std::map<fs::path, std::string> first;
  for (const auto& p : metrics) first[p] = slurp(p);
  for (const auto& p : models) first[p] = slurp(p);
  analyze(dir, Stage::Metrics);
  analyze(dir, Stage::Models);
  for (const auto& [p, bytes] : first) CHECK_MESSAGE(slurp(p) == bytes, p.string());

  const auto table = stats::DataTable::load_csv((dir / "analysis/user_table.csv").string());
  CHECK(table.rows() > 12);
  CHECK(table.has("age"));
  CHECK(slurp(dir / "analysis/arm_effects.txt").find("Submissions (1)") != std::string::npos);
}

TEST_CASE("arm-effect model on simulated teams recovers the planned submission effect") {
  const auto dir = fresh_dir("an-effect");
  auto scenario = load_scenario("mixed");
  scenario.submissionEffect = 2.0;
  scenario.dropoutRate = 0.0;
  simulate(ExperimentConfig{}, scenario, 120, 19, dir);
  const auto t = user_table(compute_metrics(load_run(dir)));
  const auto f = stats::fit_arm_effect(t, "productivity", false);
  CHECK(std::abs(f.coef_of("hai") - 2.0) < 3 * f.se_of("hai"));
  CHECK(f.p_of("hai") < 0.001);
}

TEST_CASE("field stage reads the synthetic field run") {
  const auto dir = fresh_dir("an-field");
  fieldkit::synthesize_field_data(dir / "field", 5);
  const auto files = analyze(dir, Stage::Field);
  REQUIRE(files.size() == 2);
  const auto rows = stats::DataTable::load_csv(files[0].string());
  CHECK(rows.rows() == 2000);
  const auto text = slurp(files[1]);
  CHECK(text.find("CTR (%)") != std::string::npos);
  CHECK(text.find("CPC ($)") != std::string::npos);
}
