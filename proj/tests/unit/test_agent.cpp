#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>

#include <spdlog/spdlog.h>

#include "doctest.h"
#include "pairit/agent/driver.hpp"
#include "pairit/core/error.hpp"
#include "pairit/core/rng.hpp"
#include "pairit/core/text.hpp"
#include "support/agent_sim.hpp"

using namespace pairit;
using namespace pairit::agent;
using pairit::testing::hai_manifest;
using pairit::testing::run_agent_session;

namespace {

const bool quiet = [] {
  spdlog::set_level(spdlog::level::off);
  return true;
}();

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE_MESSAGE(in.good(), "missing " << path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string golden(const std::string& name) { return read_file(std::string(PAIRIT_GOLDEN_DIR) + "/" + name); }

AgentContext fixed_context() {
  AgentContext ctx;
  ctx.taskText = "Create an ad for the annual report.";
  ctx.features = "You are a 34 year old teacher.";
  Submission s;
  s.index = 0;
  s.submittedAt = 600'000;
  s.ad.headline = "Read the report";
  s.ad.primaryText = "Facts that matter.";
  s.ad.description = "Free and online.";
  s.ad.image = StockImage{3};
  ctx.submissionsHistory = {s};
  ctx.currentCopy.headline = "See the data";
  ctx.currentCopy.primaryText = "One report, every number.";
  ctx.currentCopy.description = "";
  ctx.currentCopy.imagePrompt = "a bar chart at sunrise";
  ctx.elapsedSeconds = 754;
  ctx.actionHistory = {{610'000, "Chat", "want to try a new headline?"},
                       {640'500, "EditText", "headline -> \"See the data\""},
                       {650'000, "Wait", "waited"}};
  ctx.reflectionHistory = {{610'000, "user_engagement: high"}, {640'500, "next_step: image"}};
  ctx.chatHistory = {{605'000, "User", "ok next one"},
                     {610'000, "Bot", "want to try a new headline?"},
                     {630'000, "User", "sure"}};
  ctx.latestCanvasSnapshot = "snapshot:abc";
  return ctx;
}

struct FailingRenderer final : CanvasRenderer {
  std::optional<RenderedCanvas> render(const AdDraft&) override { return std::nullopt; }
};

}  // namespace

TEST_CASE("embedded template matches the reference text byte for byte") {
  CHECK(prompt_template() == golden("agent_prompt_template.txt"));
  // Every section heading is present once.
  for (const char* section :
       {"<Definitions>", "<Submission history>", "<Your features>", "<Current task>", "<Current copy>",
        "<Elapsed time in seconds>", "<Bot action history>", "<Reflection history>",
        "<Current conversation>", "<Instructions>"}) {
    CHECK(prompt_template().find(section) != std::string_view::npos);
  }
}

TEST_CASE("fill_template substitutes once and never rescans values") {
  CHECK(fill_template("a ${x} b ${y} ${z}", {{"x", "${y}"}, {"y", "Y"}}) == "a ${y} b Y ${z}");
  CHECK(fill_template("${x}", {{"x", ""}}).empty());
  CHECK(fill_template("tail ${", {}) == "tail ${");
}

TEST_CASE("empty session at t=0") {
  SimulatedClock clock;
  sync::Session s(hai_manifest(), clock);
  const auto ctx = build_context(s.state(), "bot", "task", "", 0);
  CHECK(ctx.elapsedSeconds == 0);
  CHECK(ctx.actionHistory.empty());
  const auto p = build_prompt(ctx);
  CHECK(p.system.find("<Elapsed time in seconds>\n0\n</Elapsed time in seconds>") != std::string::npos);
  CHECK(p.system.find("These submission cannot be altered.\nNone\n") != std::string::npos);
  CHECK(p.system.find("${") == std::string::npos);
  CHECK_FALSE(p.image.has_value());
}

TEST_CASE("prior actions appear under the action history with t= stamps") {
  auto ctx = fixed_context();
  ctx.actionHistory.resize(2);
  const auto p = build_prompt(ctx);
  const auto start = p.system.find("<Bot action history>\n");
  const auto end = p.system.find("</Bot action history>");
  REQUIRE(start != std::string::npos);
  const auto section = p.system.substr(start, end - start);
  CHECK(section.find("t=610 Chat: want to try a new headline?") != std::string::npos);
  CHECK(section.find("t=640 EditText: headline -> \"See the data\"") != std::string::npos);
  CHECK(p.image == std::optional<std::string>("snapshot:abc"));
}

TEST_CASE("fixed context renders the golden prompt") {
  const auto p = build_prompt(fixed_context());
  const std::string path = std::string(PAIRIT_GOLDEN_DIR) + "/agent_prompt_fixed.txt";
  if (std::getenv("PAIRIT_UPDATE_GOLDEN")) {
    std::ofstream(path, std::ios::binary) << p.system;
  }
  CHECK(p.system == golden("agent_prompt_fixed.txt"));
  CHECK(build_prompt(fixed_context()).system == p.system);
  CHECK(p.user == reflection_request());
}

TEST_CASE("context is sourced from the replayed log") {
  SimulatedClock clock;
  sync::Session s(hai_manifest(), clock);
  clock.set(5'000);
  s.chat("h", "hey");
  clock.set(12'000);
  s.record("bot", ev::AgentDecision{"Chat", "hi there", "user_engagement: fine", false});
  s.chat("bot", "hi there");
  const auto ctx = build_context(s.state(), "bot", "task", "", 12'300);
  REQUIRE(ctx.chatHistory.size() == 2);
  CHECK(ctx.chatHistory[0].speaker == "User");
  CHECK(ctx.chatHistory[1].speaker == "Bot");
  CHECK(ctx.chatHistory[1].t == 12'000);
  REQUIRE(ctx.actionHistory.size() == 1);
  CHECK(ctx.actionHistory[0].kind == "Chat");
  REQUIRE(ctx.reflectionHistory.size() == 1);
  CHECK(ctx.elapsedSeconds == 12);
  // elapsed never runs behind the log
  CHECK(build_context(s.state(), "bot", "task", "", 0).elapsedSeconds == 12);
}

TEST_CASE("decoder accepts every action kind") {
  const AgentAction cases[] = {
      {act::Wait{}, ""},
      {act::Chat{"hey lol"}, "user_engagement: ok"},
      {act::EditText{TextField::Description, "Read it now."}, ""},
      {act::SelectImage{StockImage{4}}, ""},
      {act::SelectImage{GeneratedImage{"abc"}}, ""},
      {act::GenerateImage{"hands holding globe"}, ""},
  };
  for (const auto& a : cases) {
    const auto d = decode_action(encode_action(a));
    CHECK(d.ok);
    CHECK(d.action.kind == a.kind);
  }
  CHECK(decode_action(R"({"action":"SelectImage","image":"2"})").action.kind ==
        ActionKind{act::SelectImage{StockImage{2}}});
}

TEST_CASE("decoder rejects anything outside the closed set") {
  for (const char* bad : {"", "not json", "[]", "42", R"({"action":"Submit"})", R"({"action":7})",
                          R"({"action":"Chat","chat_text":"  "})", R"({"action":"EditText","field":"title","new_content":"x"})",
                          R"({"action":"SelectImage","image":"stock:9"})", R"({"action":"GenerateImage"})",
                          R"({"reflection":3,"action":"Wait"})"}) {
    const auto d = decode_action(bad);
    CHECK_MESSAGE(!d.ok, bad);
    CHECK(std::holds_alternative<act::Wait>(d.action.kind));
    CHECK_FALSE(d.error.empty());
  }
}

TEST_CASE("decoder fuzz: every outcome is a valid action or a flagged Wait") {
  Rng rng(99);
  const std::vector<nlohmann::json> atoms = {nullptr, true, 3, -1.5, "", "x", "Chat", "Wait", "EditText",
                                             "SelectImage", "GenerateImage", "headline", "stock:1",
                                             "generated:zz", nlohmann::json::array(), nlohmann::json::object()};
  const std::vector<std::string> keys = {"action", "chat_text", "field", "new_content", "image",
                                         "image_prompt", "reflection", "extra"};
  std::size_t ok = 0;
  for (int i = 0; i < 5000; ++i) {
    nlohmann::json j = nlohmann::json::object();
    const auto n = rng.index(keys.size() + 1);
    for (std::size_t k = 0; k < n; ++k) j[keys[rng.index(keys.size())]] = atoms[rng.index(atoms.size())];
    std::string text = j.dump();
    if (rng.bernoulli(0.1)) text = text.substr(0, rng.index(text.size() + 1));
    const auto d = decode_action(text);
    if (d.ok) {
      ++ok;
      std::visit(
          [](const auto& k) {
            using T = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<T, act::Chat>) CHECK_FALSE(trim(k.text).empty());
            if constexpr (std::is_same_v<T, act::GenerateImage>) CHECK_FALSE(trim(k.prompt).empty());
          },
          d.action.kind);
    } else {
      CHECK(std::holds_alternative<act::Wait>(d.action.kind));
    }
  }
  CHECK(ok > 0);
}

TEST_CASE("schema is closed and strict-compatible") {
  const auto& s = action_schema();
  CHECK(s["additionalProperties"] == false);
  CHECK(s["required"].size() == s["properties"].size());
  CHECK(s["properties"]["action"]["enum"].size() == 5);
  for (const auto& v : s["properties"]["action"]["enum"]) CHECK(v != "Submit");
}

TEST_CASE("EditText on an empty field inserts the whole text at 0") {
  const auto e = replacement_edit(TextField::Headline, "", "Support the report", 7);
  CHECK(e.position == 0);
  CHECK(e.deleted.empty());
  CHECK(char_count(e.inserted) == 18);
  CHECK(e.baseSeq == 7);
}

TEST_CASE("EditText with no shared prefix or suffix replaces the whole span") {
  const std::string old60(60, 'a');
  const std::string new58(58, 'b');
  const auto e = replacement_edit(TextField::PrimaryText, old60, new58, 1);
  CHECK(e.position == 0);
  CHECK(char_count(e.deleted) == 60);
  CHECK(char_count(e.inserted) == 58);
}

TEST_CASE("replacement diff oracle: applying the delta yields the target and the span is minimal") {
  Rng rng(5);
  const std::u32string alphabet = U"abé ";
  for (int i = 0; i < 2000; ++i) {
    auto gen = [&] {
      std::u32string s;
      const auto n = rng.index(12);
      for (std::size_t k = 0; k < n; ++k) s += alphabet[rng.index(alphabet.size())];
      return utf8_encode(s);
    };
    const auto a = gen();
    const auto b = gen();
    const auto e = replacement_edit(TextField::Headline, a, b, 0);
    const auto applied = apply_delta(a, e.position, e.deleted, e.inserted);
    REQUIRE(applied.has_value());
    CHECK(*applied == b);
    // Oracle: the kept prefix + suffix can be no longer than any common split.
    const auto ua = utf8_decode(a), ub = utf8_decode(b);
    std::size_t best = 0;
    for (std::size_t p = 0; p <= std::min(ua.size(), ub.size()); ++p) {
      if (ua.compare(0, p, ub, 0, p) != 0) break;
      for (std::size_t s = 0; p + s <= std::min(ua.size(), ub.size()); ++s) {
        if (ua.compare(ua.size() - s, s, ub, ub.size() - s, s) != 0) break;
        best = std::max(best, p + s);
      }
    }
    CHECK(ua.size() - char_count(e.deleted) == best);
  }
}

TEST_CASE("execute_action maps each action to sync-engine events") {
  SimulatedClock clock;
  MockImageClient images;
  sync::Session s(hai_manifest(), clock, {}, &images);
  CHECK(execute_action({act::Wait{}, ""}, s, "bot").empty());

  auto chat = execute_action({act::Chat{"hi"}, ""}, s, "bot");
  REQUIRE(chat.size() == 2);
  CHECK(chat[0].kind() == "TypingIndicator");
  CHECK(chat[1].kind() == "ChatMessage");

  auto edit = execute_action({act::EditText{TextField::Headline, "Support the report"}, ""}, s, "bot");
  REQUIRE(edit.size() == 1);
  CHECK(edit[0].as<ev::TextEdit>()->inserted == "Support the report");
  CHECK(execute_action({act::EditText{TextField::Headline, "Support the report"}, ""}, s, "bot").empty());

  auto gen = execute_action({act::GenerateImage{"hands holding globe"}, ""}, s, "bot");
  REQUIRE(gen.size() == 2);
  CHECK(gen[0].kind() == "ImageGenRequest");
  CHECK(gen[1].kind() == "ImageGenResult");

  CHECK_THROWS_AS(execute_action({act::SelectImage{GeneratedImage{"nope"}}, ""}, s, "bot"), Error);
  CHECK(validate_log(s.log()).ok());
}

TEST_CASE("canvas snapshots follow image changes") {
  SimulatedClock clock;
  MockImageClient images;
  sync::Session s(hai_manifest(), clock, {}, &images);
  ScriptedChatClient client({encode_action({act::Wait{}, ""})});
  SimulatedRunner runner(client, 0, 30'000);
  AgentDriver driver(s, "bot", runner, AgentSettings{});

  s.select_image("h", StockImage{2});
  REQUIRE(s.state().latestSnapshot.has_value());
  const auto first = *s.state().latestSnapshot;
  CHECK(first.imageRef == "stock:2");
  CHECK_FALSE(first.snapshotId.empty());
  CHECK(s.log().back().kind() == "CanvasSnapshot");

  s.request_image_generation("h", "hands holding globe");
  const auto second = *s.state().latestSnapshot;
  CHECK(second.snapshotId != first.snapshotId);
  CHECK(second.imageRef.rfind("generated:", 0) == 0);
  CHECK(driver.stats().snapshots == 2);

  // identical screen, identical id
  s.select_image("h", StockImage{2});
  CHECK(s.state().latestSnapshot->snapshotId == first.snapshotId);

  // text edits alone do not trigger a capture
  const auto before = s.log().size();
  s.apply_text_edit("h", sync::ClientEdit{TextField::Headline, 0, "", "x", s.log().last_seq()});
  CHECK(s.log().size() == before + 1);
  CHECK(validate_log(s.log()).ok());
}

TEST_CASE("render failure omits the snapshot and flags the context") {
  SimulatedClock clock;
  sync::Session s(hai_manifest(), clock);
  ScriptedChatClient client({encode_action({act::Wait{}, ""})});
  SimulatedRunner runner(client, 0, 30'000);
  FailingRenderer failing;
  AgentDriver driver(s, "bot", runner, AgentSettings{}, &failing);
  s.select_image("h", StockImage{1});
  CHECK(s.state().snapshotUnavailable);
  const auto ctx = build_context(s.state(), "bot", "", "", 0);
  CHECK(ctx.snapshotUnavailable);
  CHECK_FALSE(ctx.latestCanvasSnapshot.has_value());
}

TEST_CASE("mock chat reply becomes a chat message at the tick") {
  ScriptedChatClient client({encode_action({act::Chat{"hi"}, "user_engagement: new"})});
  SimulatedClock clock;
  sync::Session s(hai_manifest(), clock);
  SimulatedRunner runner(client, 0, 30'000);
  AgentDriver driver(s, "bot", runner, AgentSettings{"task", "", "m"});
  driver.run_due();
  CHECK(driver.stats().decisions == 1);
  REQUIRE(s.state().chat.size() == 1);
  CHECK(s.state().chat[0].text == "hi");
  CHECK(s.state().chat[0].t == 0);
  REQUIRE(client.calls() == 1);
  CHECK(client.requests()[0].schemaName == "agent_action");
  CHECK(client.requests()[0].system.find("<Current task>\ntask\n</Current task>") != std::string::npos);
  CHECK(driver.next_wakeup_ms() == 10'000);
}

TEST_CASE("25 s latency: busy ticks are skipped, one decision per 30 s") {
  ScriptedChatClient client({encode_action({act::Wait{}, ""})});
  const auto run = run_agent_session(client, 25'000);
  CHECK(run.stats.ticks == 240);
  CHECK(run.stats.decisions == 80);
  CHECK(run.stats.skippedBusy == 160);
  CHECK(run.maxInFlight == 1);
  CHECK(run.stats.discarded == 0);
  // decisions land at 25 s, 55 s, ...
  std::vector<std::int64_t> at;
  for (const auto& e : run.log.events()) {
    if (e.kind() == "AgentDecision") at.push_back(e.t);
  }
  REQUIRE(at.size() == 80);
  CHECK(at[0] == 25'000);
  CHECK(at[1] == 55'000);
  CHECK(validate_log(run.log).ok());
}

TEST_CASE("timeouts become logged Waits") {
  ScriptedChatClient client({encode_action({act::Chat{"never"}, ""})});
  const auto run = run_agent_session(client, 45'000, 30'000);
  CHECK(run.stats.timeouts == run.stats.decisions);
  CHECK(run.stats.decisions > 0);
  for (const auto& e : run.log.events()) {
    CHECK(e.kind() != "ChatMessage");
    if (e.kind() == "AgentDecision") {
      CHECK(e.as<ev::AgentDecision>()->decodeFailure);
      CHECK(e.as<ev::AgentDecision>()->action == "Wait");
    }
  }
}

TEST_CASE("the agent never submits, and ticks after the session ends are idle") {
  MockImageClient images;
  ScriptedChatClient client({encode_action({act::Chat{"what do you think of this one"}, ""}),
                             encode_action({act::EditText{TextField::Headline, "Know the facts today"}, ""}),
                             encode_action({act::SelectImage{StockImage{5}}, ""}),
                             encode_action({act::GenerateImage{"a calm sea"}, ""}), "garbage",
                             encode_action({act::Wait{}, ""})});
  Rng rng(3);
  auto human = [&](sync::Session& s) {
    if (rng.bernoulli(0.3)) s.apply_text_edit("h", {TextField::Description, 0, "", "k", s.log().last_seq()});
    if (rng.bernoulli(0.05)) s.submit_ad("h");
  };
  const auto run = run_agent_session(client, 2'000, 30'000, human, &images);
  CHECK(run.stats.ticks == 240);
  CHECK(run.stats.idleTicks >= 1);
  CHECK(run.stats.decodeFailures > 0);
  std::size_t agent_submits = 0, submissions = 0;
  for (const auto& e : run.log.events()) {
    if (e.kind() == "SubmissionFinalized") {
      ++submissions;
      if (e.actor == "bot") ++agent_submits;
    }
    if (e.kind() == "SubmitConfirm") CHECK(e.actor != "bot");
  }
  CHECK(submissions > 0);
  CHECK(agent_submits == 0);
  CHECK(validate_log(run.log).ok());
}

TEST_CASE("threaded runner delivers and times out") {
  SimulatedClock clock;
  ScriptedChatClient client({"{}"});
  ThreadedRunner runner(client, 30'000);
  runner.start(ChatRequest{}, 0);
  CHECK(runner.busy());
  std::optional<CompletionOutcome> out;
  for (int i = 0; i < 2000 && !out; ++i) {
    out = runner.take(0);
    if (!out) std::this_thread::sleep_for(std::chrono::milliseconds(1));
  }
  REQUIRE(out.has_value());
  CHECK(out->content == std::optional<std::string>("{}"));
  CHECK_FALSE(runner.busy());

  FunctionChatClient slow([](const ChatRequest&) {
    std::this_thread::sleep_for(std::chrono::milliseconds(200));
    return std::string("{}");
  });
  ThreadedRunner timed(slow, 50);
  timed.start(ChatRequest{}, 1'000);
  CHECK_FALSE(timed.take(1'010).has_value());
  const auto late = timed.take(1'050);
  REQUIRE(late.has_value());
  CHECK(late->timedOut);
  CHECK_FALSE(timed.busy());
  std::this_thread::sleep_for(std::chrono::milliseconds(250));
}
