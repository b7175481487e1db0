#include "pairit/service/simulate.hpp"

#include <cmath>
#include <fstream>
#include <queue>

#include "pairit/agent/mock_agent.hpp"
#include "pairit/core/error.hpp"
#include "pairit/core/text.hpp"
#include "pairit/service/experiment.hpp"
#include "pairit/sync/session.hpp"

namespace pairit::service {

namespace {

const char* const kWords[] = {"budget", "report", "tax",    "read",  "free",  "your",  "money",
                              "facts",  "clear",  "simple", "today", "learn", "where", "goes"};
const char* const kMessages[] = {"hi!",
                                 "what do you think of this headline?",
                                 "maybe a different image",
                                 "let's keep it short",
                                 "nice, I like that",
                                 "should we submit this one?",
                                 "how about something about taxes",
                                 "good idea"};

enum class Kind { Act, Submit, Confirm, Leave };

struct Item {
  std::int64_t t;
  std::uint64_t order;  // tie-break, keeps the queue deterministic
  Kind kind;
  std::string actor;
  bool operator>(const Item& o) const { return t != o.t ? t > o.t : order > o.order; }
};

template <typename T, std::size_t N>
const T& pick(const T (&items)[N], Rng& rng) {
  return items[rng.index(N)];
}

std::int64_t exp_gap_ms(double meanSec, Rng& rng) {
  const double u = rng.uniform01();
  return std::max<std::int64_t>(200, static_cast<std::int64_t>(-std::log(1.0 - u) * meanSec * 1000.0));
}

TextField random_copy_field(Rng& rng) {
  static const TextField fields[] = {TextField::Headline, TextField::PrimaryText, TextField::Description};
  return fields[rng.index(3)];
}

class SessionScript {
 public:
  SessionScript(const ExperimentConfig& config, const Scenario& scenario, sync::Session& session,
                std::vector<std::string> humans, bool hai, Rng& rng)
      : config_(config), scenario_(scenario), session_(session), humans_(std::move(humans)), hai_(hai), rng_(rng) {
    const auto duration = session_.duration_ms();
    const double mean = scenario_.baseSubmissions + (hai_ ? scenario_.submissionEffect : 0.0);
    const auto k = std::max<long>(0, std::lround(mean + scenario_.submissionSd * rng_.normal()));
    for (long i = 1; i <= k; ++i) {
      const double slot = static_cast<double>(duration) / static_cast<double>(k + 1);
      const auto t = static_cast<std::int64_t>(slot * static_cast<double>(i) + rng_.uniform(-0.3, 0.3) * slot);
      push(std::clamp<std::int64_t>(t, 1000, duration - 1000), Kind::Submit, humans_[rng_.index(humans_.size())]);
    }
    for (const auto& h : humans_) push(exp_gap_ms(scenario_.actionGapSec, rng_), Kind::Act, h);
    if (!hai_ && humans_.size() == 2 && rng_.bernoulli(scenario_.dropoutRate)) {
      push(static_cast<std::int64_t>(rng_.uniform(0.1, 0.9) * static_cast<double>(duration)), Kind::Leave,
           humans_[rng_.index(2)]);
    }
  }

  std::optional<std::int64_t> next_ms() const {
    if (queue_.empty()) return std::nullopt;
    return session_.start_ms() + queue_.top().t;
  }

  void run_due(std::int64_t now) {
    while (!queue_.empty() && session_.active() && session_.start_ms() + queue_.top().t <= now) {
      const Item item = queue_.top();
      queue_.pop();
      try {
        execute(item);
      } catch (const Error&) {
        // a scripted step that the session refuses is simply skipped
      }
    }
  }

 private:
  void push(std::int64_t t, Kind kind, const std::string& actor) { queue_.push({t, order_++, kind, actor}); }

  std::int64_t elapsed() const { return session_.elapsed_ms(); }

  void type_burst(const std::string& actor, TextField f) {
    const auto& text = session_.state().draft.field(f);
    std::string word = pick(kWords, rng_);
    word = text.empty() ? word : " " + word;
    const std::size_t pos = text.empty() ? 0 : (rng_.bernoulli(0.7) ? text.size() : rng_.index(text.size() + 1));
    session_.apply_text_edit(actor, sync::ClientEdit{f, pos, "", word, session_.log().last_seq()});
  }

  void act(const std::string& actor) {
    const double chat = 0.25 + (hai_ ? scenario_.messageEffect : 0.0);
    const double u = rng_.uniform01();
    if (u < chat || pending_) {
      session_.chat(actor, pick(kMessages, rng_));
      return;
    }
    const double v = (u - chat) / (1.0 - chat);
    if (v < 0.6) {
      type_burst(actor, random_copy_field(rng_));
    } else if (v < 0.75) {
      const auto f = random_copy_field(rng_);
      const auto& text = session_.state().draft.field(f);
      if (text.empty()) return type_burst(actor, f);
      const std::size_t n = 1 + rng_.index(std::min<std::size_t>(5, text.size()));
      const std::size_t pos = rng_.index(text.size() - n + 1);
      session_.apply_text_edit(actor, sync::ClientEdit{f, pos, text.substr(pos, n), "", session_.log().last_seq()});
    } else if (v < 0.93) {
      session_.select_image(actor, StockImage{static_cast<int>(rng_.index(kStockImageCount))});
    } else {
      std::string prompt = std::string("poster about the ") + pick(kWords, rng_) + " " + pick(kWords, rng_);
      session_.set_typing(actor, false);
      session_.request_image_generation(actor, prompt);
    }
  }

  void execute(const Item& item) {
    switch (item.kind) {
      case Kind::Act:
        push(elapsed() + exp_gap_ms(scenario_.actionGapSec, rng_), Kind::Act, item.actor);
        act(item.actor);
        break;
      case Kind::Submit: {
        if (pending_) return;
        if (session_.state().draft.copy_empty()) type_burst(item.actor, TextField::Headline);
        const auto out = session_.submit_ad(item.actor);
        if (std::holds_alternative<sync::PendingSubmission>(out)) {
          pending_ = true;
          const auto& partner = humans_[0] == item.actor ? humans_[1] : humans_[0];
          push(elapsed() + 1000 + static_cast<std::int64_t>(rng_.index(3000)), Kind::Confirm, partner);
        }
        break;
      }
      case Kind::Confirm:
        pending_ = false;
        session_.submit_ad(item.actor);
        break;
      case Kind::Leave:
        session_.leave(item.actor);
        session_.close(SessionStatus::Excluded, "Leave:" + item.actor);
        break;
    }
  }

  const ExperimentConfig& config_;
  const Scenario& scenario_;
  sync::Session& session_;
  std::vector<std::string> humans_;
  bool hai_;
  Rng& rng_;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> queue_;
  std::uint64_t order_ = 0;
  bool pending_ = false;
};

void post_surveys(sync::Session& s, const std::vector<std::string>& humans, bool hai, Rng& rng) {
  for (const auto& h : humans) {
    const bool says_ai = hai ? rng.bernoulli(0.8) : rng.bernoulli(0.3);
    const int score = says_ai ? 4 + static_cast<int>(rng.index(4)) : 1 + static_cast<int>(rng.index(3));
    s.survey_answer(h, "partner_is_ai", score);
  }
}

void pre_surveys(sync::Session& s, const std::vector<std::string>& humans, Rng& rng) {
  for (const auto& h : humans) {
    s.survey_answer(h, "age", 18 + static_cast<int>(rng.index(53)));
    s.survey_answer(h, "female", rng.bernoulli(0.5) ? 1 : 0);
    for (const char* trait : {"openness", "conscientiousness", "extraversion", "agreeableness", "neuroticism"}) {
      s.survey_answer(h, trait, 1 + static_cast<int>(rng.index(7)));
    }
  }
}

}  // namespace

nlohmann::json Scenario::to_json() const {
  return {{"name", name},
          {"pHumanAI", pHumanAI},
          {"baseSubmissions", baseSubmissions},
          {"submissionEffect", submissionEffect},
          {"submissionSd", submissionSd},
          {"messageEffect", messageEffect},
          {"actionGapSec", actionGapSec},
          {"dropoutRate", dropoutRate},
          {"agentLatencySec", agentLatencySec}};
}

Scenario load_scenario(const std::string& nameOrPath) {
  Scenario s;
  s.name = "mixed";
  s.submissionEffect = 2.0;
  s.messageEffect = 0.1;
  s.dropoutRate = 0.05;
  if (nameOrPath == "mixed") return s;
  if (nameOrPath == "hh-basic") {
    s.name = nameOrPath;
    s.pHumanAI = 0.0;
    s.dropoutRate = 0.0;
    return s;
  }
  if (nameOrPath == "hai-basic") {
    s.name = nameOrPath;
    s.pHumanAI = 1.0;
    s.dropoutRate = 0.0;
    return s;
  }
  std::ifstream in(nameOrPath);
  if (!in) throw Error(ErrorCode::ScenarioError, "unknown scenario '" + nameOrPath + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
    s.name = j.value("name", std::filesystem::path(nameOrPath).stem().string());
    s.pHumanAI = j.value("pHumanAI", s.pHumanAI);
    s.baseSubmissions = j.value("baseSubmissions", s.baseSubmissions);
    s.submissionEffect = j.value("submissionEffect", s.submissionEffect);
    s.submissionSd = j.value("submissionSd", s.submissionSd);
    s.messageEffect = j.value("messageEffect", s.messageEffect);
    s.actionGapSec = j.value("actionGapSec", s.actionGapSec);
    s.dropoutRate = j.value("dropoutRate", s.dropoutRate);
    s.agentLatencySec = j.value("agentLatencySec", s.agentLatencySec);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ScenarioError, nameOrPath + ": " + e.what());
  }
  if (!(s.pHumanAI >= 0 && s.pHumanAI <= 1)) throw Error(ErrorCode::ScenarioError, "pHumanAI must be in [0, 1]");
  if (!(s.actionGapSec > 0)) throw Error(ErrorCode::ScenarioError, "actionGapSec must be > 0");
  if (!(s.messageEffect >= 0 && s.messageEffect < 0.75)) {
    throw Error(ErrorCode::ScenarioError, "messageEffect must be in [0, 0.75)");
  }
  if (!(s.dropoutRate >= 0 && s.dropoutRate <= 1)) throw Error(ErrorCode::ScenarioError, "dropoutRate must be in [0, 1]");
  return s;
}

SimulatedSession simulate_session(const ExperimentConfig& config, const Scenario& scenario,
                                  const std::string& sessionId, Arm arm, Rng rng) {
  const bool hai = arm == Arm::HumanAI;
  SimulatedSession out;
  out.manifest.id = sessionId;
  out.manifest.arm = arm;
  std::vector<std::string> humans = {sessionId + "-h1"};
  if (!hai) humans.push_back(sessionId + "-h2");
  for (const auto& h : humans) out.manifest.members.push_back({h, Role::Human});
  const std::string agent_id = "agent-" + sessionId;
  if (hai) out.manifest.members.push_back({agent_id, Role::Agent});
  out.manifest.configHash = config.hash();
  out.manifest.durationLimitSec = config.sessionDurationSec;

  SimulatedClock clock;
  MockImageClient images;
  sync::BlobStore blobs;
  sync::Session session(out.manifest, clock, {config.sessionDurationSec, config.typingIdleSec}, &images, &blobs);
  session.subscribe([&](const Event& e) {
    if (const auto* edit = e.as<ev::TextEdit>()) out.insertedChars[e.actor] += char_count(edit->inserted);
  });
  pre_surveys(session, humans, rng);

  std::unique_ptr<agent::ScriptedAgentClient> client;
  std::unique_ptr<agent::SimulatedRunner> runner;
  std::unique_ptr<agent::AgentDriver> driver;
  if (hai) {
    client = std::make_unique<agent::ScriptedAgentClient>();
    runner = std::make_unique<agent::SimulatedRunner>(*client, seconds_to_ms(scenario.agentLatencySec),
                                                      seconds_to_ms(config.agent.timeoutSec));
    agent::AgentSettings settings{config.taskText, config.agent.features, config.agent.model,
                                  config.agent.temperature, seconds_to_ms(config.agentTickSec)};
    driver = std::make_unique<agent::AgentDriver>(session, agent_id, *runner, settings);
  }

  SessionScript script(config, scenario, session, humans, hai, rng);
  while (session.active()) {
    std::int64_t next = session.start_ms() + session.duration_ms();
    if (auto t = script.next_ms()) next = std::min(next, *t);
    if (auto t = session.next_timer_ms()) next = std::min(next, *t);
    if (driver) next = std::min(next, driver->next_wakeup_ms());
    clock.set(std::max(next, clock.now_ms()));
    session.poll();
    if (driver) driver->run_due();
    script.run_due(clock.now_ms());
  }
  if (driver) {
    driver->run_due();
    out.agentStats = driver->stats();
  }
  if (session.state().status == SessionStatus::Completed) post_surveys(session, humans, hai, rng);
  out.log = session.log();
  return out;
}

ExperimentRun simulate(const ExperimentConfig& config, const Scenario& scenario, std::size_t n,
                       std::uint64_t seed, const std::filesystem::path& outDir) {
  config.validate();
  std::filesystem::create_directories(outDir / "sessions");
  ExperimentRun run{outDir, seed, config.hash()};
  Rng master(seed);
  Rng arms = master.split(0);
  nlohmann::json truth = nlohmann::json::object();
  for (std::size_t i = 1; i <= n; ++i) {
    char id[32];
    std::snprintf(id, sizeof id, "sim-%05zu", i);
    const Arm arm = arms.bernoulli(scenario.pHumanAI) ? Arm::HumanAI : Arm::HumanHuman;
    const auto s = simulate_session(config, scenario, id, arm, master.split(i));
    std::ofstream log(session_log_path(outDir, id), std::ios::binary);
    for (const auto& e : s.log.events()) log << to_jsonl_line(e) << '\n';
    std::ofstream(session_manifest_path(outDir, id), std::ios::binary) << s.manifest.to_json().dump(2) << '\n';
    truth[id] = s.insertedChars;
    const auto status = replay(s.log).status;
    run.sessionsCompleted += status == SessionStatus::Completed;
    run.sessionsExcluded += status == SessionStatus::Excluded;
  }
  std::ofstream(outDir / "truth.json", std::ios::binary) << truth.dump(2) << '\n';
  const nlohmann::json manifest = {{"configHash", run.configHash},
                                   {"codeVersion", kCodeVersion},
                                   {"seed", seed},
                                   {"scenario", scenario.to_json()},
                                   {"sessions", n},
                                   {"sessionsCompleted", run.sessionsCompleted},
                                   {"sessionsExcluded", run.sessionsExcluded},
                                   {"config", config.to_json()}};
  std::ofstream(outDir / "run.json", std::ios::binary) << manifest.dump(2) << '\n';
  return run;
}

}  // namespace pairit::service
