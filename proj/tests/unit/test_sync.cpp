#include "doctest.h"
#include "pairit/core/error.hpp"
#include "support/fuzz_session.hpp"

using namespace pairit;
using namespace pairit::sync;

namespace {

SessionManifest hh() {
  SessionManifest m;
  m.id = "s-hh";
  m.arm = Arm::HumanHuman;
  m.members = {{"a", Role::Human}, {"b", Role::Human}};
  return m;
}

SessionManifest hai() {
  SessionManifest m;
  m.id = "s-hai";
  m.arm = Arm::HumanAI;
  m.members = {{"h", Role::Human}, {"bot", Role::Agent}};
  return m;
}

ClientEdit insert(TextField f, std::size_t pos, std::string text, std::uint64_t base) {
  return ClientEdit{f, pos, "", std::move(text), base};
}

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

}  // namespace

TEST_CASE("apply_text_edit basics") {
  SimulatedClock clock;
  Session s(hh(), clock);
  s.apply_text_edit("a", insert(TextField::Headline, 0, "Donate", s.log().last_seq()));
  CHECK(s.state().draft.headline == "Donate");

  Session t(hh(), clock);
  t.apply_text_edit("a", insert(TextField::Headline, 0, "ab", t.log().last_seq()));
  CHECK(code_of([&] {
          t.apply_text_edit("b", ClientEdit{TextField::Headline, 0, "abc", "", t.log().last_seq()});
        }) == ErrorCode::StaleBeyondRebase);
  CHECK(t.log().size() == 3);
}

TEST_CASE("concurrent inserts at the same position converge in server order") {
  SimulatedClock clock;
  Session s(hh(), clock);
  const auto base = s.log().last_seq();
  StateMachine replica_a, replica_b;
  s.subscribe([&](const Event& e) { replica_a.apply(e); });
  s.subscribe([&](const Event& e) { replica_b.apply(e); });
  for (const auto& e : s.log().events()) {
    replica_a.apply(e);
    replica_b.apply(e);
  }
  s.apply_text_edit("a", insert(TextField::Headline, 0, "X", base));
  s.apply_text_edit("b", insert(TextField::Headline, 0, "Y", base));
  CHECK(s.state().draft.headline == "XY");
  CHECK(replica_a.state().draft.headline == "XY");
  CHECK(replica_a.state() == replica_b.state());
}

TEST_CASE("rebase shifts past concurrent edits") {
  SimulatedClock clock;
  Session s(hh(), clock);
  s.apply_text_edit("a", insert(TextField::PrimaryText, 0, "hello world", s.log().last_seq()));
  const auto base = s.log().last_seq();
  // a deletes "hello " while b, not having seen it, replaces "world"
  s.apply_text_edit("a", ClientEdit{TextField::PrimaryText, 0, "hello ", "", base});
  s.apply_text_edit("b", ClientEdit{TextField::PrimaryText, 6, "world", "there", base});
  CHECK(s.state().draft.primaryText == "there");
  // b now edits inside text that a already deleted
  const auto base2 = s.log().last_seq();
  s.apply_text_edit("a", ClientEdit{TextField::PrimaryText, 0, "there", "", base2});
  CHECK(code_of([&] {
          s.apply_text_edit("b", ClientEdit{TextField::PrimaryText, 1, "he", "", base2});
        }) == ErrorCode::StaleBeyondRebase);
}

TEST_CASE("select_image") {
  SimulatedClock clock;
  Session s(hh(), clock);
  s.select_image("a", StockImage{3});
  CHECK(s.state().draft.image == ImageSelection{StockImage{3}});
  CHECK(code_of([&] { s.select_image("a", GeneratedImage{"g1"}); }) == ErrorCode::UnknownImage);
  CHECK(code_of([&] { s.select_image("a", StockImage{7}); }) == ErrorCode::UnknownImage);

  Session r(hh(), clock);
  r.select_image("b", StockImage{1});
  r.select_image("b", StockImage{5});
  const auto st = replay(r.log());
  CHECK(st.draft.image == ImageSelection{StockImage{5}});
  CHECK(st.counts.at("b").imageEdits == 2);
}

TEST_CASE("image generation round trips") {
  SimulatedClock clock;
  MockImageClient images;
  BlobStore blobs;
  Session s(hh(), clock, {}, &images, &blobs);
  const auto [req, res] = s.request_image_generation("a", "sunrise over capitol");
  CHECK(req.kind() == "ImageGenRequest");
  CHECK(res.kind() == "ImageGenResult");
  CHECK(res.seq == req.seq + 1);
  const auto id = res.as<ev::ImageGenResult>()->imageId;
  CHECK(s.state().has_generated(id));
  CHECK(blobs.contains(id));

  const auto before = s.log().size();
  CHECK(code_of([&] { s.request_image_generation("a", "   "); }) == ErrorCode::EmptyPrompt);
  CHECK(s.log().size() == before);

  // three concurrent requests resolved out of order
  std::vector<std::string> ids;
  for (int i = 0; i < 3; ++i) ids.push_back(s.begin_image_generation("b", "p" + std::to_string(i)));
  for (int i = 2; i >= 0; --i) s.finish_image_generation(ids[i], images.generate("p" + std::to_string(i)));
  std::map<std::string, std::string> prompt_of, image_of;
  for (const auto& e : s.log().events()) {
    if (const auto* r = e.as<ev::ImageGenRequest>()) prompt_of[r->requestId] = r->prompt;
    if (const auto* r = e.as<ev::ImageGenResult>()) image_of[r->requestId] = r->imageId;
  }
  for (const auto& rid : ids) CHECK(image_of.at(rid) == images.generate(prompt_of.at(rid)).id);

  images.set_available(false);
  const auto [r2, failed] = s.request_image_generation("a", "offline");
  CHECK(failed.kind() == "ImageGenFailed");
}

TEST_CASE("submit_ad lifecycle") {
  SimulatedClock clock;
  SUBCASE("human-AI finalizes immediately and clears the canvas") {
    Session s(hai(), clock);
    s.apply_text_edit("h", insert(TextField::Headline, 0, "Read the report", s.log().last_seq()));
    s.select_image("h", StockImage{1});
    auto out = s.submit_ad("h");
    REQUIRE(std::holds_alternative<Submission>(out));
    CHECK(std::get<Submission>(out).ad.headline == "Read the report");
    CHECK(s.state().draft.empty());
    CHECK(code_of([&] { s.submit_ad("bot"); }) == ErrorCode::AgentMayNotSubmit);
  }
  SUBCASE("human-human needs both, edits cancel") {
    Session s(hh(), clock);
    s.apply_text_edit("a", insert(TextField::Headline, 0, "Hi", s.log().last_seq()));
    CHECK(std::holds_alternative<PendingSubmission>(s.submit_ad("a")));
    s.apply_text_edit("b", insert(TextField::Headline, 2, "!", s.log().last_seq()));
    CHECK_FALSE(s.pending().has_value());
    CHECK(s.state().submissions.empty());
    s.submit_ad("a");
    auto out = s.submit_ad("b");
    REQUIRE(std::holds_alternative<Submission>(out));
    CHECK(s.state().draft.empty());
    CHECK(validate_log(s.log()).ok());
  }
  SUBCASE("closed session") {
    Session s(hh(), clock);
    s.close(SessionStatus::Excluded, "Leave:b");
    CHECK(code_of([&] { s.submit_ad("a"); }) == ErrorCode::SessionNotActive);
  }
}

TEST_CASE("typing indicator") {
  SimulatedClock clock;
  Session s(hai(), clock, SessionOptions{2400, 4.0});
  bool partner_sees = false;
  s.subscribe([&](const Event& e) {
    if (const auto* t = e.as<ev::TypingIndicator>(); t && e.actor == "bot") partner_sees = t->on;
  });
  s.set_typing("bot", true);
  CHECK(partner_sees);
  CHECK(s.next_timer_ms() == 4000);
  clock.advance(3999);
  s.poll();
  CHECK(partner_sees);
  clock.advance(1);
  s.poll();
  CHECK_FALSE(partner_sees);
  CHECK(s.log().back().t == 4000);
}

TEST_CASE("session duration ends the session") {
  SimulatedClock clock;
  Session s(hh(), clock, SessionOptions{60, 4});
  clock.advance(60'000);
  s.poll();
  CHECK(s.state().status == SessionStatus::Completed);
  CHECK(s.log().back().kind() == "SessionStatus");
  CHECK_THROWS_AS(s.chat("a", "late"), Error);
  s.survey_answer("a", "believe_partner_ai", 3);
  CHECK(validate_log(s.log()).ok());
}

TEST_CASE("broadcast order equals seq order with re-entrant listeners") {
  SimulatedClock clock;
  Session s(hai(), clock);
  std::vector<std::uint64_t> seen_first, seen_second;
  s.subscribe([&](const Event& e) {
    seen_first.push_back(e.seq);
    if (e.kind() == "ImageSelect") s.record("bot", ev::CanvasSnapshot{"snap", "stock:2"});
  });
  s.subscribe([&](const Event& e) { seen_second.push_back(e.seq); });
  s.select_image("h", StockImage{2});
  s.chat("h", "hi");
  CHECK(seen_first == seen_second);
  CHECK(std::is_sorted(seen_first.begin(), seen_first.end()));
  CHECK(seen_first.size() == 3);
}

TEST_CASE("property: fuzzed two-client sessions converge") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto stats = pairit::testing::fuzz_two_client_session(seed, 200);
    CHECK(stats.divergences == 0);
    CHECK(stats.findings == 0);
    CHECK(stats.untyped == 0);
    CHECK(stats.accepted > 100);
  }
}
