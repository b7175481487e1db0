#include "pairit/core/event_log.hpp"

#include <fstream>
#include <string>

#include "pairit/core/error.hpp"

namespace pairit {

void EventLog::append(Event e) {
  const auto expected = last_seq() + 1;
  if (e.seq != expected) {
    throw Error(ErrorCode::SequenceGap,
                "expected seq " + std::to_string(expected) + ", got " + std::to_string(e.seq));
  }
  if (!events_.empty() && e.t < last_t()) {
    throw Error(ErrorCode::TimeRegression,
                "t " + std::to_string(e.t) + " < " + std::to_string(last_t()));
  }
  events_.push_back(std::move(e));
}

EventLog EventLog::prefix(std::size_t count) const {
  EventLog out;
  out.events_.assign(events_.begin(), events_.begin() + std::min(count, events_.size()));
  return out;
}

EventLog EventLog::read_unchecked(std::istream& in) {
  EventLog log;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    log.events_.push_back(parse_jsonl_line(line));
  }
  return log;
}

EventLog EventLog::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::MissingInputs, "cannot open " + path.string());
  return read_unchecked(in);
}

void EventLog::write(std::ostream& out) const {
  for (const auto& e : events_) out << to_jsonl_line(e) << '\n';
}

void EventLog::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  write(out);
}

EventLog append_event(EventLog log, Event e) {
  log.append(std::move(e));
  return log;
}

}  // namespace pairit
