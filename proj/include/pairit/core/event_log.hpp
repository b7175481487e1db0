#pragma once

#include <filesystem>
#include <istream>
#include <ostream>
#include <span>
#include <vector>

#include "pairit/core/event.hpp"

namespace pairit {

// Append-only, server-sequenced history of one session. Prior entries are never
// modified; seq starts at 1 and has no gaps, t never decreases.
class EventLog {
 public:
  EventLog() = default;

  // Throws SequenceGap / TimeRegression.
  void append(Event e);

  std::span<const Event> events() const { return events_; }
  std::size_t size() const { return events_.size(); }
  bool empty() const { return events_.empty(); }
  std::uint64_t last_seq() const { return events_.empty() ? 0 : events_.back().seq; }
  std::int64_t last_t() const { return events_.empty() ? 0 : events_.back().t; }
  const Event& back() const { return events_.back(); }
  const Event& operator[](std::size_t i) const { return events_[i]; }

  EventLog prefix(std::size_t count) const;

  // Loads without enforcing invariants, so validate_log can report on damaged files.
  static EventLog read_unchecked(std::istream& in);
  static EventLog load(const std::filesystem::path& path);
  void write(std::ostream& out) const;
  void save(const std::filesystem::path& path) const;

 private:
  std::vector<Event> events_;
};

EventLog append_event(EventLog log, Event e);

}  // namespace pairit
