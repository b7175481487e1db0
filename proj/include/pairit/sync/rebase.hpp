#pragma once

#include <span>

#include "pairit/core/event.hpp"

namespace pairit::sync {

// A client-issued character delta against the state at baseSeq.
struct ClientEdit {
  TextField field = TextField::Headline;
  std::size_t position = 0;
  std::string deleted;
  std::string inserted;
  std::uint64_t baseSeq = 0;
};

// Shifts `op` past one earlier server-applied edit on the same field.
// Server-earlier inserts at the same position stay in front. Throws
// StaleBeyondRebase when `op` deletes text the earlier edit already removed, or
// when the earlier insert lands strictly inside `op`'s deleted range.
void rebase_over(ClientEdit& op, const ev::TextEdit& prior);

// Rebases over every TextEdit on op.field with seq > op.baseSeq.
void rebase(ClientEdit& op, std::span<const Event> log);

}  // namespace pairit::sync
