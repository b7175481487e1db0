#include "pairit/sync/rebase.hpp"

#include "pairit/core/error.hpp"
#include "pairit/core/text.hpp"

namespace pairit::sync {

void rebase_over(ClientEdit& op, const ev::TextEdit& prior) {
  if (prior.field != op.field) return;
  const std::size_t a = prior.position;
  const std::size_t dl = char_count(prior.deleted);
  const std::size_t il = char_count(prior.inserted);
  const std::size_t len = char_count(op.deleted);
  std::size_t s = op.position;

  if (dl > 0) {
    const std::size_t e = s + len;
    if (e <= a) {
      // entirely before the removed range
    } else if (s >= a + dl) {
      s -= dl;
    } else if (len == 0) {
      s = a;  // insertion point was inside removed text
    } else {
      throw Error(ErrorCode::StaleBeyondRebase, "edit overlaps concurrently deleted text");
    }
  }
  if (il > 0) {
    if (s >= a) {
      s += il;
    } else if (s + len > a) {
      throw Error(ErrorCode::StaleBeyondRebase, "concurrent insert inside deleted range");
    }
  }
  op.position = s;
}

void rebase(ClientEdit& op, std::span<const Event> log) {
  for (const auto& e : log) {
    if (e.seq <= op.baseSeq) continue;
    if (const auto* te = e.as<ev::TextEdit>()) rebase_over(op, *te);
  }
}

}  // namespace pairit::sync
