#include "pairit/sync/blob_store.hpp"

#include <fstream>
#include <iterator>

namespace pairit::sync {

BlobStore::BlobStore(std::filesystem::path dir) : dir_(std::move(dir)) {
  std::filesystem::create_directories(*dir_);
}

void BlobStore::put(const std::string& id, const std::string& bytes) {
  if (!dir_) {
    mem_[id] = bytes;
    return;
  }
  const auto path = *dir_ / (id + ".bin");
  if (std::filesystem::exists(path)) return;
  std::ofstream out(path, std::ios::binary);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

std::optional<std::string> BlobStore::get(const std::string& id) const {
  if (!dir_) {
    auto it = mem_.find(id);
    if (it == mem_.end()) return std::nullopt;
    return it->second;
  }
  std::ifstream in(*dir_ / (id + ".bin"), std::ios::binary);
  if (!in) return std::nullopt;
  return std::string(std::istreambuf_iterator<char>(in), {});
}

bool BlobStore::contains(const std::string& id) const { return get(id).has_value(); }

}  // namespace pairit::sync
