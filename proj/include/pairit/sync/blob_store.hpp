#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>

namespace pairit::sync {

// Generated images live beside the log, keyed by id; the log stores ids only.
class BlobStore {
 public:
  BlobStore() = default;  // in-memory
  explicit BlobStore(std::filesystem::path dir);

  void put(const std::string& id, const std::string& bytes);
  std::optional<std::string> get(const std::string& id) const;
  bool contains(const std::string& id) const;

 private:
  std::optional<std::filesystem::path> dir_;
  std::map<std::string, std::string> mem_;
};

}  // namespace pairit::sync
