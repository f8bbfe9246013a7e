#pragma once

#include <filesystem>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "emulate/core.hpp"

namespace emulate {

// Hex SHA-256 of `data`.
std::string sha256_hex(std::string_view data);

// Directory of reviewable JSON fixtures, one file per key, grouped by kind
// ("chat", "search", "pages"). Writes are serialized and atomic (temp file +
// rename); re-writing identical content is a no-op.
class FixtureStore {
 public:
  explicit FixtureStore(std::filesystem::path root);

  const std::filesystem::path& root() const noexcept { return root_; }

  // Throws Storage on I/O failure.
  void put(const std::string& kind, const std::string& key, const json& value);
  std::optional<json> get(const std::string& kind, const std::string& key) const;
  std::vector<std::string> list(const std::string& kind) const;

 private:
  std::filesystem::path path_for(const std::string& kind, const std::string& key) const;

  std::filesystem::path root_;
  mutable std::mutex mu_;
};

}  // namespace emulate
