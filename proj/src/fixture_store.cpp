#include "emulate/fixture_store.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <sstream>

#include <openssl/sha.h>

namespace emulate {

namespace fs = std::filesystem;

std::string sha256_hex(std::string_view data) {
  std::array<unsigned char, SHA256_DIGEST_LENGTH> digest{};
  SHA256(reinterpret_cast<const unsigned char*>(data.data()), data.size(), digest.data());
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(digest.size() * 2);
  for (unsigned char b : digest) {
    out += kHex[b >> 4];
    out += kHex[b & 0x0F];
  }
  return out;
}

FixtureStore::FixtureStore(fs::path root) : root_(std::move(root)) {}

fs::path FixtureStore::path_for(const std::string& kind, const std::string& key) const {
  return root_ / kind / (key + ".json");
}

void FixtureStore::put(const std::string& kind, const std::string& key, const json& value) {
  const std::string text = value.dump(2) + "\n";
  const auto path = path_for(kind, key);
  std::lock_guard lock(mu_);
  std::error_code ec;
  fs::create_directories(path.parent_path(), ec);
  if (ec) throw Error(ErrorCode::Storage, "cannot create " + path.parent_path().string() + ": " + ec.message());

  if (fs::exists(path)) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream existing;
    existing << in.rdbuf();
    if (existing.str() == text) return;
  }

  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::Storage, "cannot write " + tmp.string());
    out << text;
    if (!out) throw Error(ErrorCode::Storage, "short write to " + tmp.string());
  }
  fs::rename(tmp, path, ec);
  if (ec) throw Error(ErrorCode::Storage, "cannot move fixture into place: " + ec.message());
}

std::optional<json> FixtureStore::get(const std::string& kind, const std::string& key) const {
  const auto path = path_for(kind, key);
  std::lock_guard lock(mu_);
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Storage, "corrupt fixture " + path.string() + ": " + e.what());
  }
}

std::vector<std::string> FixtureStore::list(const std::string& kind) const {
  std::vector<std::string> keys;
  std::lock_guard lock(mu_);
  std::error_code ec;
  for (const auto& entry : fs::directory_iterator(root_ / kind, ec)) {
    if (entry.path().extension() == ".json") keys.push_back(entry.path().stem().string());
  }
  std::sort(keys.begin(), keys.end());
  return keys;
}

}  // namespace emulate
