#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>

namespace mlexp {

/// Incremental SHA-256. Numeric updates feed a fixed little-endian byte
/// layout so digests do not depend on host endianness.
class Sha256 {
 public:
  Sha256();
  ~Sha256();
  Sha256(Sha256&&) noexcept;
  Sha256& operator=(Sha256&&) noexcept;
  Sha256(const Sha256&) = delete;
  Sha256& operator=(const Sha256&) = delete;

  Sha256& update(std::string_view bytes);
  Sha256& update_u64(std::uint64_t value);
  Sha256& update_i64(std::int64_t value) { return update_u64(static_cast<std::uint64_t>(value)); }
  Sha256& update_f64(double value);

  /// 64 lowercase hex digits. The object must not be updated afterwards.
  std::string hex_digest();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

std::string sha256_hex(std::string_view bytes);

}  // namespace mlexp
