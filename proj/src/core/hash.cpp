#include "atlantis/core/hash.hpp"

#include <openssl/evp.h>

#include <array>
#include <fstream>
#include <vector>

#include "atlantis/core/error.hpp"

namespace atlantis::core {

namespace {

std::string to_hex(const unsigned char* digest, size_t len) {
  static const char* kHex = "0123456789abcdef";
  std::string out(len * 2, '0');
  for (size_t i = 0; i < len; ++i) {
    out[2 * i] = kHex[digest[i] >> 4];
    out[2 * i + 1] = kHex[digest[i] & 0xf];
  }
  return out;
}

struct Sha256Ctx {
  EVP_MD_CTX* ctx;
  Sha256Ctx() : ctx(EVP_MD_CTX_new()) {
    if (!ctx || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1)
      fail(Errc::io_failure, "sha256 init failed");
  }
  ~Sha256Ctx() { EVP_MD_CTX_free(ctx); }
  void update(const void* data, size_t len) {
    if (EVP_DigestUpdate(ctx, data, len) != 1)
      fail(Errc::io_failure, "sha256 update failed");
  }
  std::array<unsigned char, 32> finish() {
    std::array<unsigned char, 32> digest{};
    unsigned int len = 0;
    if (EVP_DigestFinal_ex(ctx, digest.data(), &len) != 1 || len != 32)
      fail(Errc::io_failure, "sha256 final failed");
    return digest;
  }
};

}  // namespace

std::string sha256_hex(std::string_view bytes) {
  Sha256Ctx ctx;
  ctx.update(bytes.data(), bytes.size());
  auto digest = ctx.finish();
  return to_hex(digest.data(), digest.size());
}

std::string sha256_file_hex(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::missing_file, "cannot open " + path.string());
  Sha256Ctx ctx;
  std::vector<char> buf(1 << 16);
  while (in) {
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    const auto got = in.gcount();
    if (got > 0) ctx.update(buf.data(), static_cast<size_t>(got));
  }
  auto digest = ctx.finish();
  return to_hex(digest.data(), digest.size());
}

std::uint64_t sha256_u64(std::string_view bytes) {
  Sha256Ctx ctx;
  ctx.update(bytes.data(), bytes.size());
  auto digest = ctx.finish();
  std::uint64_t out = 0;
  for (int i = 0; i < 8; ++i) out = (out << 8) | digest[static_cast<size_t>(i)];
  return out;
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

double u64_to_unit_double(std::uint64_t x) {
  return static_cast<double>(x >> 11) * (1.0 / 9007199254740992.0);
}

}  // namespace atlantis::core
