#include "transjudge/digest.hpp"

#include <openssl/evp.h>

#include <array>
#include <memory>

#include "transjudge/error.hpp"

namespace transjudge {

std::string sha256_hex(std::string_view data) {
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), data.data(), data.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), md.data(), &len) != 1) {
    fail(ErrorCode::IoError, "sha256 failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(len * 2);
  for (unsigned int i = 0; i < len; ++i) {
    out += kHex[md[i] >> 4];
    out += kHex[md[i] & 0x0F];
  }
  return out;
}

std::string request_digest(std::string_view backend_name, std::string_view prompt_text) {
  std::string buf;
  buf.reserve(backend_name.size() + 1 + prompt_text.size());
  buf.append(backend_name);
  buf.push_back('\0');
  buf.append(prompt_text);
  return sha256_hex(buf);
}

}  // namespace transjudge
