#include "detlimits/provenance.hpp"

#include <array>
#include <stdexcept>

#include <fmt/format.h>
#include <openssl/evp.h>

#ifndef DETLIMITS_VERSION
#define DETLIMITS_VERSION "0.0.0"
#endif

namespace detlimits {

std::string_view tool_name() { return "detlimits"; }
std::string_view tool_version() { return DETLIMITS_VERSION; }

std::string sha256_hex(std::string_view bytes) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest.data(), &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("SHA-256 digest failed");
  }
  std::string hex;
  hex.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) fmt::format_to(std::back_inserter(hex), "{:02x}", digest[i]);
  return hex;
}

nlohmann::json provenance(std::string_view input_bytes, std::optional<std::uint64_t> seed) {
  return {{"tool", tool_name()},
          {"version", tool_version()},
          {"seed", seed ? nlohmann::json(*seed) : nlohmann::json(nullptr)},
          {"input_digest", "sha256:" + sha256_hex(input_bytes)}};
}

}  // namespace detlimits
