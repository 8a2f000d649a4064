#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include <json.hpp>

namespace detlimits {

std::string_view tool_name();
std::string_view tool_version();

/// Lower-case hex SHA-256 of `bytes`.
std::string sha256_hex(std::string_view bytes);

/// {"tool": ..., "version": ..., "seed": ..., "input_digest": "sha256:..."}.
/// `seed` is null when the command is not randomized.
nlohmann::json provenance(std::string_view input_bytes, std::optional<std::uint64_t> seed);

}  // namespace detlimits
