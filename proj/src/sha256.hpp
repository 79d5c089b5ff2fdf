#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace ureca {

std::array<std::uint8_t, 32> sha256(const void* data, std::size_t len);
std::string sha256_hex(const std::string& data);
std::array<std::uint8_t, 32> sha256_bytes(const std::vector<std::uint8_t>& data);

} // namespace ureca
