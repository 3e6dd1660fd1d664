#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace fusionnet {

using Bytes = std::vector<std::uint8_t>;

[[nodiscard]] Bytes read_file(const std::filesystem::path& path);
[[nodiscard]] std::string read_text_file(const std::filesystem::path& path);

// Writes to a sibling temporary file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
void write_file_atomic(const std::filesystem::path& path, std::string_view text);

// 64-bit FNV-1a; stable across platforms, used for content hashes and seeds.
[[nodiscard]] std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes,
                                    std::uint64_t basis = 0xcbf29ce484222325ULL);
[[nodiscard]] std::uint64_t fnv1a64(std::string_view text,
                                    std::uint64_t basis = 0xcbf29ce484222325ULL);
[[nodiscard]] std::string hex64(std::uint64_t value);

// Derives an independent stream seed from a parent seed and a label.
[[nodiscard]] std::uint64_t derive_seed(std::uint64_t seed, std::string_view label);

// Little-endian primitives shared by the binary formats.
void put_u16le(Bytes& out, std::uint16_t v);
void put_u32le(Bytes& out, std::uint32_t v);
void put_f32le(Bytes& out, float v);
[[nodiscard]] std::uint16_t get_u16le(std::span<const std::uint8_t> in, std::size_t offset);
[[nodiscard]] std::uint32_t get_u32le(std::span<const std::uint8_t> in, std::size_t offset);
[[nodiscard]] float get_f32le(std::span<const std::uint8_t> in, std::size_t offset);

// Formats with `digits` significant digits (printf %.*g).
[[nodiscard]] std::string format_real(double value, int digits = 9);

}  // namespace fusionnet
