#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include "vprmon/errors.hpp"

namespace vprmon {

/// CRC32 (IEEE, poly 0xEDB88320) over a byte range.
std::uint32_t crc32(std::span<const unsigned char> bytes, std::uint32_t seed = 0);

std::uint32_t crc32_of_file(const std::filesystem::path& path);

/// Little-endian binary writer that tracks a running CRC32.
class BinaryWriter {
public:
    explicit BinaryWriter(const std::filesystem::path& path);

    void bytes(const void* data, std::size_t count);
    void u32(std::uint32_t v);
    void f32(float v);
    void f64(double v);
    void f32_array(std::span<const float> v);

    std::uint32_t crc() const { return crc_; }
    void finish_with_crc();  // appends the CRC trailer and closes

private:
    std::ofstream out_;
    std::filesystem::path path_;
    std::uint32_t crc_ = 0;
};

/// Little-endian binary reader over a fully buffered file.
class BinaryReader {
public:
    explicit BinaryReader(const std::filesystem::path& path);

    std::size_t size() const { return buf_.size(); }
    std::size_t remaining() const { return buf_.size() - pos_; }

    void bytes(void* data, std::size_t count);
    std::uint32_t u32();
    float f32();
    double f64();
    std::vector<float> f32_array(std::size_t count);

    /// CRC32 of everything except the last 4 bytes (the stored trailer).
    std::uint32_t body_crc() const;
    /// The trailing u32, read without advancing the cursor.
    std::uint32_t trailer_crc() const;

private:
    std::vector<unsigned char> buf_;
    std::size_t pos_ = 0;
    std::filesystem::path path_;
};

}  // namespace vprmon
