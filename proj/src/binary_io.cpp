#include "vprmon/binary_io.hpp"

#include <array>
#include <bit>
#include <iterator>
#include <cstring>

namespace vprmon {
namespace {

std::array<std::uint32_t, 256> make_crc_table() {
    std::array<std::uint32_t, 256> table{};
    for (std::uint32_t i = 0; i < 256; ++i) {
        std::uint32_t c = i;
        for (int k = 0; k < 8; ++k) {
            c = (c & 1U) ? 0xEDB88320U ^ (c >> 1) : c >> 1;
        }
        table[i] = c;
    }
    return table;
}

const std::array<std::uint32_t, 256>& crc_table() {
    static const auto table = make_crc_table();
    return table;
}

template <class T>
struct SameSizeUint;
template <>
struct SameSizeUint<std::uint32_t> { using type = std::uint32_t; };
template <>
struct SameSizeUint<float> { using type = std::uint32_t; };
template <>
struct SameSizeUint<double> { using type = std::uint64_t; };

template <class T>
void store_le(unsigned char* out, T v) {
    auto bits = std::bit_cast<typename SameSizeUint<T>::type>(v);
    for (std::size_t i = 0; i < sizeof(T); ++i) {
        out[i] = static_cast<unsigned char>((bits >> (8 * i)) & 0xFFU);
    }
}

template <class T>
T load_le(const unsigned char* in) {
    typename SameSizeUint<T>::type bits = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
        bits |= static_cast<typename SameSizeUint<T>::type>(in[i]) << (8 * i);
    }
    return std::bit_cast<T>(bits);
}

}  // namespace

std::uint32_t crc32(std::span<const unsigned char> bytes, std::uint32_t seed) {
    std::uint32_t c = seed ^ 0xFFFFFFFFU;
    const auto& table = crc_table();
    for (unsigned char b : bytes) {
        c = table[(c ^ b) & 0xFFU] ^ (c >> 8);
    }
    return c ^ 0xFFFFFFFFU;
}

std::uint32_t crc32_of_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::vector<unsigned char> buf((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
    return crc32(buf);
}

BinaryWriter::BinaryWriter(const std::filesystem::path& path)
    : out_(path, std::ios::binary), path_(path) {
    if (!out_) throw IoError("cannot open " + path.string() + " for writing");
}

void BinaryWriter::bytes(const void* data, std::size_t count) {
    out_.write(static_cast<const char*>(data), static_cast<std::streamsize>(count));
    if (!out_) throw IoError("write failed on " + path_.string());
    crc_ = crc32({static_cast<const unsigned char*>(data), count}, crc_);
}

void BinaryWriter::u32(std::uint32_t v) {
    unsigned char b[4];
    store_le(b, v);
    bytes(b, 4);
}

void BinaryWriter::f32(float v) {
    unsigned char b[4];
    store_le(b, v);
    bytes(b, 4);
}

void BinaryWriter::f64(double v) {
    unsigned char b[8];
    store_le(b, v);
    bytes(b, 8);
}

void BinaryWriter::f32_array(std::span<const float> v) {
    for (float x : v) f32(x);
}

void BinaryWriter::finish_with_crc() {
    const std::uint32_t trailer = crc_;
    unsigned char b[4];
    store_le(b, trailer);
    out_.write(reinterpret_cast<const char*>(b), 4);
    out_.close();
    if (!out_) throw IoError("write failed on " + path_.string());
}

BinaryReader::BinaryReader(const std::filesystem::path& path) : path_(path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    buf_.assign((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

void BinaryReader::bytes(void* data, std::size_t count) {
    if (remaining() < count) {
        throw ModelIoError("truncated file: " + path_.string());
    }
    std::memcpy(data, buf_.data() + pos_, count);
    pos_ += count;
}

std::uint32_t BinaryReader::u32() {
    unsigned char b[4];
    bytes(b, 4);
    return load_le<std::uint32_t>(b);
}

float BinaryReader::f32() {
    unsigned char b[4];
    bytes(b, 4);
    return load_le<float>(b);
}

double BinaryReader::f64() {
    unsigned char b[8];
    bytes(b, 8);
    return load_le<double>(b);
}

std::vector<float> BinaryReader::f32_array(std::size_t count) {
    std::vector<float> v(count);
    for (std::size_t i = 0; i < count; ++i) v[i] = f32();
    return v;
}

std::uint32_t BinaryReader::body_crc() const {
    if (buf_.size() < 4) throw ModelIoError("truncated file: " + path_.string());
    return crc32({buf_.data(), buf_.size() - 4});
}

std::uint32_t BinaryReader::trailer_crc() const {
    if (buf_.size() < 4) throw ModelIoError("truncated file: " + path_.string());
    return load_le<std::uint32_t>(buf_.data() + buf_.size() - 4);
}

}  // namespace vprmon
