#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "qst/common.hpp"

// Little-endian binary file plumbing shared by the .qds/.qnn/.qnq formats,
// plus the CRC-32 (polynomial 0xEDB88320, reflected) used as the trailing
// checksum of the model files.

namespace qst {

static_assert(std::endian::native == std::endian::little,
              "file formats are little-endian; big-endian hosts need byte swaps");

inline uint32_t crc32(const uint8_t* data, size_t n, uint32_t seed = 0) {
    static const std::array<uint32_t, 256> table = [] {
        std::array<uint32_t, 256> t{};
        for (uint32_t i = 0; i < 256; ++i) {
            uint32_t c = i;
            for (int k = 0; k < 8; ++k) c = (c & 1u) ? 0xEDB88320u ^ (c >> 1) : c >> 1;
            t[i] = c;
        }
        return t;
    }();
    uint32_t c = seed ^ 0xFFFFFFFFu;
    for (size_t i = 0; i < n; ++i) c = table[(c ^ data[i]) & 0xFFu] ^ (c >> 8);
    return c ^ 0xFFFFFFFFu;
}

/// Append-only byte buffer with typed little-endian writers.
class ByteWriter {
  public:
    std::vector<uint8_t> bytes;

    void raw(const void* p, size_t n) {
        const auto* b = static_cast<const uint8_t*>(p);
        bytes.insert(bytes.end(), b, b + n);
    }
    template <typename T>
    void put(T v) {
        static_assert(std::is_trivially_copyable_v<T>);
        raw(&v, sizeof(T));
    }
    void put_magic(const char m[4]) { raw(m, 4); }

    void append_crc() { put<uint32_t>(crc32(bytes.data(), bytes.size())); }

    void save(const std::string& path) const {
        std::ofstream f(path, std::ios::binary | std::ios::trunc);
        if (!f) throw Error("cannot open for writing: " + path);
        f.write(reinterpret_cast<const char*>(bytes.data()),
                static_cast<std::streamsize>(bytes.size()));
        if (!f) throw Error("write failed: " + path);
    }
};

/// Cursor over an in-memory file image with typed little-endian readers.
/// Reads past the end throw a structured "truncated" error.
class ByteReader {
  public:
    explicit ByteReader(std::vector<uint8_t> data, std::string name = "")
        : bytes_(std::move(data)), name_(std::move(name)) {}

    static ByteReader from_file(const std::string& path) {
        std::ifstream f(path, std::ios::binary | std::ios::ate);
        if (!f) throw Error("cannot open: " + path);
        const auto size = f.tellg();
        f.seekg(0);
        std::vector<uint8_t> data(static_cast<size_t>(size));
        f.read(reinterpret_cast<char*>(data.data()), size);
        if (!f) throw Error("read failed: " + path);
        return ByteReader(std::move(data), path);
    }

    template <typename T>
    T get() {
        static_assert(std::is_trivially_copyable_v<T>);
        T v;
        raw(&v, sizeof(T));
        return v;
    }
    void raw(void* out, size_t n) {
        if (pos_ + n > bytes_.size()) throw Error("truncated file: " + name_);
        std::memcpy(out, bytes_.data() + pos_, n);
        pos_ += n;
    }
    void expect_magic(const char m[4], const char* format_name) {
        char got[4];
        raw(got, 4);
        if (std::memcmp(got, m, 4) != 0)
            throw Error(std::string("bad magic (not a ") + format_name + " file): " + name_);
    }
    /// Whole-image CRC check: last 4 bytes must equal the CRC of everything before.
    void verify_trailing_crc(const char* format_name) {
        if (bytes_.size() < 4) throw Error("truncated file: " + name_);
        uint32_t stored;
        std::memcpy(&stored, bytes_.data() + bytes_.size() - 4, 4);
        const uint32_t computed = crc32(bytes_.data(), bytes_.size() - 4);
        if (stored != computed)
            throw Error(std::string("CRC mismatch in ") + format_name + " file: " + name_);
    }

    size_t pos() const { return pos_; }
    size_t size() const { return bytes_.size(); }
    size_t remaining() const { return bytes_.size() - pos_; }

  private:
    std::vector<uint8_t> bytes_;
    std::string name_;
    size_t pos_ = 0;
};

} // namespace qst
