#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace hsr {

// Writes to "<path>.tmp" and renames into place, so a failed run never leaves
// a partially written output behind.
void atomic_write_file(const std::string& path, const void* bytes, size_t size);
void atomic_write_file(const std::string& path, const std::string& text);

std::vector<uint8_t> read_file(const std::string& path);
std::string read_text_file(const std::string& path);

// Little-endian scalar packing for the binary container headers.
void put_u32(std::vector<uint8_t>& out, uint32_t v);
void put_u64(std::vector<uint8_t>& out, uint64_t v);
void put_f32(std::vector<uint8_t>& out, float v);
void put_f64(std::vector<uint8_t>& out, double v);
uint32_t get_u32(const uint8_t* p);
uint64_t get_u64(const uint8_t* p);
float get_f32(const uint8_t* p);
double get_f64(const uint8_t* p);

} // namespace hsr
