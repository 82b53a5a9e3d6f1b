#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace esom {

// Minimal SHA-256 for content-addressed caches and run manifests.
class Sha256 {
public:
    Sha256();
    void update(const void* data, std::size_t len);
    void update(const std::string& s) { update(s.data(), s.size()); }
    void update_double(double v) { update(&v, sizeof v); }
    void update_doubles(const std::vector<double>& v) {
        update(v.data(), v.size() * sizeof(double));
    }
    std::string hex_digest();  // finalizes; object must not be reused afterwards

private:
    void process_block(const std::uint8_t* block);
    std::uint32_t state_[8];
    std::uint8_t buffer_[64];
    std::size_t buffered_ = 0;
    std::uint64_t total_ = 0;
};

std::string sha256_hex(const std::string& data);
std::string sha256_file(const std::string& path);

}  // namespace esom
