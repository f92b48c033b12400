#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace drtci {

// Raised for bad user-supplied configuration (CLI exit code 1).
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Raised when a caller breaks a documented precondition.
struct ContractViolation : std::logic_error {
    using std::logic_error::logic_error;
};

// Raised for runtime failures: I/O, divergence, hash mismatch (CLI exit code 2).
struct RuntimeFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline constexpr const char* kToolVersion = "drtci 0.1.0";

// FNV-1a 64-bit, used as the artifact integrity fingerprint (not cryptographic).
inline std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t h = 0xcbf29ce484222325ULL) {
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string to_hex(std::uint64_t v);
std::string fingerprint(std::string_view bytes);
std::string fingerprint_file(const std::string& path);
std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view content);

}  // namespace drtci
