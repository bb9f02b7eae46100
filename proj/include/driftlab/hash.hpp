#pragma once

#include <cstdint>
#include <cstring>
#include <span>
#include <string_view>

namespace driftlab {

/// 64-bit FNV-1a, used as a content hash in artifact headers.
class Fnv1a {
public:
    void update(const void* data, std::size_t n)
    {
        const auto* p = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < n; ++i) {
            state_ ^= p[i];
            state_ *= 0x100000001B3ULL;
        }
    }
    void update(std::string_view s) { update(s.data(), s.size()); }
    template <class T>
    void update_value(const T& v)
    {
        update(&v, sizeof(T));
    }
    void update_doubles(std::span<const double> v) { update(v.data(), v.size_bytes()); }

    std::uint64_t digest() const { return state_; }

private:
    std::uint64_t state_ = 0xCBF29CE484222325ULL;
};

} // namespace driftlab
