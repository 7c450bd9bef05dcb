#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <vector>

namespace glmb {

/// Track label: (birth step, index within birth step). Ordered
/// lexicographically so label sets have a canonical sorted form.
struct Label {
    int birth_time = 0;
    int index = 0;

    auto operator<=>(const Label&) const = default;
};

inline std::string to_string(const Label& l) {
    return "(" + std::to_string(l.birth_time) + "," + std::to_string(l.index) + ")";
}

inline std::uint64_t hash_value(const Label& l) {
    std::uint64_t h = static_cast<std::uint64_t>(static_cast<std::uint32_t>(l.birth_time));
    h = (h << 32) | static_cast<std::uint32_t>(l.index);
    h ^= h >> 33;
    h *= 0xFF51AFD7ED558CCDULL;
    h ^= h >> 33;
    return h;
}

/// Hash of a sorted label vector, used to bucket components by label set.
inline std::uint64_t hash_value(const std::vector<Label>& labels) {
    std::uint64_t h = 0x84222325CBF29CE4ULL;
    for (const Label& l : labels) {
        h ^= hash_value(l);
        h *= 0x100000001B3ULL;
    }
    return h;
}

}  // namespace glmb
