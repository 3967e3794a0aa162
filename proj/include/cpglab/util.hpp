#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace cpglab {

// Bad input data (malformed corpus files, impossible partition requests).
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline uint64_t fnv1a64(std::string_view s) {
    uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::string to_hex(uint64_t v);

// Deterministic RNG wrapper. All value mappings are implemented by hand so
// sequences do not depend on the standard library's distribution internals.
class Rng {
public:
    explicit Rng(uint64_t seed) : eng_(seed) {}

    uint64_t next_u64() { return eng_(); }

    // [0, 1)
    double uniform() { return (next_u64() >> 11) * (1.0 / 9007199254740992.0); }

    // [0, n)
    size_t index(size_t n) {
        if (n == 0) throw std::invalid_argument("Rng::index: n == 0");
        // rejection sampling to avoid modulo bias
        uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        uint64_t v;
        do { v = next_u64(); } while (v >= limit);
        return static_cast<size_t>(v % n);
    }

    // [lo, hi] inclusive
    int64_t range(int64_t lo, int64_t hi) {
        return lo + static_cast<int64_t>(index(static_cast<size_t>(hi - lo + 1)));
    }

    // standard normal via Box-Muller (one value per call, cached pair)
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform(), u2 = uniform();
        while (u1 <= 1e-300) u1 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double theta = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(theta);
        has_spare_ = true;
        return r * std::cos(theta);
    }

    template <class T>
    void shuffle(std::vector<T>& v) {
        for (size_t i = v.size(); i > 1; --i) {
            size_t j = index(i);
            std::swap(v[i - 1], v[j]);
        }
    }

    // stream-splitting: derive an independent seed for a named sub-task
    static uint64_t derive(uint64_t seed, std::string_view salt) {
        uint64_t h = fnv1a64(salt);
        uint64_t x = seed ^ (h + 0x9e3779b97f4a7c15ULL);
        x ^= x >> 30; x *= 0xbf58476d1ce4e5b9ULL;
        x ^= x >> 27; x *= 0x94d049bb133111ebULL;
        x ^= x >> 31;
        return x;
    }

private:
    std::mt19937_64 eng_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace cpglab
