#include "hydrosample/numeric.hpp"
#include "hydrosample/errors.hpp"

#include <charconv>
#include <cmath>
#include <cstring>
#include <limits>
#include <system_error>

namespace hydrosample {

std::string format_double(double value) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, res.ptr);
}

double parse_double(const std::string& token, const std::string& context) {
    double out = 0.0;
    const char* first = token.data();
    const char* last = first + token.size();
    auto res = std::from_chars(first, last, out);
    if (res.ec != std::errc{} || res.ptr != last) {
        throw ValidationError(context + ": expected a number, got '" + token + "'");
    }
    if (!std::isfinite(out)) {
        throw ValidationError(context + ": non-finite value '" + token + "'");
    }
    return out;
}

long parse_long(const std::string& token, const std::string& context) {
    long out = 0;
    const char* first = token.data();
    const char* last = first + token.size();
    auto res = std::from_chars(first, last, out);
    if (res.ec != std::errc{} || res.ptr != last) {
        throw ValidationError(context + ": expected an integer, got '" + token + "'");
    }
    return out;
}

std::uint64_t fnv1a64(const void* data, std::size_t len) {
    const auto* p = static_cast<const unsigned char*>(data);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (std::size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t fnv1a64(const std::string& s) { return fnv1a64(s.data(), s.size()); }

std::string to_hex(std::uint64_t v) {
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = digits[v & 0xF];
        v >>= 4;
    }
    return out;
}

double binomial(int n, int k) {
    if (k < 0 || k > n) return 0.0;
    k = std::min(k, n - k);
    double c = 1.0;
    for (int i = 1; i <= k; ++i) {
        c *= static_cast<double>(n - k + i) / static_cast<double>(i);
        if (c > 1e18) return std::numeric_limits<double>::infinity();
    }
    return c;
}

// splitmix64: tiny, statistically solid for shuffles and weight init,
// and bit-identical on every platform.
SplitRng::SplitRng(std::uint64_t seed) : state_(seed) {}

std::uint64_t SplitRng::next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::uint64_t SplitRng::next_below(std::uint64_t bound) {
    if (bound == 0) throw ValidationError("SplitRng::next_below: bound must be positive");
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t x = next_u64();
    while (x >= limit) x = next_u64();
    return x % bound;
}

double SplitRng::next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double SplitRng::next_double(double lo, double hi) {
    return lo + (hi - lo) * next_double();
}

std::vector<int> sample_without_replacement(int population, int take, SplitRng& rng) {
    if (take < 0 || take > population) {
        throw ValidationError("sample_without_replacement: take out of range");
    }
    std::vector<int> pool(static_cast<std::size_t>(population));
    for (int i = 0; i < population; ++i) pool[static_cast<std::size_t>(i)] = i;
    for (int i = 0; i < take; ++i) {
        const auto j = static_cast<std::size_t>(
            i + static_cast<int>(rng.next_below(static_cast<std::uint64_t>(population - i))));
        std::swap(pool[static_cast<std::size_t>(i)], pool[j]);
    }
    pool.resize(static_cast<std::size_t>(take));
    return pool;
}

} // namespace hydrosample
