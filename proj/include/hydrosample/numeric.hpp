#ifndef HYDROSAMPLE_NUMERIC_HPP
#define HYDROSAMPLE_NUMERIC_HPP

#include <cstdint>
#include <string>
#include <vector>

namespace hydrosample {

/// Shortest decimal string that parses back to exactly the same double.
std::string format_double(double value);

/// Strict double parse; throws ValidationError on trailing garbage or overflow.
double parse_double(const std::string& token, const std::string& context);

/// Strict non-negative integer parse.
long parse_long(const std::string& token, const std::string& context);

/// FNV-1a 64-bit hash, used for manifest/config fingerprints.
std::uint64_t fnv1a64(const void* data, std::size_t len);
std::uint64_t fnv1a64(const std::string& s);
std::string to_hex(std::uint64_t v);

/// Binomial coefficient as double; +inf on overflow-ish magnitudes.
double binomial(int n, int k);

/// Deterministic uniform draw in [0, bound) from a 64-bit engine state,
/// independent of the standard library's distribution implementations.
class SplitRng {
public:
    explicit SplitRng(std::uint64_t seed);
    std::uint64_t next_u64();
    /// Uniform integer in [0, bound), bound > 0. Rejection sampling, unbiased.
    std::uint64_t next_below(std::uint64_t bound);
    /// Uniform double in [0, 1).
    double next_double();
    /// Uniform double in [lo, hi).
    double next_double(double lo, double hi);

private:
    std::uint64_t state_;
};

/// Fisher-Yates prefix shuffle: returns the first `take` elements of a
/// uniformly shuffled copy of `items`, deterministic given the rng state.
std::vector<int> sample_without_replacement(int population, int take, SplitRng& rng);

} // namespace hydrosample

#endif
