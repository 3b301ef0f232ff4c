#include "strata/rng.hpp"

#include <bit>

#include "strata/special_functions.hpp"

namespace strata {

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

}  // namespace

std::uint64_t mix_seed(std::uint64_t key, std::uint64_t index) {
    std::uint64_t s = key;
    std::uint64_t a = splitmix64(s);
    s ^= index * 0xD1342543DE82EF95ull;
    std::uint64_t b = splitmix64(s);
    return a ^ (b + 0x9E3779B97F4A7C15ull + (a << 6) + (a >> 2));
}

Rng::Rng(std::uint64_t seed) : key_(seed) {
    std::uint64_t s = seed;
    for (auto& w : state_) w = splitmix64(s);
    // xoshiro must not start in the all-zero state
    if ((state_[0] | state_[1] | state_[2] | state_[3]) == 0) state_[3] = 1;
}

Rng Rng::child(std::uint64_t index) const {
    return Rng(mix_seed(key_, index));
}

std::uint64_t Rng::next_u64() {
    // xoshiro256++
    std::uint64_t result = std::rotl(state_[0] + state_[3], 23) + state_[0];
    std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = std::rotl(state_[3], 45);
    return result;
}

std::uint64_t Rng::below(std::uint64_t bound) {
    if (bound <= 1) return 0;
    std::uint64_t mask = ~0ull >> std::countl_zero(bound - 1);
    for (;;) {
        std::uint64_t v = next_u64() & mask;
        if (v < bound) return v;
    }
}

double Rng::open01() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double Rng::normal() {
    return std_normal_quantile(open01());
}

double Rng::cauchy() {
    for (;;) {
        double num = normal();
        double den = normal();
        if (den != 0.0) return num / den;
    }
}

double Rng::chi_squared(int k) {
    double sum = 0.0;
    for (int i = 0; i < k; ++i) {
        double z = normal();
        sum += z * z;
    }
    return sum;
}

}  // namespace strata
