#include "probenorm/rng.hpp"

#include <cmath>

namespace probenorm {

namespace {

// SplitMix64 step (Steele, Lea, Flood 2014): full-period, passes BigCrush,
// and trivially portable.
std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace

std::uint64_t Rng::next_u64() {
    return splitmix64(state_);
}

double Rng::uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) {
    return lo + (hi - lo) * uniform();
}

double Rng::normal() {
    if (has_cached_normal_) {
        has_cached_normal_ = false;
        return cached_normal_;
    }
    // Box-Muller on two fresh uniforms; u1 is nudged away from zero so the
    // log is always finite.
    double u1 = uniform();
    double u2 = uniform();
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * M_PI * u2;
    cached_normal_ = r * std::sin(theta);
    has_cached_normal_ = true;
    return r * std::cos(theta);
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b) {
    // Feed the indices through the mixer one at a time; equivalent indices
    // with different roles never collide because each pass rescrambles.
    std::uint64_t s = master;
    (void)splitmix64(s);
    s ^= 0x9e3779b97f4a7c15ULL * (a + 1);
    (void)splitmix64(s);
    s ^= 0xc2b2ae3d27d4eb4fULL * (b + 1);
    return splitmix64(s);
}

}  // namespace probenorm
