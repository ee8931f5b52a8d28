// Copyright 2026 The qepi Authors.

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at

//     http://www.apache.org/licenses/LICENSE-2.0

// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

/**
 * @file rng.hpp
 * Portable seeded random streams.
 *
 * Every stochastic step in the library draws from `Rng`, a thin wrapper over
 * std::mt19937_64 whose output sequence is fixed by the C++ standard. Uniform
 * and normal variates are derived here rather than through
 * <random> distributions, whose algorithms differ between standard libraries,
 * so a seed reproduces the same numbers on every platform.
 */
#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <iterator>
#include <numbers>
#include <random>
#include <string_view>

namespace qepi {

/// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Order-sensitive hash of a seed and a list of integer coordinates.
constexpr std::uint64_t derive_seed(std::uint64_t seed,
                                    std::initializer_list<std::uint64_t> parts) noexcept {
    std::uint64_t h = mix64(seed);
    for (auto p : parts) {
        h = mix64(h ^ mix64(p + 0x632be59bd9b4e019ULL));
    }
    return h;
}

/// FNV-1a, used to fold string tags (model names) into derived seeds.
constexpr std::uint64_t hash_tag(std::string_view s) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

class Rng {
  public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer on [0, n) by rejection (no modulo bias).
    std::uint64_t below(std::uint64_t n) {
        const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
        std::uint64_t r;
        do {
            r = engine_();
        } while (r >= limit);
        return r % n;
    }

    /// +1 or -1 with equal probability.
    int rademacher() { return (engine_() >> 63) ? 1 : -1; }

    /// Standard normal via Box-Muller; one variate per call.
    double normal() {
        double u1 = uniform();
        while (u1 <= 0.0) {
            u1 = uniform();
        }
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    /// Fisher-Yates shuffle.
    template <typename Range> void shuffle(Range &r) {
        using std::swap;
        const auto n = static_cast<std::uint64_t>(std::size(r));
        for (std::uint64_t i = n; i > 1; --i) {
            const auto j = below(i);
            swap(r[i - 1], r[j]);
        }
    }

  private:
    std::mt19937_64 engine_;
};

} // namespace qepi
