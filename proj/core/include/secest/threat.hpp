#pragma once

#include <cstdint>
#include <vector>

#include "secest/linalg.hpp"

namespace secest::threat {

struct AttackSignal {
    enum class Kind { random_uniform, slope, constant };
    Kind kind = Kind::constant;
    double lo = 0.0;    // random_uniform
    double hi = 0.0;
    double rate = 0.0;  // slope: a(k) = k * rate
    double value = 0.0; // constant

    static AttackSignal uniform(double lo, double hi);
    static AttackSignal slope(double rate);
    static AttackSignal constant(double value);
};

/// Admissible time-varying sparse attack: at most `sparsity` corrupted
/// sensors at each step. Signals are a pure function of (seed, k, sensor),
/// so replay does not depend on query order.
struct AttackScenario {
    enum class Kind { none, fixed_set, switching_ieee14, custom_schedule };
    Kind kind = Kind::none;
    int sparsity = 0; // p
    AttackSignal signal;
    std::uint64_t seed = 0;
    std::vector<int> sensors;                  // fixed_set support
    std::vector<std::vector<int>> schedule;    // custom: support at k is schedule[k % size]
    int sensors_per_bus = 4;                   // switching_ieee14 sensor layout

    static AttackScenario none();
    /// The benchmark schedule: the electrical-power sensor of bus groups
    /// {1..4} / {5..8} / {9..14}, rotating with k mod 3.
    static AttackScenario switching_ieee14(AttackSignal sig, std::uint64_t seed);
};

std::vector<int> support_at(const AttackScenario& sc, long k);
double signal_at(const AttackScenario& sc, long k, int sensor);

/// y + attack on exactly the supported entries. Throws sparsity_violated
/// when the schedule exceeds the declared budget.
Vec apply(const AttackScenario& sc, long k, const Vec& y_clean);

} // namespace secest::threat
