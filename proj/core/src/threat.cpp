#include "secest/threat.hpp"

#include <algorithm>

#include "secest/errors.hpp"

namespace secest::threat {

AttackSignal AttackSignal::uniform(double lo, double hi) {
    AttackSignal s;
    s.kind = Kind::random_uniform;
    s.lo = lo;
    s.hi = hi;
    return s;
}

AttackSignal AttackSignal::slope(double rate) {
    AttackSignal s;
    s.kind = Kind::slope;
    s.rate = rate;
    return s;
}

AttackSignal AttackSignal::constant(double value) {
    AttackSignal s;
    s.kind = Kind::constant;
    s.value = value;
    return s;
}

AttackScenario AttackScenario::none() { return AttackScenario{}; }

AttackScenario AttackScenario::switching_ieee14(AttackSignal sig, std::uint64_t seed) {
    AttackScenario sc;
    sc.kind = Kind::switching_ieee14;
    sc.sparsity = 6; // the largest rotating group has six buses
    sc.signal = sig;
    sc.seed = seed;
    return sc;
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Uniform double in [0, 1) from a hash of (seed, k, sensor); replay is
// independent of query order.
double hashed_unit(std::uint64_t seed, long k, int sensor) {
    std::uint64_t h = splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(k) + 1));
    h = splitmix64(h ^ (static_cast<std::uint64_t>(sensor) + 0x51ed270b9f112cb1ULL));
    return static_cast<double>(h >> 11) * 0x1.0p-53;
}

} // namespace

std::vector<int> support_at(const AttackScenario& sc, long k) {
    switch (sc.kind) {
    case AttackScenario::Kind::none:
        return {};
    case AttackScenario::Kind::fixed_set:
        return sc.sensors;
    case AttackScenario::Kind::switching_ieee14: {
        // Bus groups rotate with k mod 3; the electrical-power sensor (slot 0)
        // of each bus in the active group is corrupted.
        std::vector<int> buses;
        switch (k % 3) {
        case 1: buses = {1, 2, 3, 4}; break;
        case 2: buses = {5, 6, 7, 8}; break;
        default: buses = {9, 10, 11, 12, 13, 14}; break;
        }
        std::vector<int> sensors;
        sensors.reserve(buses.size());
        for (int b : buses) sensors.push_back((b - 1) * sc.sensors_per_bus);
        return sensors;
    }
    case AttackScenario::Kind::custom_schedule: {
        if (sc.schedule.empty()) return {};
        const auto& sup = sc.schedule[static_cast<size_t>(k) % sc.schedule.size()];
        if (static_cast<int>(sup.size()) > sc.sparsity)
            raise(Errc::sparsity_violated,
                  "custom schedule has support of size " + std::to_string(sup.size()) +
                      " at step " + std::to_string(k) + " with budget p = " +
                      std::to_string(sc.sparsity));
        return sup;
    }
    }
    return {};
}

double signal_at(const AttackScenario& sc, long k, int sensor) {
    switch (sc.signal.kind) {
    case AttackSignal::Kind::random_uniform:
        return sc.signal.lo +
               (sc.signal.hi - sc.signal.lo) * hashed_unit(sc.seed, k, sensor);
    case AttackSignal::Kind::slope:
        return static_cast<double>(k) * sc.signal.rate;
    case AttackSignal::Kind::constant:
        return sc.signal.value;
    }
    return 0.0;
}

Vec apply(const AttackScenario& sc, long k, const Vec& y_clean) {
    std::vector<int> support = support_at(sc, k);
    if (static_cast<int>(support.size()) > sc.sparsity)
        raise(Errc::sparsity_violated,
              "attack support of size " + std::to_string(support.size()) +
                  " exceeds budget p = " + std::to_string(sc.sparsity));
    Vec y = y_clean;
    for (int s : support) {
        if (s < 0 || s >= y.size())
            raise(Errc::invalid_parameter, "attacked sensor index out of range");
        y(s) += signal_at(sc, k, s);
    }
    return y;
}

} // namespace secest::threat
