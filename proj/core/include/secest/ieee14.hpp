#pragma once

#include <array>
#include <tuple>

#include "secest/sim.hpp"

namespace secest::ieee14 {

inline constexpr int kBusCount = 14;
inline constexpr std::array<int, 5> kGeneratorBuses = {1, 2, 3, 6, 8};        // 1-based
inline constexpr std::array<int, 11> kLoadBuses = {2, 3, 4, 5, 6, 9, 10, 11, 12, 13, 14};

/// Linearized swing-dynamics parameters on the 14-bus topology. The paper's
/// benchmark publishes no numeric table; these are shipped defaults and are
/// treated as scenario inputs.
struct Ieee14Params {
    std::array<double, kBusCount> inertia{};   // m_i, > 0 everywhere (loads get a small value)
    std::array<double, kBusCount> damping{};   // D_i
    std::vector<std::tuple<int, int, double>> lines; // (bus a, bus b, susceptance), 1-based
    double sample_time = 0.01;
    std::array<double, kBusCount> injection{}; // constant known P_i, sums to zero
    bool ground_reference = false;             // drop bus-1 angle (n = 27) when true

    static Ieee14Params defaults();
};

struct Ieee14Model {
    model::SystemModel system;
    sim::KnownInput input;
};

/// State layout: (angle_b, frequency_b) interleaved per bus; with
/// ground_reference the bus-1 angle state is removed.
int angle_index(const Ieee14Params& p, int bus);
int frequency_index(const Ieee14Params& p, int bus);
int state_dim(const Ieee14Params& p);

/// Sensor layout: per bus (electrical power, angle, frequency, frequency).
int sensor_index(int bus, int slot);

/// Continuous-time swing model (A_c, B_c).
std::pair<Mat, Mat> swing_continuous(const Ieee14Params& p);

/// Exact zero-order-hold discretization via the augmented matrix exponential.
std::pair<Mat, Mat> discretize_exact(const Mat& Ac, const Mat& Bc, double Ts);

Mat sensor_matrix(const Ieee14Params& p);      // C, 56 x n
Mat feedthrough_matrix(const Ieee14Params& p); // D_u, 56 x 14

/// Assemble the benchmark: discretize, attach the sensor suite, run the
/// modal transform, package the known-input channel.
Ieee14Model build_ieee14(const Ieee14Params& p, int max_attack_sparsity = 6,
                         double process_bound = 1e-3, double measurement_bound = 1e-2);

} // namespace secest::ieee14
