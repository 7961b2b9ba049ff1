#include "secest/ieee14.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>

#include "secest/errors.hpp"

namespace secest::ieee14 {

namespace {

bool is_load(int bus) {
    return std::find(kLoadBuses.begin(), kLoadBuses.end(), bus) != kLoadBuses.end();
}

} // namespace

Ieee14Params Ieee14Params::defaults() {
    Ieee14Params p;
    // Angular momenta: the five generator buses carry the machine inertia,
    // every other bus gets a small synthetic value so each bus keeps its
    // frequency state (n = 28).
    for (int b = 1; b <= kBusCount; ++b) p.inertia[b - 1] = 0.8;
    p.inertia[0] = 5.0;  // bus 1
    p.inertia[1] = 4.0;  // bus 2
    p.inertia[2] = 3.5;  // bus 3
    p.inertia[5] = 3.0;  // bus 6
    p.inertia[7] = 2.5;  // bus 8

    for (int b = 1; b <= kBusCount; ++b) p.damping[b - 1] = 1.0 + 0.06 * (b - 1);

    // Branch susceptances 1/x from the standard 14-bus reactance table.
    const std::pair<std::pair<int, int>, double> reactances[] = {
        {{1, 2}, 0.05917},  {{1, 5}, 0.22304}, {{2, 3}, 0.19797},  {{2, 4}, 0.17632},
        {{2, 5}, 0.17388},  {{3, 4}, 0.17103}, {{4, 5}, 0.04211},  {{4, 7}, 0.20912},
        {{4, 9}, 0.55618},  {{5, 6}, 0.25202}, {{6, 11}, 0.19890}, {{6, 12}, 0.25581},
        {{6, 13}, 0.13027}, {{7, 8}, 0.17615}, {{7, 9}, 0.11001},  {{9, 10}, 0.08450},
        {{9, 14}, 0.27038}, {{10, 11}, 0.19207}, {{12, 13}, 0.19988}, {{13, 14}, 0.34802},
    };
    for (const auto& [ends, x] : reactances)
        p.lines.emplace_back(ends.first, ends.second, 1.0 / x);

    // Net known injections (generation minus demand), balanced to zero.
    p.injection = {0.40, 0.18, 0.13, -0.1175, -0.1175, 0.08, 0.0,
                   0.15, -0.1175, -0.1175, -0.1175, -0.1175, -0.1175, -0.1175};
    return p;
}

int angle_index(const Ieee14Params& p, int bus) {
    if (bus < 1 || bus > kBusCount) raise(Errc::invalid_parameter, "bus index out of range");
    if (!p.ground_reference) return 2 * (bus - 1);
    return bus == 1 ? -1 : 2 * (bus - 1) - 1;
}

int frequency_index(const Ieee14Params& p, int bus) {
    if (bus < 1 || bus > kBusCount) raise(Errc::invalid_parameter, "bus index out of range");
    if (!p.ground_reference) return 2 * (bus - 1) + 1;
    return bus == 1 ? 0 : 2 * (bus - 1);
}

int state_dim(const Ieee14Params& p) { return p.ground_reference ? 2 * kBusCount - 1 : 2 * kBusCount; }

int sensor_index(int bus, int slot) {
    if (bus < 1 || bus > kBusCount || slot < 0 || slot > 3)
        raise(Errc::invalid_parameter, "sensor coordinates out of range");
    return 4 * (bus - 1) + slot;
}

std::pair<Mat, Mat> swing_continuous(const Ieee14Params& p) {
    const int n = state_dim(p);
    Mat Ac = Mat::Zero(n, n);
    Mat Bc = Mat::Zero(n, kBusCount);

    for (int b = 1; b <= kBusCount; ++b) {
        if (p.inertia[b - 1] <= 0.0)
            raise(Errc::invalid_parameter, "inertia must be positive on every bus");
        int th = angle_index(p, b);
        int om = frequency_index(p, b);
        if (th >= 0) Ac(th, om) = 1.0;
        Ac(om, om) = -p.damping[b - 1] / p.inertia[b - 1];
        Bc(om, b - 1) = 1.0 / p.inertia[b - 1];
    }

    for (const auto& [a, b, t] : p.lines) {
        if (a < 1 || a > kBusCount || b < 1 || b > kBusCount || a == b)
            raise(Errc::invalid_parameter, "line endpoints out of range");
        if (t <= 0.0) raise(Errc::invalid_parameter, "line susceptance must be positive");
        int tha = angle_index(p, a);
        int thb = angle_index(p, b);
        int oma = frequency_index(p, a);
        int omb = frequency_index(p, b);
        // Tie-line flow t (theta_a - theta_b) drains bus a and feeds bus b.
        if (tha >= 0) {
            Ac(oma, tha) -= t / p.inertia[a - 1];
            Ac(omb, tha) += t / p.inertia[b - 1];
        }
        if (thb >= 0) {
            Ac(oma, thb) += t / p.inertia[a - 1];
            Ac(omb, thb) -= t / p.inertia[b - 1];
        }
    }
    return {Ac, Bc};
}

std::pair<Mat, Mat> discretize_exact(const Mat& Ac, const Mat& Bc, double Ts) {
    if (Ts <= 0.0) raise(Errc::invalid_parameter, "sample time must be positive");
    const int n = static_cast<int>(Ac.rows());
    const int q = static_cast<int>(Bc.cols());
    Mat aug = Mat::Zero(n + q, n + q);
    aug.topLeftCorner(n, n) = Ac * Ts;
    aug.topRightCorner(n, q) = Bc * Ts;
    Mat expm = aug.exp();
    return {expm.topLeftCorner(n, n), expm.topRightCorner(n, q)};
}

Mat sensor_matrix(const Ieee14Params& p) {
    const int n = state_dim(p);
    Mat C = Mat::Zero(4 * kBusCount, n);
    for (int b = 1; b <= kBusCount; ++b) {
        int th = angle_index(p, b);
        int om = frequency_index(p, b);
        C(sensor_index(b, 0), om) = p.damping[b - 1]; // electrical power
        if (th >= 0) C(sensor_index(b, 1), th) = 1.0; // angle (zero row when grounded bus 1)
        C(sensor_index(b, 2), om) = 1.0;
        C(sensor_index(b, 3), om) = 1.0;
    }
    return C;
}

Mat feedthrough_matrix(const Ieee14Params& p) {
    Mat Du = Mat::Zero(4 * kBusCount, kBusCount);
    for (int b = 1; b <= kBusCount; ++b)
        if (is_load(b)) Du(sensor_index(b, 0), b - 1) = 1.0;
    return Du;
}

Ieee14Model build_ieee14(const Ieee14Params& p, int max_attack_sparsity,
                         double process_bound, double measurement_bound) {
    auto [Ac, Bc] = swing_continuous(p);
    auto [Ad, Bd] = discretize_exact(Ac, Bc, p.sample_time);

    model::RawSystem raw;
    raw.A = Ad;
    raw.C = sensor_matrix(p);
    raw.process_noise_bound = process_bound;
    raw.measurement_noise_bound = measurement_bound;
    raw.sample_time = p.sample_time;

    Ieee14Model out;
    out.system = model::make_system(raw, model::ModalMode::diagonalize, max_attack_sparsity);
    out.input.state_matrix = Bd;
    out.input.output_matrix = feedthrough_matrix(p);
    out.input.input = Eigen::Map<const Vec>(p.injection.data(), kBusCount);
    return out;
}

} // namespace secest::ieee14
