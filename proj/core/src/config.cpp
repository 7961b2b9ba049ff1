#include "secest/config.hpp"

#include <algorithm>

namespace secest {

Tolerances& tolerances() {
    static Tolerances instance;
    return instance;
}

double zero_threshold(double matrix_inf_norm) {
    return tolerances().zero_rel * std::max(1.0, matrix_inf_norm);
}

} // namespace secest
