#pragma once

#include <string>

#include "secest/sim.hpp"

namespace secest::io {

/// Fixed-layout CSV: k, x_true[0..n), x_hat_secure[0..n), x_hat_luen[0..n),
/// err_inf_secure, err_inf_luen, residue_i and trigger_i per sensor, and the
/// semicolon-joined attack support. Deterministic byte-for-byte for a given
/// trace.
void write_trace_csv(const sim::SimulationTrace& trace, const std::string& path);

/// Parse a trace written by write_trace_csv. Diagnostic-only fields that do
/// not appear in the CSV (modal errors, attack magnitudes) come back empty.
sim::SimulationTrace read_trace_csv(const std::string& path);

/// Format a double exactly as the CSV writer does (17 significant digits).
std::string format_double(double v);

} // namespace secest::io
