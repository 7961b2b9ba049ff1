#include "secest/sim.hpp"

#include <algorithm>
#include <cmath>

#include "secest/errors.hpp"

namespace secest::sim {

Vec bounded_uniform(std::mt19937_64& rng, int dim, double bound) {
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    Vec v(dim);
    for (int i = 0; i < dim; ++i) v(i) = unit(rng);
    if (bound <= 0.0) return Vec::Zero(dim);
    double norm = v.norm();
    if (norm > bound) v *= bound / norm; // scale onto the ball, smaller draws kept
    return v;
}

NoiseSampler::NoiseSampler(double process_bound, double measurement_bound, int n, int m,
                           std::uint64_t seed)
    : bw_(process_bound), bv_(measurement_bound), n_(n), m_(m), rng_(seed) {
    if (bw_ < 0.0 || bv_ < 0.0) raise(Errc::invalid_parameter, "noise bounds must be nonnegative");
}

std::pair<Vec, Vec> NoiseSampler::next() {
    Vec w = bounded_uniform(rng_, n_, bw_);
    Vec v = bounded_uniform(rng_, m_, bv_);
    return {std::move(w), std::move(v)};
}

Vec plant_step(const Mat& A, const Vec& x, const Vec& w, const KnownInput* ki) {
    if (x.size() != A.cols() || w.size() != A.rows())
        raise(Errc::dimension_mismatch, "plant step dimensions do not match");
    Vec next = A * x + w;
    if (ki && !ki->empty()) next += ki->state_matrix * ki->input;
    return next;
}

Vec measure(const Mat& C, const Vec& x, const Vec& v, const threat::AttackScenario& sc,
            long k, const KnownInput* ki) {
    Vec y = C * x + v;
    if (ki && !ki->empty() && ki->output_matrix.size() > 0) y += ki->output_matrix * ki->input;
    return threat::apply(sc, k, y);
}

namespace {

double err_inf(const Vec& a, const Vec& b) {
    if (a.size() == 0 || b.size() == 0) return 0.0;
    return (a - b).cwiseAbs().maxCoeff();
}

// Per-entry max of |Re| and |Im| of the modal estimation error; this is the
// coordinate system in which the fusion bound is stated.
double err_modal_inf(const CVec& est_modal, const CVec& true_modal) {
    double worst = 0.0;
    for (Eigen::Index j = 0; j < est_modal.size(); ++j) {
        cplx d = est_modal(j) - true_modal(j);
        worst = std::max({worst, std::abs(d.real()), std::abs(d.imag())});
    }
    return worst;
}

} // namespace

SimulationTrace run(const model::SystemModel& sys,
                    const std::vector<subspace::SensorDecomposition>& decs,
                    const std::vector<gains::GainDesign>& designs, double gamma,
                    const threat::AttackScenario& scenario, const SimOptions& opts,
                    const KnownInput* known_input) {
    if (!sys.raw)
        raise(Errc::invalid_parameter,
              "simulation requires a real-coordinate plant (system was supplied in modal form only)");
    const model::RawSystem& raw = *sys.raw;
    const int n = raw.n();
    const int m = raw.m();
    if (opts.horizon < 0) raise(Errc::invalid_parameter, "horizon must be nonnegative");

    std::mt19937_64 init_rng(opts.seed ^ 0x5ee5e5f1a2b3c4d5ULL);
    Vec x = opts.x0.size() > 0 ? opts.x0 : Vec(Vec::Zero(n));
    if (x.size() != n) raise(Errc::dimension_mismatch, "x0 has wrong dimension");

    Vec xhat0;
    if (opts.xhat0.size() > 0) {
        xhat0 = opts.xhat0;
        if (xhat0.size() != n) raise(Errc::dimension_mismatch, "xhat0 has wrong dimension");
    } else {
        // Perturb within the detector scale so the initialization premise of
        // the security bound holds in modal coordinates.
        double spread = gamma / (2.0 * std::max(1.0, inf_norm(sys.modal.to_modal)));
        std::uniform_real_distribution<double> unit(-1.0, 1.0);
        xhat0 = x;
        for (int i = 0; i < n; ++i) xhat0(i) += spread * unit(init_rng);
    }

    estimator::EstimatorBank bank(decs, designs, sys.modal, gamma);
    bank.init(xhat0);
    estimator::LuenbergerObserver luen(decs, designs, sys.modal);
    if (opts.with_luenberger) luen.init(xhat0);

    // Known-input feedforward, constant across the run.
    CVec state_ff;
    Vec output_ft;
    if (known_input && !known_input->empty()) {
        state_ff = sys.modal.to_modal * (known_input->state_matrix * known_input->input).cast<cplx>();
        if (known_input->output_matrix.size() > 0)
            output_ft = known_input->output_matrix * known_input->input;
    }

    NoiseSampler noise(raw.process_noise_bound, raw.measurement_noise_bound, n, m, opts.seed);

    SimulationTrace trace;
    trace.n = n;
    trace.m = m;
    trace.gamma = gamma;
    trace.thresholds = bank.thresholds();
    trace.steps.reserve(opts.horizon + 1);

    auto record_support = [&](StepRecord& rec, long k) {
        rec.attack_support = threat::support_at(scenario, k);
        rec.attack_values = Vec(static_cast<Eigen::Index>(rec.attack_support.size()));
        for (size_t s = 0; s < rec.attack_support.size(); ++s)
            rec.attack_values(static_cast<Eigen::Index>(s)) =
                threat::signal_at(scenario, k, rec.attack_support[s]);
    };

    {
        StepRecord rec;
        rec.x_true = x;
        rec.x_secure = xhat0;
        if (opts.with_luenberger) rec.x_luenberger = xhat0;
        rec.err_inf_secure = err_inf(xhat0, x);
        rec.err_inf_luenberger = opts.with_luenberger ? rec.err_inf_secure : 0.0;
        rec.err_modal_secure = err_modal_inf(sys.modal.to_modal * xhat0.cast<cplx>(),
                                             sys.modal.to_modal * x.cast<cplx>());
        rec.residues = Vec::Zero(m);
        rec.residues_true = Vec::Zero(m);
        rec.triggered.assign(m, 0);
        record_support(rec, 0);
        trace.steps.push_back(std::move(rec));
    }

    for (long k = 1; k <= opts.horizon; ++k) {
        auto [w, v] = noise.next();
        Vec y_prev = measure(raw.C, x, v, scenario, k - 1, known_input);
        x = plant_step(raw.A, x, w, known_input);

        if (!x.allFinite()) {
            trace.aborted = true;
            trace.abort_reason = "non-finite state at step " + std::to_string(k);
            break;
        }

        StepRecord rec;
        try {
            auto [fused, diag] = bank.step(y_prev, state_ff, output_ft);
            CVec x_modal = sys.modal.to_modal * x.cast<cplx>();
            rec.x_secure = fused.real_state;
            rec.err_modal_secure = err_modal_inf(fused.modal, x_modal);
            rec.imag_residue = fused.imag_residue;
            rec.objective = fused.objective;
            rec.residues = diag.residues;
            rec.residues_true = bank.residues_against(x_modal);
            rec.triggered = diag.triggered;
        } catch (const Error& e) {
            trace.aborted = true;
            trace.abort_reason = e.what();
            break;
        }
        rec.x_true = x;
        if (opts.with_luenberger) {
            rec.x_luenberger = luen.step(y_prev, state_ff, output_ft);
            rec.err_inf_luenberger = err_inf(rec.x_luenberger, x);
        }
        rec.err_inf_secure = err_inf(rec.x_secure, x);
        record_support(rec, k);

        if (!rec.x_secure.allFinite() ||
            (opts.with_luenberger && !rec.x_luenberger.allFinite())) {
            trace.aborted = true;
            trace.abort_reason = "non-finite estimate at step " + std::to_string(k);
            trace.steps.push_back(std::move(rec));
            break;
        }
        trace.steps.push_back(std::move(rec));
    }
    return trace;
}

MetricsReport metrics(const SimulationTrace& trace) {
    if (trace.steps.empty()) raise(Errc::invalid_parameter, "empty trace");
    MetricsReport rep;
    rep.gamma = trace.gamma;
    rep.thresholds = trace.thresholds;
    rep.triggers_attacked.assign(trace.m, 0);
    rep.triggers_benign.assign(trace.m, 0);

    double sum_sec = 0.0, sum_luen = 0.0;
    for (size_t k = 0; k < trace.steps.size(); ++k) {
        const StepRecord& rec = trace.steps[k];
        rep.max_err_secure = std::max(rep.max_err_secure, rec.err_inf_secure);
        rep.max_err_luenberger = std::max(rep.max_err_luenberger, rec.err_inf_luenberger);
        rep.max_err_modal_secure = std::max(rep.max_err_modal_secure, rec.err_modal_secure);
        sum_sec += rec.err_inf_secure;
        sum_luen += rec.err_inf_luenberger;
        if (k == 0) continue;

        // A trigger at step k consumed measurements from step k-1; a sensor
        // attacked at k-1 triggering at k is detection, a benign one is a
        // false trigger.
        const auto& prev_support = trace.steps[k - 1].attack_support;
        for (int i = 0; i < trace.m; ++i) {
            if (!rec.triggered[i]) continue;
            bool attacked =
                std::find(prev_support.begin(), prev_support.end(), i) != prev_support.end();
            if (attacked)
                ++rep.triggers_attacked[i];
            else {
                ++rep.triggers_benign[i];
                ++rep.false_trigger_count;
            }
            rep.resets.push_back({static_cast<long>(k), i, rec.residues(i), 0.0,
                                  trace.thresholds[i]});
        }
    }
    rep.mean_err_secure = sum_sec / static_cast<double>(trace.steps.size());
    rep.mean_err_luenberger = sum_luen / static_cast<double>(trace.steps.size());
    return rep;
}

} // namespace secest::sim
