#include "secest/estimator.hpp"

#include <algorithm>
#include <cmath>

#include "secest/errors.hpp"

namespace secest::estimator {

namespace {

// Median with even counts resolved as the midpoint of the two central order
// statistics. `values` is consumed.
double median_inplace(std::vector<double>& values) {
    const size_t c = values.size();
    const size_t mid = c / 2;
    std::nth_element(values.begin(), values.begin() + mid, values.end());
    double upper = values[mid];
    if (c % 2 == 1) return upper;
    double lower = *std::max_element(values.begin(), values.begin() + mid);
    return 0.5 * (lower + upper);
}

double complex_l1(const CVec& v) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < v.size(); ++i)
        s += std::abs(v(i).real()) + std::abs(v(i).imag());
    return s;
}

} // namespace

std::pair<CVec, double> fuse_modal(const std::vector<CVec>& etas,
                                   const std::vector<SensorDecomposition>& decs, int n) {
    if (etas.size() != decs.size())
        raise(Errc::dimension_mismatch, "local states and decompositions differ in length");

    CVec fused(n);
    std::vector<double> re, im;
    for (int j = 0; j < n; ++j) {
        re.clear();
        im.clear();
        for (size_t i = 0; i < decs.size(); ++i) {
            if (decs[i].dim() == 0) continue; // dead sensors stay out of fusion
            int pos = decs[i].position[j];
            if (pos < 0) continue;
            re.push_back(etas[i](pos).real());
            im.push_back(etas[i](pos).imag());
        }
        if (re.empty())
            raise(Errc::empty_coverage,
                  "state index " + std::to_string(j) + " has no covering sensor");
        fused(j) = cplx(median_inplace(re), median_inplace(im));
    }

    double objective = 0.0;
    for (size_t i = 0; i < decs.size(); ++i) {
        if (decs[i].dim() == 0) continue;
        objective += complex_l1(etas[i] - decs[i].project(fused));
    }
    return {fused, objective};
}

CVec observer_step(const CVec& eta_post, double y, const GainDesign& gd,
                   const SensorDecomposition& dec, const CVec& feedforward) {
    if (!std::isfinite(y))
        raise(Errc::non_finite_input, "non-finite measurement for sensor " +
                                          std::to_string(dec.sensor));
    if (dec.dim() == 0) return CVec();
    CVec next = (dec.reduced_dynamics - gd.gain * dec.reduced_output) * eta_post +
                gd.gain * cplx(y, 0.0);
    if (feedforward.size() > 0) next += feedforward;
    return next;
}

void detect_and_reset(LocalObserverState& st, const CVec& fused_modal,
                      const SensorDecomposition& dec, double gamma) {
    if (dec.dim() == 0) {
        st.last_residue = 0.0;
        st.triggered = false;
        return;
    }
    CVec projected = dec.project(fused_modal);
    st.last_residue = (st.eta - projected).norm();
    double threshold = (std::sqrt(static_cast<double>(dec.dim())) + 1.0) * gamma;
    if (st.last_residue > threshold) { // strict, per the detection rule
        st.eta_post = projected;
        st.triggered = true;
    } else {
        st.eta_post = st.eta;
        st.triggered = false;
    }
}

EstimatorBank::EstimatorBank(std::vector<SensorDecomposition> decs,
                             std::vector<GainDesign> designs, model::ModalSystem modal,
                             double gamma)
    : decs_(std::move(decs)), designs_(std::move(designs)), modal_(std::move(modal)),
      gamma_(gamma), n_(modal_.n()) {
    if (decs_.size() != designs_.size())
        raise(Errc::dimension_mismatch, "decompositions and designs differ in length");
    if (static_cast<int>(decs_.size()) != modal_.m())
        raise(Errc::dimension_mismatch, "decomposition count does not match sensor count");
    if (!(gamma_ > 0.0)) raise(Errc::invalid_parameter, "gamma must be positive");
    thresholds_.resize(decs_.size());
    closed_loop_.resize(decs_.size());
    locals_.resize(decs_.size());
    for (size_t i = 0; i < decs_.size(); ++i) {
        thresholds_[i] = (std::sqrt(static_cast<double>(decs_[i].dim())) + 1.0) * gamma_;
        if (decs_[i].dim() > 0) {
            if (designs_[i].gain.size() != decs_[i].dim())
                raise(Errc::dimension_mismatch,
                      "gain length does not match subspace dimension for sensor " +
                          std::to_string(i));
            closed_loop_[i] =
                decs_[i].reduced_dynamics - designs_[i].gain * decs_[i].reduced_output;
        }
    }
}

void EstimatorBank::init(const Vec& xhat0) {
    if (xhat0.size() != n_)
        raise(Errc::dimension_mismatch, "initial estimate has wrong dimension");
    init_modal(modal_.to_modal * xhat0.cast<cplx>());
}

void EstimatorBank::init_modal(const CVec& xhat0_modal) {
    if (xhat0_modal.size() != n_)
        raise(Errc::dimension_mismatch, "initial modal estimate has wrong dimension");
    for (size_t i = 0; i < decs_.size(); ++i) {
        locals_[i].eta_post = decs_[i].project(xhat0_modal);
        locals_[i].eta = locals_[i].eta_post;
        locals_[i].last_residue = 0.0;
        locals_[i].triggered = false;
    }
}

std::pair<FusedEstimate, StepDiagnostics> EstimatorBank::step(const Vec& y,
                                                              const CVec& state_ff,
                                                              const Vec& output_ft) {
    if (y.size() != static_cast<Eigen::Index>(decs_.size()))
        raise(Errc::dimension_mismatch, "measurement vector has wrong dimension");

    // Predict: local observers consume the previous step's measurements.
    std::vector<CVec> etas(decs_.size());
    for (size_t i = 0; i < decs_.size(); ++i) {
        double yi = y(static_cast<Eigen::Index>(i));
        if (output_ft.size() > 0) yi -= output_ft(static_cast<Eigen::Index>(i));
        if (!std::isfinite(yi))
            raise(Errc::non_finite_input,
                  "non-finite measurement for sensor " + std::to_string(i));
        if (decs_[i].dim() == 0) continue;
        etas[i] = closed_loop_[i] * locals_[i].eta_post + designs_[i].gain * cplx(yi, 0.0);
        if (state_ff.size() > 0) etas[i] += decs_[i].project(state_ff);
        locals_[i].eta = etas[i];
    }

    // Fuse.
    auto [fused_modal, objective] = fuse_modal(etas, decs_, n_);

    FusedEstimate fused;
    fused.modal = fused_modal;
    fused.objective = objective;
    CVec back = modal_.from_modal * fused_modal;
    fused.real_state = back.real();
    fused.imag_residue = back.imag().size() > 0 ? back.imag().cwiseAbs().maxCoeff() : 0.0;

    // Detect and reset against the fused estimate.
    StepDiagnostics diag;
    diag.residues = Vec::Zero(static_cast<Eigen::Index>(decs_.size()));
    diag.triggered.assign(decs_.size(), 0);
    for (size_t i = 0; i < decs_.size(); ++i) {
        detect_and_reset(locals_[i], fused_modal, decs_[i], gamma_);
        diag.residues(static_cast<Eigen::Index>(i)) = locals_[i].last_residue;
        diag.triggered[i] = locals_[i].triggered ? 1 : 0;
    }
    return {std::move(fused), std::move(diag)};
}

Vec EstimatorBank::residues_against(const CVec& reference_modal) const {
    Vec out = Vec::Zero(static_cast<Eigen::Index>(decs_.size()));
    for (size_t i = 0; i < decs_.size(); ++i) {
        if (decs_[i].dim() == 0) continue;
        out(static_cast<Eigen::Index>(i)) =
            (locals_[i].eta - decs_[i].project(reference_modal)).norm();
    }
    return out;
}

LuenbergerObserver::LuenbergerObserver(std::vector<SensorDecomposition> decs,
                                       std::vector<GainDesign> designs,
                                       model::ModalSystem modal)
    : decs_(std::move(decs)), designs_(std::move(designs)), modal_(std::move(modal)) {
    if (decs_.size() != designs_.size())
        raise(Errc::dimension_mismatch, "decompositions and designs differ in length");
    state_ = CVec::Zero(modal_.n());
}

void LuenbergerObserver::init(const Vec& xhat0) {
    if (xhat0.size() != modal_.n())
        raise(Errc::dimension_mismatch, "initial estimate has wrong dimension");
    state_ = modal_.to_modal * xhat0.cast<cplx>();
}

Vec LuenbergerObserver::step(const Vec& y, const CVec& state_ff, const Vec& output_ft) {
    CVec next = modal_.dynamics * state_;
    if (state_ff.size() > 0) next += state_ff;
    for (size_t i = 0; i < decs_.size(); ++i) {
        if (decs_[i].dim() == 0) continue;
        double yi = y(static_cast<Eigen::Index>(i));
        if (output_ft.size() > 0) yi -= output_ft(static_cast<Eigen::Index>(i));
        cplx innovation = cplx(yi, 0.0) - (modal_.output.row(decs_[i].sensor) * state_)(0);
        next += decs_[i].lift(designs_[i].gain * innovation);
    }
    state_ = next;
    return state_real();
}

Vec LuenbergerObserver::state_real() const { return (modal_.from_modal * state_).real(); }

} // namespace secest::estimator
