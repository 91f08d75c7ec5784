#include "kgfilon/stepper.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace kgfilon {

namespace {

int gauss_order(Quadrature q) {
    switch (q) {
        case Quadrature::gl4: return 4;
        case Quadrature::gl6: return 6;
        case Quadrature::gl8: return 8;
        case Quadrature::filon: break;
    }
    return 0;
}

}  // namespace

void StepperConfig::validate() const {
    if (!(h > 0.0) || !std::isfinite(h)) throw InvalidArgument("StepperConfig: h must be positive");
    if (steps < 0) throw InvalidArgument("StepperConfig: step count must be nonnegative");
}

CVector second_derivative_initial(const SpectralGrid& grid, const MassModel& model,
                                  const FieldState& state0, CurvatureSign sign) {
    grid.require_size(state0.psi.size(), "second_derivative_initial");
    CVector out = apply_laplacian(grid, state0.psi);
    const CVector m = evaluate(model, grid, state0.t);
    const double s = sign == CurvatureSign::plus ? 1.0 : -1.0;
    for (std::size_t j = 0; j < out.size(); ++j) out[j] += s * m[j] * state0.psi[j];
    return out;
}

Xi3Stepper::Xi3Stepper(SpectralGrid grid, MassModel model, StepperConfig cfg)
    : grid_(std::move(grid)),
      model_(std::move(model)),
      cfg_((cfg.validate(), cfg)),
      moments_(model_, cfg_.h),
      propagator_(make_propagator_symbols(grid_, cfg_.h)),
      ws_(grid_, model_) {
    const auto m = static_cast<std::size_t>(grid_.size());
    next_psi_.resize(m);
    next_dpsi_.resize(m);
    w3_.resize(m);
    gl_sin_.resize(m);
    gl_cos_.resize(m);
}

void Xi3Stepper::take_step(StepperState& s, std::span<const Complex> w3, bool first_step) {
    const FieldState& cur = s.current;
    const double h = cfg_.h;

    if (cfg_.quadrature == Quadrature::filon) {
        // Both integrals are R(h)(psi_load, dpsi_load) plus endpoint terms, so
        // they fold into the free flight of the shifted state.
        assemble_filon(grid_, model_, moments_, cur, w3, h, first_step, ws_);
        const auto& as = ws_.assembly;
        for (std::size_t j = 0; j < next_psi_.size(); ++j) {
            next_psi_[j] = cur.psi[j] + as.psi_load[j];
            next_dpsi_[j] = cur.dpsi[j] + as.dpsi_load[j];
        }
        free_propagate(grid_, propagator_, next_psi_, next_dpsi_, ws_.spectral);
        for (std::size_t j = 0; j < next_psi_.size(); ++j) {
            next_psi_[j] += as.endpoint_sin[j];
            next_dpsi_[j] += as.endpoint_cos[j];
        }
    } else {
        gauss_legendre_integrals(gauss_order(cfg_.quadrature), grid_, model_, cur, w3, h, first_step,
                                 ws_, gl_sin_, gl_cos_);
        std::copy(cur.psi.begin(), cur.psi.end(), next_psi_.begin());
        std::copy(cur.dpsi.begin(), cur.dpsi.end(), next_dpsi_.begin());
        free_propagate(grid_, propagator_, next_psi_, next_dpsi_, ws_.spectral);
        for (std::size_t j = 0; j < next_psi_.size(); ++j) {
            next_psi_[j] += gl_sin_[j];
            next_dpsi_[j] += gl_cos_[j];
        }
    }

    if (!s.prev_dpsi) s.prev_dpsi.emplace();
    s.prev_dpsi->swap(s.current.dpsi);
    s.current.psi.swap(next_psi_);
    s.current.dpsi.swap(next_dpsi_);
    if (next_dpsi_.size() != s.current.dpsi.size()) next_dpsi_.resize(s.current.dpsi.size());
    if (next_psi_.size() != s.current.psi.size()) next_psi_.resize(s.current.psi.size());
    ++s.k;
    s.current.t = s.t0 + static_cast<double>(s.k) * h;
}

StepperState Xi3Stepper::start(const FieldState& state0) {
    grid_.require_size(state0.psi.size(), "Xi3Stepper::start");
    grid_.require_size(state0.dpsi.size(), "Xi3Stepper::start");
    StepperState s;
    s.current = state0;
    s.t0 = state0.t;
    s.k = 0;
    const CVector curvature = second_derivative_initial(grid_, model_, state0, cfg_.curvature_sign);
    take_step(s, curvature, /*first_step=*/true);
    return s;
}

void Xi3Stepper::step(StepperState& s) {
    if (s.k < 1 || !s.prev_dpsi) throw InvalidArgument("Xi3Stepper::step: requires k >= 1 and psi'_{k-1}");
    const auto& prev = *s.prev_dpsi;
    for (std::size_t j = 0; j < w3_.size(); ++j) w3_[j] = s.current.dpsi[j] - prev[j];
    take_step(s, w3_, /*first_step=*/false);
}

void Xi3Stepper::after_step(const StepperState& s, const StepObserver& observer,
                            RunDiagnostics* diag) const {
    if (!all_finite(s.current.psi) || !all_finite(s.current.dpsi))
        throw NonFiniteState(s.k, "non-finite state at step " + std::to_string(s.k));
    if (diag) {
        diag->steps = s.k;
        if (cfg_.real_tolerance >= 0.0) {
            diag->max_imag = std::max({diag->max_imag, max_abs_imag(s.current.psi),
                                       max_abs_imag(s.current.dpsi)});
            diag->real_tolerance_exceeded = diag->max_imag > cfg_.real_tolerance;
        }
    }
    if (observer) observer(s.k, s.current);
}

void Xi3Stepper::advance(StepperState& s, long n, const StepObserver& observer, RunDiagnostics* diag) {
    for (long i = 0; i < n; ++i) {
        if (s.k == 0)
            s = start(s.current);
        else
            step(s);
        after_step(s, observer, diag);
    }
}

FieldState Xi3Stepper::run(const FieldState& state0, const StepObserver& observer, RunDiagnostics* diag) {
    StepperState s;
    s.current = state0;
    s.t0 = state0.t;
    if (observer) observer(0, s.current);
    advance(s, cfg_.steps, observer, diag);
    return s.current;
}

StepperState step_first(const SpectralGrid& grid, const MassModel& model, const StepperConfig& cfg,
                        const FieldState& state0) {
    Xi3Stepper stepper(grid, model, cfg);
    return stepper.start(state0);
}

StepperState step(const SpectralGrid& grid, const MassModel& model, const StepperConfig& cfg,
                  const StepperState& s) {
    Xi3Stepper stepper(grid, model, cfg);
    StepperState out = s;
    stepper.step(out);
    return out;
}

FieldState run(const SpectralGrid& grid, const MassModel& model, const StepperConfig& cfg,
               const FieldState& state0, const StepObserver& observer, RunDiagnostics* diag) {
    Xi3Stepper stepper(grid, model, cfg);
    return stepper.run(state0, observer, diag);
}

}  // namespace kgfilon
