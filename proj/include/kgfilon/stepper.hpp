#pragma once

#include <functional>
#include <optional>

#include "kgfilon/filon.hpp"
#include "kgfilon/mass_model.hpp"
#include "kgfilon/spectral.hpp"

namespace kgfilon {

/// How the Duhamel integrals of a step are approximated.
enum class Quadrature { filon, gl4, gl6, gl8 };

/// Sign in front of m(t0) psi_0 when recovering psi''_0 from the equation
/// psi'' = Laplacian psi + m psi. `minus` is wrong on purpose and exists
/// only as a negative control for the convergence tests.
enum class CurvatureSign { plus, minus };

struct StepperConfig {
    double h = 0.0;
    long steps = 0;  ///< K; the run ends at t0 + K*h
    Quadrature quadrature = Quadrature::filon;
    /// For real-valued problems, bound on max |Im psi|, |Im psi'| reported
    /// by RunDiagnostics. Negative means "not declared real".
    double real_tolerance = -1.0;
    CurvatureSign curvature_sign = CurvatureSign::plus;

    void validate() const;
};

/// (psi_k, psi'_k) plus psi'_{k-1}, which the Taylor closure needs.
struct StepperState {
    FieldState current;
    std::optional<CVector> prev_dpsi;  ///< present exactly when k >= 1
    long k = 0;
    double t0 = 0.0;
};

struct RunDiagnostics {
    long steps = 0;
    double max_imag = 0.0;
    bool real_tolerance_exceeded = false;
};

/// Called with (k, state at t_k), starting with k = 0.
using StepObserver = std::function<void(long, const FieldState&)>;

/// psi''_0 = Laplacian psi_0 + m(t0) psi_0 (Laplacian applied spectrally).
[[nodiscard]] CVector second_derivative_initial(const SpectralGrid& grid, const MassModel& model,
                                                const FieldState& state0,
                                                CurvatureSign sign = CurvatureSign::plus);

/// Third-order exponential integrator with Filon (or Gauss-Legendre)
/// quadrature of the Duhamel integrals.
///
/// Each step propagates (psi_k, psi'_k) with R(h) and adds the two
/// integrals of R(h - tau)[0; m(t_k + tau) P_k(tau)] over [0, h], where
/// P_k(tau) = psi_k + tau psi'_k + q tau^2 w3 is the Taylor closure:
/// w3 = psi''_0 with q = 1/2 on the first step, and
/// w3 = psi'_k - psi'_{k-1} with q = 1/(2h) afterwards.
///
/// The recurrence is serial; one instance must not be driven from two
/// threads. Separate instances are independent.
class Xi3Stepper {
public:
    Xi3Stepper(SpectralGrid grid, MassModel model, StepperConfig cfg);

    [[nodiscard]] const StepperConfig& config() const noexcept { return cfg_; }
    [[nodiscard]] const SpectralGrid& grid() const noexcept { return grid_; }
    [[nodiscard]] const MassModel& model() const noexcept { return model_; }

    /// First step from the initial state; returns the state at k = 1.
    [[nodiscard]] StepperState start(const FieldState& state0);
    /// One ordinary step, k -> k + 1. Requires k >= 1.
    void step(StepperState& s);
    /// `n` further steps (starting the recurrence if s.k == 0).
    void advance(StepperState& s, long n, const StepObserver& observer = {},
                 RunDiagnostics* diag = nullptr);
    /// cfg.steps steps from state0; returns the state at t0 + K*h.
    [[nodiscard]] FieldState run(const FieldState& state0, const StepObserver& observer = {},
                                 RunDiagnostics* diag = nullptr);

private:
    void take_step(StepperState& s, std::span<const Complex> w3, bool first_step);
    void after_step(const StepperState& s, const StepObserver& observer, RunDiagnostics* diag) const;

    SpectralGrid grid_;
    MassModel model_;
    StepperConfig cfg_;
    MomentCache moments_;
    PropagatorSymbols propagator_;
    FilonWorkspace ws_;
    CVector next_psi_;
    CVector next_dpsi_;
    CVector w3_;
    CVector gl_sin_;
    CVector gl_cos_;
};

[[nodiscard]] StepperState step_first(const SpectralGrid& grid, const MassModel& model,
                                      const StepperConfig& cfg, const FieldState& state0);
[[nodiscard]] StepperState step(const SpectralGrid& grid, const MassModel& model,
                                const StepperConfig& cfg, const StepperState& s);
[[nodiscard]] FieldState run(const SpectralGrid& grid, const MassModel& model,
                             const StepperConfig& cfg, const FieldState& state0,
                             const StepObserver& observer = {}, RunDiagnostics* diag = nullptr);

}  // namespace kgfilon
