#pragma once

#include "kgfilon/mass_model.hpp"
#include "kgfilon/spectral.hpp"
#include "kgfilon/stepper.hpp"

namespace kgfilon {

/// Classical explicit Runge-Kutta on the first-order system
///   psi' = dpsi,  dpsi' = Laplacian psi + m(t) psi.
/// Order 2 is the explicit midpoint rule, order 4 the classical tableau.
class RungeKutta {
public:
    RungeKutta(SpectralGrid grid, MassModel model, int order);

    [[nodiscard]] int order() const noexcept { return order_; }
    [[nodiscard]] FieldState step(const FieldState& state, double h);
    [[nodiscard]] FieldState integrate(const FieldState& state0, double h, long steps);

private:
    void rhs(double t, const CVector& psi, const CVector& dpsi, CVector& out_psi, CVector& out_dpsi);

    SpectralGrid grid_;
    MassModel model_;
    int order_;
    SpectralWorkspace ws_;
    CVector lap_;
    std::vector<CVector> k_psi_;
    std::vector<CVector> k_dpsi_;
    CVector tmp_psi_;
    CVector tmp_dpsi_;
};

[[nodiscard]] FieldState rk_step(int order, const SpectralGrid& grid, const MassModel& model,
                                 const FieldState& state, double h);

/// Largest stable step c / max_symbol for the free wave part: c = 2*sqrt(2)
/// for RK4 (imaginary-axis stability interval). The midpoint rule has no
/// imaginary-axis stability interval; its nominal c = 1 caps the per-step
/// amplification of the top mode at 1.25.
[[nodiscard]] double rk_stability_limit(int order, const SpectralGrid& grid);

/// Exact solution for m(x,t) = m0: each mode oscillates with frequency
/// sqrt(g^2 - m0). Requires g^2 - m0 >= 0 for every mode (a zero
/// frequency evolves as psi + t psi').
[[nodiscard]] FieldState constant_mass_exact(const SpectralGrid& grid, double m0, double t,
                                             const FieldState& state0);

enum class ReferenceMethod { rk2, rk4, xi3_fine };

struct ReferenceSpec {
    ReferenceMethod method = ReferenceMethod::xi3_fine;
    long steps = 100000;
    /// Max l2 disagreement between xi3_fine and RK4 on the low-frequency
    /// truncation of the model. Zero or negative disables the cross-check.
    double cross_check_tolerance = 1e-8;
    /// Terms with |omega| above this are dropped for the cross-check.
    double cross_check_omega_cutoff = 10.0;
};

/// Fine-step solution at t_final starting from state0 (at state0.t).
///
/// For xi3_fine with a positive tolerance, the same step count is also run
/// with xi3 and RK4 on model.truncated(cutoff); a disagreement above the
/// tolerance throws CrossCheckFailure. RK steps (the rk methods and the
/// cross-check) above rk_stability_limit throw InvalidArgument.
[[nodiscard]] FieldState reference_solution(const SpectralGrid& grid, const MassModel& model,
                                            double t_final, const ReferenceSpec& spec,
                                            const FieldState& state0);

/// The cross-check alone; returns the l2 disagreement.
[[nodiscard]] double reference_cross_check(const SpectralGrid& grid, const MassModel& model,
                                           double t_final, const ReferenceSpec& spec,
                                           const FieldState& state0);

}  // namespace kgfilon
