#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "kgfilon/mass_model.hpp"
#include "kgfilon/spectral.hpp"
#include "kgfilon/types.hpp"

namespace kgfilon {

/// mu_j = int_0^h tau^(j-1) exp(i*omega*tau) dtau for j = 1, 2, 3.
///
/// The moments at a step starting at t_k are exp(i*omega*t_k) * mu_j; only
/// the phase changes from step to step.
struct OscillatoryMoments {
    Complex mu1;
    Complex mu2;
    Complex mu3;
    double omega = 0.0;
    double h = 0.0;
};

/// Below this |omega*h| the power series is used instead of the closed
/// forms (which cancel catastrophically as omega*h -> 0).
inline constexpr double kMomentSeriesThreshold = 1.0;

[[nodiscard]] OscillatoryMoments moments(double omega, double h);

/// Closed-form branch, valid for omega != 0.
[[nodiscard]] OscillatoryMoments moments_closed_form(double omega, double h);

/// mu_j = sum_m (i omega)^m h^(m+j) / (m! (m+j)), summed until the relative
/// remainder drops below 1e-17.
[[nodiscard]] OscillatoryMoments moments_series(double omega, double h);

/// Filon rule for int_0^h f(tau) exp(i*omega*tau) dtau with f replaced by the
/// quadratic matching f(0), f'(0) and f'(h).
[[nodiscard]] Complex filon_rule(Complex f0, Complex df0, Complex dfh, const OscillatoryMoments& m);

/// Moments for every term of a model at one step size.
class MomentCache {
public:
    MomentCache(const MassModel& model, double h);

    [[nodiscard]] double h() const noexcept { return h_; }
    [[nodiscard]] std::size_t size() const noexcept { return moments_.size(); }
    /// Throws if `term` has no entry.
    [[nodiscard]] const OscillatoryMoments& at(std::size_t term) const;
    /// Throws unless the cache covers `model` at step h.
    void require_compatible(const MassModel& model, double h) const;

private:
    double h_;
    std::vector<OscillatoryMoments> moments_;
};

/// Envelopes a_n and their time derivatives sampled at one time level.
struct EnvelopeLevel {
    double t = 0.0;
    bool valid = false;
    std::vector<CVector> a;
    std::vector<CVector> da;
};

/// Physical-space pieces of the two Duhamel integrals.
///
/// With S = G^{-1} sin(hG), C = cos(hG):
///   sin integral = C * psi_load + S * dpsi_load + endpoint_sin
///   cos integral = -G S * psi_load + C * dpsi_load + endpoint_cos
/// i.e. the integrals are R(h) applied to (psi_load, dpsi_load) plus
/// transform-free contributions from the tau = h end of the interval.
struct FilonAssembly {
    CVector psi_load;
    CVector dpsi_load;
    CVector endpoint_sin;
    CVector endpoint_cos;
};

/// Scratch state for the quadrature routines.
///
/// Holds the assembly buffers, two transform buffers, the Taylor-weight
/// combinations W = v1 + h v2 + c h^2 v3 and W' = v2 + 2 c h v3, and a
/// two-slot cache of envelope samples so that the end level of one step is
/// reused as the start level of the next.
class FilonWorkspace {
public:
    FilonWorkspace(const SpectralGrid& grid, const MassModel& model);

    /// Envelope samples of `model` at t; evaluated on first request.
    const EnvelopeLevel& level(const SpectralGrid& grid, const MassModel& model, double t);

    FilonAssembly assembly;
    CVector weight_h;
    CVector weight_dh;
    CVector scratch;
    SpectralWorkspace spectral;

private:
    std::uint64_t cached_model_ = 0;
    std::array<EnvelopeLevel, 2> levels_;
    std::size_t last_used_ = 1;
};

/// Builds ws.assembly for the step starting at state_k.t.
///
/// `w3` is psi'_k - psi'_{k-1} on ordinary steps (tau^2 weight 1/(2h)) and
/// psi''_0 on the first step (tau^2 weight 1/2).
void assemble_filon(const SpectralGrid& grid, const MassModel& model, const MomentCache& moments,
                    const FieldState& state_k, std::span<const Complex> w3, double h,
                    bool first_step, FilonWorkspace& ws);

/// Filon approximation of
///   int_0^h G^{-1} sin((h - tau) G) m(t_k + tau) [psi_k + tau psi'_k + q(tau) w3] dtau.
[[nodiscard]] CVector filon_sin_integral(const SpectralGrid& grid, const MassModel& model,
                                         const MomentCache& moments, const FieldState& state_k,
                                         std::span<const Complex> w3, double h, bool first_step,
                                         FilonWorkspace& ws);

/// Same as filon_sin_integral with the kernel cos((h - tau) G).
[[nodiscard]] CVector filon_cos_integral(const SpectralGrid& grid, const MassModel& model,
                                         const MomentCache& moments, const FieldState& state_k,
                                         std::span<const Complex> w3, double h, bool first_step,
                                         FilonWorkspace& ws);

enum class IntegralKernel { sin, cos };

/// Gauss-Legendre nodes and weights on [-1, 1] for the rule of the given
/// order (4, 6 or 8, i.e. 2, 3 or 4 nodes).
struct GaussLegendreRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};
[[nodiscard]] GaussLegendreRule gauss_legendre_rule(int order);

/// Same integrand as the Filon routines (trig kernel, full m(t_k + tau)
/// including its phases, Taylor polynomial) sampled at Gauss-Legendre nodes.
[[nodiscard]] CVector gauss_legendre_integral(int order, IntegralKernel kernel,
                                              const SpectralGrid& grid, const MassModel& model,
                                              const FieldState& state_k, std::span<const Complex> w3,
                                              double h, bool first_step, FilonWorkspace& ws);

/// Both kernels at once, sharing the per-node transforms.
void gauss_legendre_integrals(int order, const SpectralGrid& grid, const MassModel& model,
                              const FieldState& state_k, std::span<const Complex> w3, double h,
                              bool first_step, FilonWorkspace& ws, std::span<Complex> sin_out,
                              std::span<Complex> cos_out);

}  // namespace kgfilon
