#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "kgfilon/spectral.hpp"
#include "kgfilon/types.hpp"

namespace kgfilon {

/// Envelope sampler: values of a(x_j, t) (or its time derivative) on the nodes.
using EnvelopeFn = std::function<CVector(const SpectralGrid&, double t)>;

/// One modulated component a(x,t) * exp(i*omega*t) of the mass.
///
/// `envelope_dt` must be the exact time derivative of `envelope`; the Filon
/// assembly evaluates it at the step endpoints and never differences
/// numerically.
struct MassTerm {
    double omega = 0.0;
    EnvelopeFn envelope;
    EnvelopeFn envelope_dt;

    /// Time-independent envelope a(x); derivative is identically zero.
    static MassTerm stationary(double omega, std::function<Complex(double)> profile);

    /// Separable envelope a(x,t) = profile(x) * amplitude(t).
    static MassTerm separable(double omega, std::function<Complex(double)> profile,
                              std::function<Complex(double)> amplitude,
                              std::function<Complex(double)> amplitude_dt);
};

/// m(x,t) = sum_n a_n(x,t) exp(i*omega_n*t).
class MassModel {
public:
    explicit MassModel(std::vector<MassTerm> terms);

    [[nodiscard]] std::span<const MassTerm> terms() const noexcept { return terms_; }
    [[nodiscard]] std::size_t size() const noexcept { return terms_.size(); }
    /// max_n |omega_n|
    [[nodiscard]] double omega_max() const noexcept { return omega_max_; }
    /// Nonzero identity shared by copies; distinct for separately built models.
    [[nodiscard]] std::uint64_t id() const noexcept { return id_; }

    /// Model keeping only the terms with |omega| <= cutoff. A model with no
    /// remaining terms becomes the zero model.
    [[nodiscard]] MassModel truncated(double cutoff) const;

    /// Single omega = 0 term with zero envelope.
    static MassModel zero();

private:
    std::vector<MassTerm> terms_;
    double omega_max_ = 0.0;
    std::uint64_t id_ = 0;
};

/// Pointwise m(x_j, t).
[[nodiscard]] CVector evaluate(const MassModel& model, const SpectralGrid& grid, double t);

/// -(1 + cos(omega t)) x^2 as terms (0, -x^2), (+omega, -x^2/2), (-omega, -x^2/2).
[[nodiscard]] MassModel preset_example1(double omega);

/// -sum_{n=0}^{5} (1 + cos(10^n t)) x^2: one omega = 0 term -6x^2 and the
/// conjugate pairs (+-10^n, -x^2/2).
[[nodiscard]] MassModel preset_example2();

/// m(x,t) = m0 everywhere.
[[nodiscard]] MassModel preset_constant(double m0);

}  // namespace kgfilon
