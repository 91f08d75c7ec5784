#pragma once

#include <memory>
#include <span>
#include <vector>

#include "kgfilon/fft.hpp"
#include "kgfilon/types.hpp"

namespace kgfilon {

/// Periodic Fourier collocation grid on [x0, x1).
///
/// Nodes are x_j = x0 + j*dx, j = 0..M-1, with dx = (x1 - x0)/M; x1 itself
/// is excluded. symbols()[j] holds g = |2*pi*k/(x1 - x0)| for the wavenumber
/// k stored at FFT index j (k = j for j < M/2, k = j - M otherwise), so
/// index 0 is the constant mode and index M/2 is the Nyquist mode
/// k = -M/2 with g = pi*M/(x1 - x0). g^2 is the symbol of -Laplacian.
///
/// Copies share the immutable node/symbol tables and the FFT plans.
class SpectralGrid {
public:
    SpectralGrid(double x0, double x1, int m);

    [[nodiscard]] double x0() const noexcept { return data_->x0; }
    [[nodiscard]] double x1() const noexcept { return data_->x1; }
    [[nodiscard]] double length() const noexcept { return data_->x1 - data_->x0; }
    [[nodiscard]] double dx() const noexcept { return length() / data_->m; }
    [[nodiscard]] int size() const noexcept { return data_->m; }
    [[nodiscard]] std::span<const double> nodes() const noexcept { return data_->nodes; }
    [[nodiscard]] std::span<const double> symbols() const noexcept { return data_->symbols; }
    [[nodiscard]] double max_symbol() const noexcept;
    /// Signed wavenumber stored at FFT index j.
    [[nodiscard]] int wavenumber(int j) const noexcept;
    [[nodiscard]] const Fft& fft() const noexcept { return *data_->fft; }

    void require_size(std::size_t n, const char* where) const;

private:
    struct Data {
        double x0;
        double x1;
        int m;
        std::vector<double> nodes;
        std::vector<double> symbols;
        std::unique_ptr<Fft> fft;
    };
    std::shared_ptr<const Data> data_;
};

[[nodiscard]] SpectralGrid build_grid(double x0, double x1, int m);

/// psi and dpsi sampled on the grid nodes at time t.
struct FieldState {
    CVector psi;
    CVector dpsi;
    double t = 0.0;
};

enum class OperatorKind {
    cos,          ///< cos(tG)
    sinc_scaled,  ///< G^{-1} sin(tG), evaluated as t*sinc(tG)
    g_sin,        ///< G sin(tG)
};

/// t*sin(t*g)/(t*g), finite for g = 0 (value t).
[[nodiscard]] double scaled_sinc(double t, double g) noexcept;

/// Per-mode multiplier of the operator function `kind` at symbol g.
[[nodiscard]] double operator_multiplier(OperatorKind kind, double t, double g) noexcept;

/// Multiplier tables of R(t) for one fixed t, indexed like the FFT output.
struct PropagatorSymbols {
    double t = 0.0;
    std::vector<double> cos;
    std::vector<double> sinc_scaled;
    std::vector<double> g_sin;
};

[[nodiscard]] PropagatorSymbols make_propagator_symbols(const SpectralGrid& grid, double t);

/// Scratch buffers for the transform-space routines. Contents carry no
/// meaning between calls; one workspace per thread.
struct SpectralWorkspace {
    explicit SpectralWorkspace(int m = 0);
    void resize(int m);
    CVector a;
    CVector b;
};

[[nodiscard]] CVector apply_operator_function(const SpectralGrid& grid, OperatorKind kind, double t,
                                              std::span<const Complex> v);

void apply_operator_function(const SpectralGrid& grid, OperatorKind kind, double t,
                             std::span<const Complex> v, std::span<Complex> out,
                             SpectralWorkspace& ws);

/// R(t) applied to (psi, dpsi); time advanced by t.
[[nodiscard]] FieldState free_propagator(const SpectralGrid& grid, double t, const FieldState& state);

/// In-place R(t) using precomputed multiplier tables.
void free_propagate(const SpectralGrid& grid, const PropagatorSymbols& sym, CVector& psi,
                    CVector& dpsi, SpectralWorkspace& ws);

/// Spectral Laplacian, i.e. multiplication by -g^2 in transform space.
[[nodiscard]] CVector apply_laplacian(const SpectralGrid& grid, std::span<const Complex> v);
void apply_laplacian(const SpectralGrid& grid, std::span<const Complex> v, std::span<Complex> out,
                     SpectralWorkspace& ws);

/// Unweighted Euclidean norm over nodes.
[[nodiscard]] double l2_norm(std::span<const Complex> v) noexcept;
[[nodiscard]] double l2_distance(std::span<const Complex> a, std::span<const Complex> b);
[[nodiscard]] double max_abs_imag(std::span<const Complex> v) noexcept;
[[nodiscard]] bool all_finite(std::span<const Complex> v) noexcept;

/// Samples f at the grid nodes.
template <typename F>
[[nodiscard]] CVector sample(const SpectralGrid& grid, F&& f) {
    CVector out;
    out.reserve(static_cast<std::size_t>(grid.size()));
    for (double x : grid.nodes()) out.emplace_back(f(x));
    return out;
}

}  // namespace kgfilon
