#include "kgfilon/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace kgfilon {

SpectralGrid::SpectralGrid(double x0, double x1, int m) {
    if (!(std::isfinite(x0) && std::isfinite(x1)) || !(x1 > x0))
        throw InvalidArgument("build_grid: require finite x0 < x1");
    if (m < 4 || m % 2 != 0)
        throw InvalidArgument("build_grid: M must be even and >= 4, got " + std::to_string(m));

    auto d = std::make_shared<Data>();
    d->x0 = x0;
    d->x1 = x1;
    d->m = m;
    const double len = x1 - x0;
    const double dx = len / m;
    d->nodes.resize(static_cast<std::size_t>(m));
    d->symbols.resize(static_cast<std::size_t>(m));
    for (int j = 0; j < m; ++j) {
        d->nodes[static_cast<std::size_t>(j)] = x0 + j * dx;
        const int k = j < m / 2 ? j : j - m;
        d->symbols[static_cast<std::size_t>(j)] = std::abs(2.0 * std::numbers::pi * k / len);
    }
    d->fft = std::make_unique<Fft>(m);
    data_ = std::move(d);
}

double SpectralGrid::max_symbol() const noexcept {
    return std::numbers::pi * data_->m / length();
}

int SpectralGrid::wavenumber(int j) const noexcept {
    return j < data_->m / 2 ? j : j - data_->m;
}

void SpectralGrid::require_size(std::size_t n, const char* where) const {
    if (n != static_cast<std::size_t>(data_->m))
        throw InvalidArgument(std::string(where) + ": length " + std::to_string(n) +
                              " does not match grid size " + std::to_string(data_->m));
}

SpectralGrid build_grid(double x0, double x1, int m) { return SpectralGrid(x0, x1, m); }

double scaled_sinc(double t, double g) noexcept {
    const double x = t * g;
    if (std::abs(x) < 1e-4) {
        const double x2 = x * x;
        return t * (1.0 - x2 / 6.0 * (1.0 - x2 / 20.0));
    }
    return std::sin(x) / g;
}

double operator_multiplier(OperatorKind kind, double t, double g) noexcept {
    switch (kind) {
        case OperatorKind::cos: return std::cos(t * g);
        case OperatorKind::sinc_scaled: return scaled_sinc(t, g);
        case OperatorKind::g_sin: return g * std::sin(t * g);
    }
    return 0.0;
}

PropagatorSymbols make_propagator_symbols(const SpectralGrid& grid, double t) {
    PropagatorSymbols s;
    s.t = t;
    const auto g = grid.symbols();
    s.cos.resize(g.size());
    s.sinc_scaled.resize(g.size());
    s.g_sin.resize(g.size());
    for (std::size_t j = 0; j < g.size(); ++j) {
        s.cos[j] = operator_multiplier(OperatorKind::cos, t, g[j]);
        s.sinc_scaled[j] = operator_multiplier(OperatorKind::sinc_scaled, t, g[j]);
        s.g_sin[j] = operator_multiplier(OperatorKind::g_sin, t, g[j]);
    }
    return s;
}

SpectralWorkspace::SpectralWorkspace(int m) { resize(m); }

void SpectralWorkspace::resize(int m) {
    a.assign(static_cast<std::size_t>(m), Complex{});
    b.assign(static_cast<std::size_t>(m), Complex{});
}

void apply_operator_function(const SpectralGrid& grid, OperatorKind kind, double t,
                             std::span<const Complex> v, std::span<Complex> out,
                             SpectralWorkspace& ws) {
    grid.require_size(v.size(), "apply_operator_function");
    grid.require_size(out.size(), "apply_operator_function");
    if (ws.a.size() != v.size()) ws.resize(grid.size());
    grid.fft().forward(v, ws.a);
    const auto g = grid.symbols();
    for (std::size_t j = 0; j < g.size(); ++j) ws.a[j] *= operator_multiplier(kind, t, g[j]);
    grid.fft().inverse(ws.a, out);
}

CVector apply_operator_function(const SpectralGrid& grid, OperatorKind kind, double t,
                                std::span<const Complex> v) {
    SpectralWorkspace ws(grid.size());
    CVector out(v.size());
    apply_operator_function(grid, kind, t, v, out, ws);
    return out;
}

void free_propagate(const SpectralGrid& grid, const PropagatorSymbols& sym, CVector& psi,
                    CVector& dpsi, SpectralWorkspace& ws) {
    grid.require_size(psi.size(), "free_propagator");
    grid.require_size(dpsi.size(), "free_propagator");
    if (ws.a.size() != psi.size()) ws.resize(grid.size());
    grid.fft().forward(psi, ws.a);
    grid.fft().forward(dpsi, ws.b);
    for (std::size_t j = 0; j < psi.size(); ++j) {
        const Complex p = ws.a[j];
        const Complex q = ws.b[j];
        ws.a[j] = sym.cos[j] * p + sym.sinc_scaled[j] * q;
        ws.b[j] = -sym.g_sin[j] * p + sym.cos[j] * q;
    }
    grid.fft().inverse(ws.a, psi);
    grid.fft().inverse(ws.b, dpsi);
}

FieldState free_propagator(const SpectralGrid& grid, double t, const FieldState& state) {
    FieldState out = state;
    SpectralWorkspace ws(grid.size());
    free_propagate(grid, make_propagator_symbols(grid, t), out.psi, out.dpsi, ws);
    out.t = state.t + t;
    return out;
}

void apply_laplacian(const SpectralGrid& grid, std::span<const Complex> v, std::span<Complex> out,
                     SpectralWorkspace& ws) {
    grid.require_size(v.size(), "apply_laplacian");
    grid.require_size(out.size(), "apply_laplacian");
    if (ws.a.size() != v.size()) ws.resize(grid.size());
    grid.fft().forward(v, ws.a);
    const auto g = grid.symbols();
    for (std::size_t j = 0; j < g.size(); ++j) ws.a[j] *= -(g[j] * g[j]);
    grid.fft().inverse(ws.a, out);
}

CVector apply_laplacian(const SpectralGrid& grid, std::span<const Complex> v) {
    SpectralWorkspace ws(grid.size());
    CVector out(v.size());
    apply_laplacian(grid, v, out, ws);
    return out;
}

double l2_norm(std::span<const Complex> v) noexcept {
    double s = 0.0;
    for (const auto& z : v) s += std::norm(z);
    return std::sqrt(s);
}

double l2_distance(std::span<const Complex> a, std::span<const Complex> b) {
    if (a.size() != b.size()) throw InvalidArgument("l2_distance: length mismatch");
    double s = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) s += std::norm(a[j] - b[j]);
    return std::sqrt(s);
}

double max_abs_imag(std::span<const Complex> v) noexcept {
    double m = 0.0;
    for (const auto& z : v) m = std::max(m, std::abs(z.imag()));
    return m;
}

bool all_finite(std::span<const Complex> v) noexcept {
    return std::all_of(v.begin(), v.end(), [](const Complex& z) {
        return std::isfinite(z.real()) && std::isfinite(z.imag());
    });
}

}  // namespace kgfilon
