#include "kgfilon/filon.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace kgfilon {

namespace {

constexpr Complex I{0.0, 1.0};

/// exp(i x) - 1 without cancellation for small x.
Complex expm1i(double x) {
    const double s = std::sin(0.5 * x);
    return {-2.0 * s * s, std::sin(x)};
}

void require_step(double h, const char* where) {
    if (!(h > 0.0) || !std::isfinite(h))
        throw InvalidArgument(std::string(where) + ": step h must be positive and finite");
}

}  // namespace

OscillatoryMoments moments_closed_form(double omega, double h) {
    require_step(h, "moments");
    if (omega == 0.0) throw InvalidArgument("moments_closed_form: omega must be nonzero");
    const double x = omega * h;
    const Complex e = std::polar(1.0, x);
    const Complex em1 = expm1i(x);
    OscillatoryMoments m;
    m.omega = omega;
    m.h = h;
    m.mu1 = -I * em1 / omega;
    // (-1 + e (1 - i x)) = em1 - i x e
    m.mu2 = (em1 - I * x * e) / (omega * omega);
    // e (-i x^2 + 2x + 2i) - 2i = 2i em1 + e (2x - i x^2)
    m.mu3 = (2.0 * I * em1 + e * Complex(2.0 * x, -x * x)) / (omega * omega * omega);
    return m;
}

OscillatoryMoments moments_series(double omega, double h) {
    require_step(h, "moments");
    const Complex z{0.0, omega * h};
    Complex s1{}, s2{}, s3{};
    Complex term{1.0, 0.0};  // z^m / m!
    for (int m = 0; m < 200; ++m) {
        const Complex d1 = term / double(m + 1);
        const Complex d2 = term / double(m + 2);
        const Complex d3 = term / double(m + 3);
        s1 += d1;
        s2 += d2;
        s3 += d3;
        if (std::abs(d1) <= 1e-17 * std::abs(s1) && std::abs(d2) <= 1e-17 * std::abs(s2) &&
            std::abs(d3) <= 1e-17 * std::abs(s3))
            break;
        term *= z / double(m + 1);
    }
    OscillatoryMoments r;
    r.omega = omega;
    r.h = h;
    r.mu1 = h * s1;
    r.mu2 = h * h * s2;
    r.mu3 = h * h * h * s3;
    return r;
}

OscillatoryMoments moments(double omega, double h) {
    require_step(h, "moments");
    if (!std::isfinite(omega)) throw InvalidArgument("moments: omega must be finite");
    if (std::abs(omega * h) < kMomentSeriesThreshold) return moments_series(omega, h);
    return moments_closed_form(omega, h);
}

Complex filon_rule(Complex f0, Complex df0, Complex dfh, const OscillatoryMoments& m) {
    return f0 * m.mu1 + df0 * m.mu2 + (dfh - df0) / (2.0 * m.h) * m.mu3;
}

MomentCache::MomentCache(const MassModel& model, double h) : h_(h) {
    require_step(h, "MomentCache");
    moments_.reserve(model.size());
    for (const auto& term : model.terms()) moments_.push_back(moments(term.omega, h));
}

const OscillatoryMoments& MomentCache::at(std::size_t term) const {
    if (term >= moments_.size())
        throw InvalidArgument("MomentCache: no moments for term " + std::to_string(term));
    return moments_[term];
}

void MomentCache::require_compatible(const MassModel& model, double h) const {
    if (model.size() != moments_.size())
        throw InvalidArgument("MomentCache: built for " + std::to_string(moments_.size()) +
                              " terms, model has " + std::to_string(model.size()));
    if (h != h_) throw InvalidArgument("MomentCache: step size mismatch");
    for (std::size_t n = 0; n < moments_.size(); ++n)
        if (moments_[n].omega != model.terms()[n].omega)
            throw InvalidArgument("MomentCache: frequency mismatch at term " + std::to_string(n));
}

FilonWorkspace::FilonWorkspace(const SpectralGrid& grid, const MassModel&)
    : spectral(grid.size()) {
    const auto m = static_cast<std::size_t>(grid.size());
    assembly.psi_load.resize(m);
    assembly.dpsi_load.resize(m);
    assembly.endpoint_sin.resize(m);
    assembly.endpoint_cos.resize(m);
    weight_h.resize(m);
    weight_dh.resize(m);
    scratch.resize(m);
}

const EnvelopeLevel& FilonWorkspace::level(const SpectralGrid& grid, const MassModel& model, double t) {
    if (cached_model_ != model.id()) {
        for (auto& l : levels_) l.valid = false;
        cached_model_ = model.id();
    }
    for (std::size_t i = 0; i < levels_.size(); ++i) {
        if (levels_[i].valid && levels_[i].t == t) {
            last_used_ = i;
            return levels_[i];
        }
    }

    // Evict the slot that was not handed out last, so the previous result
    // stays valid alongside this one.
    last_used_ = 1 - last_used_;
    EnvelopeLevel& l = levels_[last_used_];
    l.t = t;
    l.a.resize(model.size());
    l.da.resize(model.size());
    for (std::size_t n = 0; n < model.size(); ++n) {
        const auto& term = model.terms()[n];
        l.a[n] = term.envelope(grid, t);
        l.da[n] = term.envelope_dt(grid, t);
        grid.require_size(l.a[n].size(), "envelope");
        grid.require_size(l.da[n].size(), "envelope_dt");
    }
    l.valid = true;
    return l;
}

namespace {

/// tau^2 coefficient of the Taylor closure.
double taylor_quadratic_weight(double h, bool first_step) { return first_step ? 0.5 : 0.5 / h; }

void check_inputs(const SpectralGrid& grid, const FieldState& s, std::span<const Complex> w3,
                  double h, const char* where) {
    grid.require_size(s.psi.size(), where);
    grid.require_size(s.dpsi.size(), where);
    grid.require_size(w3.size(), where);
    require_step(h, where);
}

}  // namespace

void assemble_filon(const SpectralGrid& grid, const MassModel& model, const MomentCache& moments,
                    const FieldState& state_k, std::span<const Complex> w3, double h,
                    bool first_step, FilonWorkspace& ws) {
    check_inputs(grid, state_k, w3, h, "filon");
    moments.require_compatible(model, h);

    const auto& v1 = state_k.psi;
    const auto& v2 = state_k.dpsi;
    const std::size_t m = v1.size();
    const double c = taylor_quadratic_weight(h, first_step);

    // Taylor polynomial and its tau-derivative at tau = h.
    for (std::size_t j = 0; j < m; ++j) {
        ws.weight_h[j] = v1[j] + h * v2[j] + (c * h * h) * w3[j];
        ws.weight_dh[j] = v2[j] + (2.0 * c * h) * w3[j];
    }

    auto& as = ws.assembly;
    std::fill(as.psi_load.begin(), as.psi_load.end(), Complex{});
    std::fill(as.dpsi_load.begin(), as.dpsi_load.end(), Complex{});
    std::fill(as.endpoint_sin.begin(), as.endpoint_sin.end(), Complex{});
    std::fill(as.endpoint_cos.begin(), as.endpoint_cos.end(), Complex{});

    const double tk = state_k.t;
    const EnvelopeLevel& start = ws.level(grid, model, tk);
    const EnvelopeLevel& end = ws.level(grid, model, tk + h);

    // Per term, with f(tau) = K(h - tau)[a(t_k + tau) w(tau) v] summed over the
    // three Taylor weights, the Filon rule is
    //   f(0) mu1 + f'(0) (mu2 - mu3/(2h)) + f'(h) mu3/(2h).
    // Only w1(0) = 1, w2'(0) = 1 are nonzero at tau = 0, and at tau = h the sin
    // kernel vanishes while the cos kernel is the identity.
    for (std::size_t n = 0; n < model.size(); ++n) {
        const OscillatoryMoments& mom = moments.at(n);
        const Complex phase = std::polar(1.0, mom.omega * tk);
        const Complex gamma = mom.mu3 / (2.0 * h);
        const Complex c_value = phase * mom.mu1;
        const Complex c_slope = phase * (mom.mu2 - gamma);
        const Complex c_end = phase * gamma;

        const CVector& a0 = start.a[n];
        const CVector& da0 = start.da[n];
        const CVector& ah = end.a[n];
        const CVector& dah = end.da[n];
        for (std::size_t j = 0; j < m; ++j) {
            const Complex a0v1 = a0[j] * v1[j];
            as.dpsi_load[j] += c_value * a0v1 + c_slope * (da0[j] * v1[j] + a0[j] * v2[j]);
            as.psi_load[j] -= c_slope * a0v1;
            as.endpoint_sin[j] -= c_end * ah[j] * ws.weight_h[j];
            as.endpoint_cos[j] += c_end * (dah[j] * ws.weight_h[j] + ah[j] * ws.weight_dh[j]);
        }
    }
}

namespace {

/// out = row of R(h) applied to (psi_load, dpsi_load), plus the endpoint term.
CVector combine(const SpectralGrid& grid, IntegralKernel kernel, double h, FilonWorkspace& ws) {
    const auto& as = ws.assembly;
    auto& sp = ws.spectral;
    grid.fft().forward(as.psi_load, sp.a);
    grid.fft().forward(as.dpsi_load, sp.b);
    const auto g = grid.symbols();
    for (std::size_t j = 0; j < g.size(); ++j) {
        const double cs = std::cos(h * g[j]);
        if (kernel == IntegralKernel::sin)
            sp.a[j] = cs * sp.a[j] + scaled_sinc(h, g[j]) * sp.b[j];
        else
            sp.a[j] = -g[j] * std::sin(h * g[j]) * sp.a[j] + cs * sp.b[j];
    }
    CVector out(g.size());
    grid.fft().inverse(sp.a, out);
    const CVector& end = kernel == IntegralKernel::sin ? as.endpoint_sin : as.endpoint_cos;
    for (std::size_t j = 0; j < out.size(); ++j) out[j] += end[j];
    return out;
}

}  // namespace

CVector filon_sin_integral(const SpectralGrid& grid, const MassModel& model,
                           const MomentCache& moments, const FieldState& state_k,
                           std::span<const Complex> w3, double h, bool first_step,
                           FilonWorkspace& ws) {
    assemble_filon(grid, model, moments, state_k, w3, h, first_step, ws);
    return combine(grid, IntegralKernel::sin, h, ws);
}

CVector filon_cos_integral(const SpectralGrid& grid, const MassModel& model,
                           const MomentCache& moments, const FieldState& state_k,
                           std::span<const Complex> w3, double h, bool first_step,
                           FilonWorkspace& ws) {
    assemble_filon(grid, model, moments, state_k, w3, h, first_step, ws);
    return combine(grid, IntegralKernel::cos, h, ws);
}

GaussLegendreRule gauss_legendre_rule(int order) {
    switch (order) {
        case 4: {
            const double x = 1.0 / std::sqrt(3.0);
            return {{-x, x}, {1.0, 1.0}};
        }
        case 6: {
            const double x = std::sqrt(0.6);
            return {{-x, 0.0, x}, {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0}};
        }
        case 8: {
            const double r = std::sqrt(6.0 / 5.0);
            const double x1 = std::sqrt(3.0 / 7.0 - 2.0 / 7.0 * r);
            const double x2 = std::sqrt(3.0 / 7.0 + 2.0 / 7.0 * r);
            const double w1 = (18.0 + std::sqrt(30.0)) / 36.0;
            const double w2 = (18.0 - std::sqrt(30.0)) / 36.0;
            return {{-x2, -x1, x1, x2}, {w2, w1, w1, w2}};
        }
        default:
            throw InvalidArgument("gauss_legendre_rule: order must be 4, 6 or 8, got " +
                                  std::to_string(order));
    }
}

void gauss_legendre_integrals(int order, const SpectralGrid& grid, const MassModel& model,
                              const FieldState& state_k, std::span<const Complex> w3, double h,
                              bool first_step, FilonWorkspace& ws, std::span<Complex> sin_out,
                              std::span<Complex> cos_out) {
    const GaussLegendreRule rule = gauss_legendre_rule(order);
    check_inputs(grid, state_k, w3, h, "gauss_legendre_integral");
    grid.require_size(sin_out.size(), "gauss_legendre_integral");
    grid.require_size(cos_out.size(), "gauss_legendre_integral");

    const double c = taylor_quadratic_weight(h, first_step);
    const std::size_t m = state_k.psi.size();
    const auto g = grid.symbols();
    auto& sp = ws.spectral;
    CVector sin_hat(m), cos_hat(m);

    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        const double tau = 0.5 * h * (rule.nodes[i] + 1.0);
        const double w = 0.5 * h * rule.weights[i];
        const CVector mass = evaluate(model, grid, state_k.t + tau);
        for (std::size_t j = 0; j < m; ++j)
            ws.scratch[j] = mass[j] * (state_k.psi[j] + tau * state_k.dpsi[j] + (c * tau * tau) * w3[j]);
        grid.fft().forward(ws.scratch, sp.a);
        const double s = h - tau;
        for (std::size_t j = 0; j < m; ++j) {
            sin_hat[j] += (w * scaled_sinc(s, g[j])) * sp.a[j];
            cos_hat[j] += (w * std::cos(s * g[j])) * sp.a[j];
        }
    }
    grid.fft().inverse(sin_hat, sin_out);
    grid.fft().inverse(cos_hat, cos_out);
}

CVector gauss_legendre_integral(int order, IntegralKernel kernel, const SpectralGrid& grid,
                                const MassModel& model, const FieldState& state_k,
                                std::span<const Complex> w3, double h, bool first_step,
                                FilonWorkspace& ws) {
    CVector s(static_cast<std::size_t>(grid.size())), c(static_cast<std::size_t>(grid.size()));
    gauss_legendre_integrals(order, grid, model, state_k, w3, h, first_step, ws, s, c);
    return kernel == IntegralKernel::sin ? s : c;
}

}  // namespace kgfilon
