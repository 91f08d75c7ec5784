#include "kgfilon/mass_model.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <string>

namespace kgfilon {

MassTerm MassTerm::stationary(double omega, std::function<Complex(double)> profile) {
    MassTerm term;
    term.omega = omega;
    term.envelope = [profile](const SpectralGrid& grid, double) { return sample(grid, profile); };
    term.envelope_dt = [](const SpectralGrid& grid, double) {
        return CVector(static_cast<std::size_t>(grid.size()), Complex{});
    };
    return term;
}

MassTerm MassTerm::separable(double omega, std::function<Complex(double)> profile,
                             std::function<Complex(double)> amplitude,
                             std::function<Complex(double)> amplitude_dt) {
    MassTerm term;
    term.omega = omega;
    term.envelope = [profile, amplitude](const SpectralGrid& grid, double t) {
        const Complex c = amplitude(t);
        return sample(grid, [&](double x) { return c * profile(x); });
    };
    term.envelope_dt = [profile, amplitude_dt](const SpectralGrid& grid, double t) {
        const Complex c = amplitude_dt(t);
        return sample(grid, [&](double x) { return c * profile(x); });
    };
    return term;
}

MassModel::MassModel(std::vector<MassTerm> terms) : terms_(std::move(terms)) {
    static std::atomic<std::uint64_t> next_id{1};
    id_ = next_id.fetch_add(1);
    if (terms_.empty()) throw InvalidArgument("MassModel: at least one term is required");
    for (const auto& t : terms_) {
        if (!std::isfinite(t.omega)) throw InvalidArgument("MassModel: non-finite frequency");
        if (!t.envelope || !t.envelope_dt)
            throw InvalidArgument("MassModel: every term needs an envelope and its time derivative");
        omega_max_ = std::max(omega_max_, std::abs(t.omega));
    }
}

MassModel MassModel::truncated(double cutoff) const {
    std::vector<MassTerm> kept;
    std::copy_if(terms_.begin(), terms_.end(), std::back_inserter(kept),
                 [cutoff](const MassTerm& t) { return std::abs(t.omega) <= cutoff; });
    if (kept.empty()) return zero();
    return MassModel(std::move(kept));
}

MassModel MassModel::zero() {
    return MassModel({MassTerm::stationary(0.0, [](double) { return Complex{}; })});
}

CVector evaluate(const MassModel& model, const SpectralGrid& grid, double t) {
    CVector m(static_cast<std::size_t>(grid.size()), Complex{});
    for (const auto& term : model.terms()) {
        const CVector a = term.envelope(grid, t);
        grid.require_size(a.size(), "evaluate(envelope)");
        const Complex phase = std::polar(1.0, term.omega * t);
        for (std::size_t j = 0; j < m.size(); ++j) m[j] += a[j] * phase;
    }
    return m;
}

MassModel preset_example1(double omega) {
    if (!(omega > 0.0)) throw InvalidArgument("preset_example1: omega must be positive");
    auto half = [](double x) { return Complex(-0.5 * x * x, 0.0); };
    return MassModel({
        MassTerm::stationary(0.0, [](double x) { return Complex(-x * x, 0.0); }),
        MassTerm::stationary(omega, half),
        MassTerm::stationary(-omega, half),
    });
}

MassModel preset_example2() {
    std::vector<MassTerm> terms;
    terms.push_back(MassTerm::stationary(0.0, [](double x) { return Complex(-6.0 * x * x, 0.0); }));
    auto half = [](double x) { return Complex(-0.5 * x * x, 0.0); };
    double w = 1.0;
    for (int n = 0; n <= 5; ++n, w *= 10.0) {
        terms.push_back(MassTerm::stationary(w, half));
        terms.push_back(MassTerm::stationary(-w, half));
    }
    return MassModel(std::move(terms));
}

MassModel preset_constant(double m0) {
    return MassModel({MassTerm::stationary(0.0, [m0](double) { return Complex(m0, 0.0); })});
}

}  // namespace kgfilon
