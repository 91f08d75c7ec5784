#include "kgfilon/reference.hpp"

#include <cmath>
#include <sstream>
#include <string>

namespace kgfilon {

RungeKutta::RungeKutta(SpectralGrid grid, MassModel model, int order)
    : grid_(std::move(grid)), model_(std::move(model)), order_(order), ws_(grid_.size()) {
    if (order != 2 && order != 4) throw InvalidArgument("RungeKutta: order must be 2 or 4");
    const auto m = static_cast<std::size_t>(grid_.size());
    lap_.resize(m);
    k_psi_.assign(4, CVector(m));
    k_dpsi_.assign(4, CVector(m));
    tmp_psi_.resize(m);
    tmp_dpsi_.resize(m);
}

void RungeKutta::rhs(double t, const CVector& psi, const CVector& dpsi, CVector& out_psi,
                     CVector& out_dpsi) {
    apply_laplacian(grid_, psi, lap_, ws_);
    const CVector mass = evaluate(model_, grid_, t);
    for (std::size_t j = 0; j < psi.size(); ++j) {
        out_psi[j] = dpsi[j];
        out_dpsi[j] = lap_[j] + mass[j] * psi[j];
    }
}

FieldState RungeKutta::step(const FieldState& s, double h) {
    grid_.require_size(s.psi.size(), "rk_step");
    grid_.require_size(s.dpsi.size(), "rk_step");
    const std::size_t m = s.psi.size();
    auto stage = [&](double c, int from) {
        for (std::size_t j = 0; j < m; ++j) {
            tmp_psi_[j] = s.psi[j] + c * h * k_psi_[from][j];
            tmp_dpsi_[j] = s.dpsi[j] + c * h * k_dpsi_[from][j];
        }
    };

    FieldState out = s;
    rhs(s.t, s.psi, s.dpsi, k_psi_[0], k_dpsi_[0]);
    if (order_ == 2) {
        stage(0.5, 0);
        rhs(s.t + 0.5 * h, tmp_psi_, tmp_dpsi_, k_psi_[1], k_dpsi_[1]);
        for (std::size_t j = 0; j < m; ++j) {
            out.psi[j] += h * k_psi_[1][j];
            out.dpsi[j] += h * k_dpsi_[1][j];
        }
    } else {
        stage(0.5, 0);
        rhs(s.t + 0.5 * h, tmp_psi_, tmp_dpsi_, k_psi_[1], k_dpsi_[1]);
        stage(0.5, 1);
        rhs(s.t + 0.5 * h, tmp_psi_, tmp_dpsi_, k_psi_[2], k_dpsi_[2]);
        stage(1.0, 2);
        rhs(s.t + h, tmp_psi_, tmp_dpsi_, k_psi_[3], k_dpsi_[3]);
        for (std::size_t j = 0; j < m; ++j) {
            out.psi[j] += h / 6.0 * (k_psi_[0][j] + 2.0 * k_psi_[1][j] + 2.0 * k_psi_[2][j] + k_psi_[3][j]);
            out.dpsi[j] +=
                h / 6.0 * (k_dpsi_[0][j] + 2.0 * k_dpsi_[1][j] + 2.0 * k_dpsi_[2][j] + k_dpsi_[3][j]);
        }
    }
    out.t = s.t + h;
    return out;
}

FieldState RungeKutta::integrate(const FieldState& state0, double h, long steps) {
    FieldState s = state0;
    const double t0 = state0.t;
    for (long k = 0; k < steps; ++k) {
        s = step(s, h);
        s.t = t0 + static_cast<double>(k + 1) * h;
        if (!all_finite(s.psi) || !all_finite(s.dpsi))
            throw NonFiniteState(k + 1, "RK" + std::to_string(order_) +
                                            ": non-finite state at step " + std::to_string(k + 1));
    }
    return s;
}

FieldState rk_step(int order, const SpectralGrid& grid, const MassModel& model, const FieldState& state,
                   double h) {
    RungeKutta rk(grid, model, order);
    return rk.step(state, h);
}

double rk_stability_limit(int order, const SpectralGrid& grid) {
    switch (order) {
        case 2: return 1.0 / grid.max_symbol();
        case 4: return 2.0 * std::sqrt(2.0) / grid.max_symbol();
        default: throw InvalidArgument("rk_stability_limit: order must be 2 or 4");
    }
}

FieldState constant_mass_exact(const SpectralGrid& grid, double m0, double t, const FieldState& state0) {
    grid.require_size(state0.psi.size(), "constant_mass_exact");
    grid.require_size(state0.dpsi.size(), "constant_mass_exact");
    const auto g = grid.symbols();
    for (double gk : g)
        if (!(gk * gk - m0 >= 0.0))
            throw InvalidArgument("constant_mass_exact: g^2 - m0 must be nonnegative for every mode");

    const std::size_t m = g.size();
    CVector p(m), q(m);
    grid.fft().forward(state0.psi, p);
    grid.fft().forward(state0.dpsi, q);
    for (std::size_t j = 0; j < m; ++j) {
        const double w = std::sqrt(g[j] * g[j] - m0);
        const double c = std::cos(t * w);
        const double s = std::sin(t * w);
        const Complex pj = p[j];
        const Complex qj = q[j];
        p[j] = c * pj + scaled_sinc(t, w) * qj;  // sin(tw)/w, equal to t at w = 0
        q[j] = -w * s * pj + c * qj;
    }
    FieldState out;
    out.psi.resize(m);
    out.dpsi.resize(m);
    grid.fft().inverse(p, out.psi);
    grid.fft().inverse(q, out.dpsi);
    out.t = state0.t + t;
    return out;
}

namespace {

double fine_step(double t0, double t_final, long steps) {
    if (steps <= 0) throw InvalidArgument("reference_solution: steps must be positive");
    if (!(t_final > t0)) throw InvalidArgument("reference_solution: t_final must exceed t0");
    return (t_final - t0) / static_cast<double>(steps);
}

void require_rk_stable(int order, const SpectralGrid& grid, double h, const char* what) {
    const double limit = rk_stability_limit(order, grid);
    if (h > limit) {
        std::ostringstream os;
        os << what << ": RK" << order << " step " << h << " exceeds the stability limit " << limit
           << "; increase steps";
        throw InvalidArgument(os.str());
    }
}

FieldState xi3_fine(const SpectralGrid& grid, const MassModel& model, double h, long steps,
                    const FieldState& state0) {
    StepperConfig cfg;
    cfg.h = h;
    cfg.steps = steps;
    cfg.quadrature = Quadrature::filon;
    Xi3Stepper stepper(grid, model, cfg);
    return stepper.run(state0);
}

}  // namespace

double reference_cross_check(const SpectralGrid& grid, const MassModel& model, double t_final,
                             const ReferenceSpec& spec, const FieldState& state0) {
    const double h = fine_step(state0.t, t_final, spec.steps);
    require_rk_stable(4, grid, h, "reference cross-check");
    const MassModel low = model.truncated(spec.cross_check_omega_cutoff);
    const FieldState a = xi3_fine(grid, low, h, spec.steps, state0);
    RungeKutta rk(grid, low, 4);
    const FieldState b = rk.integrate(state0, h, spec.steps);
    return l2_distance(a.psi, b.psi);
}

FieldState reference_solution(const SpectralGrid& grid, const MassModel& model, double t_final,
                              const ReferenceSpec& spec, const FieldState& state0) {
    const double h = fine_step(state0.t, t_final, spec.steps);
    switch (spec.method) {
        case ReferenceMethod::rk2:
        case ReferenceMethod::rk4: {
            const int order = spec.method == ReferenceMethod::rk2 ? 2 : 4;
            require_rk_stable(order, grid, h, "reference_solution");
            RungeKutta rk(grid, model, spec.method == ReferenceMethod::rk2 ? 2 : 4);
            return rk.integrate(state0, h, spec.steps);
        }
        case ReferenceMethod::xi3_fine: break;
    }
    if (spec.cross_check_tolerance > 0.0) {
        const double diff = reference_cross_check(grid, model, t_final, spec, state0);
        if (!(diff <= spec.cross_check_tolerance)) {
            std::ostringstream os;
            os << "reference cross-check failed: xi3_fine and rk4 differ by " << diff
               << " (tolerance " << spec.cross_check_tolerance << ")";
            throw CrossCheckFailure(os.str());
        }
    }
    return xi3_fine(grid, model, h, spec.steps, state0);
}

}  // namespace kgfilon
