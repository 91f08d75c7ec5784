#include "kgfilon/harness.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <future>
#include <iostream>
#include <limits>
#include <sstream>
#include <string>
#include <thread>

#include "kgfilon/stepper.hpp"

namespace kgfilon {

namespace {

constexpr std::array<std::pair<Method, std::string_view>, 7> kMethodIds{{
    {Method::rk2, "rk2"},
    {Method::rk4, "rk4"},
    {Method::xi3_filon, "xi3-filon"},
    {Method::xi3_gl4, "xi3-gl4"},
    {Method::xi3_gl6, "xi3-gl6"},
    {Method::xi3_gl8, "xi3-gl8"},
    {Method::xi3_fine, "xi3-fine"},
}};

constexpr std::array<std::pair<Problem, std::string_view>, 4> kProblemIds{{
    {Problem::example1, "example1"},
    {Problem::example2, "example2"},
    {Problem::constant_mass, "constant_mass"},
    {Problem::free, "free"},
}};

std::optional<Quadrature> xi3_quadrature(Method m) {
    switch (m) {
        case Method::xi3_filon:
        case Method::xi3_fine: return Quadrature::filon;
        case Method::xi3_gl4: return Quadrature::gl4;
        case Method::xi3_gl6: return Quadrature::gl6;
        case Method::xi3_gl8: return Quadrature::gl8;
        case Method::rk2:
        case Method::rk4: break;
    }
    return std::nullopt;
}

bool has_exact_solution(Problem p) { return p == Problem::free || p == Problem::constant_mass; }

double step_size(const ExperimentConfig& cfg, long k) {
    return (cfg.t_final - cfg.t0) / static_cast<double>(k);
}

void warn_if_unstable(Method method, const SpectralGrid& grid, double h) {
    if (method != Method::rk2 && method != Method::rk4) return;
    const int order = method == Method::rk2 ? 2 : 4;
    const double limit = rk_stability_limit(order, grid);
    if (h > limit)
        std::cerr << "warning: " << method_id(method) << " step " << h
                  << " exceeds its stability limit " << limit << "\n";
}

template <class T, class F>
std::vector<T> parallel_map(std::size_t n, F&& fn) {
    std::vector<T> out(n);
    const std::size_t workers = std::max<std::size_t>(1, std::min<std::size_t>(max_workers(), n));
    if (workers == 1) {
        for (std::size_t i = 0; i < n; ++i) out[i] = fn(i);
        return out;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::future<void>> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w)
        pool.push_back(std::async(std::launch::async, [&] {
            for (std::size_t i = next++; i < n; i = next++) out[i] = fn(i);
        }));
    for (auto& f : pool) f.get();  // rethrows the first failure
    return out;
}

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    std::array<char, 40> buf{};
    std::snprintf(buf.data(), buf.size(), "%.17g", v);
    return buf.data();
}

double parse_double(const std::string& s) {
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw InvalidArgument("parse_csv: malformed number '" + s + "'");
    return v;
}

/// Per-method records for one target; slopes filled in per method.
std::vector<RunRecord> measure(const ExperimentConfig& cfg, const SpectralGrid& grid,
                               const MassModel& model, const FieldState& state0,
                               const FieldState& target, double omega_max) {
    struct Job {
        Method method;
        long k;
    };
    std::vector<Job> jobs;
    for (Method m : cfg.methods)
        for (long k : cfg.steps_list) jobs.push_back({m, k});

    // Errors can be computed concurrently; wall-clock timing is serialized so
    // runs do not contend with each other.
    const auto errors = parallel_map<double>(jobs.size(), [&](std::size_t i) {
        const double h = step_size(cfg, jobs[i].k);
        try {
            const FieldState out = solve(jobs[i].method, grid, model, state0, h, jobs[i].k);
            return l2_distance(out.psi, target.psi);
        } catch (const NonFiniteState&) {
            return std::numeric_limits<double>::infinity();
        }
    });

    std::vector<RunRecord> records;
    records.reserve(jobs.size());
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        RunRecord r;
        r.method = jobs[i].method;
        r.K = jobs[i].k;
        r.h = step_size(cfg, jobs[i].k);
        r.omega_max = omega_max;
        r.error_l2 = errors[i];
        warn_if_unstable(r.method, grid, r.h);
        if (cfg.timing_repeats > 0 && std::isfinite(r.error_l2)) {
            double best = std::numeric_limits<double>::infinity();
            for (int rep = 0; rep < cfg.timing_repeats; ++rep) {
                const auto t_start = std::chrono::steady_clock::now();
                const FieldState out = solve(r.method, grid, model, state0, r.h, r.K);
                const auto t_end = std::chrono::steady_clock::now();
                (void)out;
                best = std::min(best, std::chrono::duration<double>(t_end - t_start).count());
            }
            r.runtime_seconds = best;
        }
        records.push_back(r);
    }

    for (Method m : cfg.methods) {
        std::vector<double> hs, es;
        for (const auto& r : records)
            if (r.method == m) {
                hs.push_back(r.h);
                es.push_back(r.error_l2);
            }
        const auto slope = fit_slope(hs, es);
        for (auto& r : records)
            if (r.method == m) r.slope_estimate = slope;
    }
    return records;
}

}  // namespace

std::string_view method_id(Method m) noexcept {
    for (const auto& [k, id] : kMethodIds)
        if (k == m) return id;
    return "unknown";
}

Method parse_method(std::string_view id) {
    for (const auto& [k, name] : kMethodIds)
        if (name == id) return k;
    throw InvalidArgument("unknown method '" + std::string(id) + "'");
}

std::string_view problem_id(Problem p) noexcept {
    for (const auto& [k, id] : kProblemIds)
        if (k == p) return id;
    return "unknown";
}

Problem parse_problem(std::string_view id) {
    for (const auto& [k, name] : kProblemIds)
        if (name == id) return k;
    throw InvalidArgument("unknown problem '" + std::string(id) + "'");
}

void ExperimentConfig::validate() const {
    if (steps_list.empty()) throw InvalidArgument("steps list must be nonempty");
    for (std::size_t i = 0; i < steps_list.size(); ++i) {
        if (steps_list[i] <= 0) throw InvalidArgument("step counts must be positive");
        if (i > 0 && steps_list[i] <= steps_list[i - 1])
            throw InvalidArgument("step counts must be strictly increasing");
    }
    if (methods.empty()) throw InvalidArgument("methods list must be nonempty");
    if (!(t_final > t0)) throw InvalidArgument("t_final must exceed t0");
    if (!(x1 > x0)) throw InvalidArgument("x1 must exceed x0");
    if (grid_m < 4 || grid_m % 2 != 0) throw InvalidArgument("grid size must be even and >= 4");
    if (problem == Problem::example1 && !(omega > 0.0))
        throw InvalidArgument("example1 needs omega > 0");
    if (timing_repeats < 0) throw InvalidArgument("timing repeats must be nonnegative");
    if (!has_exact_solution(problem) && reference.steps < 50 * steps_list.back())
        throw InvalidArgument("reference must use at least 50x the largest step count (" +
                              std::to_string(50 * steps_list.back()) + " steps)");
}

MassModel make_model(const ExperimentConfig& cfg, double omega) {
    switch (cfg.problem) {
        case Problem::example1: return preset_example1(omega);
        case Problem::example2: return preset_example2();
        case Problem::constant_mass: return preset_constant(cfg.m0);
        case Problem::free: return MassModel::zero();
    }
    throw InvalidArgument("unknown problem");
}

MassModel make_model(const ExperimentConfig& cfg) { return make_model(cfg, cfg.omega); }

FieldState gaussian_initial_state(const SpectralGrid& grid, double t0) {
    FieldState s;
    s.psi = sample(grid, [](double x) { return Complex(std::exp(-0.5 * x * x), 0.0); });
    s.dpsi.assign(s.psi.size(), Complex(0.0, 0.0));
    s.t = t0;
    return s;
}

FieldState solve(Method method, const SpectralGrid& grid, const MassModel& model,
                 const FieldState& state0, double h, long steps) {
    if (const auto q = xi3_quadrature(method)) {
        StepperConfig sc;
        sc.h = h;
        sc.steps = steps;
        sc.quadrature = *q;
        Xi3Stepper stepper(grid, model, sc);
        return stepper.run(state0);
    }
    RungeKutta rk(grid, model, method == Method::rk2 ? 2 : 4);
    return rk.integrate(state0, h, steps);
}

FieldState target_solution(const ExperimentConfig& cfg, const SpectralGrid& grid,
                           const MassModel& model, const FieldState& state0, bool cross_check) {
    const double span = cfg.t_final - state0.t;
    switch (cfg.problem) {
        case Problem::free: return free_propagator(grid, span, state0);
        case Problem::constant_mass: return constant_mass_exact(grid, cfg.m0, span, state0);
        case Problem::example1:
        case Problem::example2: break;
    }
    ReferenceSpec spec = cfg.reference;
    if (!cross_check) spec.cross_check_tolerance = 0.0;
    return reference_solution(grid, model, cfg.t_final, spec, state0);
}

std::optional<double> fit_slope(std::span<const double> h, std::span<const double> err) {
    if (h.size() != err.size()) throw InvalidArgument("fit_slope: size mismatch");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < h.size(); ++i) {
        if (!(err[i] > 0.0) || !std::isfinite(err[i]) || !(h[i] > 0.0)) continue;
        const double x = std::log(h[i]);
        const double y = std::log(err[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++n;
    }
    if (n < 2) return std::nullopt;
    const double dn = static_cast<double>(n);
    const double den = dn * sxx - sx * sx;
    if (!(std::abs(den) > 0.0)) return std::nullopt;
    return (dn * sxy - sx * sy) / den;
}

std::vector<RunRecord> run_convergence(const ExperimentConfig& cfg) {
    cfg.validate();
    const SpectralGrid grid = build_grid(cfg.x0, cfg.x1, cfg.grid_m);
    const MassModel model = make_model(cfg);
    const FieldState state0 = gaussian_initial_state(grid, cfg.t0);
    const FieldState target = target_solution(cfg, grid, model, state0, /*cross_check=*/true);
    auto records = measure(cfg, grid, model, state0, target, model.omega_max());
    sort_records(records);
    return records;
}

std::vector<RunRecord> run_omega_sweep(const ExperimentConfig& cfg, std::span<const double> omegas) {
    if (cfg.problem != Problem::example1) throw InvalidArgument("omega sweep requires example1");
    if (omegas.empty()) throw InvalidArgument("omega sweep needs at least one omega");
    for (double w : omegas)
        if (!(w >= 0.0) || !std::isfinite(w)) throw InvalidArgument("omegas must be finite and >= 0");
    ExperimentConfig base = cfg;
    base.omega = 1.0;  // per-omega model built below; validate the rest
    base.validate();

    const SpectralGrid grid = build_grid(cfg.x0, cfg.x1, cfg.grid_m);
    const FieldState state0 = gaussian_initial_state(grid, cfg.t0);
    auto model_for = [&](double w) {
        // omega = 0 collapses example1 to the stationary mass -2 x^2.
        if (w > 0.0) return preset_example1(w);
        return MassModel({MassTerm::stationary(0.0, [](double x) { return Complex(-2.0 * x * x, 0.0); })});
    };

    // One cross-check per experiment: on the first omega's reference.
    const auto targets = parallel_map<FieldState>(omegas.size(), [&](std::size_t i) {
        return target_solution(cfg, grid, model_for(omegas[i]), state0, i == 0);
    });

    std::vector<RunRecord> records;
    for (std::size_t i = 0; i < omegas.size(); ++i) {
        auto part = measure(cfg, grid, model_for(omegas[i]), state0, targets[i], omegas[i]);
        records.insert(records.end(), part.begin(), part.end());
    }
    sort_records(records);
    return records;
}

void sort_records(std::vector<RunRecord>& records) {
    std::stable_sort(records.begin(), records.end(), [](const RunRecord& a, const RunRecord& b) {
        if (a.method != b.method) return a.method < b.method;
        if (a.K != b.K) return a.K < b.K;
        return a.omega_max < b.omega_max;
    });
}

std::string format_csv(std::span<const RunRecord> records) {
    std::string out(kRunRecordHeader);
    out += '\n';
    for (const auto& r : records) {
        out += method_id(r.method);
        out += ',' + std::to_string(r.K);
        out += ',' + format_double(r.h);
        out += ',' + format_double(r.omega_max);
        out += ',' + format_double(r.error_l2);
        out += ',' + format_double(r.runtime_seconds);
        out += ',';
        if (r.slope_estimate) out += format_double(*r.slope_estimate);
        out += '\n';
    }
    return out;
}

std::vector<RunRecord> parse_csv(std::string_view text) {
    std::istringstream in{std::string(text)};
    std::string line;
    if (!std::getline(in, line) || line != kRunRecordHeader)
        throw InvalidArgument("parse_csv: missing or unexpected header");
    std::vector<RunRecord> out;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::size_t start = 0;
        for (;;) {
            const auto comma = line.find(',', start);
            f.push_back(line.substr(start, comma - start));
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
        if (f.size() != 7) throw InvalidArgument("parse_csv: expected 7 fields in '" + line + "'");
        RunRecord r;
        r.method = parse_method(f[0]);
        r.K = std::stol(f[1]);
        r.h = parse_double(f[2]);
        r.omega_max = parse_double(f[3]);
        r.error_l2 = parse_double(f[4]);
        r.runtime_seconds = parse_double(f[5]);
        if (!f[6].empty()) r.slope_estimate = parse_double(f[6]);
        out.push_back(r);
    }
    return out;
}

void emit_csv(std::span<const RunRecord> records, const std::filesystem::path& out_path) {
    const std::string text = format_csv(records);
    std::ofstream out(out_path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open '" + out_path.string() + "' for writing");
    out << text;
    out.flush();
    if (!out) throw Error("failed writing '" + out_path.string() + "'");
}

std::string format_state_csv(const SpectralGrid& grid, const FieldState& state) {
    grid.require_size(state.psi.size(), "format_state_csv");
    grid.require_size(state.dpsi.size(), "format_state_csv");
    const auto x = grid.nodes();
    std::string out = "x,re_psi,im_psi,re_dpsi,im_dpsi\n";
    for (std::size_t j = 0; j < x.size(); ++j) {
        out += format_double(x[j]) + ',' + format_double(state.psi[j].real()) + ',' +
               format_double(state.psi[j].imag()) + ',' + format_double(state.dpsi[j].real()) + ',' +
               format_double(state.dpsi[j].imag()) + '\n';
    }
    return out;
}

int max_workers() {
    if (const char* env = std::getenv("KGFILON_MAX_WORKERS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v >= 1) return static_cast<int>(std::min(v, 1024L));
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

}  // namespace kgfilon
