#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "kgfilon/mass_model.hpp"
#include "kgfilon/reference.hpp"
#include "kgfilon/spectral.hpp"

namespace kgfilon {

/// Method identifiers shared by the CLI, CSV output and the bindings.
enum class Method { rk2, rk4, xi3_filon, xi3_gl4, xi3_gl6, xi3_gl8, xi3_fine };

[[nodiscard]] std::string_view method_id(Method m) noexcept;
/// Accepts the ids printed by method_id ("xi3-filon", ...). Throws on unknown ids.
[[nodiscard]] Method parse_method(std::string_view id);

enum class Problem { example1, example2, constant_mass, free };

[[nodiscard]] std::string_view problem_id(Problem p) noexcept;
[[nodiscard]] Problem parse_problem(std::string_view id);

struct ExperimentConfig {
    Problem problem = Problem::example1;
    double omega = 10.0;  ///< example1 only
    double m0 = -1.0;     ///< constant_mass only
    double x0 = -10.0;
    double x1 = 10.0;
    int grid_m = 200;
    double t0 = 0.0;
    double t_final = 1.0;
    std::vector<long> steps_list{20, 40, 80, 160, 320};
    std::vector<Method> methods{Method::xi3_filon};
    ReferenceSpec reference{};
    std::string out_path;
    std::uint64_t seed = 0;
    /// Wall-clock repetitions per run, minimum reported. 0 disables timing
    /// (runtime_seconds = 0), which makes CSV output byte-reproducible.
    int timing_repeats = 3;

    /// Throws InvalidArgument on inconsistent settings.
    void validate() const;
};

struct RunRecord {
    Method method = Method::xi3_filon;
    long K = 0;
    double h = 0.0;
    double omega_max = 0.0;
    double error_l2 = 0.0;
    double runtime_seconds = 0.0;
    std::optional<double> slope_estimate;
};

/// Model for the configured problem; `omega` overrides cfg.omega for example1.
[[nodiscard]] MassModel make_model(const ExperimentConfig& cfg, double omega);
[[nodiscard]] MassModel make_model(const ExperimentConfig& cfg);

/// psi_0 = exp(-x^2/2), psi'_0 = 0 on the nodes, at time t0.
[[nodiscard]] FieldState gaussian_initial_state(const SpectralGrid& grid, double t0);

/// K steps of `method` over [state0.t, state0.t + K*h].
[[nodiscard]] FieldState solve(Method method, const SpectralGrid& grid, const MassModel& model,
                               const FieldState& state0, double h, long steps);

/// Exact solution for free/constant_mass, fine-step reference otherwise.
[[nodiscard]] FieldState target_solution(const ExperimentConfig& cfg, const SpectralGrid& grid,
                                         const MassModel& model, const FieldState& state0,
                                         bool cross_check);

/// Least-squares slope of log(error) against log(h) over the finite,
/// positive errors. Fewer than two usable points gives no slope.
[[nodiscard]] std::optional<double> fit_slope(std::span<const double> h, std::span<const double> err);

/// Every (method, K) of the config against one target; slopes per method.
[[nodiscard]] std::vector<RunRecord> run_convergence(const ExperimentConfig& cfg);

/// run_convergence for each omega (example1 only); slopes per (method, omega).
[[nodiscard]] std::vector<RunRecord> run_omega_sweep(const ExperimentConfig& cfg,
                                                     std::span<const double> omegas);

/// Sorts by (method, K, omega_max).
void sort_records(std::vector<RunRecord>& records);

inline constexpr std::string_view kRunRecordHeader =
    "method,K,h,omega_max,error_l2,runtime_seconds,slope_estimate";

[[nodiscard]] std::string format_csv(std::span<const RunRecord> records);
[[nodiscard]] std::vector<RunRecord> parse_csv(std::string_view text);
/// Writes format_csv(records); throws Error if the file cannot be written.
void emit_csv(std::span<const RunRecord> records, const std::filesystem::path& out_path);

/// x,re_psi,im_psi,re_dpsi,im_dpsi rows for every node.
[[nodiscard]] std::string format_state_csv(const SpectralGrid& grid, const FieldState& state);

/// Worker cap for independent runs: KGFILON_MAX_WORKERS if set, else the
/// hardware concurrency.
[[nodiscard]] int max_workers();

}  // namespace kgfilon
