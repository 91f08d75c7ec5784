#include "kgfilon/fft.hpp"

#include <fftw3.h>

#include <mutex>

namespace kgfilon {

namespace {

std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

fftw_complex* as_fftw(Complex* p) { return reinterpret_cast<fftw_complex*>(p); }

}  // namespace

struct Fft::Plans {
    fftw_plan fwd = nullptr;
    fftw_plan bwd = nullptr;
};

Fft::Fft(int n) : n_(n), plans_(std::make_unique<Plans>()) {
    if (n <= 0) throw InvalidArgument("Fft: length must be positive");
    CVector a(static_cast<std::size_t>(n)), b(static_cast<std::size_t>(n));
    std::lock_guard lock(planner_mutex());
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    plans_->fwd = fftw_plan_dft_1d(n, as_fftw(a.data()), as_fftw(b.data()), FFTW_FORWARD, flags);
    plans_->bwd = fftw_plan_dft_1d(n, as_fftw(a.data()), as_fftw(b.data()), FFTW_BACKWARD, flags);
    if (!plans_->fwd || !plans_->bwd) throw Error("Fft: FFTW planning failed");
}

Fft::~Fft() {
    std::lock_guard lock(planner_mutex());
    if (plans_->fwd) fftw_destroy_plan(plans_->fwd);
    if (plans_->bwd) fftw_destroy_plan(plans_->bwd);
}

void Fft::forward(std::span<const Complex> in, std::span<Complex> out) const {
    if (static_cast<int>(in.size()) != n_ || static_cast<int>(out.size()) != n_)
        throw InvalidArgument("Fft::forward: length mismatch");
    if (in.data() == out.data()) {
        CVector tmp(in.begin(), in.end());
        fftw_execute_dft(plans_->fwd, as_fftw(tmp.data()), as_fftw(out.data()));
        return;
    }
    // Out-of-place complex plans leave the input untouched.
    fftw_execute_dft(plans_->fwd, as_fftw(const_cast<Complex*>(in.data())), as_fftw(out.data()));
}

void Fft::inverse(std::span<const Complex> in, std::span<Complex> out) const {
    if (static_cast<int>(in.size()) != n_ || static_cast<int>(out.size()) != n_)
        throw InvalidArgument("Fft::inverse: length mismatch");
    if (in.data() == out.data()) {
        CVector tmp(in.begin(), in.end());
        fftw_execute_dft(plans_->bwd, as_fftw(tmp.data()), as_fftw(out.data()));
    } else {
        fftw_execute_dft(plans_->bwd, as_fftw(const_cast<Complex*>(in.data())), as_fftw(out.data()));
    }
    const double scale = 1.0 / n_;
    for (auto& z : out) z *= scale;
}

}  // namespace kgfilon
