#pragma once

#include <memory>
#include <span>

#include "kgfilon/types.hpp"

namespace kgfilon {

/// One-dimensional complex DFT of fixed length backed by FFTW.
///
/// Forward is unnormalized, inverse carries the 1/n factor, so
/// inverse(forward(v)) == v up to roundoff. Output ordering is FFTW's
/// native one: index j holds wavenumber j for j < n/2 and j - n otherwise.
///
/// Plans are created once (under a global lock, FFTW's planner is not
/// reentrant); execution uses the new-array interface and is safe to call
/// concurrently on distinct buffers.
class Fft {
public:
    explicit Fft(int n);
    ~Fft();
    Fft(const Fft&) = delete;
    Fft& operator=(const Fft&) = delete;

    [[nodiscard]] int size() const noexcept { return n_; }

    void forward(std::span<const Complex> in, std::span<Complex> out) const;
    void inverse(std::span<const Complex> in, std::span<Complex> out) const;

private:
    struct Plans;
    int n_;
    std::unique_ptr<Plans> plans_;
};

}  // namespace kgfilon
