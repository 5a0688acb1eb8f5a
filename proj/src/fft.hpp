#pragma once

#include <complex>
#include <cstddef>
#include <span>

namespace sqz::detail {

// Thin wrapper over cached FFTW plans. Plans are created once per length
// under a lock and executed with the new-array interface, which FFTW
// guarantees to be thread-safe. FFTW_ESTIMATE keeps the plan (and hence the
// floating-point result) independent of timing.

/// Unnormalized real-to-half-complex transform; out.size() == in.size()/2 + 1.
void forward_real(std::span<const double> in, std::span<std::complex<double>> out);

/// Unnormalized inverse; destroys `in`.
void inverse_real(std::span<std::complex<double>> in, std::span<double> out);

} // namespace sqz::detail
