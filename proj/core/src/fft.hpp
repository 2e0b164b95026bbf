#pragma once

#include <complex>
#include <cstddef>

namespace ksq::detail {

// Unnormalized in-place DFT: sign = -1 forward, +1 backward.
void fft_inplace(std::complex<double>* data, std::size_t n, int sign);

}  // namespace ksq::detail
