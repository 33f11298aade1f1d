#pragma once

#include <complex>
#include <vector>

#include "awr/grid.hpp"

namespace awr {

using cdouble = std::complex<double>;

// Spectral image of a real field: full complex coefficient array of size n^d,
// standard DFT index order per axis (index i encodes signed mode
// m = i < n/2 ? i : i - n; i = n/2 is the Nyquist mode).
//
// Convention: f(x_j) = sum_m c_m e^{i pi m x}; forward carries the 1/N
// normalization and enforces conjugate symmetry so real round-trips are exact.
struct SpectralField {
    Grid grid;
    std::vector<cdouble> c;

    SpectralField() = default;
    explicit SpectralField(const Grid& g) : grid(g), c(g.size()) {}
};

SpectralField to_spectral(const ScalarField& f);
ScalarField from_spectral(const SpectralField& s);

// Signed integer mode of DFT index i on an n-point axis.
inline int signed_mode(int i, int n) { return i < n / 2 ? i : i - n; }
inline bool is_nyquist(int i, int n) { return n % 2 == 0 && i == n / 2; }

namespace detail {
// In-place radix-2 complex FFT, length n a power of two. inverse=false applies
// e^{-2 pi i jk/n} (unnormalized); inverse=true applies e^{+2 pi i jk/n}.
void fft_radix2(cdouble* a, int n, bool inverse);
bool is_pow2(int n);
} // namespace detail

} // namespace awr
