#include "awr/fft.hpp"

#include <cmath>
#include <numbers>

#include "awr/parallel.hpp"

namespace awr {

namespace detail {

bool is_pow2(int n) { return n > 0 && (n & (n - 1)) == 0; }

// Iterative Cooley-Tukey, decimation in time. Twiddles come from std::polar
// at the exact stage angle, so the kernel is a fixed arithmetic circuit:
// identical input bits give identical output bits on every run.
void fft_radix2(cdouble* a, int n, bool inverse) {
    for (int i = 1, j = 0; i < n; ++i) {
        int bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    const double sign = inverse ? 1.0 : -1.0;
    for (int len = 2; len <= n; len <<= 1) {
        const double ang = sign * 2.0 * std::numbers::pi / len;
        const int half = len / 2;
        for (int i = 0; i < n; i += len) {
            for (int k = 0; k < half; ++k) {
                const cdouble w = std::polar(1.0, ang * k);
                const cdouble u = a[i + k];
                const cdouble v = a[i + k + half] * w;
                a[i + k] = u + v;
                a[i + k + half] = u - v;
            }
        }
    }
}

namespace {

// Transforms every 1-D line along `axis` of the d-dimensional array.
void transform_axis(std::vector<cdouble>& c, const Grid& g, int axis, bool inverse) {
    const int n = g.n;
    const std::size_t N = g.size();
    const std::size_t nlines = N / n;

    // stride between consecutive entries of a line; lines are enumerated by
    // splitting the flat index into the part above and below the axis.
    std::size_t stride = 1;
    for (int a = g.dim - 1; a > axis; --a) stride *= n;

    parallel_for(nlines, [&](std::size_t lo, std::size_t hi) {
        std::vector<cdouble> line(n);
        for (std::size_t l = lo; l < hi; ++l) {
            const std::size_t outer = l / stride;
            const std::size_t inner = l % stride;
            const std::size_t base = outer * stride * n + inner;
            for (int j = 0; j < n; ++j) line[j] = c[base + j * stride];
            fft_radix2(line.data(), n, inverse);
            for (int j = 0; j < n; ++j) c[base + j * stride] = line[j];
        }
    });
}

} // namespace

} // namespace detail

SpectralField to_spectral(const ScalarField& f) {
    const Grid& g = f.grid;
    SpectralField s(g);
    const std::size_t N = g.size();
    for (std::size_t i = 0; i < N; ++i) s.c[i] = cdouble(f.v[i], 0.0);
    for (int a = 0; a < g.dim; ++a) detail::transform_axis(s.c, g, a, false);
    const double scale = 1.0 / static_cast<double>(N);
    for (std::size_t i = 0; i < N; ++i) s.c[i] *= scale;

    // Real input: enforce c(-m) = conj(c(m)) exactly, halving the roundoff
    // asymmetry the complex butterflies introduce.
    const int n = g.n;
    for (std::size_t i = 0; i < N; ++i) {
        auto idx = g.unravel(i);
        std::array<int, 3> neg{0, 0, 0};
        for (int a = 0; a < g.dim; ++a) neg[a] = (n - idx[a]) % n;
        const std::size_t j = g.index(neg);
        if (j < i) continue;
        const cdouble avg = 0.5 * (s.c[i] + std::conj(s.c[j]));
        s.c[i] = avg;
        s.c[j] = std::conj(avg);
    }
    return s;
}

ScalarField from_spectral(const SpectralField& s) {
    const Grid& g = s.grid;
    std::vector<cdouble> c = s.c;
    for (int a = 0; a < g.dim; ++a) detail::transform_axis(c, g, a, true);
    ScalarField f(g);
    const std::size_t N = g.size();
    for (std::size_t i = 0; i < N; ++i) f.v[i] = c[i].real();
    return f;
}

} // namespace awr
