#include "awr/grid.hpp"

#include "awr/fft.hpp"

namespace awr {

Grid::Grid(int d_, int n_) : dim(d_), n(n_) {
    if (dim < 1 || dim > 3) fail(ErrorCode::BadConfig, "grid dimension must be 1, 2 or 3");
    if (n < 8 || !detail::is_pow2(n))
        fail(ErrorCode::BadConfig, "grid resolution must be a power of two, n >= 8");
}

std::size_t Grid::size() const {
    std::size_t s = 1;
    for (int a = 0; a < dim; ++a) s *= static_cast<std::size_t>(n);
    return s;
}

double Grid::volume() const {
    double v = 1.0;
    for (int a = 0; a < dim; ++a) v *= 2.0;
    return v;
}

double Grid::cell_volume() const {
    double v = 1.0;
    for (int a = 0; a < dim; ++a) v *= 2.0 / n;
    return v;
}

std::size_t Grid::index(const std::array<int, 3>& idx) const {
    std::size_t flat = 0;
    for (int a = 0; a < dim; ++a) flat = flat * n + static_cast<std::size_t>(idx[a]);
    return flat;
}

std::array<int, 3> Grid::unravel(std::size_t flat) const {
    std::array<int, 3> idx{0, 0, 0};
    for (int a = dim - 1; a >= 0; --a) {
        idx[a] = static_cast<int>(flat % n);
        flat /= n;
    }
    return idx;
}

double SymTensorField0::entry(int i, int j, std::size_t p) const {
    const int d = grid.dim;
    if (d == 2) {
        // storage {t00, t01}
        if (i == j) return i == 0 ? comp[0][p] : -comp[0][p];
        return comp[1][p];
    }
    // storage {t00, t11, t01, t02, t12}
    if (i == j) {
        if (i == 0) return comp[0][p];
        if (i == 1) return comp[1][p];
        return -comp[0][p] - comp[1][p];
    }
    int a = i < j ? i : j;
    int b = i < j ? j : i;
    if (a == 0 && b == 1) return comp[2][p];
    if (a == 0 && b == 2) return comp[3][p];
    return comp[4][p];
}

ScalarField SymTensorField0::component(int i, int j) const {
    ScalarField out(grid);
    const std::size_t N = grid.size();
    for (std::size_t p = 0; p < N; ++p) out[p] = entry(i, j, p);
    return out;
}

void require_same_grid(const Grid& a, const Grid& b, const char* where) {
    if (a != b) fail(ErrorCode::BadConfig, std::string("grid mismatch in ") + where);
}

} // namespace awr
