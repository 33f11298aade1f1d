#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "awr/errors.hpp"

namespace awr {

// Uniform periodic grid on the flat torus ([-1,1])^d with period 2 per axis.
// Sample points x_j = -1 + 2j/n, j = 0..n-1; the wavenumber of integer mode m
// is k = pi*m. The cell "volume" (2/n)^d turns grid sums into quadrature.
//
// d = 2 and d = 3 are the production dimensions; d = 1 is admitted for the
// one-dimensional model-equivalence checks only.
struct Grid {
    int dim = 2;
    int n = 0;

    Grid() = default;
    Grid(int d_, int n_);

    std::size_t size() const; // n^dim
    double volume() const;    // 2^dim
    double cell_volume() const;
    double coord(int j) const { return -1.0 + 2.0 * j / n; }

    // Row-major index with axis 0 slowest.
    std::size_t index(const std::array<int, 3>& idx) const;
    std::array<int, 3> unravel(std::size_t flat) const;

    bool operator==(const Grid& o) const { return dim == o.dim && n == o.n; }
    bool operator!=(const Grid& o) const { return !(*this == o); }
};

struct ScalarField {
    Grid grid;
    std::vector<double> v;

    ScalarField() = default;
    explicit ScalarField(const Grid& g, double fill = 0.0) : grid(g), v(g.size(), fill) {}

    double& operator[](std::size_t i) { return v[i]; }
    double operator[](std::size_t i) const { return v[i]; }
    std::size_t size() const { return v.size(); }
};

struct VectorField {
    Grid grid;
    std::vector<ScalarField> comp; // dim components

    VectorField() = default;
    explicit VectorField(const Grid& g) : grid(g), comp(g.dim, ScalarField(g)) {}

    ScalarField& operator[](int c) { return comp[c]; }
    const ScalarField& operator[](int c) const { return comp[c]; }
    int dim() const { return grid.dim; }
};

// Symmetric trace-free tensor field. Only the independent entries are stored,
// d(d+1)/2 - 1 of them, so symmetry and zero trace hold by construction:
//   d = 2: {t00, t01},              t11 = -t00
//   d = 3: {t00, t11, t01, t02, t12},  t22 = -t00 - t11
struct SymTensorField0 {
    Grid grid;
    std::vector<ScalarField> comp;

    SymTensorField0() = default;
    explicit SymTensorField0(const Grid& g) : grid(g), comp(ncomp(g.dim), ScalarField(g)) {}

    static int ncomp(int d) { return d * (d + 1) / 2 - 1; }

    // Entry (i,j) at flat grid index p, reconstructing the dependent diagonal.
    double entry(int i, int j, std::size_t p) const;

    // Materializes component (i,j) as a scalar field.
    ScalarField component(int i, int j) const;
};

// General (not necessarily symmetric) tensor field, row-major components:
// entry (i,j) stored at comp[i*dim + j].
struct MatField {
    Grid grid;
    std::vector<ScalarField> comp;

    MatField() = default;
    explicit MatField(const Grid& g) : grid(g), comp(g.dim * g.dim, ScalarField(g)) {}

    ScalarField& at(int i, int j) { return comp[i * grid.dim + j]; }
    const ScalarField& at(int i, int j) const { return comp[i * grid.dim + j]; }
};

void require_same_grid(const Grid& a, const Grid& b, const char* where);

} // namespace awr
