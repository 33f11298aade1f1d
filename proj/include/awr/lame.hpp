#pragma once

#include <vector>

#include "awr/grid.hpp"
#include "awr/mean_drift.hpp"
#include "awr/model.hpp"
#include "awr/profile.hpp"

namespace awr {

// Constant-coefficient elliptic operator behind the traceless-symmetric flux
// corrections:
//   op(U) = div(grad U + grad U^T - (2/d) div U I)
//         = lap U + (1 - 2/d) grad div U.
// Per mode the symbol is -(|k|^2 I + (1 - 2/d) k k^T), symmetric negative
// definite away from k = 0, so zero-mean problems invert in closed form
// (Sherman-Morrison). For d = 2 the operator is the plain vector Laplacian.
VectorField lame_apply(const VectorField& U);

struct LameSolution {
    VectorField U;           // zero-mean displacement, op(U) = rhs
    SymTensorField0 tensor;  // grad U + grad U^T - (2/d) div U I
};

// Throws NonZeroMean unless every rhs component has |mean| <= tol_mean * rms;
// a nonzero mean makes the periodic problem unsolvable.
LameSolution lame_solve(const VectorField& rhs, double tol_mean = 1e-10);

// The tensor of a given displacement field (also used by lame_solve).
SymTensorField0 deformation_tensor(const VectorField& U);

// Flux correction sourced by the density profile and the momentum mean:
//   op(U) = div((V + grad phi) (x) (h + grad p))
//           + (d_t(rho h(rho)) - mean d_t(rho h(rho)))
// at one time node; the divergence contracts the transport slot, matching
// the momentum flux convention (div T)_j = sum_i d_i T_ij.
SymTensorField0 build_M(const DensityProfileBundle& profile, const MeanDrift& drift,
                        const ModelFunctions& model, int node);

// Flux correction coupled to the solenoidal unknown:
//   op(R) = (v . grad)(h(rho) + grad p(rho)),
// linear in v; mean-zero because v is solenoidal. Throws NotSolenoidal when
// div v exceeds tol_div relative to max(1, |v|_inf), NonZeroMean when v or
// the assembled rhs carries a mean.
SymTensorField0 build_N(const VectorField& v, const ScalarField& rho,
                        const ModelFunctions& model, double tol_div = 1e-10);

// Time-independent flux of the affine path v(t) = (1 - t/T) v0 + (t/T) vT:
//   op(U) = -(vT - v0)/T   =>   d_t v + div(tensor) = 0.
SymTensorField0 build_F(const VectorField& v0, const VectorField& vT, double T);

// Measures |N[v_n] - N[v_limit]|_inf across an increasingly oscillatory
// family; the elliptic inversion gains two derivatives, so the distances
// must trend down as the oscillation frequency grows.
struct WeakContinuityRecord {
    std::vector<double> distances;
    bool decreasing = false;  // strict node-to-node decrease (ties at zero allowed)
};

WeakContinuityRecord weak_continuity_probe(const std::vector<VectorField>& v_seq,
                                           const VectorField& v_limit,
                                           const ScalarField& rho,
                                           const ModelFunctions& model);

} // namespace awr
