#pragma once

#include <vector>

#include "core/linalg.hpp"

// Entropic quantities in bits (base-2 logs throughout).

namespace qmc {

// Finite ensemble of states tagged with probabilities.
struct CQEnsemble {
    std::vector<double> probs;
    std::vector<DensityMatrix> states;  // equal dimension
};

// Mixture of product states: sum_j p_j rho_R^j ⊗ rho_Q^j.
struct SeparableDecomposition {
    std::vector<double> probs;
    std::vector<DensityMatrix> r_states;
    std::vector<DensityMatrix> q_states;
};

// -S(rho) = -sum lambda log2 lambda. Eigenvalues in [-1e-9, 1e-12] count as
// exact zeros (round-off from repeated partial traces); below -1e-8 is an
// error rather than a state.
double von_neumann_entropy(const DensityMatrix& rho);

// Same quantity straight off a Hermitian matrix, skipping state validation.
// Optimizer hot path; the caller guarantees the operator is a state.
double entropy_of_hermitian(const ComplexMatrix& m);

// S(R) + S(Q) - S(RQ) for the factor split (r_side, complement). Round-off
// negatives in [-1e-9, 0) are reported as 0.
double mutual_information(const DensityMatrix& rho_rq, const std::vector<int>& r_side);

// Block-diagonal flag ⊗ signal state sum_i p_i |i><i| ⊗ rho_i on [m, d].
DensityMatrix cq_embed(const CQEnsemble& e);

// S(sum p rho) - sum p S(rho). Always equals the mutual information across
// the cq_embed cut.
double holevo_chi(const CQEnsemble& e);

// Purify every rho_R^j into its own ancilla block (block size = rank of
// rho_R^j), leaving the Q side untouched. Result lives on [R, Rbar, Q];
// tracing out Rbar recovers the original mixture, and the (R Rbar) states are
// mutually orthogonal pure flags.
DensityMatrix extend_separable(const SeparableDecomposition& d);

// dist * log2(d) + log2(e)/e. Entropy difference of two states can never
// exceed this for dist = trace_distance and d their dimension.
double fannes_bound(double dist, int d);

}  // namespace qmc
