#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "core/linalg.hpp"

// Channels with environment dilations and a carried memory system.
// Factor order is always [Q_1 .. Q_n, M] with a fresh environment adjoined
// last for each step and traced out immediately after it acts.

namespace qmc {

struct ChannelSpec {
    int d_q = 0, d_m = 0, d_e = 0;
    std::vector<ComplexMatrix> step_unitaries;  // one entry = repeated every step
    CVec env_reset;                             // pure state on d_e
    DensityMatrix initial_memory;

    // Validates dimensions, unitarity of every step, env normalization.
    static ChannelSpec make(int d_q, int d_m, int d_e, std::vector<ComplexMatrix> steps,
                            CVec env_reset, DensityMatrix initial_memory);
    static ChannelSpec make(int d_q, int d_m, int d_e, ComplexMatrix step);  // env |0>, memory |0><0|

    const ComplexMatrix& unitary_for_step(int i, int n) const;  // i in [0, n)
    bool per_step() const { return step_unitaries.size() > 1; }
};

struct MarkovChannelSpec {
    std::vector<std::vector<double>> transition;  // row-stochastic, L x L
    std::vector<ComplexMatrix> kraus_unitaries;   // L unitaries on d_q
    bool fixed_point_form = false;                // environment keeps label pairs
    std::vector<double> initial_distribution;     // optional; basis 0 otherwise
};

// Emits the dilation with columns U|phi>|j>|0> = sum_k sqrt(p_kj) V_k|phi>|k>|e(j,k)>
// where e(j,k) is |j> or the pair |j,k> depending on the form. Remaining
// columns are a Gram-Schmidt completion over the standard basis; they are
// never reached because the environment always enters in |0>.
ChannelSpec build_markov_channel(const MarkovChannelSpec& markov);

// Perfect memory: the step unitary swaps Q with M (trivial environment).
ChannelSpec build_shift_channel(int d);

// Single use of the dilation Tr_E[u (rho ⊗ |0><0|) u†]; d_q = dim(rho).
DensityMatrix apply_memoryless(const ComplexMatrix& u_qe, const DensityMatrix& rho_q);

// n independent uses of the same dilation on a (possibly entangled) input.
DensityMatrix apply_product_channel(const ComplexMatrix& u_qe, const DensityMatrix& rho_qn, int n);

// Full joint output on [Q_1..Q_n, M]. Building block for the two marginals.
DensityMatrix evolve_joint(const ChannelSpec& spec, const DensityMatrix& rho_qn,
                           const DensityMatrix& memory, int n);

// Same evolution on a raw matrix, no state validation. The channel action is
// linear, so this also transports non-Hermitian operators (matrix units).
ComplexMatrix evolve_joint_matrix(const ChannelSpec& spec, const ComplexMatrix& rho_qn,
                                  const ComplexMatrix& memory, int n);

// Q-output of n uses with carried memory. n = 0 returns the input unchanged.
DensityMatrix apply_memory_channel(const ChannelSpec& spec, const DensityMatrix& rho_qn,
                                   const DensityMatrix& memory, int n);
DensityMatrix apply_memory_channel(const ChannelSpec& spec, const DensityMatrix& rho_qn, int n);

// Memory marginal after n steps (consumed uses are traced out eagerly).
DensityMatrix memory_state_after(const ChannelSpec& spec, const DensityMatrix& rho_qn,
                                 const DensityMatrix& memory, int n);

// Memory marginal after every step 1..n; driven by the same inputs.
std::vector<DensityMatrix> memory_trajectory(const ChannelSpec& spec, const DensityMatrix& rho_qn,
                                             const DensityMatrix& memory, int n);

// Single-step map on memory induced by a fixed input state.
struct MemoryMap {
    DensityMatrix input_state;  // on d_q
    int memory_dim = 0;
    std::function<DensityMatrix(const DensityMatrix&)> action;
};

MemoryMap induced_memory_map(const ChannelSpec& spec, const DensityMatrix& rho_q);

// Sampled necessary check that the induced map ignores the input state.
struct FixedPointCheck {
    bool verdict = false;
    double max_deviation = 0;
    int samples_used = 0;
};

FixedPointCheck is_fixed_point_channel(const ChannelSpec& spec, int samples, double tol,
                                       std::uint64_t seed);

// Per-step Kraus operators on (Q_i, M) obtained by contracting the reset
// environment out of the step unitary; applying them never materializes E.
std::vector<ComplexMatrix> step_kraus(const ChannelSpec& spec, int step, int n);

}  // namespace qmc
