#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "core/channels.hpp"

// Sampled probes of how fast a channel's memory forgets its initial state.
// They report estimates from finite sampling, never proofs.

namespace qmc {

// How input states are drawn while stepping the memory forward. Entangled
// blocks (block_len > 1) feed a Haar-random pure state spanning that many
// consecutive uses; block_len = 1 draws an independent pure state per use.
struct InputSampler {
    int product_sequences = 4;
    int entangled_sequences = 2;
    int entangled_block = 3;  // uses spanned by one entangled draw

    static InputSampler product_only(int sequences);
};

// Which initial memory pairs are probed. Basis pairs are the extremal cases
// for classical-label memories, so they are always included by default.
struct MemoryPairSampler {
    bool basis_pairs = true;
    int random_pure_pairs = 3;
    int smoothed_pairs = 2;  // pure states mixed toward I/d by a random weight
};

struct MixingProbeResult {
    double epsilon = 0;
    std::optional<int> n_epsilon;  // first step with max distance <= epsilon
    std::vector<std::pair<int, double>> trajectory;  // (step, max distance over samples)
    int samples_used = 0;
};

struct ContractionEstimate {
    double sup_ratio = 0;
    DensityMatrix omega, sigma;  // pair attaining the supremum
    int samples_used = 0;        // pairs with a usable denominator
};

// Distance between the two memory trajectories after each of steps 1..n,
// both driven by the same per-step inputs (inputs.size() >= n).
std::vector<double> memory_trajectory_distance(const ChannelSpec& spec,
                                               const std::vector<DensityMatrix>& inputs,
                                               const DensityMatrix& omega,
                                               const DensityMatrix& sigma, int n);

// Steps every sampled (input sequence, memory pair) forward in lockstep and
// returns the first step where the worst-case pair distance drops to epsilon.
// No n_epsilon in the result means the budget ran out: the channel may hold
// memory forever, or the budget was too small. Uniform (single-unitary)
// channels only.
MixingProbeResult estimate_mixing_time(const ChannelSpec& spec, double epsilon,
                                       const InputSampler& inputs,
                                       const MemoryPairSampler& pairs, int step_budget,
                                       std::uint64_t seed);

// Sampled supremum of the one-step contraction ratio over memory pairs;
// a lower bound on the true coefficient. Pairs closer than 1e-8 are skipped.
ContractionEstimate contraction_coefficient(const MemoryMap& map,
                                            const MemoryPairSampler& pairs, std::uint64_t seed);

// Max over random (rho, omega, sigma) of the one-step output distance minus
// the memory distance. Nonpositive (within 1e-9) for every dilation channel.
double check_memory_continuity(const ChannelSpec& spec, int trials, std::uint64_t seed);

}  // namespace qmc
