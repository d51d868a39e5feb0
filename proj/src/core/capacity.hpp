#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "core/channels.hpp"
#include "core/entropics.hpp"
#include "core/indecomposability.hpp"

// Transmission-rate bounds for memory channels over finite blocks: maximize
// the Holevo quantity per use over signal ensembles, then bracket it across
// initial memory states.

namespace qmc {

// Pure signal states as real angle vectors: amplitudes from nested
// cos/sin factors, one phase per component past the first, 2(dim-1) reals
// total. Any angle values map to a unit vector. product_form splits the
// n-use space into per-use blocks of 2(use_dim-1) angles each.
struct EnsembleParameterization {
    int m = 0;
    int dim = 0;       // full input dimension (use_dim^uses)
    int uses = 1;
    int use_dim = 2;
    bool product_form = false;
    std::vector<std::vector<double>> state_params;
    std::vector<double> probs;

    CVec state(int i) const;
    int params_per_state() const;
};

CVec state_from_angles(const std::vector<double>& params, int dim);
std::vector<double> angles_from_state(const CVec& psi);

// Dense matrix of the n-use channel for one fixed initial memory: images of
// every matrix unit, computed once, so ensemble evaluations cost a weighted
// sum instead of a fresh evolution.
class ChannelSuperop {
public:
    ChannelSuperop(const ChannelSpec& spec, const DensityMatrix& memory, int n);

    int dim() const { return d_; }
    int uses() const { return n_; }
    int use_dim() const { return d_q_; }

    ComplexMatrix apply(const ComplexMatrix& rho_qn) const;  // Q-output of the block
    ComplexMatrix apply_pure(const CVec& psi) const;

private:
    const ComplexMatrix& image(int a, int b) const;  // a <= b stored; b < a via adjoint
    int d_, n_, d_q_;
    std::vector<ComplexMatrix> images_;  // upper-triangle matrix-unit images
};

struct OptimizeOptions {
    int restarts = 8;
    int ensemble_size = 0;  // 0 = min(d_q^n, 16)
    bool product_only = false;
    std::uint64_t seed = 1;
    int max_rounds = 40;            // alternating prob/state rounds per restart
    double prob_tol = 1e-8;         // stop the probability ascent below this gain
    double angle_step = 0.5;        // initial coordinate perturbation
    double angle_step_floor = 1e-4; // restart counts as converged at this step
    int threads = 1;
};

struct ChiOptimum {
    double chi_per_use = 0;
    EnsembleParameterization best;
    bool converged = false;  // winning restart drove its step below the floor
    long evaluations = 0;
};

// Holevo quantity (total bits, not per use) of the parameterized ensemble
// pushed through the cached channel.
double ensemble_chi(const ChannelSuperop& channel, const EnsembleParameterization& e);

// Best found (1/n) * chi over cq ensembles on the n-use input space:
// alternating concave probability ascent and derivative-free angle descent,
// restarted from a basis ensemble and seeded random ensembles. A lower bound
// on the true maximum; never decreases when restarts are appended.
ChiOptimum optimize_chi_n(const ChannelSpec& spec, const DensityMatrix& memory, int n,
                          const OptimizeOptions& opts);

struct CapacityReport {
    int n = 0;
    std::vector<std::string> memory_labels;
    std::vector<double> chi_per_use;  // aligned with labels
    double lower = 0, upper = 0, gap = 0;
    std::optional<double> gap_bound;  // filled when a mixing time is known and n exceeds it
    bool converged = false;
    int restarts = 0;
    std::uint64_t seed = 0;
    double wall_seconds = 0;  // runtime diagnostic only; never serialized
};

// Optimized chi/n for every candidate initial memory; lower = min, upper =
// max. Sampled bracket: candidates stand in for the full memory-state set.
CapacityReport lower_upper_capacity(const ChannelSpec& spec, int n,
                                    const std::vector<DensityMatrix>& memory_candidates,
                                    const OptimizeOptions& opts,
                                    std::vector<std::string> labels = {});

// eps*log2(d) + log2(e)/(n*e) + (n_eps*log2(d)/n)*(1-eps): how far apart the
// per-use rates of two initial memories can sit once the memory has mixed.
// Requires n > n_eps.
double convergence_gap_bound(double epsilon, int n_epsilon, int d, int n);

struct ExperimentOptions {
    OptimizeOptions optimize;
    InputSampler inputs;
    MemoryPairSampler pairs;
    int step_budget = 200;
    int fixed_point_samples = 4;
    double fixed_point_tol = 1e-7;
    bool override_fixed_point = false;  // proceed although the check failed
    std::vector<DensityMatrix> extra_memories;
    std::vector<int> restarts_per_n;        // optional schedule, index n-1
    std::vector<double> angle_floor_per_n;  // optional schedule, index n-1
};

struct ConvergenceExperiment {
    double epsilon = 0;
    FixedPointCheck fixed_point;
    bool override_used = false;
    MixingProbeResult probe;
    std::vector<CapacityReport> reports;  // n = 1..n_max
};

// Mixing probe plus capacity brackets for block lengths 1..n_max over basis
// memories and the maximally mixed memory. Refuses channels whose memory
// response depends on the input unless the caller overrides.
ConvergenceExperiment capacity_convergence_experiment(const ChannelSpec& spec, int n_max,
                                                      double epsilon,
                                                      const ExperimentOptions& opts);

}  // namespace qmc
