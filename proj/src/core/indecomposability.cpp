#include "core/indecomposability.hpp"

#include <cmath>
#include <deque>

#include "core/rng.hpp"

namespace qmc {

namespace {

// Single-step view of (possibly per-step) channel machinery. The copied
// unitary was validated when the channel was built.
ChannelSpec single_step(const ChannelSpec& spec, int step, int n_total) {
    ChannelSpec sub = spec;
    if (spec.per_step()) {
        if (static_cast<int>(spec.step_unitaries.size()) < n_total)
            throw std::invalid_argument("trajectory: fewer step unitaries than steps");
        sub.step_unitaries = {spec.step_unitaries[static_cast<std::size_t>(step)]};
    }
    return sub;
}

std::vector<std::pair<DensityMatrix, DensityMatrix>> draw_pairs(const MemoryPairSampler& s,
                                                                int d_m, Rng& rng) {
    std::vector<std::pair<DensityMatrix, DensityMatrix>> out;
    if (s.basis_pairs)
        for (int j = 0; j < d_m; ++j)
            for (int k = j + 1; k < d_m; ++k)
                out.emplace_back(DensityMatrix::basis(d_m, j), DensityMatrix::basis(d_m, k));
    for (int i = 0; i < s.random_pure_pairs; ++i) {
        Rng sub = rng.derive(0x100 + static_cast<std::uint64_t>(i));
        out.emplace_back(DensityMatrix::pure(random_pure_state(d_m, sub)),
                         DensityMatrix::pure(random_pure_state(d_m, sub)));
    }
    for (int i = 0; i < s.smoothed_pairs; ++i) {
        Rng sub = rng.derive(0x200 + static_cast<std::uint64_t>(i));
        const double w = 0.2 + 0.6 * sub.uniform();
        auto smooth = [&](const CVec& v) {
            ComplexMatrix m = outer(v);
            m *= w;
            const ComplexMatrix mixed =
                (1.0 - w) / d_m * ComplexMatrix::identity(d_m);
            m += mixed;
            return DensityMatrix::trusted(std::move(m), SpaceShape::single(d_m));
        };
        out.emplace_back(smooth(random_pure_state(d_m, sub)), smooth(random_pure_state(d_m, sub)));
    }
    return out;
}

// One probe sample: a memory pair stepped forward under a shared stream of
// inputs. Entangled draws are consumed block by block; the per-step memory
// states inside a block come from the block trajectory.
struct ProbeSample {
    Rng rng;
    int block_len;
    DensityMatrix m1, m2;
    std::deque<std::pair<DensityMatrix, DensityMatrix>> pending;

    double advance(const ChannelSpec& spec) {
        if (pending.empty()) {
            const int dim_block = static_cast<int>(std::llround(std::pow(spec.d_q, block_len)));
            const DensityMatrix block =
                DensityMatrix::pure(random_pure_state(dim_block, rng))
                    .with_shape(SpaceShape::uses(spec.d_q, block_len));
            const std::vector<DensityMatrix> t1 = memory_trajectory(spec, block, m1, block_len);
            const std::vector<DensityMatrix> t2 = memory_trajectory(spec, block, m2, block_len);
            for (int k = 0; k < block_len; ++k)
                pending.emplace_back(t1[static_cast<std::size_t>(k)], t2[static_cast<std::size_t>(k)]);
        }
        m1 = pending.front().first;
        m2 = pending.front().second;
        pending.pop_front();
        return trace_distance(m1, m2);
    }
};

}  // namespace

InputSampler InputSampler::product_only(int sequences) {
    InputSampler s;
    s.product_sequences = sequences;
    s.entangled_sequences = 0;
    return s;
}

std::vector<double> memory_trajectory_distance(const ChannelSpec& spec,
                                               const std::vector<DensityMatrix>& inputs,
                                               const DensityMatrix& omega,
                                               const DensityMatrix& sigma, int n) {
    if (n < 0) throw std::invalid_argument("memory_trajectory_distance: negative n");
    if (static_cast<int>(inputs.size()) < n)
        throw std::invalid_argument("memory_trajectory_distance: fewer inputs than steps");
    if (omega.dim() != spec.d_m || sigma.dim() != spec.d_m)
        throw std::invalid_argument("memory_trajectory_distance: memory dimension mismatch");

    std::vector<double> out;
    DensityMatrix m1 = omega, m2 = sigma;
    for (int k = 0; k < n; ++k) {
        const ChannelSpec sub = single_step(spec, k, n);
        const DensityMatrix& rho = inputs[static_cast<std::size_t>(k)];
        m1 = memory_state_after(sub, rho, m1, 1);
        m2 = memory_state_after(sub, rho, m2, 1);
        out.push_back(trace_distance(m1, m2));
    }
    return out;
}

MixingProbeResult estimate_mixing_time(const ChannelSpec& spec, double epsilon,
                                       const InputSampler& inputs,
                                       const MemoryPairSampler& pairs, int step_budget,
                                       std::uint64_t seed) {
    if (!(epsilon > 0) || epsilon > 1)
        throw std::invalid_argument("estimate_mixing_time: epsilon must be in (0, 1]");
    if (step_budget < 1) throw std::invalid_argument("estimate_mixing_time: empty step budget");
    if (spec.per_step())
        throw std::invalid_argument("estimate_mixing_time: needs a uniform (single-unitary) channel");
    if (inputs.product_sequences + inputs.entangled_sequences < 1)
        throw std::invalid_argument("estimate_mixing_time: no input sequences requested");
    if (inputs.entangled_sequences > 0 && inputs.entangled_block < 2)
        throw std::invalid_argument("estimate_mixing_time: entangled blocks need length >= 2");

    Rng rng(seed);
    Rng pair_rng = rng.derive(0xA11);
    const auto memory_pairs = draw_pairs(pairs, spec.d_m, pair_rng);

    std::vector<ProbeSample> samples;
    const int total_sequences = inputs.product_sequences + inputs.entangled_sequences;
    for (int s = 0; s < total_sequences; ++s) {
        const int block = s < inputs.product_sequences ? 1 : inputs.entangled_block;
        for (std::size_t p = 0; p < memory_pairs.size(); ++p) {
            ProbeSample sample{rng.derive(static_cast<std::uint64_t>(s) * 1024 + p), block,
                               memory_pairs[p].first, memory_pairs[p].second, {}};
            samples.push_back(std::move(sample));
        }
    }

    MixingProbeResult result;
    result.epsilon = epsilon;
    result.samples_used = static_cast<int>(samples.size());
    for (int step = 1; step <= step_budget; ++step) {
        double worst = 0;
        for (ProbeSample& s : samples) worst = std::max(worst, s.advance(spec));
        result.trajectory.emplace_back(step, worst);
        if (worst <= epsilon) {
            result.n_epsilon = step;
            break;
        }
    }
    return result;
}

ContractionEstimate contraction_coefficient(const MemoryMap& map, const MemoryPairSampler& pairs,
                                            std::uint64_t seed) {
    if (map.memory_dim < 1 || !map.action)
        throw std::invalid_argument("contraction_coefficient: map is not populated");
    Rng rng(seed);
    ContractionEstimate est;
    for (const auto& [omega, sigma] : draw_pairs(pairs, map.memory_dim, rng)) {
        const double denom = trace_distance(omega, sigma);
        if (denom < 1e-8) continue;  // 0/0 guard
        const double ratio = trace_distance(map.action(omega), map.action(sigma)) / denom;
        if (ratio > est.sup_ratio || est.samples_used == 0) {
            est.sup_ratio = ratio;
            est.omega = omega;
            est.sigma = sigma;
        }
        ++est.samples_used;
    }
    return est;
}

double check_memory_continuity(const ChannelSpec& spec, int trials, std::uint64_t seed) {
    if (trials < 1) throw std::invalid_argument("check_memory_continuity: trials < 1");
    Rng rng(seed);
    double worst = -1.0;
    for (int t = 0; t < trials; ++t) {
        Rng sub = rng.derive(static_cast<std::uint64_t>(t));
        const DensityMatrix rho = random_density(spec.d_q, sub);
        const DensityMatrix omega = random_density(spec.d_m, sub);
        const DensityMatrix sigma = random_density(spec.d_m, sub);
        const double out_dist = trace_distance(apply_memory_channel(spec, rho, omega, 1),
                                               apply_memory_channel(spec, rho, sigma, 1));
        worst = std::max(worst, out_dist - trace_distance(omega, sigma));
    }
    return worst;
}

}  // namespace qmc
