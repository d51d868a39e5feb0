#include "core/indecomposability.hpp"

#include <cmath>

#include <doctest.h>

#include "core/rng.hpp"
#include "support/oracles.hpp"

using namespace qmc;

namespace {

const std::vector<std::vector<double>> kLazyFlip = {{0.9, 0.1}, {0.1, 0.9}};

ChannelSpec dephasing_chain() {
    MarkovChannelSpec m;
    m.transition = kLazyFlip;
    ComplexMatrix id2 = ComplexMatrix::identity(2);
    ComplexMatrix z(2, 2);
    z.at(0, 0) = 1;
    z.at(1, 1) = -1;
    m.kraus_unitaries = {id2, z};
    m.fixed_point_form = true;
    return build_markov_channel(m);
}

ChannelSpec memory_blind_channel(Rng& rng) {
    // Unitary acts on Q alone; the memory factor is a spectator forever.
    return ChannelSpec::make(2, 2, 1,
                             tensor(random_unitary(2, rng), ComplexMatrix::identity(2)));
}

std::vector<DensityMatrix> random_inputs(int n, Rng& rng) {
    std::vector<DensityMatrix> v;
    for (int i = 0; i < n; ++i) v.push_back(random_density(2, rng));
    return v;
}

}  // namespace

TEST_CASE("identical initial memories never separate") {
    Rng rng(101);
    const ChannelSpec spec = dephasing_chain();
    const DensityMatrix omega = random_density(2, rng);
    const std::vector<double> d =
        memory_trajectory_distance(spec, random_inputs(6, rng), omega, omega, 6);
    for (double x : d) CHECK(x < 1e-12);
}

TEST_CASE("a spectator memory keeps its distance forever") {
    Rng rng(102);
    const ChannelSpec spec = memory_blind_channel(rng);
    const DensityMatrix omega = random_density(2, rng);
    const DensityMatrix sigma = random_density(2, rng);
    const double gap = trace_distance(omega, sigma);

    const std::vector<double> d =
        memory_trajectory_distance(spec, random_inputs(5, rng), omega, sigma, 5);
    for (double x : d) CHECK(x == doctest::Approx(gap).epsilon(1e-10));

    // A target below that plateau is never reached.
    const MixingProbeResult probe =
        estimate_mixing_time(spec, gap * 0.5, InputSampler{}, MemoryPairSampler{}, 25, 1);
    CHECK_FALSE(probe.n_epsilon.has_value());
    CHECK(probe.trajectory.size() == 25);
}

TEST_CASE("label-dephasing chain forgets geometrically") {
    const ChannelSpec spec = dephasing_chain();
    Rng rng(103);
    const int n = 12;
    const std::vector<double> d = memory_trajectory_distance(
        spec, random_inputs(n, rng), DensityMatrix::basis(2, 0), DensityMatrix::basis(2, 1), n);

    // Classical two-state chain: basis distributions stay exactly 0.8^k apart.
    std::vector<double> p0 = {1, 0}, p1 = {0, 1};
    for (int k = 0; k < n; ++k) {
        p0 = oracle::chain_step(kLazyFlip, p0);
        p1 = oracle::chain_step(kLazyFlip, p1);
        CHECK(d[static_cast<size_t>(k)] ==
              doctest::Approx(oracle::half_l1(p0, p1)).epsilon(1e-10));
        CHECK(d[static_cast<size_t>(k)] == doctest::Approx(std::pow(0.8, k + 1)).epsilon(1e-9));
        if (k > 0) CHECK(d[static_cast<size_t>(k)] <= d[static_cast<size_t>(k) - 1] + 1e-9);
    }
}

TEST_CASE("mixing step count matches the classical chain") {
    const ChannelSpec spec = dephasing_chain();
    const MixingProbeResult probe =
        estimate_mixing_time(spec, 0.01, InputSampler{}, MemoryPairSampler{}, 200, 7);

    const int expected = oracle::chain_mixing_step(kLazyFlip, 0.01, 200);
    REQUIRE(expected == 21);  // smallest k with 0.8^k <= 0.01
    REQUIRE(probe.n_epsilon.has_value());
    CHECK(*probe.n_epsilon == expected);
    CHECK(probe.samples_used == 36);  // 6 sequences x 6 memory pairs
    CHECK(probe.trajectory.size() == 21);

    // The worst pair at every step is the basis pair at exactly 0.8^k.
    for (const auto& [step, dist] : probe.trajectory)
        CHECK(dist == doctest::Approx(std::pow(0.8, step)).epsilon(1e-9));
}

TEST_CASE("perfect shift forgets its memory in one step") {
    const ChannelSpec spec = build_shift_channel(2);
    for (double eps : {0.9, 0.01}) {
        const MixingProbeResult probe =
            estimate_mixing_time(spec, eps, InputSampler{}, MemoryPairSampler{}, 50, 11);
        REQUIRE(probe.n_epsilon.has_value());
        CHECK(*probe.n_epsilon == 1);
    }
}

TEST_CASE("contraction ratio estimates") {
    Rng rng(104);

    SUBCASE("identity-like memory map sits at ratio 1") {
        const ChannelSpec spec = memory_blind_channel(rng);
        const MemoryMap map = induced_memory_map(spec, random_density(2, rng));
        const ContractionEstimate est = contraction_coefficient(map, MemoryPairSampler{}, 21);
        CHECK(est.sup_ratio == doctest::Approx(1.0).epsilon(1e-10));
        CHECK(est.samples_used == 6);
    }

    SUBCASE("constant map contracts everything to zero") {
        MemoryMap map;
        map.input_state = DensityMatrix::maximally_mixed(2);
        map.memory_dim = 2;
        map.action = [](const DensityMatrix&) { return DensityMatrix::maximally_mixed(2); };
        const ContractionEstimate est = contraction_coefficient(map, MemoryPairSampler{}, 22);
        CHECK(est.sup_ratio == doctest::Approx(0.0).epsilon(1e-12));
        CHECK(est.samples_used > 0);
    }

    SUBCASE("label chain contracts at its second eigenvalue") {
        const ChannelSpec spec = dephasing_chain();
        const MemoryMap map = induced_memory_map(spec, random_density(2, rng));
        const ContractionEstimate est = contraction_coefficient(map, MemoryPairSampler{}, 23);
        CHECK(est.sup_ratio == doctest::Approx(0.8).epsilon(1e-10));
        // Attained by the orthogonal label pair.
        CHECK(trace_distance(est.omega, est.sigma) == doctest::Approx(1.0).epsilon(1e-10));

        // Contraction below 1 predicts the mixing step count.
        const MixingProbeResult probe =
            estimate_mixing_time(spec, 0.01, InputSampler{}, MemoryPairSampler{}, 200, 7);
        const int bound =
            static_cast<int>(std::ceil(std::log(0.01) / std::log(est.sup_ratio))) + 1;
        REQUIRE(probe.n_epsilon.has_value());
        CHECK(*probe.n_epsilon <= bound);
    }
}

TEST_CASE("one memory step never expands the memory distance") {
    Rng rng(105);
    double worst = -1;
    for (int trial = 0; trial < 100; ++trial) {
        Rng sub = rng.derive(static_cast<std::uint64_t>(trial));
        const ChannelSpec spec = ChannelSpec::make(2, 2, 2, random_unitary(8, sub));
        worst = std::max(worst, check_memory_continuity(spec, 5, 555 + trial));
    }
    CHECK(worst <= 1e-9);

    SUBCASE("shift channel attains the bound with equality") {
        const ChannelSpec shift = build_shift_channel(2);
        const DensityMatrix omega = DensityMatrix::basis(2, 0);
        const DensityMatrix sigma = DensityMatrix::basis(2, 1);
        const DensityMatrix rho = random_density(2, rng);
        const double out = trace_distance(apply_memory_channel(shift, rho, omega, 1),
                                          apply_memory_channel(shift, rho, sigma, 1));
        CHECK(out == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(out - trace_distance(omega, sigma) == doctest::Approx(0.0).epsilon(1e-12));
    }
}

TEST_CASE("probe input validation") {
    const ChannelSpec spec = dephasing_chain();
    CHECK_THROWS_AS(estimate_mixing_time(spec, 0.0, InputSampler{}, MemoryPairSampler{}, 10, 1),
                    std::invalid_argument);
    CHECK_THROWS_AS(estimate_mixing_time(spec, 1.5, InputSampler{}, MemoryPairSampler{}, 10, 1),
                    std::invalid_argument);
    CHECK_THROWS_AS(estimate_mixing_time(spec, 0.1, InputSampler{}, MemoryPairSampler{}, 0, 1),
                    std::invalid_argument);
    CHECK_THROWS_AS(estimate_mixing_time(spec, 0.1, InputSampler::product_only(0),
                                         MemoryPairSampler{}, 10, 1),
                    std::invalid_argument);

    Rng rng(106);
    const DensityMatrix omega = random_density(2, rng);
    CHECK_THROWS_AS(memory_trajectory_distance(spec, random_inputs(2, rng), omega, omega, 3),
                    std::invalid_argument);
    CHECK_THROWS_AS(memory_trajectory_distance(spec, random_inputs(3, rng),
                                               random_density(3, rng), omega, 3),
                    std::invalid_argument);
}
