#include "core/channels.hpp"

#include <cmath>

#include <doctest.h>

#include "core/rng.hpp"
#include "support/oracles.hpp"

using namespace qmc;

namespace {

oracle::Mat to_oracle(const ComplexMatrix& m) {
    oracle::Mat out = oracle::zeros(m.rows(), m.cols());
    for (int r = 0; r < m.rows(); ++r)
        for (int c = 0; c < m.cols(); ++c) out[static_cast<size_t>(r)][static_cast<size_t>(c)] = m.at(r, c);
    return out;
}

double max_abs_diff(const ComplexMatrix& m, const oracle::Mat& o) {
    double worst = 0;
    for (int r = 0; r < m.rows(); ++r)
        for (int c = 0; c < m.cols(); ++c)
            worst = std::max(worst, std::abs(m.at(r, c) - o[static_cast<size_t>(r)][static_cast<size_t>(c)]));
    return worst;
}

ComplexMatrix pauli(char which) {
    ComplexMatrix m(2, 2);
    switch (which) {
        case 'I': m.at(0, 0) = 1; m.at(1, 1) = 1; break;
        case 'X': m.at(0, 1) = 1; m.at(1, 0) = 1; break;
        case 'Y': m.at(0, 1) = Cx(0, -1); m.at(1, 0) = Cx(0, 1); break;
        case 'Z': m.at(0, 0) = 1; m.at(1, 1) = -1; break;
    }
    return m;
}

ComplexMatrix cnot() {
    ComplexMatrix u(4, 4);
    u.at(0, 0) = 1;
    u.at(1, 1) = 1;
    u.at(2, 3) = 1;
    u.at(3, 2) = 1;
    return u;
}

MarkovChannelSpec two_state_markov(char v0, char v1, double stay, bool fixed_point_form) {
    MarkovChannelSpec m;
    m.transition = {{stay, 1 - stay}, {1 - stay, stay}};
    m.kraus_unitaries = {pauli(v0), pauli(v1)};
    m.fixed_point_form = fixed_point_form;
    return m;
}

}  // namespace

TEST_CASE("memoryless dilation matches the direct trace-out") {
    // CNOT with the environment as target: |+> becomes maximally mixed.
    const CVec plus = normalized(CVec{1, 1});
    const DensityMatrix out = apply_memoryless(cnot(), DensityMatrix::pure(plus));
    CHECK(trace_distance(out, DensityMatrix::maximally_mixed(2)) < 1e-12);

    // Basis inputs pass through untouched.
    const DensityMatrix zero = DensityMatrix::basis(2, 0);
    CHECK(trace_distance(apply_memoryless(cnot(), zero), zero) < 1e-12);

    // Random unitary on Q⊗E against the brute-force dilation.
    Rng rng(71);
    const ComplexMatrix u = random_unitary(6, rng);  // d_q = 3, d_e = 2
    const DensityMatrix rho = random_density(3, rng);
    oracle::Mat e0 = oracle::zeros(2, 2);
    e0[0][0] = 1;
    oracle::Mat big = oracle::matmul(
        oracle::matmul(to_oracle(u), oracle::kron(to_oracle(rho.matrix()), e0)),
        oracle::dagger(to_oracle(u)));
    oracle::Mat expect = oracle::ptrace(big, {3, 2}, {0});
    CHECK(max_abs_diff(apply_memoryless(u, rho).matrix(), expect) < 1e-12);
}

TEST_CASE("product channel equals per-use application on product inputs") {
    Rng rng(72);
    const ComplexMatrix u = random_unitary(4, rng);  // qubit Q, qubit E
    const DensityMatrix a = random_density(2, rng);
    const DensityMatrix b = random_density(2, rng);
    const DensityMatrix joint(tensor(a.matrix(), b.matrix()), SpaceShape::uses(2, 2));

    const DensityMatrix out = apply_product_channel(u, joint, 2);
    const ComplexMatrix expect =
        tensor(apply_memoryless(u, a).matrix(), apply_memoryless(u, b).matrix());
    CHECK(max_abs_diff(out.matrix(), to_oracle(expect)) < 1e-12);

    SUBCASE("n = 0 is the identity") {
        const DensityMatrix same = apply_product_channel(u, joint, 0);
        CHECK(trace_distance(same, joint) < 1e-15);
    }

    SUBCASE("entangled inputs still give unit trace and valid states") {
        CVec bell(4, Cx(0, 0));
        bell[0] = std::sqrt(0.5);
        bell[3] = std::sqrt(0.5);
        const DensityMatrix ent(outer(bell), SpaceShape::uses(2, 2));
        const DensityMatrix got = apply_product_channel(u, ent, 2);
        CHECK(std::abs(got.matrix().trace().real() - 1.0) < 1e-12);
    }
}

TEST_CASE("memory channel with trivial memory reduces to the product channel") {
    Rng rng(73);
    const ComplexMatrix u = random_unitary(4, rng);
    // Same dilation registered as a memory channel with d_m = 1.
    ComplexMatrix u_qme = u;  // factor order [Q, M, E] with d_m = 1 collapses to [Q, E]
    const ChannelSpec spec = ChannelSpec::make(2, 1, 2, {u_qme}, basis_vec(2, 0),
                                               DensityMatrix::maximally_mixed(1));

    const DensityMatrix rho = random_density(4, rng).with_shape(SpaceShape::uses(2, 2));
    const DensityMatrix via_memory = apply_memory_channel(spec, rho, 2);
    const DensityMatrix via_product = apply_product_channel(u, rho, 2);
    CHECK(trace_distance(via_memory, via_product) < 1e-11);
}

TEST_CASE("shift channel hands each input to the next output") {
    const ChannelSpec shift = build_shift_channel(2);
    Rng rng(74);
    const DensityMatrix rho1 = random_density(2, rng);
    const DensityMatrix rho2 = random_density(2, rng);
    const DensityMatrix omega = random_density(2, rng);

    SUBCASE("single use: output is the prior memory, memory becomes the input") {
        const DensityMatrix out = apply_memory_channel(shift, rho1, omega, 1);
        CHECK(trace_distance(out, omega) < 1e-12);
        const DensityMatrix mem = memory_state_after(shift, rho1, omega, 1);
        CHECK(trace_distance(mem, rho1) < 1e-12);
    }

    SUBCASE("two product uses: outputs are (omega, rho1), memory ends as rho2") {
        const DensityMatrix joint(tensor(rho1.matrix(), rho2.matrix()), SpaceShape::uses(2, 2));
        const DensityMatrix out = apply_memory_channel(shift, joint, omega, 2);
        const ComplexMatrix expect = tensor(omega.matrix(), rho1.matrix());
        CHECK(max_abs_diff(out.matrix(), to_oracle(expect)) < 1e-12);
        CHECK(trace_distance(memory_state_after(shift, joint, omega, 2), rho2) < 1e-12);
    }
}

TEST_CASE("both dilation forms of a correlated chain give the same outputs") {
    Rng rng(75);
    const ChannelSpec plain = build_markov_channel(two_state_markov('I', 'X', 0.7, false));
    const ChannelSpec fixed = build_markov_channel(two_state_markov('I', 'X', 0.7, true));
    CHECK(plain.d_e == 2);
    CHECK(fixed.d_e == 4);

    for (int n = 1; n <= 3; ++n) {
        const int dim = 1 << n;
        const DensityMatrix rho = random_density(dim, rng).with_shape(SpaceShape::uses(2, n));
        const DensityMatrix a = apply_memory_channel(plain, rho, n);
        const DensityMatrix b = apply_memory_channel(fixed, rho, n);
        CHECK(trace_distance(a, b) < 1e-10);
    }
}

TEST_CASE("classical label marginal follows the transition matrix") {
    // Dephasing-flavoured chain: labels apply I or Z, so the label marginal
    // evolves exactly like the classical chain regardless of the Q input.
    MarkovChannelSpec m = two_state_markov('I', 'Z', 0.9, true);
    m.initial_distribution = {1.0, 0.0};
    const ChannelSpec spec = build_markov_channel(m);

    Rng rng(76);
    const int n = 5;
    const DensityMatrix rho = random_density(1 << n, rng).with_shape(SpaceShape::uses(2, n));
    const std::vector<DensityMatrix> traj =
        memory_trajectory(spec, rho, spec.initial_memory, n);
    REQUIRE(traj.size() == static_cast<size_t>(n));

    std::vector<double> dist = {1.0, 0.0};
    for (int k = 0; k < n; ++k) {
        dist = oracle::chain_step(m.transition, dist);
        for (int j = 0; j < 2; ++j)
            CHECK(std::abs(traj[static_cast<size_t>(k)].matrix().at(j, j).real() -
                           dist[static_cast<size_t>(j)]) < 1e-10);
        // Label coherences never appear when the start is diagonal.
        CHECK(std::abs(traj[static_cast<size_t>(k)].matrix().at(0, 1)) < 1e-10);
    }
}

TEST_CASE("memory trajectory endpoint agrees with the one-shot memory state") {
    Rng rng(77);
    const ChannelSpec spec = build_markov_channel(two_state_markov('I', 'X', 0.6, false));
    const DensityMatrix rho = random_density(8, rng).with_shape(SpaceShape::uses(2, 3));
    const DensityMatrix omega = random_density(2, rng);

    const std::vector<DensityMatrix> traj = memory_trajectory(spec, rho, omega, 3);
    const DensityMatrix end = memory_state_after(spec, rho, omega, 3);
    CHECK(trace_distance(traj.back(), end) < 1e-12);

    // Against the full joint state kept around to the end.
    const DensityMatrix joint = evolve_joint(spec, rho, omega, 3);
    CHECK(trace_distance(joint.partial({3}), end) < 1e-11);

    SUBCASE("n = 0 keeps the memory untouched") {
        CHECK(trace_distance(memory_state_after(spec, rho, omega, 0), omega) == 0);
    }
}

TEST_CASE("first output is independent of later inputs") {
    Rng rng(78);
    const ChannelSpec spec = build_markov_channel(two_state_markov('X', 'Z', 0.55, false));
    const DensityMatrix rho1 = random_density(2, rng);
    const DensityMatrix rho2 = random_density(2, rng);
    const DensityMatrix rho2b = random_density(2, rng);
    const DensityMatrix omega = random_density(2, rng);

    const DensityMatrix a(tensor(rho1.matrix(), rho2.matrix()), SpaceShape::uses(2, 2));
    const DensityMatrix b(tensor(rho1.matrix(), rho2b.matrix()), SpaceShape::uses(2, 2));
    const DensityMatrix qa = apply_memory_channel(spec, a, omega, 2).partial({0});
    const DensityMatrix qb = apply_memory_channel(spec, b, omega, 2).partial({0});
    CHECK(trace_distance(qa, qb) < 1e-11);

    const DensityMatrix single = apply_memory_channel(spec, rho1, omega, 1);
    CHECK(trace_distance(qa, single) < 1e-11);
}

TEST_CASE("memory map contracts in the memory argument") {
    Rng rng(79);
    const ChannelSpec spec = build_markov_channel(two_state_markov('I', 'Y', 0.8, true));
    for (int trial = 0; trial < 5; ++trial) {
        Rng sub = rng.derive(static_cast<std::uint64_t>(trial));
        const DensityMatrix rho = random_density(spec.d_q, sub);
        const DensityMatrix om1 = random_density(spec.d_m, sub);
        const DensityMatrix om2 = random_density(spec.d_m, sub);
        const MemoryMap map = induced_memory_map(spec, rho);
        const double before = trace_distance(om1, om2);
        const double after = trace_distance(map.action(om1), map.action(om2));
        CHECK(after <= before + 1e-9);
    }
}

TEST_CASE("environment records distinguish the two chain forms") {
    // With the labels alone in the environment the induced memory map sees the
    // input state; recording label pairs removes that dependence.
    const ChannelSpec plain = build_markov_channel(two_state_markov('I', 'X', 0.7, false));
    const ChannelSpec fixed = build_markov_channel(two_state_markov('I', 'X', 0.7, true));

    const FixedPointCheck bad = is_fixed_point_channel(plain, 6, 1e-9, 901);
    CHECK_FALSE(bad.verdict);
    CHECK(bad.max_deviation > 1e-3);

    const FixedPointCheck good = is_fixed_point_channel(fixed, 6, 1e-9, 901);
    CHECK(good.verdict);
    CHECK(good.max_deviation <= 1e-9);
    CHECK(good.samples_used > 0);
}

TEST_CASE("step Kraus operators form a trace-preserving set") {
    const ChannelSpec shift = build_shift_channel(3);
    const ChannelSpec markov = build_markov_channel(two_state_markov('I', 'X', 0.7, true));
    for (const ChannelSpec* spec : {&shift, &markov}) {
        const std::vector<ComplexMatrix> ks = step_kraus(*spec, 0, 1);
        CHECK(static_cast<int>(ks.size()) == spec->d_e);
        ComplexMatrix sum(spec->d_q * spec->d_m, spec->d_q * spec->d_m);
        for (const ComplexMatrix& k : ks) sum += k.adjoint() * k;
        sum -= ComplexMatrix::identity(spec->d_q * spec->d_m);
        CHECK(sum.max_abs() < 1e-12);
    }
}

TEST_CASE("joint evolution is linear in the input operator") {
    Rng rng(80);
    const ChannelSpec spec = build_markov_channel(two_state_markov('I', 'X', 0.7, false));
    const DensityMatrix rho = random_density(2, rng);
    const DensityMatrix omega = random_density(2, rng);

    // Recombine the images of the matrix units and compare to the direct run.
    ComplexMatrix rebuilt(4, 4);
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) {
            ComplexMatrix unit(2, 2);
            unit.at(a, b) = 1;
            const ComplexMatrix image = evolve_joint_matrix(spec, unit, omega.matrix(), 1);
            rebuilt += rho.matrix().at(a, b) * image;
        }
    const ComplexMatrix direct = evolve_joint_matrix(spec, rho.matrix(), omega.matrix(), 1);
    rebuilt -= direct;
    CHECK(rebuilt.max_abs() < 1e-12);
}

TEST_CASE("per-step unitaries are honoured in order") {
    // Step 1 applies X via the shift trick: compare against hand composition.
    const ComplexMatrix id4 = ComplexMatrix::identity(4);
    ComplexMatrix x_on_q = tensor(pauli('X'), ComplexMatrix::identity(2));
    std::vector<ComplexMatrix> steps = {id4, x_on_q};
    const ChannelSpec spec = ChannelSpec::make(2, 2, 1, steps, basis_vec(1, 0),
                                               DensityMatrix::basis(2, 0));

    const DensityMatrix in(tensor(DensityMatrix::basis(2, 0).matrix(),
                                  DensityMatrix::basis(2, 0).matrix()),
                           SpaceShape::uses(2, 2));
    const DensityMatrix out = apply_memory_channel(spec, in, 2);
    CHECK(trace_distance(out.partial({0}), DensityMatrix::basis(2, 0)) < 1e-12);
    CHECK(trace_distance(out.partial({1}), DensityMatrix::basis(2, 1)) < 1e-12);

    // Wrong n for a per-step list is an error.
    CHECK_THROWS_AS(apply_memory_channel(spec, DensityMatrix::basis(2, 0), 1),
                    std::invalid_argument);
}

TEST_CASE("channel construction rejects malformed pieces") {
    ComplexMatrix not_unitary(4, 4);
    not_unitary.at(0, 0) = 2;
    CHECK_THROWS_AS(ChannelSpec::make(2, 1, 2, not_unitary), std::invalid_argument);

    CHECK_THROWS_AS(ChannelSpec::make(2, 1, 2, {ComplexMatrix::identity(4)},
                                      CVec{1.0, 1.0}, DensityMatrix::maximally_mixed(1)),
                    std::invalid_argument);

    MarkovChannelSpec bad_row = two_state_markov('I', 'X', 0.7, false);
    bad_row.transition[0][0] = 0.8;  // row sums to 1.1
    CHECK_THROWS_AS(build_markov_channel(bad_row), std::invalid_argument);

    MarkovChannelSpec negative = two_state_markov('I', 'X', 0.7, false);
    negative.transition[0] = {1.2, -0.2};
    CHECK_THROWS_AS(build_markov_channel(negative), std::invalid_argument);

    MarkovChannelSpec bad_v = two_state_markov('I', 'X', 0.7, false);
    bad_v.kraus_unitaries[1] = not_unitary;
    CHECK_THROWS_AS(build_markov_channel(bad_v), std::invalid_argument);

    MarkovChannelSpec bad_init = two_state_markov('I', 'X', 0.7, false);
    bad_init.initial_distribution = {0.5, 0.2};
    CHECK_THROWS_AS(build_markov_channel(bad_init), std::invalid_argument);

    const ChannelSpec spec = build_markov_channel(two_state_markov('I', 'X', 0.7, false));
    CHECK_THROWS_AS(apply_memory_channel(spec, DensityMatrix::maximally_mixed(3), 1),
                    std::invalid_argument);
}

TEST_CASE("joint evolution respects the dimension guard") {
    const int saved = dimension_cap();
    set_dimension_cap(30);
    const ChannelSpec spec = build_markov_channel(two_state_markov('I', 'X', 0.7, false));
    // Working dimension for n = 3 is 2^3 * 2 * 2 = 32 > 30.
    const DensityMatrix rho = DensityMatrix::maximally_mixed(8).with_shape(SpaceShape::uses(2, 3));
    CHECK_THROWS_AS(apply_memory_channel(spec, rho, 3), dimension_cap_error);
    set_dimension_cap(saved);
}
