#include <doctest.h>

#include <cmath>

#include "core/linalg.hpp"
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

double max_diff(const ComplexMatrix& a, const oracle::Mat& b) {
    double m = 0;
    for (int r = 0; r < a.rows(); ++r)
        for (int c = 0; c < a.cols(); ++c) m = std::max(m, std::abs(a.at(r, c) - b[static_cast<size_t>(r)][static_cast<size_t>(c)]));
    return m;
}

ComplexMatrix random_hermitian(int n, Rng& rng) {
    ComplexMatrix h(n, n);
    for (int r = 0; r < n; ++r) {
        h.at(r, r) = rng.gaussian();
        for (int c = r + 1; c < n; ++c) {
            const Cx z = rng.complex_gaussian();
            h.at(r, c) = z;
            h.at(c, r) = std::conj(z);
        }
    }
    return h;
}

}  // namespace

TEST_CASE("tensor product") {
    SUBCASE("identity x identity") {
        const ComplexMatrix t = tensor(ComplexMatrix::identity(2), ComplexMatrix::identity(2));
        ComplexMatrix d = t;
        d -= ComplexMatrix::identity(4);
        CHECK(d.max_abs() == doctest::Approx(0.0).epsilon(1e-15));
    }
    SUBCASE("basis projectors place a single entry") {
        const ComplexMatrix t = tensor(outer(basis_vec(2, 0)), outer(basis_vec(2, 1)));
        CHECK(t.at(1, 1).real() == doctest::Approx(1.0));
        double off = 0;
        for (int r = 0; r < 4; ++r)
            for (int c = 0; c < 4; ++c)
                if (!(r == 1 && c == 1)) off = std::max(off, std::abs(t.at(r, c)));
        CHECK(off == doctest::Approx(0.0));
    }
    SUBCASE("agrees with index-formula oracle on random input") {
        Rng rng(11);
        for (int trial = 0; trial < 5; ++trial) {
            const ComplexMatrix a = random_hermitian(3, rng);
            const ComplexMatrix b = random_hermitian(4, rng);
            CHECK(max_diff(tensor(a, b), oracle::kron(to_oracle(a), to_oracle(b))) < 1e-13);
        }
    }
    SUBCASE("trace multiplies") {
        Rng rng(12);
        const ComplexMatrix a = random_hermitian(4, rng);
        const ComplexMatrix b = random_hermitian(3, rng);
        CHECK(std::abs(tensor(a, b).trace() - a.trace() * b.trace()) < 1e-12);
    }
    SUBCASE("dimension cap is enforced") {
        const int old = dimension_cap();
        set_dimension_cap(8);
        CHECK_THROWS_AS(tensor(ComplexMatrix::identity(4), ComplexMatrix::identity(4)), dimension_cap_error);
        set_dimension_cap(old);
    }
}

TEST_CASE("partial trace") {
    SUBCASE("product state splits into factors") {
        Rng rng(21);
        const DensityMatrix a = random_density(2, rng);
        const DensityMatrix b = random_density(3, rng);
        const ComplexMatrix joint = tensor(a.matrix(), b.matrix());
        const SpaceShape shape({2, 3});
        ComplexMatrix ra = partial_trace(joint, shape, {0});
        ComplexMatrix rb = partial_trace(joint, shape, {1});
        ra -= a.matrix();
        rb -= b.matrix();
        CHECK(ra.max_abs() < 1e-13);
        CHECK(rb.max_abs() < 1e-13);
    }
    SUBCASE("maximally entangled pair reduces to maximally mixed") {
        CVec bell = {Cx(1 / std::sqrt(2.0), 0), 0, 0, Cx(1 / std::sqrt(2.0), 0)};
        const ComplexMatrix rho = outer(bell);
        for (int side = 0; side < 2; ++side) {
            ComplexMatrix red = partial_trace(rho, SpaceShape({2, 2}), {side});
            red -= DensityMatrix::maximally_mixed(2).matrix();
            CHECK(red.max_abs() < 1e-13);
        }
    }
    SUBCASE("agrees with summation oracle on random three-factor states") {
        Rng rng(22);
        const std::vector<int> dims = {2, 3, 2};
        for (int trial = 0; trial < 4; ++trial) {
            const DensityMatrix rho = random_density(12, rng);
            for (const std::vector<int>& keep :
                 {std::vector<int>{0}, {1}, {2}, {0, 1}, {0, 2}, {1, 2}}) {
                const ComplexMatrix got = partial_trace(rho.matrix(), SpaceShape(dims), keep);
                CHECK(max_diff(got, oracle::ptrace(to_oracle(rho.matrix()), dims, keep)) < 1e-13);
            }
        }
    }
    SUBCASE("preserves trace") {
        Rng rng(23);
        const DensityMatrix rho = random_density(8, rng);
        const ComplexMatrix red = partial_trace(rho.matrix(), SpaceShape({2, 2, 2}), {1});
        CHECK(std::abs(red.trace() - Cx(1, 0)) < 1e-12);
    }
    SUBCASE("rejects bad keep sets") {
        const DensityMatrix rho = DensityMatrix::maximally_mixed(4);
        CHECK_THROWS_AS(partial_trace(rho.matrix(), SpaceShape({2, 2}), {2}), std::invalid_argument);
        CHECK_THROWS_AS(partial_trace(rho.matrix(), SpaceShape({2, 2}), {1, 0}), std::invalid_argument);
        CHECK_THROWS_AS(partial_trace(rho.matrix(), SpaceShape({2, 2}), {}), std::invalid_argument);
    }
}

TEST_CASE("factor-local unitary action") {
    Rng rng(31);
    const SpaceShape shape({2, 3, 2});
    const DensityMatrix rho = random_density(12, rng);
    SUBCASE("conjugation matches embedding followed by full products") {
        for (const std::vector<int>& factors : {std::vector<int>{1}, {0, 2}, {2, 0}, {0, 1, 2}}) {
            int d = 1;
            for (int f : factors) d *= shape.dim(f);
            const ComplexMatrix u = random_unitary(d, rng);
            const ComplexMatrix big = embed_unitary(u, shape, factors);
            const oracle::Mat want = oracle::matmul(oracle::matmul(to_oracle(big), to_oracle(rho.matrix())),
                                                    oracle::dagger(to_oracle(big)));
            CHECK(max_diff(conjugate_on_factors(rho.matrix(), shape, factors, u), want) < 1e-12);
        }
    }
    SUBCASE("embedding a swap exchanges factors") {
        const ComplexMatrix u = embed_unitary(swap_unitary(2), SpaceShape({2, 2}), {0, 1});
        const CVec v01 = tensor(basis_vec(2, 0), basis_vec(2, 1));
        CVec got(4);
        for (int r = 0; r < 4; ++r) {
            got[static_cast<size_t>(r)] = 0;
            for (int c = 0; c < 4; ++c) got[static_cast<size_t>(r)] += u.at(r, c) * v01[static_cast<size_t>(c)];
        }
        const CVec want = tensor(basis_vec(2, 1), basis_vec(2, 0));
        for (int i = 0; i < 4; ++i) CHECK(std::abs(got[static_cast<size_t>(i)] - want[static_cast<size_t>(i)]) < 1e-15);
    }
    SUBCASE("embedded unitary stays unitary") {
        const ComplexMatrix u = random_unitary(6, rng);
        CHECK(embed_unitary(u, shape, {0, 1}).is_unitary(1e-12));
    }
}

TEST_CASE("hermitian eigendecomposition") {
    SUBCASE("diagonal Pauli-like matrix") {
        ComplexMatrix z(2, 2);
        z.at(0, 0) = 1;
        z.at(1, 1) = -1;
        const EigResult e = hermitian_eig(z);
        CHECK(e.values[0] == doctest::Approx(1.0));
        CHECK(e.values[1] == doctest::Approx(-1.0));
        CHECK(std::abs(e.vectors.at(0, 0)) == doctest::Approx(1.0));
        CHECK(std::abs(e.vectors.at(1, 1)) == doctest::Approx(1.0));
    }
    SUBCASE("off-diagonal involution") {
        ComplexMatrix x(2, 2);
        x.at(0, 1) = 1;
        x.at(1, 0) = 1;
        const EigResult e = hermitian_eig(x);
        CHECK(e.values[0] == doctest::Approx(1.0));
        CHECK(e.values[1] == doctest::Approx(-1.0));
        for (int k = 0; k < 2; ++k)
            CHECK(std::abs(std::abs(e.vectors.at(0, k)) - 1 / std::sqrt(2.0)) < 1e-12);
    }
    SUBCASE("reconstruction on random matrices") {
        Rng rng(41);
        for (int n : {2, 5, 8, 16}) {
            const ComplexMatrix h = random_hermitian(n, rng);
            const EigResult e = hermitian_eig(h);
            ComplexMatrix rec(n, n);
            for (int k = 0; k < n; ++k)
                for (int r = 0; r < n; ++r)
                    for (int c = 0; c < n; ++c)
                        rec.at(r, c) += e.values[static_cast<size_t>(k)] * e.vectors.at(r, k) * std::conj(e.vectors.at(c, k));
            rec -= h;
            CHECK(rec.max_abs() < 1e-10);
            for (int k = 0; k + 1 < n; ++k) CHECK(e.values[static_cast<size_t>(k)] >= e.values[static_cast<size_t>(k) + 1]);
            double tr = 0;
            for (double v : e.values) tr += v;
            CHECK(std::abs(tr - h.trace().real()) < 1e-9);
        }
    }
    SUBCASE("eigenvector columns are orthonormal") {
        Rng rng(42);
        const ComplexMatrix h = random_hermitian(6, rng);
        const EigResult e = hermitian_eig(h);
        CHECK(e.vectors.is_unitary(1e-10));
    }
    SUBCASE("rejects non-Hermitian input") {
        ComplexMatrix m(2, 2);
        m.at(0, 1) = 1;
        CHECK_THROWS_AS(hermitian_eig(m), std::invalid_argument);
    }
}

TEST_CASE("trace distance") {
    SUBCASE("identical states give zero") {
        Rng rng(51);
        const DensityMatrix rho = random_density(4, rng);
        CHECK(trace_distance(rho, rho) == doctest::Approx(0.0).epsilon(1e-12));
    }
    SUBCASE("orthogonal pure states are at distance one") {
        CHECK(trace_distance(DensityMatrix::basis(2, 0), DensityMatrix::basis(2, 1)) ==
              doctest::Approx(1.0));
    }
    SUBCASE("diagonal case reduces to distribution distance") {
        const ComplexMatrix a = ComplexMatrix::diag({0.75, 0.25});
        const ComplexMatrix b = ComplexMatrix::diag({0.5, 0.5});
        CHECK(trace_distance(a, b) == doctest::Approx(0.25));
        CHECK(trace_distance(a, b) ==
              doctest::Approx(distribution_distance({0.75, 0.25}, {0.5, 0.5})));
    }
    SUBCASE("unitary invariance") {
        Rng rng(52);
        const DensityMatrix a = random_density(4, rng);
        const DensityMatrix b = random_density(4, rng);
        const ComplexMatrix u = random_unitary(4, rng);
        const double before = trace_distance(a, b);
        const double after = trace_distance(u * a.matrix() * u.adjoint(), u * b.matrix() * u.adjoint());
        CHECK(after == doctest::Approx(before).epsilon(1e-9));
    }
    SUBCASE("contracts under partial trace") {
        Rng rng(53);
        for (int trial = 0; trial < 5; ++trial) {
            const DensityMatrix a = random_density(6, rng);
            const DensityMatrix b = random_density(6, rng);
            const SpaceShape shape({2, 3});
            const double full = trace_distance(a, b);
            const double red = trace_distance(partial_trace(a.matrix(), shape, {0}),
                                              partial_trace(b.matrix(), shape, {0}));
            CHECK(red <= full + 1e-10);
        }
    }
    SUBCASE("dimension mismatch is rejected") {
        CHECK_THROWS_AS(trace_distance(DensityMatrix::maximally_mixed(2),
                                       DensityMatrix::maximally_mixed(4)),
                        std::invalid_argument);
    }
}

TEST_CASE("distribution distance") {
    CHECK(distribution_distance({1, 0}, {0, 1}) == doctest::Approx(1.0));
    CHECK(distribution_distance({0.3, 0.7}, {0.3, 0.7}) == doctest::Approx(0.0));
    CHECK(distribution_distance({0.9, 0.1}, {0.5, 0.5}) == doctest::Approx(0.4));
    CHECK_THROWS_AS(distribution_distance({1, 0}, {1, 0, 0}), std::invalid_argument);
    CHECK_THROWS_AS(distribution_distance({0.5, 0.4}, {0.5, 0.5}), std::invalid_argument);
    CHECK_THROWS_AS(distribution_distance({1.5, -0.5}, {0.5, 0.5}), std::invalid_argument);
}

TEST_CASE("density matrix validation") {
    SUBCASE("accepts valid states") {
        Rng rng(61);
        CHECK_NOTHROW(DensityMatrix(random_density(5, rng).matrix(), SpaceShape::single(5)));
    }
    SUBCASE("rejects non-unit trace") {
        ComplexMatrix m = ComplexMatrix::diag({0.7, 0.7});
        CHECK_THROWS_AS(DensityMatrix(std::move(m), SpaceShape::single(2)), std::invalid_argument);
    }
    SUBCASE("rejects non-Hermitian") {
        ComplexMatrix m = ComplexMatrix::diag({0.5, 0.5});
        m.at(0, 1) = Cx(0, 0.5);
        CHECK_THROWS_AS(DensityMatrix(std::move(m), SpaceShape::single(2)), std::invalid_argument);
    }
    SUBCASE("rejects negative eigenvalues beyond tolerance") {
        ComplexMatrix m = ComplexMatrix::diag({1.1, -0.1});
        CHECK_THROWS_AS(DensityMatrix(std::move(m), SpaceShape::single(2)), std::invalid_argument);
    }
    SUBCASE("shape bookkeeping survives partial") {
        Rng rng(62);
        const DensityMatrix rho = random_density(6, rng).with_shape(SpaceShape({2, 3}));
        const DensityMatrix red = rho.partial({1});
        CHECK(red.dim() == 3);
        CHECK(red.shape().factors() == 1);
    }
}
