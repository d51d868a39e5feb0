#include "core/entropics.hpp"

#include <algorithm>
#include <cmath>

namespace qmc {

namespace {

constexpr double kEntropyZeroBand = 1e-12;   // eigenvalues at or below this are rank zeros
constexpr double kEntropyHardFloor = -1e-8;  // below this the input was not a state

double entropy_of_values(const std::vector<double>& vals) {
    double s = 0;
    for (double v : vals) {
        if (v < kEntropyHardFloor)
            throw std::invalid_argument("entropy: eigenvalue " + std::to_string(v) +
                                        " below the negativity floor");
        if (v <= kEntropyZeroBand) continue;  // the whole [-1e-8, 1e-12] band counts as 0
        s -= v * std::log2(v);
    }
    return s;
}

void check_ensemble(const std::vector<double>& probs, std::size_t states, int dim_first) {
    if (probs.empty() || probs.size() != states)
        throw std::invalid_argument("ensemble: probability and state counts differ");
    double sum = 0;
    for (double p : probs) {
        if (p < 0) throw std::invalid_argument("ensemble: negative probability");
        sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-10)
        throw std::invalid_argument("ensemble: probabilities sum to " + std::to_string(sum));
    if (dim_first <= 0) throw std::invalid_argument("ensemble: empty state");
}

void check_equal_dims(const std::vector<DensityMatrix>& states, const char* what) {
    for (const DensityMatrix& s : states)
        if (s.dim() != states[0].dim())
            throw std::invalid_argument(std::string(what) + ": states differ in dimension");
}

}  // namespace

double von_neumann_entropy(const DensityMatrix& rho) {
    return entropy_of_values(hermitian_eigvals(rho.matrix()));
}

double entropy_of_hermitian(const ComplexMatrix& m) {
    return entropy_of_values(hermitian_eigvals(m));
}

double mutual_information(const DensityMatrix& rho_rq, const std::vector<int>& r_side) {
    const int f = rho_rq.shape().factors();
    if (f < 2) throw std::invalid_argument("mutual_information: need at least two factors");
    std::vector<bool> in_r(static_cast<std::size_t>(f), false);
    for (int i : r_side) {
        if (i < 0 || i >= f) throw std::invalid_argument("mutual_information: factor out of range");
        if (in_r[static_cast<std::size_t>(i)])
            throw std::invalid_argument("mutual_information: duplicate factor in cut");
        in_r[static_cast<std::size_t>(i)] = true;
    }
    std::vector<int> q_side;
    for (int i = 0; i < f; ++i)
        if (!in_r[static_cast<std::size_t>(i)]) q_side.push_back(i);
    if (r_side.empty() || q_side.empty())
        throw std::invalid_argument("mutual_information: cut must leave both sides nonempty");
    std::vector<int> r_sorted = r_side;
    std::sort(r_sorted.begin(), r_sorted.end());

    const double s_r = von_neumann_entropy(rho_rq.partial(r_sorted));
    const double s_q = von_neumann_entropy(rho_rq.partial(q_side));
    const double s_rq = von_neumann_entropy(rho_rq);
    double mi = s_r + s_q - s_rq;
    if (mi < 0 && mi >= -1e-9) mi = 0;
    return mi;
}

DensityMatrix cq_embed(const CQEnsemble& e) {
    check_ensemble(e.probs, e.states.size(), e.states.empty() ? 0 : e.states[0].dim());
    check_equal_dims(e.states, "cq_embed");
    const int m = static_cast<int>(e.states.size());
    const int d = e.states[0].dim();
    ComplexMatrix out(m * d, m * d);
    for (int i = 0; i < m; ++i) {
        const ComplexMatrix& rho = e.states[static_cast<std::size_t>(i)].matrix();
        for (int r = 0; r < d; ++r)
            for (int c = 0; c < d; ++c)
                out.at(i * d + r, i * d + c) = e.probs[static_cast<std::size_t>(i)] * rho.at(r, c);
    }
    return DensityMatrix::trusted(std::move(out), SpaceShape({m, d}));
}

double holevo_chi(const CQEnsemble& e) {
    check_ensemble(e.probs, e.states.size(), e.states.empty() ? 0 : e.states[0].dim());
    check_equal_dims(e.states, "holevo_chi");
    const int d = e.states[0].dim();
    ComplexMatrix avg(d, d);
    double conditional = 0;
    for (std::size_t i = 0; i < e.states.size(); ++i) {
        const double p = e.probs[i];
        if (p == 0) continue;
        avg += p * e.states[i].matrix();
        conditional += p * von_neumann_entropy(e.states[i]);
    }
    double chi = entropy_of_values(hermitian_eigvals(avg)) - conditional;
    if (chi < 0 && chi >= -1e-9) chi = 0;
    return chi;
}

DensityMatrix extend_separable(const SeparableDecomposition& d) {
    check_ensemble(d.probs, d.r_states.size(), d.r_states.empty() ? 0 : d.r_states[0].dim());
    if (d.q_states.size() != d.r_states.size())
        throw std::invalid_argument("extend_separable: R and Q state counts differ");
    check_equal_dims(d.r_states, "extend_separable R");
    check_equal_dims(d.q_states, "extend_separable Q");

    const int m = static_cast<int>(d.probs.size());
    const int d_r = d.r_states[0].dim();
    const int d_q = d.q_states[0].dim();

    // Spectral pieces and numerical ranks of every R state.
    std::vector<EigResult> eigs;
    std::vector<int> ranks, offsets;
    int d_rbar = 0;
    for (int j = 0; j < m; ++j) {
        eigs.push_back(hermitian_eig(d.r_states[static_cast<std::size_t>(j)].matrix()));
        int rank = 0;
        for (double v : eigs.back().values)
            if (v > kEntropyZeroBand) ++rank;
        ranks.push_back(rank);
        offsets.push_back(d_rbar);
        d_rbar += rank;
    }

    const SpaceShape shape({d_r, d_rbar, d_q});
    if (shape.total_dim() > dimension_cap())
        throw dimension_cap_error("extend_separable: extension dimension " +
                                  std::to_string(shape.total_dim()) + " exceeds cap");

    ComplexMatrix out(shape.total_dim(), shape.total_dim());
    for (int j = 0; j < m; ++j) {
        const double p = d.probs[static_cast<std::size_t>(j)];
        if (p == 0) continue;
        // |phi_j> = sum_a sqrt(lambda_a) |v_a>_R |offset_j + a>_Rbar
        CVec phi(static_cast<std::size_t>(d_r * d_rbar), Cx(0, 0));
        const EigResult& eg = eigs[static_cast<std::size_t>(j)];
        for (int a = 0; a < ranks[static_cast<std::size_t>(j)]; ++a) {
            const double amp = std::sqrt(eg.values[static_cast<std::size_t>(a)]);
            for (int r = 0; r < d_r; ++r)
                phi[static_cast<std::size_t>(r * d_rbar + offsets[static_cast<std::size_t>(j)] + a)] =
                    amp * eg.vectors.at(r, a);
        }
        const ComplexMatrix block = tensor(outer(phi), d.q_states[static_cast<std::size_t>(j)].matrix());
        out += p * block;
    }
    return DensityMatrix::trusted(std::move(out), shape);
}

double fannes_bound(double dist, int d) {
    return dist * std::log2(static_cast<double>(d)) + std::log2(std::exp(1.0)) / std::exp(1.0);
}

}  // namespace qmc
