#include "core/channels.hpp"

#include <cmath>

#include "core/rng.hpp"

namespace qmc {

namespace {

long pow_checked(int base, int n) {
    long p = 1;
    for (int i = 0; i < n; ++i) {
        p *= base;
        if (p > (1L << 40)) throw dimension_cap_error("d_q^n overflows any reasonable cap");
    }
    return p;
}

void check_working_dim(const ChannelSpec& spec, int n) {
    const long dim = pow_checked(spec.d_q, n) * spec.d_m * spec.d_e;
    if (dim > dimension_cap())
        throw dimension_cap_error("memory channel working dimension " + std::to_string(dim) +
                                  " exceeds cap " + std::to_string(dimension_cap()));
}

ComplexMatrix hermitized(const ComplexMatrix& m) {
    ComplexMatrix h(m.rows(), m.cols());
    for (int r = 0; r < m.rows(); ++r) {
        h.at(r, r) = m.at(r, r).real();
        for (int c = r + 1; c < m.cols(); ++c) {
            const Cx v = 0.5 * (m.at(r, c) + std::conj(m.at(c, r)));
            h.at(r, c) = v;
            h.at(c, r) = std::conj(v);
        }
    }
    return h;
}

// sum_t K_t rho K_t† with every K on the listed factors.
ComplexMatrix kraus_conjugate(const ComplexMatrix& rho, const SpaceShape& shape,
                              const std::vector<int>& factors,
                              const std::vector<ComplexMatrix>& kraus) {
    ComplexMatrix out(rho.rows(), rho.cols());
    for (const ComplexMatrix& k : kraus) out += conjugate_on_factors(rho, shape, factors, k);
    return out;
}

}  // namespace

// ── ChannelSpec ───────────────────────────────────────────────────────────────

ChannelSpec ChannelSpec::make(int d_q, int d_m, int d_e, std::vector<ComplexMatrix> steps,
                              CVec env_reset, DensityMatrix initial_memory) {
    if (d_q < 2) throw std::invalid_argument("ChannelSpec: d_q must be at least 2");
    if (d_m < 1 || d_e < 1) throw std::invalid_argument("ChannelSpec: d_m and d_e must be at least 1");
    if (steps.empty()) throw std::invalid_argument("ChannelSpec: no step unitaries");
    const int dim = d_q * d_m * d_e;
    for (std::size_t i = 0; i < steps.size(); ++i) {
        if (steps[i].rows() != dim || steps[i].cols() != dim)
            throw std::invalid_argument("ChannelSpec: step unitary " + std::to_string(i) +
                                        " is not d_q*d_m*d_e x d_q*d_m*d_e");
        if (!steps[i].is_unitary(kDefaultTol))
            throw std::invalid_argument("ChannelSpec: step unitary " + std::to_string(i) +
                                        " fails the unitarity tolerance");
    }
    if (static_cast<int>(env_reset.size()) != d_e)
        throw std::invalid_argument("ChannelSpec: env_reset dimension differs from d_e");
    if (std::abs(norm(env_reset) - 1.0) > kDefaultTol)
        throw std::invalid_argument("ChannelSpec: env_reset is not normalized");
    if (initial_memory.dim() != d_m)
        throw std::invalid_argument("ChannelSpec: initial_memory dimension differs from d_m");

    ChannelSpec s;
    s.d_q = d_q;
    s.d_m = d_m;
    s.d_e = d_e;
    s.step_unitaries = std::move(steps);
    s.env_reset = std::move(env_reset);
    s.initial_memory = std::move(initial_memory);
    return s;
}

ChannelSpec ChannelSpec::make(int d_q, int d_m, int d_e, ComplexMatrix step) {
    std::vector<ComplexMatrix> steps;
    steps.push_back(std::move(step));
    return make(d_q, d_m, d_e, std::move(steps), basis_vec(d_e, 0), DensityMatrix::basis(d_m, 0));
}

const ComplexMatrix& ChannelSpec::unitary_for_step(int i, int n) const {
    if (per_step()) {
        if (static_cast<int>(step_unitaries.size()) != n)
            throw std::invalid_argument("ChannelSpec: " + std::to_string(step_unitaries.size()) +
                                        " per-step unitaries given but n = " + std::to_string(n));
        return step_unitaries[static_cast<std::size_t>(i)];
    }
    return step_unitaries[0];
}

std::vector<ComplexMatrix> step_kraus(const ChannelSpec& spec, int step, int n) {
    const ComplexMatrix& u = spec.unitary_for_step(step, n);
    const int dqm = spec.d_q * spec.d_m;
    std::vector<ComplexMatrix> ks(static_cast<std::size_t>(spec.d_e), ComplexMatrix(dqm, dqm));
    // K_t = (I ⊗ <t|_E) U (I ⊗ |reset>_E)
    for (int t = 0; t < spec.d_e; ++t) {
        ComplexMatrix& k = ks[static_cast<std::size_t>(t)];
        for (int r = 0; r < dqm; ++r)
            for (int c = 0; c < dqm; ++c) {
                Cx s = 0;
                for (int e = 0; e < spec.d_e; ++e)
                    s += u.at(r * spec.d_e + t, c * spec.d_e + e) * spec.env_reset[static_cast<std::size_t>(e)];
                k.at(r, c) = s;
            }
    }
    return ks;
}

// ── Builders ──────────────────────────────────────────────────────────────────

ChannelSpec build_markov_channel(const MarkovChannelSpec& markov) {
    const int L = static_cast<int>(markov.transition.size());
    if (L < 1) throw std::invalid_argument("markov: empty transition matrix");
    for (int j = 0; j < L; ++j) {
        const auto& row = markov.transition[static_cast<std::size_t>(j)];
        if (static_cast<int>(row.size()) != L)
            throw std::invalid_argument("markov: transition row " + std::to_string(j) +
                                        " has wrong length");
        double s = 0;
        for (int k = 0; k < L; ++k) {
            if (row[static_cast<std::size_t>(k)] < 0)
                throw std::invalid_argument("markov: negative probability in transition row " +
                                            std::to_string(j));
            s += row[static_cast<std::size_t>(k)];
        }
        if (std::abs(s - 1.0) > 1e-10)
            throw std::invalid_argument("markov: transition row " + std::to_string(j) +
                                        " sums to " + std::to_string(s) + ", expected 1");
    }
    if (static_cast<int>(markov.kraus_unitaries.size()) != L)
        throw std::invalid_argument("markov: need exactly one unitary per label");
    const int d_q = markov.kraus_unitaries[0].rows();
    for (int k = 0; k < L; ++k) {
        const ComplexMatrix& v = markov.kraus_unitaries[static_cast<std::size_t>(k)];
        if (v.rows() != d_q || v.cols() != d_q)
            throw std::invalid_argument("markov: unitary " + std::to_string(k) +
                                        " has inconsistent dimension");
        if (!v.is_unitary(kDefaultTol))
            throw std::invalid_argument("markov: matrix " + std::to_string(k) + " is not unitary");
    }
    DensityMatrix memory = DensityMatrix::basis(L, 0);
    if (!markov.initial_distribution.empty()) {
        if (static_cast<int>(markov.initial_distribution.size()) != L)
            throw std::invalid_argument("markov: initial_distribution length differs from label count");
        double s = 0;
        for (double p : markov.initial_distribution) {
            if (p < 0) throw std::invalid_argument("markov: negative initial probability");
            s += p;
        }
        if (std::abs(s - 1.0) > 1e-10)
            throw std::invalid_argument("markov: initial_distribution does not sum to 1");
        memory = DensityMatrix(ComplexMatrix::diag(markov.initial_distribution), SpaceShape::single(L));
    }

    const int d_e = markov.fixed_point_form ? L * L : L;
    const int dim = d_q * L * d_e;
    if (dim > dimension_cap())
        throw dimension_cap_error("markov: step unitary dimension " + std::to_string(dim) +
                                  " exceeds cap");

    ComplexMatrix u(dim, dim);
    // Reached columns: environment in |0>.
    for (int q = 0; q < d_q; ++q)
        for (int j = 0; j < L; ++j) {
            const int col = (q * L + j) * d_e;
            for (int k = 0; k < L; ++k) {
                const double amp = std::sqrt(markov.transition[static_cast<std::size_t>(j)][static_cast<std::size_t>(k)]);
                if (amp == 0) continue;
                const int env = markov.fixed_point_form ? j * L + k : j;
                for (int qp = 0; qp < d_q; ++qp)
                    u.at((qp * L + k) * d_e + env, col) +=
                        amp * markov.kraus_unitaries[static_cast<std::size_t>(k)].at(qp, q);
            }
        }

    // The reached columns must be orthonormal already.
    std::vector<int> defined;
    for (int q = 0; q < d_q; ++q)
        for (int j = 0; j < L; ++j) defined.push_back((q * L + j) * d_e);
    for (std::size_t a = 0; a < defined.size(); ++a)
        for (std::size_t b = a; b < defined.size(); ++b) {
            Cx ip = 0;
            for (int r = 0; r < dim; ++r) ip += std::conj(u.at(r, defined[a])) * u.at(r, defined[b]);
            const Cx want = (a == b) ? Cx(1, 0) : Cx(0, 0);
            if (std::abs(ip - want) > kDefaultTol)
                throw std::invalid_argument("markov: reached columns are not isometric");
        }

    // Complete the remaining columns from the standard basis, in order.
    std::vector<int> chosen = defined;
    std::vector<int> open;
    for (int q = 0; q < d_q; ++q)
        for (int j = 0; j < L; ++j)
            for (int e = 1; e < d_e; ++e) open.push_back((q * L + j) * d_e + e);
    std::size_t next_open = 0;
    for (int cand = 0; cand < dim && next_open < open.size(); ++cand) {
        CVec r(static_cast<std::size_t>(dim), Cx(0, 0));
        r[static_cast<std::size_t>(cand)] = 1.0;
        for (int pass = 0; pass < 2; ++pass)
            for (int col : chosen) {
                Cx ip = 0;
                for (int i = 0; i < dim; ++i) ip += std::conj(u.at(i, col)) * r[static_cast<std::size_t>(i)];
                for (int i = 0; i < dim; ++i) r[static_cast<std::size_t>(i)] -= ip * u.at(i, col);
            }
        const double nr = norm(r);
        if (nr < 1e-4) continue;
        const int col = open[next_open++];
        for (int i = 0; i < dim; ++i) u.at(i, col) = r[static_cast<std::size_t>(i)] / nr;
        chosen.push_back(col);
    }
    if (next_open != open.size())
        throw std::runtime_error("markov: unitary completion failed");
    if (!u.is_unitary(kDefaultTol)) throw std::runtime_error("markov: completed matrix not unitary");

    return ChannelSpec::make(d_q, L, d_e, {std::move(u)}, basis_vec(d_e, 0), std::move(memory));
}

ChannelSpec build_shift_channel(int d) {
    if (d < 2) throw std::invalid_argument("build_shift_channel: d must be at least 2");
    return ChannelSpec::make(d, d, 1, swap_unitary(d));
}

// ── Applications ──────────────────────────────────────────────────────────────

DensityMatrix apply_memoryless(const ComplexMatrix& u_qe, const DensityMatrix& rho_q) {
    return apply_product_channel(u_qe, rho_q, 1);
}

DensityMatrix apply_product_channel(const ComplexMatrix& u_qe, const DensityMatrix& rho_qn, int n) {
    if (n < 0) throw std::invalid_argument("apply_product_channel: negative n");
    if (n == 0) return rho_qn;
    if (u_qe.rows() != u_qe.cols()) throw std::invalid_argument("apply_product_channel: non-square unitary");
    // infer d_q from the input as the integer n-th root
    int d_q = 0;
    for (int d = 2; ; ++d) {
        const long p = pow_checked(d, n);
        if (p == rho_qn.dim()) { d_q = d; break; }
        if (p > rho_qn.dim())
            throw std::invalid_argument("apply_product_channel: input dimension is not d_q^n");
    }
    if (u_qe.rows() % d_q != 0)
        throw std::invalid_argument("apply_product_channel: unitary dimension not divisible by d_q");
    const int d_e = u_qe.rows() / d_q;
    if (!u_qe.is_unitary(kDefaultTol))
        throw std::invalid_argument("apply_product_channel: matrix is not unitary");

    // Single-use dilation as a memory channel with trivial memory.
    ChannelSpec spec = ChannelSpec::make(d_q, 1, d_e,
                                         {u_qe}, basis_vec(d_e, 0), DensityMatrix::maximally_mixed(1));
    return apply_memory_channel(spec, rho_qn, n);
}

ComplexMatrix evolve_joint_matrix(const ChannelSpec& spec, const ComplexMatrix& rho_qn,
                                  const ComplexMatrix& memory, int n) {
    check_working_dim(spec, n);
    SpaceShape shape = SpaceShape::uses(spec.d_q, n).appended(spec.d_m);
    ComplexMatrix joint = tensor(rho_qn, memory);
    for (int i = 0; i < n; ++i)
        joint = kraus_conjugate(joint, shape, {i, n}, step_kraus(spec, i, n));
    return joint;
}

DensityMatrix evolve_joint(const ChannelSpec& spec, const DensityMatrix& rho_qn,
                           const DensityMatrix& memory, int n) {
    if (n < 1) throw std::invalid_argument("evolve_joint: n must be at least 1");
    if (rho_qn.dim() != pow_checked(spec.d_q, n))
        throw std::invalid_argument("evolve_joint: input dimension is not d_q^n");
    if (memory.dim() != spec.d_m)
        throw std::invalid_argument("evolve_joint: memory dimension differs from d_m");
    ComplexMatrix joint = evolve_joint_matrix(spec, rho_qn.matrix(), memory.matrix(), n);
    return DensityMatrix::trusted(hermitized(joint), SpaceShape::uses(spec.d_q, n).appended(spec.d_m));
}

DensityMatrix apply_memory_channel(const ChannelSpec& spec, const DensityMatrix& rho_qn,
                                   const DensityMatrix& memory, int n) {
    if (n < 0) throw std::invalid_argument("apply_memory_channel: negative n");
    if (n == 0) return rho_qn;
    const DensityMatrix joint = evolve_joint(spec, rho_qn, memory, n);
    std::vector<int> keep(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) keep[static_cast<std::size_t>(i)] = i;
    return joint.partial(keep);
}

DensityMatrix apply_memory_channel(const ChannelSpec& spec, const DensityMatrix& rho_qn, int n) {
    return apply_memory_channel(spec, rho_qn, spec.initial_memory, n);
}

std::vector<DensityMatrix> memory_trajectory(const ChannelSpec& spec, const DensityMatrix& rho_qn,
                                             const DensityMatrix& memory, int n) {
    if (n < 0) throw std::invalid_argument("memory_trajectory: negative n");
    std::vector<DensityMatrix> out;
    if (n == 0) return out;
    if (rho_qn.dim() != pow_checked(spec.d_q, n))
        throw std::invalid_argument("memory_trajectory: input dimension is not d_q^n");
    if (memory.dim() != spec.d_m)
        throw std::invalid_argument("memory_trajectory: memory dimension differs from d_m");
    check_working_dim(spec, n);

    // State on [Q_i..Q_n, M]; consumed uses are dropped right after their step.
    ComplexMatrix state = tensor(rho_qn.matrix(), memory.matrix());
    int remaining = n;
    for (int i = 0; i < n; ++i) {
        SpaceShape shape = SpaceShape::uses(spec.d_q, remaining).appended(spec.d_m);
        state = kraus_conjugate(state, shape, {0, remaining}, step_kraus(spec, i, n));
        std::vector<int> keep;
        for (int f = 1; f <= remaining; ++f) keep.push_back(f);
        state = partial_trace(state, shape, keep);
        --remaining;
        SpaceShape after = remaining > 0 ? SpaceShape::uses(spec.d_q, remaining).appended(spec.d_m)
                                         : SpaceShape::single(spec.d_m);
        ComplexMatrix mem = remaining > 0 ? partial_trace(state, after, {remaining})
                                          : state;
        out.push_back(DensityMatrix::trusted(hermitized(mem), SpaceShape::single(spec.d_m)));
    }
    return out;
}

DensityMatrix memory_state_after(const ChannelSpec& spec, const DensityMatrix& rho_qn,
                                 const DensityMatrix& memory, int n) {
    if (n == 0) return memory;
    return memory_trajectory(spec, rho_qn, memory, n).back();
}

// ── Induced map and fixed-point check ────────────────────────────────────────

MemoryMap induced_memory_map(const ChannelSpec& spec, const DensityMatrix& rho_q) {
    if (rho_q.dim() != spec.d_q)
        throw std::invalid_argument("induced_memory_map: input dimension differs from d_q");
    MemoryMap map;
    map.input_state = rho_q;
    map.memory_dim = spec.d_m;
    const std::vector<ComplexMatrix> kraus = step_kraus(spec, 0, 1);
    const int d_q = spec.d_q, d_m = spec.d_m;
    const ComplexMatrix rho = rho_q.matrix();
    map.action = [kraus, d_q, d_m, rho](const DensityMatrix& omega) {
        if (omega.dim() != d_m)
            throw std::invalid_argument("memory map: memory dimension mismatch");
        const SpaceShape shape({d_q, d_m});
        ComplexMatrix joint = tensor(rho, omega.matrix());
        joint = kraus_conjugate(joint, shape, {0, 1}, kraus);
        ComplexMatrix mem = partial_trace(joint, shape, {1});
        return DensityMatrix::trusted(hermitized(mem), SpaceShape::single(d_m));
    };
    return map;
}

FixedPointCheck is_fixed_point_channel(const ChannelSpec& spec, int samples, double tol,
                                       std::uint64_t seed) {
    if (samples < 1) throw std::invalid_argument("is_fixed_point_channel: samples < 1");
    Rng rng(seed);
    std::vector<DensityMatrix> inputs;
    inputs.push_back(DensityMatrix::maximally_mixed(spec.d_q));
    for (int s = 0; s < samples; ++s) {
        Rng sub = rng.derive(static_cast<std::uint64_t>(s));
        inputs.push_back(DensityMatrix::pure(random_pure_state(spec.d_q, sub)));
    }
    std::vector<DensityMatrix> memories;
    for (int k = 0; k < spec.d_m; ++k) memories.push_back(DensityMatrix::basis(spec.d_m, k));
    for (int s = 0; s < samples; ++s) {
        Rng sub = rng.derive(0x1000 + static_cast<std::uint64_t>(s));
        memories.push_back(random_density(spec.d_m, sub));
    }

    FixedPointCheck out;
    const MemoryMap base = induced_memory_map(spec, inputs[0]);
    for (std::size_t i = 1; i < inputs.size(); ++i) {
        const MemoryMap probe = induced_memory_map(spec, inputs[i]);
        for (const DensityMatrix& omega : memories) {
            const double d = trace_distance(base.action(omega), probe.action(omega));
            out.max_deviation = std::max(out.max_deviation, d);
            ++out.samples_used;
        }
    }
    out.verdict = out.max_deviation <= tol;
    return out;
}

}  // namespace qmc
