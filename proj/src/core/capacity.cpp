#include "core/capacity.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "core/parallel.hpp"
#include "core/rng.hpp"

namespace qmc {

namespace {

long pow_long(int base, int n) {
    long p = 1;
    for (int i = 0; i < n; ++i) p *= base;
    return p;
}

// Euclidean projection onto the probability simplex.
std::vector<double> project_simplex(std::vector<double> v) {
    const int n = static_cast<int>(v.size());
    std::vector<double> u = v;
    std::sort(u.begin(), u.end(), std::greater<double>());
    double cumulative = 0, theta = 0;
    for (int j = 0; j < n; ++j) {
        cumulative += u[static_cast<std::size_t>(j)];
        const double t = (cumulative - 1.0) / (j + 1);
        if (u[static_cast<std::size_t>(j)] - t > 0) theta = t;
    }
    for (double& x : v) x = std::max(x - theta, 0.0);
    return v;
}

std::vector<double> structured_angles(const EnsembleParameterization& par, int element) {
    if (!par.product_form) return angles_from_state(basis_vec(par.dim, element % par.dim));
    std::vector<double> out;
    int k = element % par.dim;
    std::vector<int> digits(static_cast<std::size_t>(par.uses), 0);
    for (int u = par.uses - 1; u >= 0; --u) {
        digits[static_cast<std::size_t>(u)] = k % par.use_dim;
        k /= par.use_dim;
    }
    for (int u = 0; u < par.uses; ++u) {
        const std::vector<double> a =
            angles_from_state(basis_vec(par.use_dim, digits[static_cast<std::size_t>(u)]));
        out.insert(out.end(), a.begin(), a.end());
    }
    return out;
}

std::vector<double> random_angles(const EnsembleParameterization& par, Rng& rng) {
    if (!par.product_form) return angles_from_state(random_pure_state(par.dim, rng));
    std::vector<double> out;
    for (int u = 0; u < par.uses; ++u) {
        const std::vector<double> a = angles_from_state(random_pure_state(par.use_dim, rng));
        out.insert(out.end(), a.begin(), a.end());
    }
    return out;
}

// Mutable optimizer state for one restart. chi is the total Holevo quantity
// in bits; the per-use division happens at the end.
struct Evaluator {
    const ChannelSuperop& ch;
    EnsembleParameterization par;
    std::vector<ComplexMatrix> sigma;
    std::vector<double> s_cond;
    ComplexMatrix avg;
    double cond_total = 0;
    double chi = 0;
    long evals = 0;

    void rebuild() {
        sigma.clear();
        s_cond.clear();
        for (int i = 0; i < par.m; ++i) {
            sigma.push_back(ch.apply_pure(par.state(i)));
            s_cond.push_back(entropy_of_hermitian(sigma.back()));
        }
        refresh();
    }

    void refresh() {
        avg = ComplexMatrix(ch.dim(), ch.dim());
        cond_total = 0;
        for (int i = 0; i < par.m; ++i) {
            const double p = par.probs[static_cast<std::size_t>(i)];
            if (p == 0) continue;
            avg += p * sigma[static_cast<std::size_t>(i)];
            cond_total += p * s_cond[static_cast<std::size_t>(i)];
        }
        chi = entropy_of_hermitian(avg) - cond_total;
        ++evals;
    }

    double chi_of_probs(const std::vector<double>& p) {
        ComplexMatrix a(ch.dim(), ch.dim());
        double cond = 0;
        for (int i = 0; i < par.m; ++i) {
            if (p[static_cast<std::size_t>(i)] == 0) continue;
            a += p[static_cast<std::size_t>(i)] * sigma[static_cast<std::size_t>(i)];
            cond += p[static_cast<std::size_t>(i)] * s_cond[static_cast<std::size_t>(i)];
        }
        ++evals;
        return entropy_of_hermitian(a) - cond;
    }

    // Projected-gradient ascent on the probabilities with states held fixed.
    // The objective is concave in p; only improving steps are taken, so chi
    // never decreases here.
    void ascend_probs(double tol) {
        for (int iter = 0; iter < 200; ++iter) {
            const EigResult eg = hermitian_eig(avg);
            std::vector<double> grad(static_cast<std::size_t>(par.m), 0.0);
            for (int i = 0; i < par.m; ++i) {
                double g = -s_cond[static_cast<std::size_t>(i)];
                for (int k = 0; k < ch.dim(); ++k) {
                    const double lg =
                        std::log2(std::max(eg.values[static_cast<std::size_t>(k)], 1e-12));
                    // <v_k| sigma_i |v_k>
                    Cx quad = 0;
                    for (int r = 0; r < ch.dim(); ++r) {
                        Cx row = 0;
                        for (int c = 0; c < ch.dim(); ++c)
                            row += sigma[static_cast<std::size_t>(i)].at(r, c) * eg.vectors.at(c, k);
                        quad += std::conj(eg.vectors.at(r, k)) * row;
                    }
                    g -= lg * quad.real();
                }
                grad[static_cast<std::size_t>(i)] = g;
            }

            const double base = chi;
            double eta = 1.0;
            bool accepted = false;
            while (eta > 1e-10) {
                std::vector<double> trial = par.probs;
                for (int i = 0; i < par.m; ++i)
                    trial[static_cast<std::size_t>(i)] += eta * grad[static_cast<std::size_t>(i)];
                trial = project_simplex(std::move(trial));
                const double value = chi_of_probs(trial);
                if (value > base + 1e-15) {
                    par.probs = std::move(trial);
                    refresh();
                    accepted = true;
                    break;
                }
                eta *= 0.5;
            }
            if (!accepted || chi - base < tol) return;
        }
    }

    // One derivative-free sweep over every angle of every live element.
    bool coordinate_pass(double step) {
        bool improved = false;
        for (int i = 0; i < par.m; ++i) {
            if (par.probs[static_cast<std::size_t>(i)] < 1e-12) continue;
            const double p = par.probs[static_cast<std::size_t>(i)];
            std::vector<double>& angles = par.state_params[static_cast<std::size_t>(i)];
            for (std::size_t c = 0; c < angles.size(); ++c) {
                for (double sign : {1.0, -1.0}) {
                    const double saved = angles[c];
                    angles[c] = saved + sign * step;
                    ComplexMatrix trial_sigma = ch.apply_pure(par.state(i));
                    const double trial_s = entropy_of_hermitian(trial_sigma);
                    ComplexMatrix trial_avg = avg;
                    trial_avg += p * trial_sigma;
                    trial_avg -= p * sigma[static_cast<std::size_t>(i)];
                    const double trial_chi = entropy_of_hermitian(trial_avg) -
                                             (cond_total - p * s_cond[static_cast<std::size_t>(i)] +
                                              p * trial_s);
                    ++evals;
                    if (trial_chi > chi + 1e-12) {
                        sigma[static_cast<std::size_t>(i)] = std::move(trial_sigma);
                        s_cond[static_cast<std::size_t>(i)] = trial_s;
                        avg = std::move(trial_avg);
                        cond_total = 0;
                        for (int j = 0; j < par.m; ++j)
                            cond_total += par.probs[static_cast<std::size_t>(j)] *
                                          s_cond[static_cast<std::size_t>(j)];
                        chi = trial_chi;
                        improved = true;
                        break;
                    }
                    angles[c] = saved;
                }
            }
        }
        if (improved) refresh();  // shed incremental round-off
        return improved;
    }
};

struct RestartOutcome {
    double chi = -1;
    EnsembleParameterization par;
    bool converged = false;
    long evals = 0;
};

}  // namespace

// ── Angle parameterization ───────────────────────────────────────────────────

CVec state_from_angles(const std::vector<double>& params, int dim) {
    if (dim < 1) throw std::invalid_argument("state_from_angles: dim < 1");
    if (static_cast<int>(params.size()) != 2 * (dim - 1))
        throw std::invalid_argument("state_from_angles: need 2*(dim-1) parameters");
    CVec psi(static_cast<std::size_t>(dim), Cx(0, 0));
    double cum = 1.0;
    for (int k = 0; k < dim - 1; ++k) {
        const double theta = params[static_cast<std::size_t>(k)];
        const double amp = cum * std::cos(theta);
        const double phase = k == 0 ? 0.0 : params[static_cast<std::size_t>(dim - 2 + k)];
        psi[static_cast<std::size_t>(k)] =
            k == 0 ? Cx(amp, 0) : amp * Cx(std::cos(phase), std::sin(phase));
        cum *= std::sin(theta);
    }
    if (dim > 1) {
        const double phase = params[static_cast<std::size_t>(2 * (dim - 1) - 1)];
        psi[static_cast<std::size_t>(dim - 1)] = cum * Cx(std::cos(phase), std::sin(phase));
    } else {
        psi[0] = 1.0;
    }
    return psi;
}

std::vector<double> angles_from_state(const CVec& psi) {
    const int dim = static_cast<int>(psi.size());
    if (dim < 1) throw std::invalid_argument("angles_from_state: empty state");
    CVec v = normalized(psi);
    // Strip the global phase using the first significant component.
    for (const Cx& x : v)
        if (std::abs(x) > 1e-14) {
            const Cx ph = x / std::abs(x);
            for (Cx& y : v) y /= ph;
            break;
        }
    std::vector<double> params(static_cast<std::size_t>(2 * (dim - 1)), 0.0);
    double cum = 1.0;
    for (int k = 0; k < dim - 1; ++k) {
        const double r = std::abs(v[static_cast<std::size_t>(k)]);
        double c = cum > 1e-14 ? r / cum : 1.0;
        c = std::min(1.0, std::max(-1.0, c));
        const double theta = std::acos(c);
        params[static_cast<std::size_t>(k)] = theta;
        cum *= std::sin(theta);
        if (k > 0 && r > 1e-14)
            params[static_cast<std::size_t>(dim - 2 + k)] = std::arg(v[static_cast<std::size_t>(k)]);
    }
    if (dim > 1 && std::abs(v[static_cast<std::size_t>(dim - 1)]) > 1e-14)
        params[static_cast<std::size_t>(2 * (dim - 1) - 1)] =
            std::arg(v[static_cast<std::size_t>(dim - 1)]);
    return params;
}

CVec EnsembleParameterization::state(int i) const {
    const std::vector<double>& p = state_params.at(static_cast<std::size_t>(i));
    if (!product_form) return state_from_angles(p, dim);
    const int per_use = 2 * (use_dim - 1);
    if (static_cast<int>(p.size()) != per_use * uses)
        throw std::invalid_argument("ensemble: product-form parameter count mismatch");
    CVec out{Cx(1, 0)};
    for (int u = 0; u < uses; ++u) {
        const std::vector<double> block(p.begin() + u * per_use, p.begin() + (u + 1) * per_use);
        out = tensor(out, state_from_angles(block, use_dim));
    }
    return out;
}

int EnsembleParameterization::params_per_state() const {
    return product_form ? uses * 2 * (use_dim - 1) : 2 * (dim - 1);
}

// ── Channel superoperator cache ──────────────────────────────────────────────

ChannelSuperop::ChannelSuperop(const ChannelSpec& spec, const DensityMatrix& memory, int n) {
    if (n < 1) throw std::invalid_argument("ChannelSuperop: n < 1");
    if (memory.dim() != spec.d_m)
        throw std::invalid_argument("ChannelSuperop: memory dimension differs from d_m");
    const long dl = pow_long(spec.d_q, n);
    if (dl * spec.d_m * spec.d_e > dimension_cap())
        throw dimension_cap_error("ChannelSuperop: working dimension " +
                                  std::to_string(dl * spec.d_m * spec.d_e) + " exceeds cap");
    d_ = static_cast<int>(dl);
    n_ = n;
    d_q_ = spec.d_q;

    std::vector<int> keep(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) keep[static_cast<std::size_t>(i)] = i;
    const SpaceShape joint_shape = SpaceShape::uses(spec.d_q, n).appended(spec.d_m);

    images_.assign(static_cast<std::size_t>(d_) * d_, ComplexMatrix());
    for (int a = 0; a < d_; ++a)
        for (int b = a; b < d_; ++b) {
            ComplexMatrix unit(d_, d_);
            unit.at(a, b) = 1;
            const ComplexMatrix evolved = evolve_joint_matrix(spec, unit, memory.matrix(), n);
            images_[static_cast<std::size_t>(a) * d_ + b] =
                partial_trace(evolved, joint_shape, keep);
        }
}

const ComplexMatrix& ChannelSuperop::image(int a, int b) const {
    return images_[static_cast<std::size_t>(a) * d_ + b];
}

ComplexMatrix ChannelSuperop::apply(const ComplexMatrix& rho_qn) const {
    if (rho_qn.rows() != d_ || rho_qn.cols() != d_)
        throw std::invalid_argument("ChannelSuperop: input dimension mismatch");
    ComplexMatrix out(d_, d_);
    for (int a = 0; a < d_; ++a)
        for (int b = 0; b < d_; ++b) {
            const Cx w = rho_qn.at(a, b);
            if (std::abs(w) < 1e-16) continue;
            // The step map preserves adjoints, so the lower triangle images
            // are adjoints of the stored upper triangle.
            if (a <= b) {
                out += w * image(a, b);
            } else {
                out += w * image(b, a).adjoint();
            }
        }
    return out;
}

ComplexMatrix ChannelSuperop::apply_pure(const CVec& psi) const {
    if (static_cast<int>(psi.size()) != d_)
        throw std::invalid_argument("ChannelSuperop: state dimension mismatch");
    ComplexMatrix out(d_, d_);
    for (int a = 0; a < d_; ++a) {
        const double pa = std::norm(psi[static_cast<std::size_t>(a)]);
        if (pa > 1e-16) {
            const ComplexMatrix& img = image(a, a);
            for (int r = 0; r < d_; ++r)
                for (int c = 0; c < d_; ++c) out.at(r, c) += pa * img.at(r, c);
        }
        for (int b = a + 1; b < d_; ++b) {
            const Cx w = psi[static_cast<std::size_t>(a)] * std::conj(psi[static_cast<std::size_t>(b)]);
            if (std::abs(w) < 1e-16) continue;
            const ComplexMatrix& img = image(a, b);
            const Cx wc = std::conj(w);
            for (int r = 0; r < d_; ++r)
                for (int c = 0; c < d_; ++c)
                    out.at(r, c) += w * img.at(r, c) + wc * std::conj(img.at(c, r));
        }
    }
    return out;
}

// ── Ensemble evaluation and optimization ─────────────────────────────────────

double ensemble_chi(const ChannelSuperop& channel, const EnsembleParameterization& e) {
    if (e.m < 1 || static_cast<int>(e.probs.size()) != e.m ||
        static_cast<int>(e.state_params.size()) != e.m)
        throw std::invalid_argument("ensemble_chi: inconsistent parameterization");
    double sum = 0;
    for (double p : e.probs) {
        if (p < 0) throw std::invalid_argument("ensemble_chi: negative probability");
        sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-10)
        throw std::invalid_argument("ensemble_chi: probabilities do not sum to 1");

    ComplexMatrix avg(channel.dim(), channel.dim());
    double cond = 0;
    for (int i = 0; i < e.m; ++i) {
        const double p = e.probs[static_cast<std::size_t>(i)];
        if (p == 0) continue;
        const ComplexMatrix sigma = channel.apply_pure(e.state(i));
        avg += p * sigma;
        cond += p * entropy_of_hermitian(sigma);
    }
    double chi = entropy_of_hermitian(avg) - cond;
    if (chi < 0 && chi >= -1e-9) chi = 0;
    return chi;
}

ChiOptimum optimize_chi_n(const ChannelSpec& spec, const DensityMatrix& memory, int n,
                          const OptimizeOptions& opts) {
    if (n < 1) throw std::invalid_argument("optimize_chi_n: n < 1");
    if (opts.restarts < 1) throw std::invalid_argument("optimize_chi_n: restarts < 1");
    const ChannelSuperop channel(spec, memory, n);
    const int dim = channel.dim();
    const int m = opts.ensemble_size > 0 ? opts.ensemble_size : std::min(dim, 16);

    std::vector<RestartOutcome> outcomes(static_cast<std::size_t>(opts.restarts));
    parallel_for(opts.restarts, opts.threads, [&](int r) {
        Rng rng = Rng(opts.seed).derive(static_cast<std::uint64_t>(r));
        EnsembleParameterization par;
        par.m = m;
        par.dim = dim;
        par.uses = n;
        par.use_dim = spec.d_q;
        par.product_form = opts.product_only;
        par.probs.assign(static_cast<std::size_t>(m), 1.0 / m);
        for (int i = 0; i < m; ++i)
            par.state_params.push_back(r == 0 ? structured_angles(par, i)
                                              : random_angles(par, rng));

        Evaluator ev{channel, std::move(par), {}, {}, ComplexMatrix(), 0, 0, 0};
        ev.rebuild();

        RestartOutcome& out = outcomes[static_cast<std::size_t>(r)];
        double step = opts.angle_step;
        for (int round = 0; round < opts.max_rounds; ++round) {
            ev.ascend_probs(opts.prob_tol);
            if (!ev.coordinate_pass(step)) step *= 0.5;
            if (step < opts.angle_step_floor) {
                out.converged = true;
                break;
            }
        }
        out.chi = ev.chi;
        out.par = std::move(ev.par);
        out.evals = ev.evals;
    });

    ChiOptimum best;
    long evals = 0;
    int winner = 0;
    for (int r = 0; r < opts.restarts; ++r) {
        evals += outcomes[static_cast<std::size_t>(r)].evals;
        if (outcomes[static_cast<std::size_t>(r)].chi > outcomes[static_cast<std::size_t>(winner)].chi)
            winner = r;
    }
    const RestartOutcome& w = outcomes[static_cast<std::size_t>(winner)];
    best.chi_per_use = std::max(w.chi, 0.0) / n;
    best.best = w.par;
    best.converged = w.converged;
    best.evaluations = evals;
    return best;
}

// ── Capacity bracketing ──────────────────────────────────────────────────────

CapacityReport lower_upper_capacity(const ChannelSpec& spec, int n,
                                    const std::vector<DensityMatrix>& memory_candidates,
                                    const OptimizeOptions& opts,
                                    std::vector<std::string> labels) {
    if (memory_candidates.empty())
        throw std::invalid_argument("lower_upper_capacity: no memory candidates");
    if (!labels.empty() && labels.size() != memory_candidates.size())
        throw std::invalid_argument("lower_upper_capacity: label count mismatch");
    const auto t0 = std::chrono::steady_clock::now();

    CapacityReport report;
    report.n = n;
    report.restarts = opts.restarts;
    report.seed = opts.seed;
    report.converged = true;
    for (std::size_t i = 0; i < memory_candidates.size(); ++i) {
        const ChiOptimum opt = optimize_chi_n(spec, memory_candidates[i], n, opts);
        report.chi_per_use.push_back(opt.chi_per_use);
        report.memory_labels.push_back(labels.empty() ? "memory_" + std::to_string(i)
                                                      : labels[i]);
        report.converged = report.converged && opt.converged;
    }
    report.lower = *std::min_element(report.chi_per_use.begin(), report.chi_per_use.end());
    report.upper = *std::max_element(report.chi_per_use.begin(), report.chi_per_use.end());
    report.gap = report.upper - report.lower;
    report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return report;
}

double convergence_gap_bound(double epsilon, int n_epsilon, int d, int n) {
    if (!(epsilon > 0) || epsilon > 1)
        throw std::invalid_argument("convergence_gap_bound: epsilon must be in (0, 1]");
    if (d < 2) throw std::invalid_argument("convergence_gap_bound: d < 2");
    if (n_epsilon < 0) throw std::invalid_argument("convergence_gap_bound: negative n_epsilon");
    if (n <= n_epsilon)
        throw std::invalid_argument("convergence_gap_bound: needs n > n_epsilon");
    const double logd = std::log2(static_cast<double>(d));
    const double e = std::exp(1.0);
    return epsilon * logd + std::log2(e) / (n * e) + n_epsilon * logd / n * (1.0 - epsilon);
}

ConvergenceExperiment capacity_convergence_experiment(const ChannelSpec& spec, int n_max,
                                                      double epsilon,
                                                      const ExperimentOptions& opts) {
    if (n_max < 1) throw std::invalid_argument("capacity experiment: n_max < 1");

    ConvergenceExperiment out;
    out.epsilon = epsilon;

    Rng root(opts.optimize.seed);
    const std::uint64_t fp_seed = root.next_u64();
    const std::uint64_t probe_seed = root.next_u64();

    out.fixed_point =
        is_fixed_point_channel(spec, opts.fixed_point_samples, opts.fixed_point_tol, fp_seed);
    if (!out.fixed_point.verdict) {
        if (!opts.override_fixed_point)
            throw std::invalid_argument(
                "capacity experiment: the memory response depends on the input state "
                "(max deviation " + std::to_string(out.fixed_point.max_deviation) +
                "); pass the fixed-point override to proceed anyway");
        out.override_used = true;
    }

    out.probe = estimate_mixing_time(spec, epsilon, opts.inputs, opts.pairs, opts.step_budget,
                                     probe_seed);

    std::vector<DensityMatrix> candidates;
    std::vector<std::string> labels;
    for (int k = 0; k < spec.d_m; ++k) {
        candidates.push_back(DensityMatrix::basis(spec.d_m, k));
        labels.push_back("basis_" + std::to_string(k));
    }
    candidates.push_back(DensityMatrix::maximally_mixed(spec.d_m));
    labels.push_back("maximally_mixed");
    for (std::size_t j = 0; j < opts.extra_memories.size(); ++j) {
        candidates.push_back(opts.extra_memories[j]);
        labels.push_back("user_" + std::to_string(j));
    }

    for (int n = 1; n <= n_max; ++n) {
        OptimizeOptions o = opts.optimize;
        if (static_cast<int>(opts.restarts_per_n.size()) >= n)
            o.restarts = opts.restarts_per_n[static_cast<std::size_t>(n - 1)];
        if (static_cast<int>(opts.angle_floor_per_n.size()) >= n)
            o.angle_step_floor = opts.angle_floor_per_n[static_cast<std::size_t>(n - 1)];
        CapacityReport report = lower_upper_capacity(spec, n, candidates, o, labels);
        if (out.probe.n_epsilon && n > *out.probe.n_epsilon)
            report.gap_bound = convergence_gap_bound(epsilon, *out.probe.n_epsilon, spec.d_q, n);
        out.reports.push_back(std::move(report));
    }
    return out;
}

}  // namespace qmc
