#include "qmc/qmc.h"

#include <cstdlib>
#include <cstring>
#include <new>
#include <stdexcept>
#include <string>
#include <utility>

#include <json.hpp>

#include "core/capacity.hpp"
#include "core/rng.hpp"
#include "core/serialize.hpp"
#include "core/spec_io.hpp"
#include "core/verify.hpp"

using nlohmann::json;

struct qmc_channel {
    qmc::ParsedChannel parsed;
    json doc;  // parsed source document, embedded into artifact configs
};

namespace {

thread_local std::string g_last_error;

char* dup_string(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (!out) throw std::bad_alloc();
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

void put(char** slot, const std::string& value) {
    if (slot) *slot = dup_string(value);
}

qmc_status fail_invalid(const char* message) {
    g_last_error = message;
    return QMC_ERR_INVALID;
}

template <typename Fn>
qmc_status guarded(Fn&& fn) {
    try {
        g_last_error.clear();
        return fn();
    } catch (const qmc::dimension_cap_error& e) {
        g_last_error = e.what();
        return QMC_ERR_DIMENSION;
    } catch (const std::invalid_argument& e) {
        g_last_error = e.what();
        return QMC_ERR_INVALID;
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return QMC_ERR_INTERNAL;
    }
}

// Joint-input dimension d_q^n, guarded against the cap before allocation.
int input_dim(const qmc::ChannelSpec& spec, int n) {
    long long dim = 1;
    for (int i = 0; i < n; ++i) {
        dim *= spec.d_q;
        if (dim > qmc::dimension_cap())
            throw qmc::dimension_cap_error("input dimension " + std::to_string(dim) +
                                           " exceeds the cap " +
                                           std::to_string(qmc::dimension_cap()));
    }
    return static_cast<int>(dim);
}

}  // namespace

extern "C" {

const char* qmc_last_error(void) { return g_last_error.c_str(); }

void qmc_string_free(char* s) { std::free(s); }

void qmc_channel_free(qmc_channel* c) { delete c; }

qmc_status qmc_channel_parse(const char* json_text, qmc_channel** out) {
    if (!json_text || !out) return fail_invalid("qmc_channel_parse: null argument");
    *out = nullptr;
    return guarded([&] {
        qmc::ParsedChannel parsed = qmc::parse_channel_json(json_text);
        json doc = json::parse(json_text);
        *out = new qmc_channel{std::move(parsed), std::move(doc)};
        return QMC_OK;
    });
}

qmc_status qmc_channel_dims(const qmc_channel* c, int* d_q, int* d_m, int* d_e) {
    if (!c) return fail_invalid("qmc_channel_dims: null channel");
    if (d_q) *d_q = c->parsed.spec.d_q;
    if (d_m) *d_m = c->parsed.spec.d_m;
    if (d_e) *d_e = c->parsed.spec.d_e;
    return QMC_OK;
}

qmc_status qmc_simulate(const qmc_channel* c, const char* input_json, int n, char** json_out,
                        char** csv_out) {
    if (!c) return fail_invalid("qmc_simulate: null channel");
    return guarded([&] {
        if (n < 1) throw std::invalid_argument("simulate: n must be >= 1");
        const qmc::ChannelSpec& spec = c->parsed.spec;
        const int dim = input_dim(spec, n);

        qmc::DensityMatrix input = input_json ? qmc::parse_state_json(input_json)
                                              : qmc::DensityMatrix::maximally_mixed(dim);
        if (input.dim() != dim)
            throw std::invalid_argument("simulate: input dimension " +
                                        std::to_string(input.dim()) + " does not match d_q^n = " +
                                        std::to_string(dim));
        input = input.with_shape(qmc::SpaceShape::uses(spec.d_q, n));

        const qmc::DensityMatrix joint = qmc::evolve_joint(spec, input, spec.initial_memory, n);
        std::vector<int> q_factors(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) q_factors[static_cast<std::size_t>(i)] = i;
        const qmc::DensityMatrix output = joint.partial(q_factors);
        const qmc::DensityMatrix memory = joint.partial({n});

        json config;
        config["channel"] = c->doc;
        config["n"] = n;
        config["input"] = input_json ? json::parse(input_json) : json("maximally_mixed");
        put(json_out, qmc::artifact_json_simulate(config.dump(), output, memory));
        put(csv_out, qmc::labeled_matrices_csv(
                         {{"output_state", output.matrix()}, {"memory_state", memory.matrix()}}));
        return QMC_OK;
    });
}

qmc_status qmc_entropy_report(const char* doc_json, char** json_out, char** csv_out) {
    if (!doc_json) return fail_invalid("qmc_entropy_report: null document");
    return guarded([&] {
        json doc;
        try {
            doc = json::parse(doc_json);
        } catch (const json::parse_error& e) {
            throw std::invalid_argument(std::string("entropy document: ") + e.what());
        }

        std::vector<std::pair<std::string, double>> rows;
        if (doc.is_object() && doc.contains("probs")) {
            const qmc::CQEnsemble ens = qmc::parse_ensemble_json(doc_json);
            const qmc::DensityMatrix embedded = qmc::cq_embed(ens);
            double mean_member = 0;
            qmc::ComplexMatrix avg(ens.states[0].dim(), ens.states[0].dim());
            for (std::size_t i = 0; i < ens.probs.size(); ++i) {
                mean_member += ens.probs[i] * qmc::von_neumann_entropy(ens.states[i]);
                qmc::ComplexMatrix scaled = ens.states[i].matrix();
                scaled *= qmc::Cx(ens.probs[i], 0);
                avg += scaled;
            }
            rows = {{"members", static_cast<double>(ens.probs.size())},
                    {"dim", static_cast<double>(ens.states[0].dim())},
                    {"average_entropy", qmc::entropy_of_hermitian(avg)},
                    {"mean_member_entropy", mean_member},
                    {"holevo_chi", qmc::holevo_chi(ens)},
                    {"flagged_mutual_information", qmc::mutual_information(embedded, {0})}};
        } else {
            const qmc::DensityMatrix state = qmc::parse_state_json(doc_json);
            rows = {{"dim", static_cast<double>(state.dim())},
                    {"entropy", qmc::von_neumann_entropy(state)}};
        }

        json config;
        config["document"] = doc;
        put(json_out, qmc::artifact_json_quantities(config.dump(), rows));
        put(csv_out, qmc::quantities_csv(rows));
        return QMC_OK;
    });
}

qmc_status qmc_probe_mixing(const qmc_channel* c, double epsilon, int step_budget, uint64_t seed,
                            char** summary_json_out, char** trajectory_csv_out) {
    if (!c) return fail_invalid("qmc_probe_mixing: null channel");
    return guarded([&] {
        const qmc::ChannelSpec& spec = c->parsed.spec;
        const qmc::InputSampler inputs;
        const qmc::MemoryPairSampler pairs;
        const qmc::MixingProbeResult probe =
            qmc::estimate_mixing_time(spec, epsilon, inputs, pairs, step_budget, seed);

        const qmc::MemoryMap map =
            qmc::induced_memory_map(spec, qmc::DensityMatrix::maximally_mixed(spec.d_q));
        const qmc::ContractionEstimate contraction =
            qmc::contraction_coefficient(map, pairs, qmc::Rng(seed).derive(0xC07).next_u64());

        json config;
        config["channel"] = c->doc;
        config["epsilon"] = epsilon;
        config["step_budget"] = step_budget;
        config["seed"] = seed;
        put(summary_json_out, qmc::artifact_json_mixing(config.dump(), probe, contraction));
        put(trajectory_csv_out, qmc::trajectory_csv(probe));
        return QMC_OK;
    });
}

qmc_status qmc_capacity_experiment(const qmc_channel* c, int n_max, double epsilon, uint64_t seed,
                                   int restarts, int ensemble_size, int product_only, int threads,
                                   int override_fixed_point, char** json_out, char** csv_out) {
    if (!c) return fail_invalid("qmc_capacity_experiment: null channel");
    return guarded([&] {
        if (n_max < 1) throw std::invalid_argument("capacity: n_max must be >= 1");
        qmc::ExperimentOptions opts;
        if (restarts > 0) opts.optimize.restarts = restarts;
        if (ensemble_size > 0) opts.optimize.ensemble_size = ensemble_size;
        opts.optimize.product_only = product_only != 0;
        opts.optimize.seed = seed;
        opts.optimize.threads = threads > 0 ? threads : 1;
        opts.override_fixed_point = override_fixed_point != 0;

        const qmc::ConvergenceExperiment ex =
            qmc::capacity_convergence_experiment(c->parsed.spec, n_max, epsilon, opts);

        json config;
        config["channel"] = c->doc;
        config["n_max"] = n_max;
        config["epsilon"] = epsilon;
        config["seed"] = seed;
        config["restarts"] = opts.optimize.restarts;
        config["ensemble_size"] = opts.optimize.ensemble_size;
        config["product_only"] = opts.optimize.product_only;
        config["override_fixed_point"] = opts.override_fixed_point;
        put(json_out, qmc::artifact_json_capacity(config.dump(), ex));
        put(csv_out, qmc::capacity_csv(ex.reports));
        return QMC_OK;
    });
}

qmc_status qmc_verify(const qmc_channel* c, uint64_t seed, char** json_out, char** csv_out) {
    if (!c) return fail_invalid("qmc_verify: null channel");
    return guarded([&] {
        const qmc::VerifyReport rep = qmc::run_verify(c->parsed, seed);

        json config;
        config["channel"] = c->doc;
        config["seed"] = seed;
        put(json_out, qmc::artifact_json_verify(config.dump(), rep));
        put(csv_out, qmc::verify_csv(rep));
        if (!rep.ok) {
            std::string names;
            for (const qmc::VerifyCheck& check : rep.checks)
                if (check.applicable && !check.passed)
                    names += (names.empty() ? "" : ", ") + check.name;
            g_last_error = "verification failed: " + names;
            return QMC_ERR_VERIFY;
        }
        return QMC_OK;
    });
}

}  // extern "C"
