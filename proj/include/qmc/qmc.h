#ifndef QMC_H
#define QMC_H

/* C interface to the memory-channel toolkit. Handles are opaque; every
 * function that can fail returns a qmc_status and leaves a thread-local
 * message retrievable with qmc_last_error(). Strings returned through
 * out-parameters are heap copies owned by the caller; release them with
 * qmc_string_free(). */

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum qmc_status {
    QMC_OK = 0,
    QMC_ERR_INVALID = 1,   /* malformed document or argument out of contract */
    QMC_ERR_DIMENSION = 2, /* working dimension exceeds the configured cap */
    QMC_ERR_VERIFY = 3,    /* property suite found a violation */
    QMC_ERR_INTERNAL = 4
} qmc_status;

typedef struct qmc_channel qmc_channel;

/* Message for the most recent failure on this thread; empty string if none. */
const char* qmc_last_error(void);

void qmc_string_free(char* s);
void qmc_channel_free(qmc_channel* c);

/* Parse and validate a channel document (see the README for the format). */
qmc_status qmc_channel_parse(const char* json_text, qmc_channel** out);

qmc_status qmc_channel_dims(const qmc_channel* c, int* d_q, int* d_m, int* d_e);

/* Q-output and final memory state after n uses starting from the channel's
 * initial memory. input_json may be NULL for the maximally mixed input on the
 * n-use space. Emits an artifact JSON document and a CSV matrix table. */
qmc_status qmc_simulate(const qmc_channel* c, const char* input_json, int n, char** json_out,
                        char** csv_out);

/* Entropic quantities of a state document or an ensemble document. */
qmc_status qmc_entropy_report(const char* doc_json, char** json_out, char** csv_out);

/* Memory trajectory distance probe: first block length at which all sampled
 * initial-memory pairs are epsilon-close, plus the one-step contraction
 * ratio. Emits a JSON summary and a step,max_distance CSV table. */
qmc_status qmc_probe_mixing(const qmc_channel* c, double epsilon, int step_budget, uint64_t seed,
                            char** summary_json_out, char** trajectory_csv_out);

/* Optimized ensemble rates for n = 1..n_max over basis + maximally mixed
 * memory candidates, with the mixing probe and applicable gap bounds.
 * restarts/ensemble_size <= 0 pick the defaults. product_only restricts
 * signal states to per-use products. threads only affects scheduling, never
 * results. override_fixed_point proceeds when the sampled fixed-point check
 * fails. */
qmc_status qmc_capacity_experiment(const qmc_channel* c, int n_max, double epsilon, uint64_t seed,
                                   int restarts, int ensemble_size, int product_only, int threads,
                                   int override_fixed_point, char** json_out, char** csv_out);

/* Property suite: trace preservation, positivity, markov form equivalence,
 * memory continuity, entropy continuity. Returns QMC_ERR_VERIFY when a check
 * fails; the report artifacts are produced either way. */
qmc_status qmc_verify(const qmc_channel* c, uint64_t seed, char** json_out, char** csv_out);

#ifdef __cplusplus
}
#endif

#endif /* QMC_H */
