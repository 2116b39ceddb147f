/* C API for the CPT evaluation library.
 *
 * All functions return CPT_OK (0) on success or a cpt_status error code;
 * details for the last failure on a context are available through
 * cpt_error_message(). A cpt_ctx is not thread-safe; use one per thread.
 */
#ifndef CPT_H
#define CPT_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined _WIN32
#define CPT_API __declspec(dllexport)
#else
#define CPT_API __attribute__((visibility("default")))
#endif

typedef enum cpt_status {
  CPT_OK = 0,
  CPT_ERR_INVALID_ARG = 1,
  CPT_ERR_IO = 2,
  CPT_ERR_CONFIG = 3,
  CPT_ERR_FIXTURE = 4,
  CPT_ERR_NO_OCCURRENCE = 5,
  CPT_ERR_BACKEND = 6,
  CPT_ERR_REPLAY_MISS = 7,
  CPT_ERR_NO_ANSWER = 8,
  CPT_ERR_INTERNAL = 9,
} cpt_status;

/* Opaque context carrying the last error message. */
typedef struct cpt_ctx cpt_ctx;

CPT_API cpt_ctx* cpt_ctx_new(void);
CPT_API void cpt_ctx_free(cpt_ctx* ctx);
CPT_API const char* cpt_error_message(const cpt_ctx* ctx);

/* Emits `count` problems of `kind` ("addition" | "multiplication") as
 * line-delimited JSON records, deterministically from `seed`. */
CPT_API cpt_status cpt_gen_problems(cpt_ctx* ctx, const char* kind, int count,
                                    uint64_t seed, const char* out_path);

/* Acquires and caches clean-problem reasoning traces for every problem
 * in the config, under <run_dir>/traces/. */
CPT_API cpt_status cpt_acquire_traces(cpt_ctx* ctx, const char* config_path,
                                      const char* run_dir);

/* Reads a trace file, substitutes `d_t` digits of `answer_digits`
 * (or the explicit comma-separated `positions`, may be NULL), rewrites
 * all occurrences, and writes the tampered trace plus a spec record. */
CPT_API cpt_status cpt_tamper_trace(cpt_ctx* ctx, const char* trace_path,
                                    const char* answer_digits, int d_t, uint64_t seed,
                                    const char* positions, const char* out_trace_path,
                                    const char* out_spec_path);

/* Full sweep per the run config; trial records, transcripts, and report
 * files are written under run_dir. */
CPT_API cpt_status cpt_run_sweep(cpt_ctx* ctx, const char* config_path, const char* run_dir);

/* Re-runs a sweep with every backend replaced by a transcript replay of
 * `transcript_path`. */
CPT_API cpt_status cpt_replay(cpt_ctx* ctx, const char* config_path,
                              const char* transcript_path, const char* run_dir);

/* Resubmits a backend's own reasoning for the given problem id `repeats`
 * times and records the empty-content frequency. `frequency_out` may be
 * NULL. */
CPT_API cpt_status cpt_probe_stop(cpt_ctx* ctx, const char* config_path, const char* run_dir,
                                  const char* backend, const char* problem_id, int repeats,
                                  double* frequency_out);

/* Re-renders report files from the trial records under run_dir. */
CPT_API cpt_status cpt_render_report(cpt_ctx* ctx, const char* run_dir);

/* Exact compromising rate d_t / (2*d_t - d_cpt), clamped to 2/1 for
 * d_cpt > d_t. */
CPT_API cpt_status cpt_compromising_rate(cpt_ctx* ctx, int d_t, int d_cpt, int64_t* num_out,
                                         int64_t* den_out);

#ifdef __cplusplus
}
#endif

#endif /* CPT_H */
