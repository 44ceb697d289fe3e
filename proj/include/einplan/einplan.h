/* einplan C API: planning, I/O lower bounds, and virtual execution of dense
 * einsum kernels behind an opaque-handle, error-code interface.
 *
 * All report-producing calls hand back a malloc'd JSON string owned by the
 * caller; release it with einplan_free(). On failure they return a nonzero
 * status and einplan_last_error() describes the problem (thread-local).
 */
#ifndef EINPLAN_H
#define EINPLAN_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef struct einplan_session einplan_session;

typedef enum einplan_status {
  EINPLAN_OK = 0,
  EINPLAN_E_VERIFY = 1,     /* simulation ran but failed verification */
  EINPLAN_E_PARSE = 2,      /* malformed einsum text or dims list */
  EINPLAN_E_INFEASIBLE = 3, /* fast memory too small */
  EINPLAN_E_GRID = 4,       /* processes cannot be laid out over the space */
  EINPLAN_E_RESOURCE = 5,   /* iteration space exceeds the configured cap */
  EINPLAN_E_INVALID = 6,    /* other invalid argument */
  EINPLAN_E_INTERNAL = 7
} einplan_status;

const char* einplan_version(void);
const char* einplan_status_name(einplan_status status);

/* Thread-local message for the most recent failure in this thread. */
const char* einplan_last_error(void);

void einplan_free(char* str);

/* Create a session from an einsum string ("ij,jk->ik") and a dims list
 * ("i=64,j=64,k=64"). Every symbol must receive an extent. */
einplan_status einplan_session_create(const char* einsum, const char* dims,
                                      einplan_session** out);
void einplan_session_destroy(einplan_session* session);

/* I/O lower bounds: contraction tree, fusion partition, per-term intensity,
 * critical size, optimal tiles, and load bounds. */
einplan_status einplan_bound_json(einplan_session* session, double fast_mem,
                                  char** json_out);

/* Full distributed plan: grids, placements, reductions, redistributions.
 * Set include_messages to embed every redistribution message. */
einplan_status einplan_plan_json(einplan_session* session, int64_t procs,
                                 double fast_mem, int include_messages,
                                 char** json_out);

/* Simulate the plan over virtual ranks on seeded random inputs (or tensors
 * loaded from input_paths, a comma-separated list). With verify != 0 the
 * gathered output is compared against the reference evaluation; on tolerance
 * failure the report is still produced and EINPLAN_E_VERIFY is returned.
 * The iteration-space cap (default 1e8 points) honors the environment
 * variable EINPLAN_MAX_POINTS. dump_output, when non-NULL, receives the
 * gathered output tensor. */
einplan_status einplan_run_json(einplan_session* session, int64_t procs,
                                double fast_mem, uint64_t seed, int verify,
                                const char* input_paths, const char* dump_output,
                                char** json_out);

/* Run the bundled ten-kernel suite at the given scale; EINPLAN_E_VERIFY when
 * any kernel fails. */
einplan_status einplan_bench_json(double scale, int64_t procs, double fast_mem,
                                  uint64_t seed, char** json_out);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* EINPLAN_H */
