#ifndef FAQNET_H
#define FAQNET_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

/* Error codes shared with the command-line tool. */
enum {
  FAQNET_OK = 0,
  FAQNET_ERR_PARSE = 2,
  FAQNET_ERR_INCOMPATIBLE = 3,
  FAQNET_ERR_CAPACITY = 4,
  FAQNET_ERR_MISMATCH = 5
};

/* Opaque session holding the last error message and the last result buffer.
 * Not thread-safe; use one session per thread. */
typedef struct faqnet_session faqnet_session;

faqnet_session* faqnet_session_new(void);
void faqnet_session_free(faqnet_session* s);

/* Message for the most recent failing call, empty string if none.
 * Valid until the next call on the session. */
const char* faqnet_last_error(const faqnet_session* s);

/* All commands return one of the codes above. On success *out receives a
 * NUL-terminated string owned by the session, valid until the next call. */

/* JSON report: acyclicity, width y, n2, degeneracy, max arity, mincut,
 * Steiner packing table, and the store-and-forward estimate. */
int faqnet_analyze(faqnet_session* s, const char* query_path,
                   const char* topology_path, const char* semiring,
                   const char** out);

/* Runs a protocol in the simulator. assignment is a .assign file path,
 * "worst-case-cut", or "round-robin". out_dir may be NULL (no files written);
 * otherwise trace.csv, answer.rel and gaps.csv land there. *out is a JSON
 * summary with rounds, bounds and the oracle verdict. */
int faqnet_run(faqnet_session* s, const char* query_path,
               const char* topology_path, const char* protocol,
               const char* semiring, const char* assignment, uint64_t seed,
               const char* out_dir, int capacity_bits, int half_duplex,
               const char** out);

/* Generates a hard instance: an m-pair intersection family embedded into the
 * query's hypergraph. kind is "forest", "core" or "hypergraph". Writes
 * e<id>.rel files plus ground truth to out_dir when given. */
int faqnet_hard(faqnet_session* s, const char* kind, const char* query_path,
                const char* topology_path, int m, long n, uint64_t seed,
                const char* out_dir, const char** out);

/* Random GF(2) matrix-vector chain on a line of k+2 players.
 * variant is "pipeline" or "merge". */
int faqnet_mcm(faqnet_session* s, int k, int n, const char* variant,
               uint64_t seed, int capacity_bits, const char** out);

/* One CSV row (with header) comparing the upper/lower round bounds against a
 * measured protocol run. */
int faqnet_bounds(faqnet_session* s, const char* query_path,
                  const char* topology_path, const char* protocol,
                  const char* semiring, const char* assignment, uint64_t seed,
                  int capacity_bits, const char** out);

#ifdef __cplusplus
}
#endif

#endif /* FAQNET_H */
