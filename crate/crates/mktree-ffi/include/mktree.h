/* C interface to the mktree bounded-treewidth Markov network library. */

#ifndef MKTREE_H
#define MKTREE_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Status code returned by every fallible call in this API.
typedef enum MkStatus {
  // The call succeeded.
  MK_OK = 0,
  // A required pointer argument was null.
  MK_NULL_POINTER = 1,
  // The input was malformed: unparseable JSON or CSV, an unknown or
  // duplicate variable, a state out of range, or an inconsistent model.
  MK_INVALID_INPUT = 2,
  // The request was well-formed but has no answer, e.g. a backbone
  // k-tree was requested with k >= n.
  MK_INFEASIBLE = 3,
  // The supplied evidence has probability zero under the model.
  MK_ZERO_PROBABILITY_EVIDENCE = 4,
  // A caller-provided output buffer was too small.
  MK_BUFFER_TOO_SMALL = 5,
  // An internal invariant was violated; the handle is still valid but
  // the result of this call must be discarded.
  MK_INTERNAL = 6,
} MkStatus;

// Opaque handle to a fitted Markov k-tree model.
typedef struct MkModel MkModel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Returns the message describing the most recent failure on this thread.
//
// The pointer stays valid until the next failing call on the same thread.
// Never returns null; before any failure it points at an empty string.
const char *mk_last_error_message(void);

// Parses a model from its JSON serialization.
//
// On success writes a freshly allocated handle to `out`; release it with
// [`mk_model_free`].
//
// # Safety
// `json` must be a NUL-terminated string and `out` a valid pointer.
enum MkStatus mk_model_from_json(const char *json, struct MkModel **out);

// Loads a model from a JSON file on disk.
//
// # Safety
// `path` must be a NUL-terminated string and `out` a valid pointer.
enum MkStatus mk_model_load(const char *path, struct MkModel **out);

// Learns a backbone k-tree model from a CSV sample file and hands back the
// fitted model.  `pseudocount` is the additive smoothing applied to the
// empirical counts; pass 0.0 for the raw maximum-likelihood fit.
//
// # Safety
// `path` must be a NUL-terminated string and `out` a valid pointer.
enum MkStatus mk_learn_csv(const char *path, size_t k, double pseudocount, struct MkModel **out);

// Releases a model handle.  Passing null is a no-op.
//
// # Safety
// `model` must be a pointer previously returned by this library, and must
// not be used after this call.
void mk_model_free(struct MkModel *model);

// Number of variables in the model, or 0 if `model` is null.
//
// # Safety
// `model` must be a valid handle or null.
size_t mk_model_n(const struct MkModel *model);

// Treewidth parameter k of the model, or 0 if `model` is null.
//
// # Safety
// `model` must be a valid handle or null.
size_t mk_model_k(const struct MkModel *model);

// Cardinality of variable `var` (1-based), or 0 if the handle is null or
// the variable is out of range.
//
// # Safety
// `model` must be a valid handle or null.
uint32_t mk_model_cardinality(const struct MkModel *model, uint16_t var);

// Serializes the model to JSON.  On success writes a freshly allocated
// string to `out`; release it with [`mk_string_free`].
//
// # Safety
// `model` must be a valid handle and `out` a valid pointer.
enum MkStatus mk_model_to_json(const struct MkModel *model, char **out);

// Releases a string previously returned by this library.  Passing null is
// a no-op.
//
// # Safety
// `s` must be a pointer previously returned by this library, and must not
// be used after this call.
void mk_string_free(char *s);

// Evaluates log2 P(assignment) for a full assignment of all n variables,
// given as state indices in variable order X1..Xn.  Writes the result to
// `out_log2p`; negative infinity denotes probability zero.
//
// # Safety
// `assignment` must point to `len` readable u32s; `out_log2p` must be a
// valid pointer.
enum MkStatus mk_log2_joint(const struct MkModel *model,
                            const uint32_t *assignment,
                            size_t len,
                            double *out_log2p);

// Computes the posterior marginal P(X = x | evidence) for variable `var`
// (1-based).  The distribution is written to `out_probs`, which must have
// room for `out_cap` doubles; the number written (the cardinality of the
// variable) is stored in `out_len`.
//
// Evidence is given as `ev_len` parallel entries of `ev_vars` (1-based
// variable ids) and `ev_states`; pass null/0 for no evidence.
//
// # Safety
// All pointer arguments must be valid for the lengths described above.
enum MkStatus mk_marginal(const struct MkModel *model,
                          uint16_t var,
                          const uint16_t *ev_vars,
                          const uint32_t *ev_states,
                          size_t ev_len,
                          double *out_probs,
                          size_t out_cap,
                          size_t *out_len);

// Computes log2 P(evidence), the log-probability of the evidence under the
// model.  Writes negative infinity and returns `MkOk` when the evidence
// has probability zero (unlike the query calls, which treat that as an
// error).
//
// # Safety
// Pointer arguments must be valid as described for [`mk_marginal`].
enum MkStatus mk_evidence_log2(const struct MkModel *model,
                               const uint16_t *ev_vars,
                               const uint32_t *ev_states,
                               size_t ev_len,
                               double *out_log2p);

// Computes a most probable explanation: a full assignment maximizing
// P(X | evidence).  The assignment (state indices for X1..Xn) is written
// to `out_states`, which must have room for `out_cap` u32s, and its joint
// log2-probability to `out_log2p`.
//
// # Safety
// Pointer arguments must be valid as described for [`mk_marginal`].
enum MkStatus mk_mpe(const struct MkModel *model,
                     const uint16_t *ev_vars,
                     const uint32_t *ev_states,
                     size_t ev_len,
                     uint32_t *out_states,
                     size_t out_cap,
                     double *out_log2p);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MKTREE_H */
