#ifndef QPDE_H
#define QPDE_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum QpdeStatus {
  QPDE_STATUS_OK = 0,
  QPDE_STATUS_NULL_POINTER = 1,
  QPDE_STATUS_INVALID_ARGUMENT = 2,
  QPDE_STATUS_CONFIG = 3,
  QPDE_STATUS_UNSUPPORTED = 4,
  QPDE_STATUS_TOO_LARGE = 5,
  QPDE_STATUS_INVARIANT = 6,
  QPDE_STATUS_IO = 7,
  QPDE_STATUS_PANIC = 8,
} QpdeStatus;

/**
 * A gate sequence on a fixed register.
 */
typedef struct QpdeCircuit QpdeCircuit;

/**
 * A discretized PDE problem.
 */
typedef struct QpdeProblem QpdeProblem;

/**
 * A normalized state vector.
 */
typedef struct QpdeState QpdeState;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version, a static string.
 */
const char *qpde_version(void);

/**
 * Message of the last failure on this thread, or null. Owned by the
 * library; valid until the next failing call on the same thread.
 */
const char *qpde_last_error(void);

/**
 * # Safety
 * `s` must be null or a string returned by this library.
 */
void qpde_string_free(char *s);

/**
 * Parses a problem descriptor (the `problem` object of an experiment config).
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be valid for writes.
 */
enum QpdeStatus qpde_problem_from_json(const char *json, struct QpdeProblem **out);

/**
 * # Safety
 * `p` must be null or a handle from [`qpde_problem_from_json`], freed once.
 */
void qpde_problem_free(struct QpdeProblem *p);

/**
 * Qubits of the simulated state, including wave block labels.
 *
 * # Safety
 * Pointers must be valid or null.
 */
enum QpdeStatus qpde_problem_num_qubits(const struct QpdeProblem *p, size_t *out);

/**
 * Trotter steps `T/τ`.
 *
 * # Safety
 * Pointers must be valid or null.
 */
enum QpdeStatus qpde_problem_steps(const struct QpdeProblem *p, size_t *out);

/**
 * Operator-norm bound on the error of one Trotter step.
 *
 * # Safety
 * Pointers must be valid or null.
 */
enum QpdeStatus qpde_problem_step_bound(const struct QpdeProblem *p, double *out);

/**
 * One Trotter step of the problem's configured order.
 *
 * # Safety
 * Pointers must be valid or null.
 */
enum QpdeStatus qpde_step_circuit(const struct QpdeProblem *p, struct QpdeCircuit **out);

/**
 * # Safety
 * `c` must be null or a circuit handle, freed once.
 */
void qpde_circuit_free(struct QpdeCircuit *c);

/**
 * Gate count of the circuit as built (multi-controlled rotations count once).
 *
 * # Safety
 * Pointers must be valid or null.
 */
enum QpdeStatus qpde_circuit_num_gates(const struct QpdeCircuit *c, size_t *out);

/**
 * CNOT count. `decomposed = 0` uses the analytic per-gate costs,
 * otherwise the gates the lowering actually emits.
 *
 * # Safety
 * Pointers must be valid or null.
 */
enum QpdeStatus qpde_circuit_count_cnots(const struct QpdeCircuit *c,
                                         int32_t decomposed,
                                         size_t *out);

/**
 * Lowered circuit as OpenQASM 3. Free the result with [`qpde_string_free`].
 *
 * # Safety
 * Pointers must be valid or null.
 */
enum QpdeStatus qpde_circuit_to_qasm(const struct QpdeCircuit *c, char **out);

/**
 * The problem's initial state.
 *
 * # Safety
 * Pointers must be valid or null.
 */
enum QpdeStatus qpde_state_initial(const struct QpdeProblem *p, struct QpdeState **out);

/**
 * # Safety
 * `s` must be null or a state handle, freed once.
 */
void qpde_state_free(struct QpdeState *s);

/**
 * Applies `c` to `s` `steps` times in place.
 *
 * # Safety
 * Pointers must be valid or null; `s` must not be aliased during the call.
 */
enum QpdeStatus qpde_state_evolve(struct QpdeState *s, const struct QpdeCircuit *c, size_t steps);

/**
 * Number of amplitudes, `2^qubits`.
 *
 * # Safety
 * Pointers must be valid or null.
 */
enum QpdeStatus qpde_state_len(const struct QpdeState *s, size_t *out);

/**
 * Copies the amplitudes into `re` and `im`, each holding `len` doubles.
 *
 * # Safety
 * `re` and `im` must be valid for `len` writes.
 */
enum QpdeStatus qpde_state_amplitudes(const struct QpdeState *s,
                                      double *re,
                                      double *im,
                                      size_t len);

/**
 * Weight of the `∂u/∂t` block of a wave state.
 *
 * # Safety
 * Pointers must be valid or null.
 */
enum QpdeStatus qpde_state_kinetic_energy(const struct QpdeState *s,
                                          const struct QpdeProblem *p,
                                          double *out);

/**
 * Runs a full experiment config, writing artifacts to `out_dir`.
 * `violations` receives the number of bound violations found.
 *
 * # Safety
 * Strings must be NUL-terminated; `violations` valid for writes.
 */
enum QpdeStatus qpde_run_config(const char *config_json, const char *out_dir, size_t *violations);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QPDE_H */
