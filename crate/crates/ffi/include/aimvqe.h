#ifndef AIMVQE_H
#define AIMVQE_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes. Zero is success.
 */
typedef enum {
  AIMVQE_STATUS_OK = 0,
  AIMVQE_STATUS_NULL_POINTER = 1,
  AIMVQE_STATUS_INVALID_UTF8 = 2,
  AIMVQE_STATUS_SYNTAX = 3,
  AIMVQE_STATUS_CONFIG = 4,
  AIMVQE_STATUS_IO = 5,
  AIMVQE_STATUS_INVALID_ARGUMENT = 6,
  AIMVQE_STATUS_NUMERICAL = 7,
  AIMVQE_STATUS_PANIC = 8,
} AimvqeStatus;

/**
 * Experiment kinds accepted by [`aimvqe_run_experiment`].
 */
typedef enum {
  AIMVQE_COMMAND_VQE = 0,
  AIMVQE_COMMAND_SWEEP = 1,
  AIMVQE_COMMAND_CORRELATION = 2,
  AIMVQE_COMMAND_JMODEL = 3,
} AimvqeCommand;

/**
 * Opaque qubit operator.
 */
typedef struct AimvqeOperator AimvqeOperator;

/**
 * Ground-state summary filled by [`aimvqe_operator_ground_state`].
 */
typedef struct {
  double energy;
  /**
   * NaN when no second level was computed.
   */
  double gap;
  /**
   * -1 when the state has no definite particle number.
   */
  int64_t n_electrons;
  double residual;
  bool degenerate;
} AimvqeGroundState;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null. The pointer
 * stays valid until the next call on the same thread.
 */
const char *aimvqe_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *aimvqe_version(void);

/**
 * Parses a Pauli listing held in memory.
 *
 * # Safety
 * `text` must be a NUL-terminated string and `out` a writable pointer.
 */
AimvqeStatus aimvqe_operator_parse(const char *text, AimvqeOperator **out);

/**
 * Reads and parses a Pauli listing from a file.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` a writable pointer.
 */
AimvqeStatus aimvqe_operator_load(const char *path, AimvqeOperator **out);

/**
 * Releases an operator. Null is ignored.
 *
 * # Safety
 * `op` must come from an `aimvqe_operator_*` constructor and not be used afterwards.
 */
void aimvqe_operator_free(AimvqeOperator *op);

/**
 * Term count and qubit width.
 *
 * # Safety
 * `op` must be a live handle; `terms` and `qubits` writable.
 */
AimvqeStatus aimvqe_operator_shape(const AimvqeOperator *op, size_t *terms, size_t *qubits);

/**
 * Exact ground state of a Hermitian operator.
 *
 * # Safety
 * `op` must be a live handle and `out` writable.
 */
AimvqeStatus aimvqe_operator_ground_state(const AimvqeOperator *op, AimvqeGroundState *out);

/**
 * `<S_z(i) S_z(j)>` in the exact ground state, with sites laid out as
 * spin-up/spin-down qubit pairs.
 *
 * # Safety
 * `op` must be a live handle and `out` writable.
 */
AimvqeStatus aimvqe_operator_ground_szsz(const AimvqeOperator *op,
                                         size_t site_i,
                                         size_t site_j,
                                         double *out);

/**
 * Exchange coupling of the two-site cluster model, in the units of the inputs.
 *
 * # Safety
 * `out` must be writable.
 */
AimvqeStatus aimvqe_exchange_coupling(double delta,
                                      double t_pd,
                                      double u_d,
                                      double u_p,
                                      double *out);

/**
 * Runs an experiment config as the CLI would, writing CSV and JSON into
 * `out_dir` (null: the config's own output directory).
 *
 * # Safety
 * `config_path` must be a NUL-terminated string; `out_dir` null or one.
 */
AimvqeStatus aimvqe_run_experiment(AimvqeCommand command,
                                   const char *config_path,
                                   const char *out_dir);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* AIMVQE_H */
