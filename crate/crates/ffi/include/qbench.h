#ifndef QBENCH_H
#define QBENCH_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stddef.h>
#include <stdint.h>

// Status codes returned by every fallible function.
typedef enum qb_status {
  QB_STATUS_OK = 0,
  QB_STATUS_NULL_POINTER = 1,
  QB_STATUS_INVALID_ARGUMENT = 2,
  QB_STATUS_INVALID_CIRCUIT = 3,
  QB_STATUS_WIDTH_EXCEEDED = 4,
  QB_STATUS_ZERO_BRANCH = 5,
  QB_STATUS_INVALID_CONFIG = 6,
  QB_STATUS_MISSING_DATA = 7,
  QB_STATUS_BACKEND = 8,
  QB_STATUS_IO = 9,
  QB_STATUS_PANIC = 10,
  QB_STATUS_OTHER = 11,
} qb_status;

// Opaque circuit handle.
typedef struct qb_circuit qb_circuit;

// Opaque simulated state handle.
typedef struct qb_state qb_state;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or NULL. Valid until the
// next call into the library from the same thread.
const char *qb_last_error(void);

// Library version as a static NUL-terminated string.
const char *qb_version(void);

// # Safety
// `s` must be NULL or a string returned by this library.
void qb_string_free(char *s);

// # Safety
// `out` must be a valid pointer.
enum qb_status qb_circuit_new(size_t n_qubits, struct qb_circuit **out);

// Parses a circuit from its JSON form.
//
// # Safety
// `json` must be a NUL-terminated string and `out` a valid pointer.
enum qb_status qb_circuit_from_json(const char *json, struct qb_circuit **out);

// # Safety
// `c` must be a valid circuit and `out` a valid pointer.
enum qb_status qb_circuit_to_json(const struct qb_circuit *c, char **out);

// # Safety
// `c` must be NULL or a handle from this library, freed at most once.
void qb_circuit_free(struct qb_circuit *c);

// Appends a single-qubit gate. `matrix` holds 8 doubles: row-major
// entries as (re, im) pairs.
//
// # Safety
// `c` must be a valid circuit, `label` a NUL-terminated string and
// `matrix` must point at 8 doubles.
enum qb_status qb_circuit_push_1q(struct qb_circuit *c,
                                  const char *label,
                                  size_t target,
                                  const double *matrix);

// Appends a singly-controlled gate with the same matrix layout as
// [`qb_circuit_push_1q`].
//
// # Safety
// As for [`qb_circuit_push_1q`].
enum qb_status qb_circuit_push_controlled(struct qb_circuit *c,
                                          const char *label,
                                          size_t control,
                                          size_t target,
                                          const double *matrix);

// Requires `qubit` to read `bit` (0 or 1) for a shot to count.
//
// # Safety
// `c` must be a valid circuit.
enum qb_status qb_circuit_postselect(struct qb_circuit *c, size_t qubit, uint8_t bit);

// Writes qubit count, gate count (basis rotations included), two-qubit gate
// count and depth. Any out pointer may be NULL.
//
// # Safety
// `c` must be a valid circuit; non-NULL out pointers must be valid.
enum qb_status qb_circuit_stats(const struct qb_circuit *c,
                                size_t *n_qubits,
                                size_t *gates,
                                size_t *two_qubit,
                                size_t *depth);

// Bell-test circuit along `path` with analyser angles `theta_a`, `theta_b`.
//
// # Safety
// `path` must point at `path_len` indices; `out` must be valid.
enum qb_status qb_bell_circuit(size_t n_qubits,
                               const size_t *path,
                               size_t path_len,
                               double theta_a,
                               double theta_b,
                               struct qb_circuit **out);

// Level-`level` circuit of the microscope map at pixel `z`.
//
// # Safety
// `out` must be valid.
enum qb_status qb_microscope_circuit(uint32_t level, double re, double im, struct qb_circuit **out);

// Level-`level` Mandelbrot circuit for parameter `c`.
//
// # Safety
// `out` must be valid.
enum qb_status qb_mandelbrot_circuit(uint32_t level, double re, double im, struct qb_circuit **out);

// Simulates `c` from |0…0⟩ (post-selection is not applied).
//
// # Safety
// `c` must be a valid circuit and `out` a valid pointer.
enum qb_status qb_simulate(const struct qb_circuit *c, struct qb_state **out);

// # Safety
// `s` must be NULL or a handle from this library, freed at most once.
void qb_state_free(struct qb_state *s);

// Number of amplitudes, or 0 for NULL.
//
// # Safety
// `s` must be NULL or a valid state.
size_t qb_state_len(const struct qb_state *s);

// Copies amplitudes as interleaved (re, im) into `buf`, which must hold
// `2 * qb_state_len(s)` doubles; `buf_len` is its length in doubles.
//
// # Safety
// `s` must be a valid state and `buf` must point at `buf_len` doubles.
enum qb_status qb_state_amplitudes(const struct qb_state *s, double *buf, size_t buf_len);

// Samples `shots` readouts of `c` with its post-selection and writes the
// histogram JSON to `out`. Deterministic in `seed`.
//
// # Safety
// `c` must be a valid circuit and `out` a valid pointer.
enum qb_status qb_sample(const struct qb_circuit *c, uint64_t shots, uint64_t seed, char **out);

// Runs a benchmark into `dir` and writes the scores JSON to `out`.
// `benchmark_json` is the benchmark part of a run manifest (tagged by
// `"benchmark"`); `backend` is `exact`, `sample` or `noisy:<file>`.
//
// # Safety
// String arguments must be NUL-terminated; `out` must be valid.
enum qb_status qb_run(const char *benchmark_json,
                      const char *backend,
                      uint64_t seed,
                      const char *dir,
                      char **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QBENCH_H */
