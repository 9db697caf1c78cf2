#ifndef QDLAB_H
#define QDLAB_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum qdlab_status {
  QDLAB_STATUS_OK = 0,
  QDLAB_STATUS_INVALID_ARGUMENT = 1,
  QDLAB_STATUS_NUMERIC_FAILURE = 2,
  QDLAB_STATUS_DEGENERATE_CUT = 3,
  QDLAB_STATUS_PRECONDITION_VIOLATION = 4,
  QDLAB_STATUS_RESOURCE_LIMIT = 5,
  QDLAB_STATUS_IO_ERROR = 6,
  QDLAB_STATUS_PARSE_ERROR = 7,
  QDLAB_STATUS_NULL_POINTER = 8,
  QDLAB_STATUS_PANIC = 9,
} qdlab_status;

// Opaque gadget with the lattice data its checks need.
typedef struct qdlab_gadget qdlab_gadget;

// Opaque finite group.
typedef struct qdlab_group qdlab_group;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread. Valid until the next
// failing call; never null.
const char *qdlab_last_error(void);

// # Safety
// `s` must be null or a string returned by this library.
void qdlab_string_free(char *s);

// Looks up a group by name: Z<n>, S3 or D4.
//
// # Safety
// `name` must be a NUL-terminated string; `out` must be writable.
enum qdlab_status qdlab_group_new(const char *name, struct qdlab_group **out);

// # Safety
// `g` must be null or a handle from [`qdlab_group_new`], not used afterwards.
void qdlab_group_free(struct qdlab_group *g);

// # Safety
// `g` must be a live group handle; `out` must be writable.
enum qdlab_status qdlab_group_order(const struct qdlab_group *g, size_t *out);

// # Safety
// `g` must be a live group handle; `out` must be writable.
enum qdlab_status qdlab_group_mul(const struct qdlab_group *g, size_t a, size_t b, size_t *out);

// # Safety
// `g` must be a live group handle; `out` must be writable.
enum qdlab_status qdlab_group_inv(const struct qdlab_group *g, size_t a, size_t *out);

// Builds a gadget from a JSON config with keys `group`, `lattice`, `size`,
// `mode`, `site_index`, `lambda_grid`, `order`.
//
// # Safety
// `config_json` must be a NUL-terminated string; `out` must be writable.
enum qdlab_status qdlab_gadget_new(const char *config_json, struct qdlab_gadget **out);

// # Safety
// `g` must be null or a handle from [`qdlab_gadget_new`], not used afterwards.
void qdlab_gadget_free(struct qdlab_gadget *g);

// Hilbert space dimension, clock dimension and ground-space rank.
//
// # Safety
// `g` must be a live gadget handle; every out-pointer must be writable.
enum qdlab_status qdlab_gadget_dims(const struct qdlab_gadget *g,
                                    size_t *dim,
                                    size_t *clock_dim,
                                    size_t *ground_rank);

// Bloch series report as JSON; `*passed` is 1 when every check passed.
//
// # Safety
// `g` must be a live gadget handle; `lambdas` must point to `n_lambdas`
// doubles; `json` and `passed` must be writable.
enum qdlab_status qdlab_gadget_bloch(const struct qdlab_gadget *g,
                                     size_t orders,
                                     const double *lambdas,
                                     size_t n_lambdas,
                                     char **json,
                                     int32_t *passed);

// Lowest energies of the quantum double Hamiltonian. Writes at most
// `capacity` energies into `energies` and the count into `*written`.
//
// # Safety
// String arguments must be NUL-terminated; `energies` must hold `capacity`
// doubles; `written` must be writable.
enum qdlab_status qdlab_hqd_energies(const char *group,
                                     const char *lattice,
                                     const char *size,
                                     double *energies,
                                     size_t capacity,
                                     size_t *written);

// Runs one check with default scope. `*passed` is 1 on pass; `json`
// receives the check record.
//
// # Safety
// `check` must be NUL-terminated; `passed` and `json` must be writable.
enum qdlab_status qdlab_run_check(const char *check, int32_t *passed, char **json);

// Runs a suite described by a JSON config; see the CLI `suite` command.
//
// # Safety
// `config_json` must be NUL-terminated; `passed` and `json` must be writable.
enum qdlab_status qdlab_run_suite(const char *config_json, int32_t *passed, char **json);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QDLAB_H */
