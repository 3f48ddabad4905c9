#ifndef WAVEGUARD_H
#define WAVEGUARD_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

// Status codes. Values 0 to 4 match the command-line exit codes.
typedef enum WgStatus {
  WG_STATUS_OK = 0,
  WG_STATUS_BOUND_VIOLATION = 1,
  WG_STATUS_HYPOTHESIS_VIOLATED = 2,
  WG_STATUS_SOLVER_FAILURE = 3,
  WG_STATUS_CONFIG_ERROR = 4,
  WG_STATUS_NULL_POINTER = 5,
  WG_STATUS_INVALID_ARGUMENT = 6,
  WG_STATUS_PANIC = 7,
} WgStatus;

// Decay certificate for a scenario.
typedef struct WgCertificate WgCertificate;

// Parsed scenario configuration.
typedef struct WgScenario WgScenario;

// Result of a simulation: times, energies and the final state.
typedef struct WgTrajectory WgTrajectory;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or NULL. Valid until the
// next call into this library on the same thread.
const char *wg_last_error_message(void);

// Library version as a static NUL-terminated string.
const char *wg_version(void);

// Parses a scenario config (JSON text).
//
// # Safety
// `json` must be a NUL-terminated string and `out` a valid pointer.
enum WgStatus wg_scenario_from_json(const char *json, struct WgScenario **out);

// # Safety
// `scenario` must come from [`wg_scenario_from_json`] or be NULL.
void wg_scenario_free(struct WgScenario *scenario);

// Number of grid nodes (`N + 1`), the length of state buffers.
//
// # Safety
// Pointers must be valid.
enum WgStatus wg_scenario_n_nodes(const struct WgScenario *scenario, uintptr_t *out);

// Runs the scenario to `t_final`.
//
// # Safety
// Pointers must be valid.
enum WgStatus wg_simulate(const struct WgScenario *scenario, struct WgTrajectory **out);

// # Safety
// `trajectory` must come from [`wg_simulate`] or be NULL.
void wg_trajectory_free(struct WgTrajectory *trajectory);

// Number of recorded time levels.
//
// # Safety
// Pointers must be valid.
enum WgStatus wg_trajectory_len(const struct WgTrajectory *trajectory, uintptr_t *out);

// # Safety
// Pointers must be valid.
enum WgStatus wg_trajectory_dt(const struct WgTrajectory *trajectory, double *out);

// Copies times and total energies into caller buffers of exactly `len`
// entries, `len` being [`wg_trajectory_len`].
//
// # Safety
// `times` and `energies` must each hold `len` doubles.
enum WgStatus wg_trajectory_energies(const struct WgTrajectory *trajectory,
                                     double *times,
                                     double *energies,
                                     uintptr_t len);

// Copies the final displacement and velocity into buffers of `n_nodes`.
//
// # Safety
// `u` and `v` must each hold `n_nodes` doubles.
enum WgStatus wg_trajectory_final_state(const struct WgTrajectory *trajectory,
                                        double *u,
                                        double *v,
                                        uintptr_t n_nodes);

// Builds the certificate selected by the config. Fails with
// `WG_STATUS_HYPOTHESIS_VIOLATED` when the laws are outside its hypotheses.
//
// # Safety
// Pointers must be valid.
enum WgStatus wg_certify(const struct WgScenario *scenario, struct WgCertificate **out);

// # Safety
// `certificate` must come from [`wg_certify`] or be NULL.
void wg_certificate_free(struct WgCertificate *certificate);

// Decay envelope `{E − E_S}⁺ ≤ M·exp(−μt)·{E(0) − E_S}⁺`.
//
// # Safety
// Pointers must be valid.
enum WgStatus wg_certificate_envelope(const struct WgCertificate *certificate,
                                      double *mu,
                                      double *prefactor,
                                      double *e_s);

// Full certificate as JSON. Release the string with [`wg_string_free`].
//
// # Safety
// Pointers must be valid.
enum WgStatus wg_certificate_to_json(const struct WgCertificate *certificate, char **out);

// # Safety
// `s` must come from this library or be NULL.
void wg_string_free(char *s);

// Runs the `verify` command, writing artifacts under `out_dir`.
// `exit_code` receives the command-line exit code; the return value is
// `WG_STATUS_OK` whenever the command ran to completion.
//
// # Safety
// Pointers must be valid; `out_dir` NUL-terminated.
enum WgStatus wg_verify(const struct WgScenario *scenario, const char *out_dir, int32_t *exit_code);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* WAVEGUARD_H */
