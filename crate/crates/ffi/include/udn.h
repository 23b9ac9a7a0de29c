#ifndef UDN_H
#define UDN_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum UdnLosKind {
  /**
   * `min(d1/d, 1)(1 − e^{−d/d0}) + e^{−d/d0}`; params: d0, d1 (km).
   */
  UDN_LOS_KIND_THREE_GPP = 0,
  /**
   * `e^{−(d/L)²}`; param: L (km).
   */
  UDN_LOS_KIND_EXP_SQUARE = 1,
  /**
   * `e^{−d/L}`; param: L (km).
   */
  UDN_LOS_KIND_EXP = 2,
  /**
   * Distance independent; param: probability.
   */
  UDN_LOS_KIND_CONSTANT = 3,
} UdnLosKind;

typedef enum UdnLoadKind {
  UDN_LOAD_KIND_FULL = 0,
  /**
   * Uses `user_density`.
   */
  UDN_LOAD_KIND_PARTIAL = 1,
  /**
   * Uses `reuse_factor`.
   */
  UDN_LOAD_KIND_REUSE = 2,
} UdnLoadKind;

typedef enum UdnStatus {
  UDN_STATUS_OK = 0,
  UDN_STATUS_NULL_POINTER = 1,
  UDN_STATUS_DOMAIN = 2,
  UDN_STATUS_QUADRATURE = 3,
  UDN_STATUS_NO_CROSSING = 4,
  UDN_STATUS_SEARCH_FAILURE = 5,
  UDN_STATUS_UNDERDETERMINED = 6,
  UDN_STATUS_DEGENERATE_BOUNDARY = 7,
  UDN_STATUS_INVALID = 8,
  UDN_STATUS_CONFIG = 9,
  UDN_STATUS_PANIC = 10,
} UdnStatus;

/**
 * Opaque coverage model.
 */
typedef struct UdnModel UdnModel;

/**
 * Plain-data scenario description. Densities in 1/km², path loss at 1 km
 * in dB.
 */
typedef struct UdnScenario {
  double density;
  double path_loss_los_db;
  double exponent_los;
  double path_loss_nlos_db;
  double exponent_nlos;
  enum UdnLosKind los_kind;
  double los_param_a;
  double los_param_b;
  double fading_mu;
  enum UdnLoadKind load_kind;
  double user_density;
  uint32_t reuse_factor;
  /**
   * Normalized noise σ²; 0 for interference only.
   */
  double noise;
} UdnScenario;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Urban small-cell defaults at `density` (ExpSquare LOS, L = 82.5 m,
 * fully loaded, Rayleigh fading, no noise).
 */
struct UdnScenario udn_scenario_default(double density);

/**
 * Builds a model. `sweep_accuracy` selects the faster tolerances.
 *
 * # Safety
 * `scenario` must point to a valid `UdnScenario`; `out` to writable
 * storage for one pointer.
 */
enum UdnStatus udn_model_new(const struct UdnScenario *scenario,
                             bool sweep_accuracy,
                             struct UdnModel **out);

/**
 * # Safety
 * `model` must come from [`udn_model_new`] and not be used afterwards.
 */
void udn_model_free(struct UdnModel *model);

/**
 * `P[SINR > y]`, `y` linear.
 *
 * # Safety
 * `model` from [`udn_model_new`]; `out` writable.
 */
enum UdnStatus udn_model_sinr_ccdf(const struct UdnModel *model, double y, double *out);

/**
 * `P[SINR ≤ y]`, `y` linear.
 *
 * # Safety
 * `model` from [`udn_model_new`]; `out` writable.
 */
enum UdnStatus udn_model_outage(const struct UdnModel *model, double y, double *out);

/**
 * Average spectral efficiency, bit/s/Hz.
 *
 * # Safety
 * `model` from [`udn_model_new`]; `out` writable.
 */
enum UdnStatus udn_model_spectral_efficiency(const struct UdnModel *model, double *out);

/**
 * Area spectral efficiency, bit/s/Hz/km².
 *
 * # Safety
 * `model` from [`udn_model_new`]; `out` writable.
 */
enum UdnStatus udn_model_ase(const struct UdnModel *model, double *out);

/**
 * Density of the nearest LOS-equivalent distance at `r` km.
 *
 * # Safety
 * `model` from [`udn_model_new`]; `out` writable.
 */
enum UdnStatus udn_model_distance_pdf(const struct UdnModel *model, double r, double *out);

/**
 * `P[nearest LOS-equivalent distance > r]`.
 *
 * # Safety
 * `model` from [`udn_model_new`]; `out` writable.
 */
enum UdnStatus udn_model_distance_tail(const struct UdnModel *model, double r, double *out);

/**
 * Minimum interference-limited transmit power in dBm for linear SINR
 * threshold `y` and outage tolerance `outage_tolerance`, with 10 MHz
 * bandwidth, 9 dB noise figure and 5/1/0.2/0.05 dB steps.
 *
 * # Safety
 * `model` from [`udn_model_new`]; `out` writable.
 */
enum UdnStatus udn_model_min_tx_power_dbm(const struct UdnModel *model,
                                          double y,
                                          double outage_tolerance,
                                          double *out);

/**
 * Probability that a BS has at least one user.
 */
double udn_prob_active(double density, double user_density);

/**
 * Validates a JSON experiment configuration. On `UDN_STATUS_CONFIG` the
 * diagnostics are available from [`udn_last_error`].
 *
 * # Safety
 * `json` must be a NUL-terminated string.
 */
enum UdnStatus udn_config_validate(const char *json);

/**
 * Message of the last failure on this thread, or NULL. Valid until the
 * next failing call on the same thread.
 */
const char *udn_last_error(void);

/**
 * Static name of a status code.
 */
const char *udn_status_name(enum UdnStatus status);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* UDN_H */
