#ifndef NASH_SEEK_H
#define NASH_SEEK_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of a call. Input, numerical and infeasibility failures use the
 * same numbers as the command-line exit codes.
 */
typedef enum NsStatus {
  NS_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  NS_STATUS_NULL_POINTER = 1,
  NS_STATUS_INVALID_INPUT = 2,
  NS_STATUS_NUMERICAL = 3,
  NS_STATUS_INFEASIBLE = 4,
  /**
   * An internal panic was caught at the boundary.
   */
  NS_STATUS_PANIC = 5,
} NsStatus;

typedef enum NsScheduleKind {
  /**
   * `lambda_k = lambda0 / (k + 1)`.
   */
  NS_SCHEDULE_KIND_VANISHING = 0,
  NS_SCHEDULE_KIND_CONSTANT = 1,
} NsScheduleKind;

/**
 * A learner run together with the dither that produced it.
 */
typedef struct NsTrajectory NsTrajectory;

typedef struct NsSchedule {
  enum NsScheduleKind kind;
  double lambda;
} NsSchedule;

/**
 * Scalar parameters of the power-control game. The `nodes x nodes` mean
 * gain matrix `E|h_ij|^2` (transmitter `i`, receiver `j`) is passed
 * separately.
 */
typedef struct NsWirelessParams {
  size_t nodes;
  double bandwidth;
  double price;
  double noise_power;
} NsWirelessParams;

typedef struct NsBoundConstants {
  double lipschitz;
  double action_bound;
  double window;
  double payoff_at_origin;
} NsBoundConstants;

typedef struct NsNoiseTail {
  double sum_squares;
  double edge_rate;
  double sup_delta;
} NsNoiseTail;

typedef struct NsTrackingBound {
  double c_t;
  double k;
  double growth;
  double edge_term;
  double bound;
} NsTrackingBound;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *ns_version(void);

/**
 * Message of the last failure on this thread, or null if none. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *ns_last_error_message(void);

/**
 * Checks that the dither frequencies are positive, pairwise distinct and
 * free of sum relations.
 *
 * # Safety
 * `omegas` must point to `count` readable doubles.
 */
enum NsStatus ns_validate_frequencies(const double *omegas, size_t count);

/**
 * `amplitude * sin(frequency * khat + phase)`.
 */
double ns_perturbation_signal(double amplitude, double frequency, double phase, double khat);

/**
 * Clock value `khat(k) = lambda_1 + ... + lambda_k`.
 *
 * # Safety
 * `khat` must be a valid pointer to a double.
 */
enum NsStatus ns_khat(struct NsSchedule s, size_t k, double *khat);

/**
 * Solves the mean-gain first-order system for the equilibrium powers.
 *
 * # Safety
 * `variance` must hold `nodes * nodes` doubles and `power` room for `nodes`.
 */
enum NsStatus ns_wireless_equilibrium(const struct NsWirelessParams *params,
                                      const double *variance,
                                      double *power);

/**
 * Stationary point of the payoffs averaged over Rayleigh fading.
 *
 * # Safety
 * As for [`ns_wireless_equilibrium`].
 */
enum NsStatus ns_wireless_fading_equilibrium(const struct NsWirelessParams *params,
                                             const double *variance,
                                             double *power);

/**
 * Row margins `E g_jj - sum_{i != j} E g_ij` and whether all are positive.
 *
 * # Safety
 * `variance` must hold `nodes * nodes` doubles, `margins` room for `nodes`,
 * and `dominant` must be valid.
 */
enum NsStatus ns_diagonal_dominance(const struct NsWirelessParams *params,
                                    const double *variance,
                                    double *margins,
                                    bool *dominant);

/**
 * `C_T = |r(0)| + L (C0 + |r(0)| T) e^{LT}`.
 *
 * # Safety
 * Both pointers must be valid.
 */
enum NsStatus ns_c_t(const struct NsBoundConstants *c, double *value);

/**
 * Finite-window tracking bound and its components.
 *
 * # Safety
 * All pointers must be valid.
 */
enum NsStatus ns_tracking_bound(const struct NsBoundConstants *c,
                                const struct NsNoiseTail *tail,
                                struct NsTrackingBound *result);

/**
 * Time for the envelope `amplitude e^{-decay t} delta0` to reach `eps`;
 * zero when it starts within precision.
 *
 * # Safety
 * `time` must be valid.
 */
enum NsStatus ns_convergence_time(double delta0,
                                  double amplitude,
                                  double decay,
                                  double eps,
                                  double *time);

/**
 * Runs the learner described by an experiment config (TOML text). Writes
 * no files.
 *
 * # Safety
 * `config` must be a NUL-terminated string and `handle` valid. On success
 * `*handle` owns a trajectory to be released with [`ns_trajectory_free`].
 */
enum NsStatus ns_run_config(const char *config, struct NsTrajectory **handle);

/**
 * Runs the two-pair power-control reference experiment with the given seed
 * and horizon.
 *
 * # Safety
 * `handle` must be valid; see [`ns_run_config`].
 */
enum NsStatus ns_run_reference(uint64_t seed, size_t horizon, struct NsTrajectory **handle);

/**
 * Number of records (horizon + 1), or 0 for a null handle.
 *
 * # Safety
 * `t` must be null or a live handle.
 */
size_t ns_trajectory_len(const struct NsTrajectory *t);

/**
 * Number of nodes, or 0 for a null handle.
 *
 * # Safety
 * `t` must be null or a live handle.
 */
size_t ns_trajectory_nodes(const struct NsTrajectory *t);

/**
 * Copies record `k`. Any output pointer may be null to skip it; array
 * outputs need room for `ns_trajectory_nodes` doubles.
 *
 * # Safety
 * `t` must be a live handle and non-null outputs writable.
 */
enum NsStatus ns_trajectory_record(const struct NsTrajectory *t,
                                   size_t k,
                                   double *khat,
                                   double *lambda,
                                   double *hat_a,
                                   double *a,
                                   double *payoff);

/**
 * Mean of the intermediary actions over the last `fraction` of records,
 * optionally trimmed to a whole number of the slowest dither period.
 *
 * # Safety
 * `t` must be a live handle and `mean` have room for the node count.
 */
enum NsStatus ns_trajectory_windowed_mean(const struct NsTrajectory *t,
                                          double fraction,
                                          bool align_periods,
                                          double *mean);

/**
 * Writes the trajectory CSV (`k,khat`, per node `hat_a_j,a_j,r_j`, then
 * `lambda`).
 *
 * # Safety
 * `t` must be a live handle and `path` a NUL-terminated string.
 */
enum NsStatus ns_trajectory_write_csv(const struct NsTrajectory *t, const char *path);

/**
 * Releases a trajectory. Null is ignored.
 *
 * # Safety
 * `t` must be null or a handle not yet freed.
 */
void ns_trajectory_free(struct NsTrajectory *t);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* NASH_SEEK_H */
