/* C API for the hopper simulation library.
 *
 * Opaque handles + integer status codes. All functions returning a pointer
 * yield NULL on failure; hopper_last_error() describes the most recent
 * failure on the calling thread.
 */
#ifndef HOPPER_CAPI_H
#define HOPPER_CAPI_H

#ifdef __cplusplus
extern "C" {
#endif

typedef enum hopper_status {
  HOPPER_OK = 0,
  HOPPER_ERR_CONFIG = 1,  /* bad configuration / usage */
  HOPPER_ERR_RUNTIME = 2, /* simulation or solver failure */
  HOPPER_ERR_ARG = 3      /* invalid argument (NULL handle, unknown name) */
} hopper_status;

typedef struct hopper_sim hopper_sim;       /* configured simulation */
typedef struct hopper_result hopper_result; /* finished run */

const char* hopper_version(void);

/* Thread-local message for the most recent error. Never NULL. */
const char* hopper_last_error(void);

/* --- simulation ------------------------------------------------------- */

/* Creates a simulation from a JSON config file, or from built-in defaults. */
hopper_sim* hopper_sim_create(const char* config_path);
hopper_sim* hopper_sim_create_default(void);
void hopper_sim_destroy(hopper_sim* sim);

/* Overrides applied after configuration. controller: "raibert" | "bvp". */
hopper_status hopper_sim_set_controller(hopper_sim* sim, const char* controller);
hopper_status hopper_sim_set_seed(hopper_sim* sim, unsigned long long seed);
hopper_status hopper_sim_set_noise(hopper_sim* sim, double sigma_process,
                                   double sigma_measurement);
hopper_status hopper_sim_set_hops(hopper_sim* sim, int max_hops);

/* Runs the simulation. Returns a result handle even for aborted runs
 * (inspect hopper_result_aborted); NULL only on setup errors. */
hopper_result* hopper_sim_run(hopper_sim* sim);

/* --- results ----------------------------------------------------------- */

void hopper_result_destroy(hopper_result* result);

/* 1 when the run aborted (divergence / plan failure), else 0. */
int hopper_result_aborted(const hopper_result* result);

/* Scalar metrics by name:
 *   hops, sim_time, peak_stance_jerk, rms_stance_jerk, peak_abs_tau,
 *   peak_abs_F, control_effort, mean_forward_speed, max_plan_bc_residual,
 *   max_abs_plan_hamiltonian_tf, apex_mean, apex_last
 * plus mean_forward_speed_hops_A_B (e.g. mean_forward_speed_hops_5_10). */
hopper_status hopper_result_metric(const hopper_result* result, const char* name,
                                   double* out);

/* Writes {prefix}trajectory.csv, {prefix}events.csv, {prefix}report.txt
 * under out_dir (created if missing). prefix may be "" or NULL. */
hopper_status hopper_result_write(const hopper_result* result, const char* out_dir,
                                  const char* prefix);

/* Figure data files: set 0 writes fig3_states/fig4_torque/fig5_jerk.csv
 * (PD layout), set 1 writes fig6/fig7/fig8 (BVP layout). */
hopper_status hopper_result_write_figures(const hopper_result* result, const char* out_dir,
                                          int figure_set);

/* --- standalone BVP battery ------------------------------------------- */

/* Comma-separated problem names. */
const char* hopper_battery_names(void);

/* Solves a named analytic BVP; writes {name}.csv under out_dir when out_dir
 * is non-NULL. Outputs may be NULL. */
hopper_status hopper_solve_battery(const char* name, double tol, const char* out_dir,
                                   double* max_error, double* max_defect, int* iterations);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* HOPPER_CAPI_H */
