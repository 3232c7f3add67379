/* C interface of the gstab library. All functions are thread-safe; the text
 * returned by gstab_last_error() is per thread. */
#ifndef GSTAB_H
#define GSTAB_H

#ifdef __cplusplus
extern "C" {
#endif

#if defined(GSTAB_BUILDING_LIBRARY)
#define GSTAB_API __attribute__((visibility("default")))
#else
#define GSTAB_API
#endif

typedef enum gstab_status {
    GSTAB_OK = 0,
    GSTAB_ERR_INTERNAL = 1,
    GSTAB_ERR_CONFIG = 2,
    GSTAB_ERR_INTEGRATION = 3,
    GSTAB_INAPPLICABLE = 4, /* a certificate threshold is >= 1; results are still valid */
    GSTAB_ERR_INVALID_ARGUMENT = 5,
    GSTAB_ERR_IO = 6
} gstab_status;

typedef struct gstab_config gstab_config;
typedef struct gstab_report gstab_report;

GSTAB_API const char* gstab_version(void);
/* Message of the last failing call on this thread ("" if none). */
GSTAB_API const char* gstab_last_error(void);

GSTAB_API gstab_status gstab_config_load(const char* path, gstab_config** out);
GSTAB_API gstab_status gstab_config_parse(const char* text, gstab_config** out);
/* Adds or replaces one key; validation happens in gstab_run. */
GSTAB_API gstab_status gstab_config_set(gstab_config* cfg, const char* key, const char* value);
GSTAB_API void gstab_config_free(gstab_config* cfg);

/* Runs `pipeline` (NULL: the config's own) writing report.json and CSVs to
 * out_dir (NULL or "": nothing is written). On GSTAB_OK and
 * GSTAB_INAPPLICABLE *out receives the report. */
GSTAB_API gstab_status gstab_run(const gstab_config* cfg, const char* pipeline, const char* out_dir, int workers,
                                 gstab_report** out);
GSTAB_API const char* gstab_report_json(const gstab_report* report);
GSTAB_API void gstab_report_free(gstab_report* report);

GSTAB_API gstab_status gstab_g_function(double a, double sigma_lo, double sigma_hi, double* out);
GSTAB_API gstab_status gstab_bdg_constant(double p, double* out);

typedef enum gstab_system_kind {
    GSTAB_SDDE = 0,
    GSTAB_SDE = 1,
    GSTAB_EM_SDDE = 2,
    GSTAB_EM_SDE = 3
} gstab_system_kind;

typedef struct gstab_transfer_inputs {
    gstab_system_kind source; /* transfer to the next system of the cycle */
    double M, lambda, d;      /* source envelope */
    double p, L, L_hat, sigma_lo, sigma_hi;
    double tau, step, delta_conf;
    double norm_ratio; /* ||xi||^p / E|xi(0)|^p, used from SDDE only; 0 means 1 */
} gstab_transfer_inputs;

typedef struct gstab_transfer_result {
    gstab_system_kind target;
    int applicable;
    double T, threshold, log_threshold;
    double M, lambda, d; /* valid when applicable */
    double log_M, log_d;
} gstab_transfer_result;

/* One stability transfer. Returns GSTAB_INAPPLICABLE when the threshold is >= 1. */
GSTAB_API gstab_status gstab_transfer(const gstab_transfer_inputs* in, gstab_transfer_result* out);

#ifdef __cplusplus
}
#endif

#endif /* GSTAB_H */
