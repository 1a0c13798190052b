/* C interface to the slowfast library. All handles are opaque; every call
 * returns an sf_status and leaves a thread-local message retrievable with
 * sf_last_error(). Matrices are column-major. */
#ifndef SLOWFAST_H
#define SLOWFAST_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define SF_API __declspec(dllexport)
#else
#define SF_API __attribute__((visibility("default")))
#endif

typedef enum sf_status {
    SF_OK = 0,
    SF_ERR_PIPELINE = 1,
    SF_ERR_CONFIG = 2,
    SF_ERR_IO = 3,
    SF_ERR_ARGUMENT = 4,
    SF_ERR_NUMERICAL = 5
} sf_status;

typedef enum sf_folded_label {
    SF_FOLDED_SADDLE = 0,
    SF_FOLDED_NODE = 1,
    SF_FOLDED_FOCUS = 2,
    SF_FOLDED_SADDLE_NODE = 3,
    SF_FOLDED_DEGENERATE = 4
} sf_folded_label;

typedef struct sf_system sf_system;
typedef struct sf_config sf_config;

SF_API const char* sf_version(void);
SF_API const char* sf_last_error(void);
/* Maps a status to the process exit code contract (0, 1, 2, 3). */
SF_API int sf_exit_code(sf_status status);

/* Models. overrides_json may be NULL or a JSON object of parameter values;
 * the keys "n_points" and "length" resize the grid. */
SF_API sf_status sf_model_create(const char* name, const char* overrides_json, sf_system** out);
SF_API void sf_model_destroy(sf_system* sys);
SF_API sf_status sf_model_dims(const sf_system* sys, int* n_fast, int* m_slow, int* p_params);
/* Reference equilibrium; any output pointer may be NULL. */
SF_API sf_status sf_model_reference(const sf_system* sys, double* u, double* v, double* mu, double* eps);
SF_API sf_status sf_eval_rhs(const sf_system* sys, const double* u, const double* v, const double* mu,
                             double eps, double* du, double* dv);
SF_API sf_status sf_jacobian_u(const sf_system* sys, const double* u, const double* v, const double* mu,
                               double eps, double* jac);

/* Spectra. re/im receive n values sorted by descending real part. */
SF_API sf_status sf_dense_spectrum(int n, const double* a, double* re, double* im);
SF_API sf_status sf_fhn_closed_form(double a, int n_max, double* re, double* im, int capacity, int* count);
SF_API sf_status sf_dde_hopf_locus(double tau, double* roots, int capacity, int* count);
SF_API sf_status sf_dde_root(double v, double tau, int branch, double* re, double* im);

SF_API sf_status sf_classify_folded_singularity(double j11, double j12, double j21, sf_folded_label* label,
                                                double* eig_re, double* eig_im);
SF_API const char* sf_folded_label_name(sf_folded_label label);

/* Configuration and dispatch. file_json and overrides_json may be NULL. */
SF_API sf_status sf_config_resolve(const char* file_json, const char* overrides_json, sf_config** out);
SF_API sf_status sf_config_to_json(const sf_config* cfg, char** json);
SF_API void sf_config_destroy(sf_config* cfg);
SF_API sf_status sf_dispatch(const sf_config* cfg);
SF_API sf_status sf_read_file(const char* path, char** contents);
SF_API void sf_string_free(char* s);

#ifdef __cplusplus
}
#endif

#endif
