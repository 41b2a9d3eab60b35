#ifndef NQE_CAPI_H
#define NQE_CAPI_H

/* C interface to the experiment runner. A session holds the last error
 * message; all functions return an error code (0 = success). */

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define NQE_API __declspec(dllexport)
#else
#define NQE_API __attribute__((visibility("default")))
#endif

typedef struct nqe_session nqe_session;

enum nqe_status {
  NQE_OK = 0,
  NQE_ERR_CONFIG = 2,   /* invalid configuration (schema, missing seed, ...) */
  NQE_ERR_RUNTIME = 1,  /* any other failure */
  NQE_ERR_ARG = 3       /* null handle / bad argument */
};

NQE_API const char* nqe_version(void);

NQE_API nqe_session* nqe_session_create(void);
NQE_API void nqe_session_destroy(nqe_session* s);

/* Last error message for this session; empty string if none. The pointer is
 * valid until the next call on the same session. */
NQE_API const char* nqe_last_error(const nqe_session* s);

/* Runs one subcommand ("train-nqe", "train-qcnn", "kernel-study",
 * "metrics-report", "compare-embeddings") with a JSON config string.
 * Artifacts are written into out_dir. workers = 0 means all cores.
 * seed_override < 0 keeps the config's seed. */
NQE_API int nqe_run(nqe_session* s, const char* subcommand, const char* config_json,
                    const char* out_dir, int workers, int64_t seed_override);

#ifdef __cplusplus
}
#endif

#endif /* NQE_CAPI_H */
