/*
 * stccpm - baseband simulation library for L2-orthogonal space-time-coded
 * continuous phase modulation.
 *
 * C interface over the C++ core: opaque handles, status codes, and a
 * thread-local error message. See README.md for the config key reference.
 */
#ifndef STCCPM_H
#define STCCPM_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum stccpm_status {
    STCCPM_OK = 0,
    STCCPM_E_CONFIG = 1,       /* invalid parameter set or config file */
    STCCPM_E_INPUT = 2,        /* invalid runtime data (symbols, sizes) */
    STCCPM_E_IO = 3,           /* file could not be read or written */
    STCCPM_E_CHECK_FAILED = 4, /* orthogonality check reported FAIL */
    STCCPM_E_INTERNAL = 5
} stccpm_status;

typedef struct stccpm_config stccpm_config;
typedef struct stccpm_report stccpm_report;

const char* stccpm_version(void);

/* Message describing the most recent failure on this thread. */
const char* stccpm_last_error(void);

/* Experiment configuration: key/value surface mirroring the config file
 * format (keys: experiment, M, h, gamma, pulse, sps, T, Es, Lt,
 * correction, theta_init, snr_grid_dB, phase_grid, n_bits, n_blocks,
 * seed, output_path, fading, Lr, oversample). */
stccpm_config* stccpm_config_create(void);
stccpm_config* stccpm_config_from_preset(const char* name);
stccpm_config* stccpm_config_load(const char* path);
stccpm_config* stccpm_config_clone(const stccpm_config* cfg);
stccpm_status stccpm_config_set(stccpm_config* cfg, const char* key, const char* value);
stccpm_status stccpm_config_get(const stccpm_config* cfg, const char* key, char* buf,
                                size_t buflen);
void stccpm_config_free(stccpm_config* cfg);

size_t stccpm_preset_count(void);
const char* stccpm_preset_name(size_t index);

/* Runs the configured experiment and writes the CSV output plus a JSON
 * sidecar. out_path == NULL uses the configured output_path. threads <= 0
 * selects the hardware concurrency. report_out may be NULL. Returns
 * STCCPM_E_CHECK_FAILED when an ortho_check run does not meet its bound
 * (outputs are still written). */
stccpm_status stccpm_run(const stccpm_config* cfg, const char* out_path, int threads,
                         stccpm_report** report_out);

/* JSON summary of a finished run (owned by the report). */
const char* stccpm_report_json(const stccpm_report* rep);
void stccpm_report_free(stccpm_report* rep);

/* Encodes n data symbols (values from the base alphabet, n a multiple of
 * Lt) into Lt antenna waveforms of n*sps samples each. Interleaved re/im
 * doubles, antenna-major: out_iq[((m*n*sps) + k)*2 + 0/1]. blockwise != 0
 * uses the block-structured synthesis path instead of the continuous one. */
stccpm_status stccpm_encode(const stccpm_config* cfg, const double* symbols, size_t n,
                            int blockwise, double* out_iq);

#ifdef __cplusplus
}
#endif

#endif /* STCCPM_H */
