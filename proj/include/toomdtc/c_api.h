// Copyright 2026 The toomdtc Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


/* Stable C interface to the toomdtc library. Every call returns a status
 * code; on failure toomdtc_last_error() describes it (per thread). Strings
 * returned through char** out-parameters are owned by the caller and must be
 * released with toomdtc_string_free. */

#ifndef TOOMDTC_C_API_H
#define TOOMDTC_C_API_H

#include <stdint.h>

#if defined(TOOMDTC_BUILDING_LIBRARY)
#define TOOMDTC_API __attribute__((visibility("default")))
#else
#define TOOMDTC_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum toomdtc_status {
    TOOMDTC_OK = 0,
    /* Config or argument failed validation. */
    TOOMDTC_ERR_INVALID = 1,
    /* Failure while computing. */
    TOOMDTC_ERR_RUNTIME = 2,
    /* Requested size exceeds an engine's capacity. */
    TOOMDTC_ERR_CAPACITY = 3,
    TOOMDTC_ERR_IO = 4,
    TOOMDTC_ERR_NULL = 5
} toomdtc_status;

/* Parsed experiment config (opaque). */
typedef struct toomdtc_config toomdtc_config;

TOOMDTC_API const char *toomdtc_version(void);
/* Message of the last failed call on this thread ("" if none). */
TOOMDTC_API const char *toomdtc_last_error(void);
/* Config key the last validation error is about ("" if none). */
TOOMDTC_API const char *toomdtc_last_error_key(void);
TOOMDTC_API const char *toomdtc_status_name(toomdtc_status status);

TOOMDTC_API toomdtc_status toomdtc_config_load(const char *path, toomdtc_config **out);
TOOMDTC_API toomdtc_status toomdtc_config_parse(const char *text, toomdtc_config **out);
TOOMDTC_API void toomdtc_config_free(toomdtc_config *config);
/* Sets or replaces one key (e.g. output.dir) as if it were in the file. */
TOOMDTC_API toomdtc_status toomdtc_config_set(toomdtc_config *config, const char *key, const char *value);
/* 1 when the config declares a swept key, else 0. */
TOOMDTC_API int toomdtc_config_is_sweep(const toomdtc_config *config);
/* Number of sweep points (1 for an unswept config). */
TOOMDTC_API uint32_t toomdtc_config_sweep_size(const toomdtc_config *config);

/* Full validation (every sweep point) without running anything. */
TOOMDTC_API toomdtc_status toomdtc_validate(const toomdtc_config *config);
/* Runs the experiment. files_out (nullable) receives the written paths,
 * one per line, relative to the output directory. */
TOOMDTC_API toomdtc_status toomdtc_run(const toomdtc_config *config, char **files_out);
TOOMDTC_API toomdtc_status toomdtc_sweep(const toomdtc_config *config, char **files_out);

/* Small-N equivalence suite. report_out gets one `PASS|FAIL name: detail`
 * line per check; all_pass (nullable) is set to 1 when every check passed. */
TOOMDTC_API toomdtc_status toomdtc_oracle_check(uint64_t seed, uint32_t threads, char **report_out, int *all_pass);

/* Circuit text of one NEC correction round for a lattice.
 * lattice_kind: square_periodic | square_open | annular
 * gateset: cr | cphase;  variant: measure_and_feedback | toffoli_reset */
TOOMDTC_API toomdtc_status toomdtc_compile_round(const char *lattice_kind, uint32_t rows, uint32_t cols,
                                                 const char *gateset, const char *variant, int correct_byproduct,
                                                 char **text_out);

TOOMDTC_API void toomdtc_string_free(char *s);

#ifdef __cplusplus
}
#endif

#endif
