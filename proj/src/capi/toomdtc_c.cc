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


#include "toomdtc/c_api.h"

#include <cstdlib>
#include <cstring>
#include <sstream>
#include <string>

#include "toomdtc/circuit.h"
#include "toomdtc/experiment.h"
#include "toomdtc/oracle_suite.h"

struct toomdtc_config {
    toomdtc::RawConfig raw;
};

namespace {

thread_local std::string g_error;
thread_local std::string g_error_key;

toomdtc_status fail(toomdtc_status s, const std::string &message, const std::string &key = "") {
    g_error = message;
    g_error_key = key;
    return s;
}

template <typename Fn>
toomdtc_status guarded(Fn &&fn) {
    g_error.clear();
    g_error_key.clear();
    try {
        return fn();
    } catch (const toomdtc::ValidationError &e) {
        return fail(TOOMDTC_ERR_INVALID, e.what(), e.key);
    } catch (const toomdtc::CapacityError &e) {
        return fail(TOOMDTC_ERR_CAPACITY, e.what());
    } catch (const toomdtc::IoError &e) {
        return fail(TOOMDTC_ERR_IO, e.what());
    } catch (const std::invalid_argument &e) {
        return fail(TOOMDTC_ERR_INVALID, e.what());
    } catch (const std::bad_alloc &) {
        return fail(TOOMDTC_ERR_RUNTIME, "out of memory");
    } catch (const std::exception &e) {
        return fail(TOOMDTC_ERR_RUNTIME, e.what());
    } catch (...) {
        return fail(TOOMDTC_ERR_RUNTIME, "unknown error");
    }
}

char *dup_string(const std::string &s) {
    char *out = static_cast<char *>(std::malloc(s.size() + 1));
    if (out == nullptr) {
        throw std::bad_alloc();
    }
    std::memcpy(out, s.data(), s.size() + 1);
    return out;
}

std::string join_lines(const std::vector<std::string> &items) {
    std::string out;
    for (const auto &s : items) {
        out += s;
        out += '\n';
    }
    return out;
}

}  // namespace

extern "C" {

const char *toomdtc_version(void) {
    static const std::string v = toomdtc::code_version();
    return v.c_str();
}

const char *toomdtc_last_error(void) {
    return g_error.c_str();
}

const char *toomdtc_last_error_key(void) {
    return g_error_key.c_str();
}

const char *toomdtc_status_name(toomdtc_status status) {
    switch (status) {
        case TOOMDTC_OK:
            return "ok";
        case TOOMDTC_ERR_INVALID:
            return "invalid";
        case TOOMDTC_ERR_RUNTIME:
            return "runtime";
        case TOOMDTC_ERR_CAPACITY:
            return "capacity";
        case TOOMDTC_ERR_IO:
            return "io";
        case TOOMDTC_ERR_NULL:
            return "null";
    }
    return "unknown";
}

toomdtc_status toomdtc_config_load(const char *path, toomdtc_config **out) {
    if (path == nullptr || out == nullptr) {
        return fail(TOOMDTC_ERR_NULL, "null argument");
    }
    *out = nullptr;
    return guarded([&] {
        *out = new toomdtc_config{toomdtc::load_config_file(path)};
        return TOOMDTC_OK;
    });
}

toomdtc_status toomdtc_config_parse(const char *text, toomdtc_config **out) {
    if (text == nullptr || out == nullptr) {
        return fail(TOOMDTC_ERR_NULL, "null argument");
    }
    *out = nullptr;
    return guarded([&] {
        *out = new toomdtc_config{toomdtc::parse_config_text(text)};
        return TOOMDTC_OK;
    });
}

void toomdtc_config_free(toomdtc_config *config) {
    delete config;
}

toomdtc_status toomdtc_config_set(toomdtc_config *config, const char *key, const char *value) {
    if (config == nullptr || key == nullptr || value == nullptr) {
        return fail(TOOMDTC_ERR_NULL, "null argument");
    }
    return guarded([&] {
        auto &raw = config->raw;
        if (raw.sweep_key && *raw.sweep_key == key) {
            return fail(TOOMDTC_ERR_INVALID, std::string(key) + ": is swept and cannot be overridden", key);
        }
        bool found = false;
        for (auto &e : raw.entries) {
            if (e.key == key) {
                e.value = value;
                found = true;
            }
        }
        if (!found) {
            raw.entries.push_back({key, value, 0});
        }
        // The manifest hashes the effective config text.
        raw.source += std::string("\n# override\n") + key + " = " + value + "\n";
        return TOOMDTC_OK;
    });
}

int toomdtc_config_is_sweep(const toomdtc_config *config) {
    return config != nullptr && config->raw.sweep_key ? 1 : 0;
}

uint32_t toomdtc_config_sweep_size(const toomdtc_config *config) {
    if (config == nullptr || !config->raw.sweep_key) {
        return 1;
    }
    return static_cast<uint32_t>(config->raw.sweep_values.size());
}

toomdtc_status toomdtc_validate(const toomdtc_config *config) {
    if (config == nullptr) {
        return fail(TOOMDTC_ERR_NULL, "null config");
    }
    return guarded([&] {
        const auto &raw = config->raw;
        if (raw.sweep_key) {
            for (size_t i = 0; i < raw.sweep_values.size(); i++) {
                toomdtc::build_config(raw.point(i));
            }
        } else {
            toomdtc::build_config(raw);
        }
        return TOOMDTC_OK;
    });
}

toomdtc_status toomdtc_run(const toomdtc_config *config, char **files_out) {
    if (config == nullptr) {
        return fail(TOOMDTC_ERR_NULL, "null config");
    }
    return guarded([&] {
        auto result = toomdtc::run_experiment(config->raw);
        if (files_out != nullptr) {
            *files_out = dup_string(join_lines(result.files));
        }
        return TOOMDTC_OK;
    });
}

toomdtc_status toomdtc_sweep(const toomdtc_config *config, char **files_out) {
    if (config == nullptr) {
        return fail(TOOMDTC_ERR_NULL, "null config");
    }
    return guarded([&] {
        auto result = toomdtc::run_sweep(config->raw);
        if (files_out != nullptr) {
            *files_out = dup_string(join_lines(result.files));
        }
        return TOOMDTC_OK;
    });
}

toomdtc_status toomdtc_oracle_check(uint64_t seed, uint32_t threads, char **report_out, int *all_pass) {
    return guarded([&] {
        auto checks = toomdtc::run_oracle_suite(seed, threads);
        bool ok = true;
        std::ostringstream out;
        for (const auto &c : checks) {
            out << (c.pass ? "PASS " : "FAIL ") << c.name << ": " << c.detail << '\n';
            ok = ok && c.pass;
        }
        if (all_pass != nullptr) {
            *all_pass = ok ? 1 : 0;
        }
        if (report_out != nullptr) {
            *report_out = dup_string(out.str());
        }
        return TOOMDTC_OK;
    });
}

toomdtc_status toomdtc_compile_round(const char *lattice_kind, uint32_t rows, uint32_t cols, const char *gateset,
                                     const char *variant, int correct_byproduct, char **text_out) {
    if (lattice_kind == nullptr || gateset == nullptr || variant == nullptr || text_out == nullptr) {
        return fail(TOOMDTC_ERR_NULL, "null argument");
    }
    *text_out = nullptr;
    return guarded([&] {
        auto kind = toomdtc::parse_lattice_kind(lattice_kind);
        if (!kind) {
            return fail(TOOMDTC_ERR_INVALID, std::string("unknown lattice kind '") + lattice_kind + "'", "lattice.kind");
        }
        auto gs = toomdtc::parse_gateset(gateset);
        if (!gs) {
            return fail(TOOMDTC_ERR_INVALID, std::string("unknown gate set '") + gateset + "'", "gateset");
        }
        auto rv = toomdtc::parse_round_variant(variant);
        if (!rv) {
            return fail(TOOMDTC_ERR_INVALID, std::string("unknown round variant '") + variant + "'", "variant");
        }
        auto lattice = toomdtc::Lattice::build(*kind, rows, cols);
        auto layout = toomdtc::HardwareLayout::for_lattice(lattice);
        auto circuit = toomdtc::compile_nec_round(layout, lattice, *rv, {*gs, correct_byproduct != 0});
        *text_out = dup_string(toomdtc::emit_text(circuit));
        return TOOMDTC_OK;
    });
}

void toomdtc_string_free(char *s) {
    std::free(s);
}

}  // extern "C"
