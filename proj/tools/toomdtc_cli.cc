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


// Command-line front end. Uses only the C interface of libtoomdtc.

#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

#include "toomdtc/c_api.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;

int exit_code(toomdtc_status s) {
    switch (s) {
        case TOOMDTC_OK:
            return kExitOk;
        case TOOMDTC_ERR_INVALID:
        case TOOMDTC_ERR_CAPACITY:
        case TOOMDTC_ERR_NULL:
            return kExitValidation;
        default:
            return kExitRuntime;
    }
}

int report(toomdtc_status s, const char *what) {
    if (s != TOOMDTC_OK) {
        std::cerr << "toomdtc " << what << ": " << toomdtc_status_name(s) << " error: " << toomdtc_last_error()
                  << '\n';
    }
    return exit_code(s);
}

struct ConfigHandle {
    toomdtc_config *ptr = nullptr;
    ~ConfigHandle() {
        toomdtc_config_free(ptr);
    }
};

/// Loads the config and applies command-line overrides.
toomdtc_status load(const std::string &path, const std::string &out_dir, int threads, ConfigHandle &h) {
    auto s = toomdtc_config_load(path.c_str(), &h.ptr);
    if (s == TOOMDTC_OK && !out_dir.empty()) {
        s = toomdtc_config_set(h.ptr, "output.dir", out_dir.c_str());
    }
    if (s == TOOMDTC_OK && threads >= 0) {
        s = toomdtc_config_set(h.ptr, "threads", std::to_string(threads).c_str());
    }
    return s;
}

void print_and_free(char *text, std::ostream &out) {
    if (text != nullptr) {
        out << text;
        toomdtc_string_free(text);
    }
}

}  // namespace

int main(int argc, char **argv) {
    CLI::App app{"toomdtc: measurement-feedback time-crystal simulator"};
    app.set_version_flag("--version", std::string(toomdtc_version()));
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    int threads = -1;

    auto *run = app.add_subcommand("run", "Run one experiment from a config file");
    run->add_option("config", config_path, "Config file")->required();
    run->add_option("-o,--out", out_dir, "Output directory (overrides output.dir)");
    run->add_option("-j,--threads", threads, "Worker threads (0 = all cores)")->check(CLI::NonNegativeNumber);

    auto *sweep = app.add_subcommand("sweep", "Run every point of a config with one swept key");
    sweep->add_option("config", config_path, "Config file")->required();
    sweep->add_option("-o,--out", out_dir, "Output directory (overrides output.dir)");
    sweep->add_option("-j,--threads", threads, "Worker threads (0 = all cores)")->check(CLI::NonNegativeNumber);

    auto *validate = app.add_subcommand("validate", "Check a config without running it");
    validate->add_option("config", config_path, "Config file")->required();

    uint64_t seed = 1;
    auto *oracle = app.add_subcommand("oracle-check", "Run the small-N equivalence suite");
    oracle->add_option("--seed", seed, "Master seed");
    oracle->add_option("-j,--threads", threads, "Worker threads (0 = all cores)")->check(CLI::NonNegativeNumber);

    std::string kind = "square_periodic";
    uint32_t rows = 4;
    uint32_t cols = 4;
    std::string gateset = "cr";
    std::string variant = "measure_and_feedback";
    bool no_correct = false;
    std::string circuit_out;
    auto *compile = app.add_subcommand("compile", "Emit the circuit text of one NEC correction round");
    compile->add_option("--lattice", kind, "square_periodic | square_open | annular");
    compile->add_option("--rows", rows, "Rows (rings for annular)");
    compile->add_option("--cols", cols, "Columns (ring length for annular)");
    compile->add_option("--gateset", gateset, "cr | cphase");
    compile->add_option("--variant", variant, "measure_and_feedback | toffoli_reset");
    compile->add_flag("--no-correct", no_correct, "Leave the CR byproduct uncorrected");
    compile->add_option("-o,--output", circuit_out, "Write the circuit to a file instead of stdout");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        int code = app.exit(e);
        return code == 0 ? kExitOk : kExitValidation;
    }

    if (*run || *sweep) {
        bool is_sweep = static_cast<bool>(*sweep);
        const char *verb = is_sweep ? "sweep" : "run";
        ConfigHandle h;
        auto s = load(config_path, out_dir, threads, h);
        if (s != TOOMDTC_OK) {
            return report(s, verb);
        }
        char *files = nullptr;
        s = is_sweep ? toomdtc_sweep(h.ptr, &files) : toomdtc_run(h.ptr, &files);
        print_and_free(files, std::cout);
        return report(s, verb);
    }
    if (*validate) {
        ConfigHandle h;
        auto s = load(config_path, "", -1, h);
        if (s == TOOMDTC_OK) {
            s = toomdtc_validate(h.ptr);
        }
        if (s == TOOMDTC_OK) {
            std::cout << "ok: " << config_path;
            if (toomdtc_config_is_sweep(h.ptr)) {
                std::cout << " (sweep over " << toomdtc_config_sweep_size(h.ptr) << " points)";
            }
            std::cout << '\n';
        }
        return report(s, "validate");
    }
    if (*oracle) {
        char *text = nullptr;
        int all_pass = 0;
        auto s = toomdtc_oracle_check(seed, threads < 0 ? 0u : static_cast<uint32_t>(threads), &text, &all_pass);
        print_and_free(text, std::cout);
        if (s != TOOMDTC_OK) {
            return report(s, "oracle-check");
        }
        return all_pass ? kExitOk : kExitRuntime;
    }
    if (*compile) {
        char *text = nullptr;
        auto s = toomdtc_compile_round(kind.c_str(), rows, cols, gateset.c_str(), variant.c_str(), no_correct ? 0 : 1,
                                       &text);
        if (s != TOOMDTC_OK) {
            return report(s, "compile");
        }
        if (circuit_out.empty()) {
            print_and_free(text, std::cout);
        } else {
            std::ofstream f(circuit_out, std::ios::binary);
            print_and_free(text, f);
            if (!f) {
                std::cerr << "toomdtc compile: cannot write " << circuit_out << '\n';
                return kExitRuntime;
            }
        }
        return kExitOk;
    }
    return kExitValidation;
}
