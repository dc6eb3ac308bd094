#include "stccpm.h"

#include <cstring>
#include <string>
#include <thread>

#include "experiments.hpp"

using namespace stccpm;

struct stccpm_config {
    ExperimentConfig cfg;
};

struct stccpm_report {
    std::string json;
};

namespace {

thread_local std::string g_last_error;

stccpm_status to_status(const std::exception& e) {
    g_last_error = e.what();
    if (dynamic_cast<const ConfigError*>(&e)) return STCCPM_E_CONFIG;
    if (dynamic_cast<const InputError*>(&e)) return STCCPM_E_INPUT;
    return STCCPM_E_INTERNAL;
}

} // namespace

extern "C" {

const char* stccpm_version(void) { return kVersion; }

const char* stccpm_last_error(void) { return g_last_error.c_str(); }

stccpm_config* stccpm_config_create(void) {
    try {
        return new stccpm_config{};
    } catch (...) {
        return nullptr;
    }
}

stccpm_config* stccpm_config_from_preset(const char* name) {
    if (!name) {
        g_last_error = "preset name is null";
        return nullptr;
    }
    try {
        auto* c = new stccpm_config{};
        c->cfg = preset_config(name);
        return c;
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return nullptr;
    }
}

stccpm_config* stccpm_config_load(const char* path) {
    if (!path) {
        g_last_error = "config path is null";
        return nullptr;
    }
    try {
        auto* c = new stccpm_config{};
        c->cfg = parse_config_file(path);
        return c;
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return nullptr;
    }
}

stccpm_config* stccpm_config_clone(const stccpm_config* cfg) {
    if (!cfg) return nullptr;
    try {
        return new stccpm_config{cfg->cfg};
    } catch (...) {
        return nullptr;
    }
}

stccpm_status stccpm_config_set(stccpm_config* cfg, const char* key, const char* value) {
    if (!cfg || !key || !value) {
        g_last_error = "null argument";
        return STCCPM_E_INPUT;
    }
    try {
        apply_config_line(cfg->cfg, key, value);
        return STCCPM_OK;
    } catch (const std::exception& e) {
        return to_status(e);
    }
}

stccpm_status stccpm_config_get(const stccpm_config* cfg, const char* key, char* buf,
                                size_t buflen) {
    if (!cfg || !key || !buf || buflen == 0) {
        g_last_error = "null argument";
        return STCCPM_E_INPUT;
    }
    try {
        for (const auto& [k, v] : cfg->cfg.to_kv()) {
            if (k == key) {
                std::strncpy(buf, v.c_str(), buflen - 1);
                buf[buflen - 1] = '\0';
                return STCCPM_OK;
            }
        }
        g_last_error = std::string("unknown config key: ") + key;
        return STCCPM_E_CONFIG;
    } catch (const std::exception& e) {
        return to_status(e);
    }
}

void stccpm_config_free(stccpm_config* cfg) { delete cfg; }

size_t stccpm_preset_count(void) { return preset_names().size(); }

const char* stccpm_preset_name(size_t index) {
    static thread_local std::string name;
    const auto names = preset_names();
    if (index >= names.size()) return nullptr;
    name = names[index];
    return name.c_str();
}

stccpm_status stccpm_run(const stccpm_config* cfg, const char* out_path, int threads,
                         stccpm_report** report_out) {
    if (report_out) *report_out = nullptr;
    if (!cfg) {
        g_last_error = "null config";
        return STCCPM_E_INPUT;
    }
    try {
        int n_threads = threads;
        if (n_threads <= 0)
            n_threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
        const ExperimentResult res = run_experiment(cfg->cfg, n_threads);
        write_outputs(cfg->cfg, res, out_path ? out_path : "");
        if (report_out) *report_out = new stccpm_report{summary_json(cfg->cfg, res)};
        if (cfg->cfg.experiment == ExperimentKind::OrthoCheck && !res.ortho.pass) {
            g_last_error = "orthogonality check failed its bound";
            return STCCPM_E_CHECK_FAILED;
        }
        return STCCPM_OK;
    } catch (const std::exception& e) {
        return to_status(e);
    }
}

const char* stccpm_report_json(const stccpm_report* rep) {
    return rep ? rep->json.c_str() : nullptr;
}

void stccpm_report_free(stccpm_report* rep) { delete rep; }

stccpm_status stccpm_encode(const stccpm_config* cfg, const double* symbols, size_t n,
                            int blockwise, double* out_iq) {
    if (!cfg || !symbols || !out_iq) {
        g_last_error = "null argument";
        return STCCPM_E_INPUT;
    }
    try {
        const std::span<const double> data(symbols, n);
        std::vector<Waveform> wf;
        if (blockwise) {
            wf = encode_blockwise(cfg->cfg.spec, cfg->cfg.params, data).waveforms;
        } else {
            wf = encode_continuous(cfg->cfg.spec, cfg->cfg.params, data);
        }
        std::size_t idx = 0;
        for (const auto& w : wf) {
            for (const auto& v : w.samples) {
                out_iq[idx++] = v.real();
                out_iq[idx++] = v.imag();
            }
        }
        return STCCPM_OK;
    } catch (const std::exception& e) {
        return to_status(e);
    }
}

} // extern "C"
