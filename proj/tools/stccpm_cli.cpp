// Command-line front end for the stccpm shared library. Talks to the
// library exclusively through the C API in stccpm.h.

#include <cstdint>
#include <cstdio>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "stccpm.h"

namespace {

struct ConfigDeleter {
    void operator()(stccpm_config* c) const { stccpm_config_free(c); }
};
using ConfigPtr = std::unique_ptr<stccpm_config, ConfigDeleter>;

struct SubArgs {
    std::string config_path;
    std::string preset;
    std::string out_path;
    std::uint64_t seed = 0;
    bool seed_set = false;
    int threads = 0;
    std::vector<std::string> overrides; // key=value
};

void add_common(CLI::App* app, SubArgs& a) {
    app->add_option("--config", a.config_path, "config file (key = value lines)");
    app->add_option("--preset", a.preset, "named preset (see `stccpm presets`)");
    app->add_option("--out", a.out_path, "output CSV path (JSON sidecar written next to it)");
    app->add_option("--seed", a.seed, "64-bit master seed")->each([&a](const std::string&) {
        a.seed_set = true;
    });
    app->add_option("--threads", a.threads, "worker threads (0 = hardware)");
    app->add_option("--set", a.overrides, "extra config overrides, key=value")
        ->take_all();
}

int fail_config(const char* what) {
    std::fprintf(stderr, "config error: %s\n", what);
    return 2;
}

int run_subcommand(const SubArgs& a, const char* experiment) {
    ConfigPtr cfg;
    if (!a.preset.empty() && !a.config_path.empty())
        return fail_config("pass either --preset or --config; use --set for overrides");
    if (!a.preset.empty()) {
        cfg.reset(stccpm_config_from_preset(a.preset.c_str()));
        if (!cfg) return fail_config(stccpm_last_error());
    } else if (!a.config_path.empty()) {
        cfg.reset(stccpm_config_load(a.config_path.c_str()));
        if (!cfg) return fail_config(stccpm_last_error());
    } else {
        cfg.reset(stccpm_config_create());
        if (!cfg) return fail_config("cannot allocate config");
    }

    if (stccpm_config_set(cfg.get(), "experiment", experiment) != STCCPM_OK)
        return fail_config(stccpm_last_error());
    if (a.seed_set &&
        stccpm_config_set(cfg.get(), "seed", std::to_string(a.seed).c_str()) != STCCPM_OK)
        return fail_config(stccpm_last_error());
    for (const auto& kv : a.overrides) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) return fail_config("override must be key=value");
        if (stccpm_config_set(cfg.get(), kv.substr(0, eq).c_str(), kv.substr(eq + 1).c_str()) !=
            STCCPM_OK)
            return fail_config(stccpm_last_error());
    }
    if (a.out_path.empty()) {
        char buf[512];
        if (stccpm_config_get(cfg.get(), "output_path", buf, sizeof buf) != STCCPM_OK ||
            buf[0] == '\0')
            return fail_config("no output path: pass --out or set output_path");
    }

    stccpm_report* rep = nullptr;
    const stccpm_status st =
        stccpm_run(cfg.get(), a.out_path.empty() ? nullptr : a.out_path.c_str(), a.threads, &rep);
    if (rep) {
        std::printf("%s\n", stccpm_report_json(rep));
        stccpm_report_free(rep);
    }
    switch (st) {
        case STCCPM_OK:
            return 0;
        case STCCPM_E_CHECK_FAILED:
            std::fprintf(stderr, "FAIL: %s\n", stccpm_last_error());
            return 3;
        case STCCPM_E_CONFIG:
            return fail_config(stccpm_last_error());
        default:
            std::fprintf(stderr, "error: %s\n", stccpm_last_error());
            return 1;
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{std::string("stccpm - space-time coded CPM simulator (") + stccpm_version() +
                 ")"};
    app.require_subcommand(1);

    SubArgs args_ber, args_s1, args_s2, args_psd, args_ortho;
    CLI::App* ber = app.add_subcommand("ber", "BER vs Eb/N0 sweep");
    add_common(ber, args_ber);
    CLI::App* s1 = app.add_subcommand("sweep1d", "2 Tx initial-phase sweep");
    add_common(s1, args_s1);
    CLI::App* s2 = app.add_subcommand("sweep2d", "3 Tx initial-phase grid sweep");
    add_common(s2, args_s2);
    CLI::App* psd = app.add_subcommand("psd", "Welch PSD report");
    add_common(psd, args_psd);
    CLI::App* ortho = app.add_subcommand("ortho", "block orthogonality check");
    add_common(ortho, args_ortho);
    CLI::App* presets = app.add_subcommand("presets", "list built-in presets");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) ? 2 : 0;
    }

    if (presets->parsed()) {
        for (size_t i = 0; i < stccpm_preset_count(); ++i)
            std::printf("%s\n", stccpm_preset_name(i));
        return 0;
    }
    if (ber->parsed()) return run_subcommand(args_ber, "ber_sweep");
    if (s1->parsed()) return run_subcommand(args_s1, "phase_sweep_1d");
    if (s2->parsed()) return run_subcommand(args_s2, "phase_sweep_2d");
    if (psd->parsed()) return run_subcommand(args_psd, "psd_report");
    if (ortho->parsed()) return run_subcommand(args_ortho, "ortho_check");
    return 2;
}
