#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "qkd/cli.hpp"
#include "qkd/version.hpp"

int main(int argc, char** argv) {
    CLI::App app{std::string(qkd::kToolName) + " " + qkd::kToolVersion +
                 " - desk-scale quantum key distribution laboratory"};
    app.require_subcommand(1);

    qkd::RunManifest manifest;
    std::string transcript_path;

    auto* sim = app.add_subcommand(
        "simulate", "run one session and the classical post-processing chain");
    sim->add_option("--config", manifest.config_path, "session configuration file")
        ->required();
    sim->add_option("--out", manifest.out_dir, "output directory for artifacts");
    sim->add_option("--seed", manifest.seed_override,
                    "seed override (else session.seed, else QKDLAB_SEED)");
    sim->add_option("--protocol", manifest.protocol_override,
                    "protocol override (bb84, b92, four-plus-two, six-state, ekert, gv, "
                    "koashi-imoto)");
    sim->add_option("--tau1-table", manifest.tau1_table_path,
                    "tabulated tau1 curve (CSV: e,tau1)");
    sim->add_flag("--override-insecure", manifest.override_insecure,
                  "continue past the tolerable-error abort; outputs are stamped INSECURE");

    auto* rates = app.add_subcommand(
        "rates", "export the rate curve (e, I_AB, tau1, R_corr, R_del) and its root");
    rates->add_option("--config", manifest.config_path, "configuration file (optional)");
    rates->add_option("--out", manifest.out_dir, "output directory");
    rates->add_option("--seed", manifest.seed_override, "seed recorded in the artifact header");
    rates->add_option("--protocol", manifest.protocol_override, "protocol for the curve");
    rates->add_option("--tau1-table", manifest.tau1_table_path,
                      "tabulated tau1 curve (required for protocols without a closed form)");

    auto* verify = app.add_subcommand("verify-transcript",
                                      "replay a transcript from its embedded seed and "
                                      "compare byte for byte");
    verify->add_option("transcript", transcript_path, "transcript file (.qkdt)")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? qkd::kExitOk : qkd::kExitConfig;
    }

    if (sim->parsed()) return qkd::cmd_simulate(manifest, std::cout);
    if (rates->parsed()) return qkd::cmd_rates(manifest, std::cout);
    if (verify->parsed()) return qkd::cmd_verify_transcript(transcript_path, std::cout);
    return qkd::kExitConfig;
}
