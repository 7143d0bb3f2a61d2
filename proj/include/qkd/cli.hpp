#pragma once

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "qkd/analytics.hpp"
#include "qkd/config.hpp"
#include "qkd/postproc.hpp"
#include "qkd/transcript.hpp"
#include "qkd/version.hpp"

namespace qkd {

inline constexpr int kExitOk = 0;
inline constexpr int kExitVerifyMismatch = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitInsecureAbort = 3;
inline constexpr int kExitReconcileFail = 4;

struct RunManifest {
    std::string config_path;
    std::string out_dir = ".";
    std::optional<std::uint64_t> seed_override;
    std::optional<std::string> protocol_override;
    std::optional<std::string> tau1_table_path;
    bool override_insecure = false;
};

namespace detail {

inline std::string artifact_header(std::uint64_t seed, const std::string& cfg_hash) {
    std::ostringstream os;
    os << "# " << kToolName << " " << kToolVersion << "\n";
    os << "# seed " << seed << "\n";
    os << "# config-hash " << cfg_hash << "\n";
    return os.str();
}

inline std::string bits_to_01(std::span<const std::uint8_t> bits) {
    std::string s;
    s.reserve(bits.size());
    for (auto b : bits) s.push_back(b ? '1' : '0');
    return s;
}

}  // namespace detail

// Outcome of the simulate pipeline, both as writable artifacts and as
// programmatic fields for callers that want to inspect the run.
struct PipelineResult {
    int exit_code = kExitOk;
    std::string status = "ok";
    std::map<std::string, std::string> artifacts;  // filename -> content

    double sift_fraction = 0.0;
    double qber_truth = 0.0;
    double e_hat = 0.0;
    SecurityFlag pns_flag = SecurityFlag::NotDecided;
    std::uint64_t multi_photon_sent = 0;
    std::uint64_t detected_count = 0;
    bool have_cutoff = false;
    double cutoff = 0.0;
    bool have_chsh = false;
    double chsh = 0.0;
    bool have_eve_summary = false;
    EveInfoSummary eve_summary;
    std::uint64_t n_sifted = 0;
    std::uint64_t n_rec = 0;
    std::uint64_t n_fin = 0;
    std::uint64_t emitted_bits = 0;
    long long net_new_secret_bits = 0;
    double eve_info_bound = 0.0;
    double tau1_at_e_hat = 0.0;
    bool pa_performed = false;
    std::string pa_note;
    LeakageReport leakage;
    SecurityStatement statement;
};

namespace detail {

inline std::string summary_body(const LabConfig& cfg, const PipelineResult& res) {
    std::ostringstream os;
    os << "status = " << res.status << "\n";
    os << "protocol = " << to_string(cfg.session.protocol) << "\n";
    os << "n_signals = " << cfg.session.n_signals << "\n";
    os << "n_sifted = " << res.n_sifted << "\n";
    os << "sift_fraction = " << fmt_double(res.sift_fraction) << "\n";
    os << "oracle_qber_truth = " << fmt_double(res.qber_truth) << "\n";
    os << "e_hat = " << fmt_double(res.e_hat) << "\n";
    os << "pns_flag = " << to_string(res.pns_flag) << "\n";
    os << "multi_photon_sent = " << res.multi_photon_sent << "\n";
    os << "detected_count = " << res.detected_count << "\n";
    if (res.have_cutoff) os << "tolerable_error_rate = " << fmt_double(res.cutoff) << "\n";
    else os << "tolerable_error_rate = unresolved\n";
    if (res.have_chsh) os << "chsh_s = " << fmt_double(res.chsh) << "\n";
    if (res.have_eve_summary) {
        os << "eve_matched_fraction = " << fmt_double(res.eve_summary.matched_fraction())
           << "\n";
        os << "eve_conditional_correctness = "
           << fmt_double(res.eve_summary.conditional_correctness()) << "\n";
        os << "eve_bits_per_sifted_bit = " << fmt_double(res.eve_summary.bits_per_sifted_bit())
           << "\n";
    }
    os << "n_rec = " << res.n_rec << "\n";
    os << "parity_bits_disclosed = " << res.leakage.parity_bits_disclosed << "\n";
    if (res.pa_performed) {
        os << "tau1_at_e_hat = " << fmt_double(res.tau1_at_e_hat) << "\n";
        os << "n_fin = " << res.n_fin << "\n";
        os << "n_s = " << cfg.postproc.n_s << "\n";
        os << "eve_info_bound = " << fmt_double(res.eve_info_bound) << "\n";
        os << "final_key_bits_emitted = " << res.emitted_bits << "\n";
        os << "net_new_secret_bits = " << res.net_new_secret_bits << "\n";
        os << "security_i_e_tol = " << fmt_double(res.statement.i_e_tol) << "\n";
        os << "security_alpha = " << fmt_double(res.statement.alpha)
           << "  # conditional on the individual-attack model\n";
        os << "security_beta = " << fmt_double(res.statement.beta) << "\n";
    } else if (!res.pa_note.empty()) {
        os << "privacy_amplification = skipped (" << res.pa_note << ")\n";
    }
    return os.str();
}

}  // namespace detail

// Full classical pipeline over one simulated session: sift, estimate, abort
// check against the protocol's tolerable error rate, reconcile, authenticate
// the reconciliation digests, privacy-amplify. With plain (unencrypted)
// parity disclosure the emitted key is additionally shortened by every
// disclosed reconciliation bit; with encrypted parities that cost is booked
// as consumption of pre-shared secret instead.
inline PipelineResult run_pipeline(const LabConfig& cfg, const std::optional<Tau1Curve>& table,
                                   bool override_insecure) {
    PipelineResult res;
    const std::string cfg_hash = config_hash(cfg.session, cfg.channel, cfg.attack);
    const std::string header = detail::artifact_header(cfg.session.seed, cfg_hash);

    const SessionRecord record = run_session(cfg.session, cfg.channel, cfg.attack);
    res.artifacts["transcript.qkdt"] = transcript_to_string(record);

    res.multi_photon_sent = record.multi_photon_sent;
    res.detected_count = record.detected_count;
    res.pns_flag = pns_insecurity_check(record.multi_photon_sent, record.detected_count);

    const SiftResult sifted = sift(record);
    res.n_sifted = sifted.alice.bits.size();
    res.sift_fraction = sifted.sifted_fraction;
    res.qber_truth = sifted.alice.qber_truth;

    if (cfg.session.protocol == ProtocolId::Ekert) {
        try {
            res.chsh = chsh_statistic(record);
            res.have_chsh = true;
        } catch (const estimation_error&) {
            res.have_chsh = false;
        }
    }

    if (cfg.attack.delayed_readout && cfg.attack.kind != AttackKind::None) {
        res.eve_summary = delayed_eve_summary(record, sifted);
        res.have_eve_summary = true;
    }

    {
        std::ostringstream os;
        os << header;
        os << "n_sifted = " << res.n_sifted << "\n";
        os << "sift_fraction = " << detail::fmt_double(res.sift_fraction) << "\n";
        os << "oracle_qber_truth = " << detail::fmt_double(res.qber_truth) << "\n";
        os << "alice = " << detail::bits_to_01(sifted.alice.bits) << "\n";
        os << "bob = " << detail::bits_to_01(sifted.bob.bits) << "\n";
        res.artifacts["sifted_keys.txt"] = os.str();
    }

    auto finish = [&](int code, const std::string& status) -> PipelineResult& {
        res.exit_code = code;
        res.status = status;
        res.artifacts["summary.txt"] = header + detail::summary_body(cfg, res);
        std::ostringstream lk;
        lk << header;
        lk << "estimation_bits_disclosed = " << res.leakage.estimation_bits_disclosed << "\n";
        lk << "parity_bits_disclosed = " << res.leakage.parity_bits_disclosed << "\n";
        lk << "verification_hash_bits = " << res.leakage.verification_hash_bits << "\n";
        lk << "auth_tag_bits = " << res.leakage.auth_tag_bits << "\n";
        lk << "auth_key_bits_consumed = " << res.leakage.auth_key_bits_consumed << "\n";
        lk << "total_disclosed = " << res.leakage.total_disclosed() << "\n";
        res.artifacts["leakage.txt"] = lk.str();
        return res;
    };

    if (res.n_sifted < 100) return finish(kExitConfig, "too-few-sifted-bits");

    Rng post_rng = Rng(cfg.session.seed).child(0x504F5354);
    QberEstimate est;
    try {
        est = estimate_qber(sifted.alice, sifted.bob, cfg.postproc.sample_fraction, post_rng);
    } catch (const estimation_error&) {
        return finish(kExitConfig, "estimation-sample-too-small");
    }
    res.e_hat = est.e_hat;
    res.leakage.estimation_bits_disclosed = est.disclosed_bits;

    std::optional<Tau1Curve> curve;
    if (table) curve = *table;
    else if (cfg.session.protocol == ProtocolId::BB84) curve = Tau1Curve::closed_form_bb84();

    if (curve) {
        try {
            res.cutoff = find_tolerable_error(*curve);
            res.have_cutoff = true;
        } catch (const no_root_error&) {
            res.have_cutoff = false;
        }
    }

    if (res.have_cutoff && res.e_hat > res.cutoff) {
        if (!override_insecure) return finish(kExitInsecureAbort, "aborted-insecure");
        res.status = "INSECURE-OVERRIDE";
    }

    // Reconciliation is specified for e_hat <= 0.25 only.
    if (res.e_hat > 0.25) return finish(kExitInsecureAbort, "aborted-error-rate-unprocessable");

    CascadeOptions cascade;
    cascade.verify_bits = cfg.postproc.verify_bits;
    ReconcileResult rec;
    try {
        rec = error_correct(est.alice_remaining.bits, est.bob_remaining.bits, res.e_hat,
                            post_rng, cascade);
    } catch (const reconciliation_error&) {
        return finish(kExitReconcileFail, "reconciliation-failed");
    }
    res.n_rec = rec.alice.n_rec;
    res.leakage.parity_bits_disclosed = rec.leakage.parity_bits_disclosed;
    res.leakage.verification_hash_bits = rec.leakage.verification_hash_bits;

    {
        std::ostringstream os;
        os << header;
        os << "n_rec = " << rec.alice.n_rec << "\n";
        os << "leaked_bits = " << rec.alice.leaked_bits << "\n";
        os << "residual_mismatch_prob = "
           << detail::fmt_double(rec.alice.residual_mismatch_prob) << "\n";
        os << "bits = " << detail::bits_to_01(rec.alice.bits) << "\n";
        res.artifacts["reconciled_key.txt"] = os.str();
    }

    // Authenticate the reconciliation digests in both directions from the
    // pre-shared reservoir; tags are public, key bits are consumed once.
    Rng auth_rng = Rng(cfg.session.seed).child(0x41555448);
    KeyReservoir reservoir_alice = KeyReservoir::random(cfg.postproc.preshared_bits, auth_rng);
    KeyReservoir reservoir_bob = reservoir_alice;
    const std::uint64_t rec_hash = fnv1a(detail::bits_to_01(rec.alice.bits));
    std::string tag_a_hex, tag_b_hex;
    try {
        const std::string msg_a = "alice-digest e_hat=" + detail::fmt_double(res.e_hat) +
                                  " n_rec=" + std::to_string(res.n_rec) +
                                  " rec_hash=" + to_hex(rec_hash);
        const std::string msg_b = "bob-digest e_hat=" + detail::fmt_double(res.e_hat) +
                                  " n_rec=" + std::to_string(res.n_rec) +
                                  " rec_hash=" + to_hex(rec_hash);
        const std::span<const std::uint8_t> msg_a_bytes(
            reinterpret_cast<const std::uint8_t*>(msg_a.data()), msg_a.size());
        const std::span<const std::uint8_t> msg_b_bytes(
            reinterpret_cast<const std::uint8_t*>(msg_b.data()), msg_b.size());
        const AuthTag tag_a = authenticate(msg_a_bytes, reservoir_alice, cfg.postproc.tag_width);
        if (!verify(msg_a_bytes, tag_a, reservoir_bob))
            throw contract_error("authentication self-check failed");
        const AuthTag tag_b = authenticate(msg_b_bytes, reservoir_bob, cfg.postproc.tag_width);
        if (!verify(msg_b_bytes, tag_b, reservoir_alice))
            throw contract_error("authentication self-check failed");
        res.leakage.auth_tag_bits = tag_a.width + tag_b.width;
        res.leakage.auth_key_bits_consumed = tag_a.key_bits_consumed + tag_b.key_bits_consumed;
        tag_a_hex = to_hex(tag_a.tag);
        tag_b_hex = to_hex(tag_b.tag);
    } catch (const auth_unavailable_error&) {
        return finish(kExitConfig, "auth-unavailable");
    }

    if (!curve) {
        res.pa_note = "no tau1 source for protocol " +
                      std::string(to_string(cfg.session.protocol)) +
                      "; supply --tau1-table to enable privacy amplification";
        return finish(kExitOk, res.status);
    }

    double tau1_val = 0.0;
    try {
        tau1_val = (*curve)(res.e_hat);
    } catch (const std::domain_error&) {
        return finish(kExitConfig, "tau1-table-domain-error");
    }
    res.tau1_at_e_hat = tau1_val;

    FinalKey fin;
    try {
        fin = privacy_amplify(rec.alice, tau1_val, cfg.postproc.n_s, post_rng);
    } catch (const key_exhausted_error&) {
        return finish(kExitConfig, "key-exhausted");
    }
    res.pa_performed = true;
    res.n_fin = fin.n_fin;
    res.eve_info_bound = fin.eve_info_bound;

    const std::uint64_t classical_cost =
        res.leakage.parity_bits_disclosed + res.leakage.verification_hash_bits;
    std::uint64_t emitted = fin.n_fin;
    if (!cfg.postproc.encrypt_parities) {
        // Plain parity disclosure: shorten the final key by every disclosed
        // reconciliation bit. A prefix of the hashed output is itself a
        // random-subset hash of the smaller length.
        if (fin.n_fin <= classical_cost) return finish(kExitConfig, "key-exhausted");
        emitted = fin.n_fin - classical_cost;
        fin.bits.resize(emitted);
    }
    res.emitted_bits = emitted;
    res.net_new_secret_bits =
        static_cast<long long>(emitted) -
        static_cast<long long>(res.leakage.auth_key_bits_consumed) -
        static_cast<long long>(cfg.postproc.encrypt_parities ? classical_cost : 0);

    res.statement.i_e_tol = fin.eve_info_bound;
    res.statement.alpha = 0.0;  // within the individual-attack model
    res.statement.beta = rec.alice.residual_mismatch_prob;

    {
        std::ostringstream os;
        os << header;
        if (res.status == "INSECURE-OVERRIDE") os << "# INSECURE\n";
        os << "# n_fin " << fin.n_fin << "\n";
        os << "# n_s " << fin.n_s << "\n";
        os << "# tau1 " << detail::fmt_double(fin.tau1) << "\n";
        os << "# eve_info_bound " << detail::fmt_double(fin.eve_info_bound) << "\n";
        os << "# emitted_bits " << emitted << "\n";
        os << "# auth_tag_alice " << tag_a_hex << "\n";
        os << "# auth_tag_bob " << tag_b_hex << "\n";
        os << bits_to_hex(fin.bits) << "\n";
        res.artifacts["final_key.hex"] = os.str();
        std::ostringstream ob;
        ob << header << detail::bits_to_01(fin.bits) << "\n";
        res.artifacts["final_key.bits"] = ob.str();
    }

    return finish(res.exit_code, res.status);
}

namespace detail {

inline std::optional<std::uint64_t> env_seed() {
    if (const char* env = std::getenv("QKDLAB_SEED")) {
        try {
            return std::stoull(env);
        } catch (const std::exception&) {
            throw config_error("QKDLAB_SEED is not a valid integer");
        }
    }
    return std::nullopt;
}

inline void write_artifacts(const std::string& out_dir,
                            const std::map<std::string, std::string>& artifacts) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    for (const auto& [name, content] : artifacts) {
        std::ofstream f(fs::path(out_dir) / name, std::ios::binary);
        if (!f) throw config_error("cannot write artifact " + name + " under " + out_dir);
        f << content;
    }
}

}  // namespace detail

// `simulate`: run one session plus the post-processing chain and write all
// artifacts under the output directory.
inline int cmd_simulate(const RunManifest& manifest, std::ostream& diag) {
    LabConfig cfg;
    std::optional<Tau1Curve> table;
    try {
        cfg = load_config_file(manifest.config_path);
        if (manifest.protocol_override)
            cfg.session.protocol = protocol_from_string(*manifest.protocol_override);
        if (manifest.seed_override) {
            cfg.session.seed = *manifest.seed_override;
        } else if (!cfg.seed_present) {
            if (const auto env = detail::env_seed()) cfg.session.seed = *env;
            else throw config_error("no seed: use --seed, session.seed or QKDLAB_SEED");
        }
        if (manifest.tau1_table_path) {
            std::ifstream f(*manifest.tau1_table_path);
            if (!f) throw config_error("cannot open tau1 table " + *manifest.tau1_table_path);
            table = Tau1Curve::load(f);
        }
    } catch (const std::exception& e) {
        diag << "config error: " << e.what() << "\n";
        return kExitConfig;
    }

    PipelineResult res;
    try {
        res = run_pipeline(cfg, table, manifest.override_insecure);
    } catch (const config_error& e) {
        diag << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        diag << "error: " << e.what() << "\n";
        return kExitConfig;
    }
    try {
        detail::write_artifacts(manifest.out_dir, res.artifacts);
    } catch (const std::exception& e) {
        diag << "output error: " << e.what() << "\n";
        return kExitConfig;
    }
    diag << "status: " << res.status << "\n";
    diag << "qber e_hat = " << detail::fmt_double(res.e_hat)
         << ", sift fraction = " << detail::fmt_double(res.sift_fraction)
         << ", n_fin = " << res.n_fin << ", pns = " << to_string(res.pns_flag) << "\n";
    return res.exit_code;
}

// `rates`: evaluate the closed-form security arithmetic over an error grid
// and export the curve table with the tolerable-error root in the footer.
inline int cmd_rates(const RunManifest& manifest, std::ostream& diag) {
    try {
        RatesConfig grid_cfg;
        ProtocolId protocol = ProtocolId::BB84;
        bool have_protocol = false;
        std::uint64_t seed = 0;
        if (!manifest.config_path.empty()) {
            const LabConfig cfg = load_config_file(manifest.config_path);
            grid_cfg = cfg.rates;
            protocol = cfg.session.protocol;
            have_protocol = true;
            seed = cfg.session.seed;
        }
        if (manifest.protocol_override) {
            protocol = protocol_from_string(*manifest.protocol_override);
            have_protocol = true;
        }
        if (!have_protocol)
            throw config_error("rates: specify --protocol or provide a config file");
        if (manifest.seed_override) seed = *manifest.seed_override;

        std::optional<Tau1Curve> curve;
        if (manifest.tau1_table_path) {
            std::ifstream f(*manifest.tau1_table_path);
            if (!f) throw config_error("cannot open tau1 table " + *manifest.tau1_table_path);
            curve = Tau1Curve::load(f);
        } else if (protocol == ProtocolId::BB84) {
            curve = Tau1Curve::closed_form_bb84();
        } else {
            throw config_error(std::string("rates: no built-in tau1 curve for ") +
                               to_string(protocol) +
                               "; supply the tabulated curve via --tau1-table");
        }

        if (!(grid_cfg.grid_step > 0.0))
            throw config_error("rates: grid_step must be positive");
        std::vector<double> grid;
        const double lo = std::max(grid_cfg.grid_min, curve->e_min());
        const double hi = std::min(grid_cfg.grid_max, curve->e_max());
        for (double e = lo; e <= hi + 1e-12; e += grid_cfg.grid_step) grid.push_back(e);
        if (grid.empty()) throw config_error("rates: empty grid after domain clipping");

        const RateCurve rc = build_rate_curve(protocol, *curve, grid);
        std::ostringstream os;
        os << detail::artifact_header(
            seed, to_hex(fnv1a(std::string(to_string(protocol)) + "/" +
                               to_string(curve->source()))));
        os << "# protocol " << to_string(protocol) << "\n";
        os << "# tau1_source " << to_string(curve->source()) << "\n";
        export_curve(rc, os);
        std::string root_note;
        try {
            const double root = find_tolerable_error(*curve);
            root_note = detail::fmt_double(root);
        } catch (const no_root_error&) {
            root_note = "none";
        }
        os << "# tolerable_error_root=" << root_note << "\n";

        namespace fs = std::filesystem;
        fs::create_directories(manifest.out_dir);
        const std::string filename = std::string("rates_") + to_string(protocol) + ".csv";
        std::ofstream f(fs::path(manifest.out_dir) / filename, std::ios::binary);
        if (!f) throw config_error("cannot write " + filename);
        f << os.str();
        diag << "wrote " << filename << "; tolerable_error_root=" << root_note << "\n";
        return kExitOk;
    } catch (const std::exception& e) {
        diag << "config error: " << e.what() << "\n";
        return kExitConfig;
    }
}

// `verify-transcript`: replay the embedded (config, seed) and compare byte
// for byte against the stored transcript.
inline int cmd_verify_transcript(const std::string& path, std::ostream& diag) {
    std::string text;
    try {
        std::ifstream f(path, std::ios::binary);
        if (!f) throw config_error("cannot open transcript " + path);
        std::ostringstream buf;
        buf << f.rdbuf();
        text = buf.str();
    } catch (const std::exception& e) {
        diag << "error: " << e.what() << "\n";
        return kExitConfig;
    }
    try {
        const VerifyResult vr = verify_transcript_text(text);
        diag << vr.detail << "\n";
        return vr.ok ? kExitOk : kExitVerifyMismatch;
    } catch (const std::exception& e) {
        diag << "transcript parse error: " << e.what() << "\n";
        return kExitConfig;
    }
}

}  // namespace qkd
