// Acceptance suite: one line per criterion, nonzero exit on any failure.
// Table-conditional criteria are reported as SKIP with an explicit notice
// when no curve file is supplied (QKDLAB_TAU1_B92 / QKDLAB_TAU1_SIXSTATE or
// data/tau1_b92.csv / data/tau1_sixstate.csv).

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "qkd/analytics.hpp"
#include "qkd/cli.hpp"
#include "qkd/postproc.hpp"
#include "qkd/protocols.hpp"

using namespace qkd;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

void report(int criterion, const char* name, bool pass, const std::string& detail) {
    std::printf("%s criterion %d (%s): %s\n", pass ? "PASS" : "FAIL", criterion, name,
                detail.c_str());
    if (!pass) ++g_failures;
}

void report_skip(int criterion, const char* name, const std::string& notice) {
    std::printf("SKIP criterion %d (%s): %s\n", criterion, name, notice.c_str());
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, ...) {
    char buf[512];
    va_list ap;
    va_start(ap, f);
    std::vsnprintf(buf, sizeof buf, f, ap);
    va_end(ap);
    return buf;
}

SessionConfig session(ProtocolId proto, std::uint64_t n, std::uint64_t seed) {
    SessionConfig cfg;
    cfg.protocol = proto;
    cfg.n_signals = n;
    cfg.seed = seed;
    return cfg;
}

AttackModel full_intercept(bool delayed) {
    AttackModel atk;
    atk.kind = AttackKind::InterceptResend;
    atk.fraction = 1.0;
    atk.delayed_readout = delayed;
    return atk;
}

std::optional<std::string> table_path(const char* env_name, const char* fallback) {
    if (const char* env = std::getenv(env_name)) return std::string(env);
    if (fs::exists(fallback)) return std::string(fallback);
    return std::nullopt;
}

void criterion_1_and_2() {
    const auto t0 = std::chrono::steady_clock::now();
    const SessionRecord rec =
        run_session(session(ProtocolId::BB84, 100000, 20260801), {}, full_intercept(true));
    const SiftResult s = sift(rec);
    const double qber = s.alice.qber_truth;
    const double elapsed = seconds_since(t0);
    report(1, "intercept-resend QBER", qber >= 0.24 && qber <= 0.26 && elapsed < 10.0,
           fmt("sifted QBER %.4f in [0.24, 0.26], %.2fs < 10s", qber, elapsed));

    const EveInfoSummary eve = delayed_eve_summary(rec, s);
    const double matched = eve.matched_fraction();
    const double cond = eve.conditional_correctness();
    const double bits = eve.bits_per_sifted_bit();
    report(2, "0.5 bit delayed-readout information",
           matched >= 0.49 && matched <= 0.51 && cond == 1.0 && std::abs(bits - 0.5) <= 0.01,
           fmt("matched-basis fraction %.4f in [0.49, 0.51], conditional correctness %.1f "
               "== 1.0, %.4f bit per sifted bit",
               matched, cond, bits));
}

void criterion_3() {
    const SiftResult bb84 = sift(run_session(session(ProtocolId::BB84, 100000, 31), {}, {}));
    const SiftResult six = sift(run_session(session(ProtocolId::SixState, 100000, 32), {}, {}));
    const bool ok = std::abs(bb84.sifted_fraction - 0.5) <= 0.01 &&
                    std::abs(six.sifted_fraction - 1.0 / 3.0) <= 0.01;
    report(3, "sift fractions", ok,
           fmt("BB84 %.4f (0.5 +- 0.01), six-state %.4f (0.3333 +- 0.01)",
               bb84.sifted_fraction, six.sifted_fraction));
}

void criterion_4() {
    const double bb84_root = find_tolerable_error(Tau1Curve::closed_form_bb84());
    report(4, "BB84 tolerable error root", bb84_root >= 0.10 && bb84_root <= 0.11,
           fmt("root %.5f in [0.10, 0.11]", bb84_root));

    const auto check_table = [&](const char* env, const char* fallback, const char* label,
                                 double target) {
        if (const auto path = table_path(env, fallback)) {
            try {
                std::ifstream f(*path);
                const double root = find_tolerable_error(Tau1Curve::load(f));
                report(4, label, std::abs(root - target) <= 0.005,
                       fmt("root %.5f within %.3f +- 0.005 (table %s)", root, target,
                           path->c_str()));
            } catch (const std::exception& e) {
                report(4, label, false, std::string("table error: ") + e.what());
            }
        } else {
            report_skip(4, label,
                        fmt("no tau1 table supplied (set %s or provide %s); "
                            "table-conditional criterion not evaluated",
                            env, fallback));
        }
    };
    check_table("QKDLAB_TAU1_B92", "data/tau1_b92.csv", "B92 tolerable error root", 0.04);
    check_table("QKDLAB_TAU1_SIXSTATE", "data/tau1_sixstate.csv",
                "six-state tolerable error root", 0.12);
}

void criterion_5() {
    const bool exact = binary_information(0.0) == 1.0 && binary_information(0.5) == 0.0;
    double worst = 0.0;
    for (int i = 0; i <= 50; ++i) {
        const double e = 0.5 * i / 50.0;
        DiscreteChannelModel m;
        m.prior = {0.5, 0.5};
        m.outcome_weights = {0.5, 0.5};
        m.posteriors = {{1.0 - e, e}, {e, 1.0 - e}};
        worst = std::max(worst, std::abs(shannon_information(m) - binary_information(e)));
    }
    report(5, "Shannon formulas", exact && worst <= 1e-9,
           fmt("I[0]=1 and I[0.5]=0 exact; max |general - binary| over 50 points = %.2e <= "
               "1e-9",
               worst));
}

void criterion_6() {
    const auto t0 = std::chrono::steady_clock::now();
    const std::size_t n = 10000;
    // -n (e log2 e + (1-e) log2(1-e)) evaluated independently at high precision
    const struct { double e; double bound; } cases[] = {{0.01, 807.9313589591117},
                                                        {0.03, 1943.9185783157616},
                                                        {0.05, 2863.9695711595613},
                                                        {0.10, 4689.9559358928122}};
    bool ok = true;
    std::string detail;
    Rng rng(606060);
    for (const auto& c : cases) {
        int successes = 0;
        double leaked_sum = 0.0;
        for (int trial = 0; trial < 100; ++trial) {
            std::vector<std::uint8_t> alice(n);
            for (auto& b : alice) b = static_cast<std::uint8_t>(rng.bit());
            auto bob = alice;
            for (auto idx : rng.sample_without_replacement(n, std::size_t(c.e * n)))
                bob[idx] ^= 1;
            try {
                const ReconcileResult r = error_correct(alice, bob, c.e, rng);
                if (r.bob.bits == alice) {
                    ++successes;
                    leaked_sum += double(r.alice.leaked_bits);
                }
            } catch (const reconciliation_error&) {
            }
        }
        const double mean_leak = leaked_sum / std::max(successes, 1);
        const double ratio = mean_leak / c.bound;
        ok = ok && successes >= 99 && mean_leak <= 1.25 * c.bound;
        detail += fmt("e=%.2f: %d/100 ok, mean leak %.0f = %.3fx bound; ", c.e, successes,
                      mean_leak, ratio);
    }
    const double elapsed = seconds_since(t0);
    ok = ok && elapsed < 60.0;
    report(6, "error-correction efficiency", ok, detail + fmt("%.1fs < 60s", elapsed));
}

void criterion_7() {
    Rng rng(707070);
    bool formula_ok = true, bound_ok = true;
    for (int i = 0; i < 1000; ++i) {
        const std::uint64_t n_rec = 2 + rng.below(3000);
        const double tau1 = rng.uniform();
        const std::uint64_t n_s = rng.below(60);
        ReconciledKey key{std::vector<std::uint8_t>(n_rec, 1), n_rec, 0, 0.0};
        const double shrunk = std::floor((1.0 - tau1) * double(n_rec));
        if (shrunk - double(n_s) < 1.0) {
            try {
                privacy_amplify(key, tau1, n_s, rng);
                formula_ok = false;
            } catch (const key_exhausted_error&) {
            }
            continue;
        }
        const FinalKey fin = privacy_amplify(key, tau1, n_s, rng);
        if (fin.n_fin != static_cast<std::uint64_t>(shrunk) - n_s) formula_ok = false;
        if (fin.bits.size() != fin.n_fin) formula_ok = false;
        const double reference = std::log2(std::exp2(-double(n_s)) + 1.0);
        if (std::abs(fin.eve_info_bound - reference) > 1e-12) bound_ok = false;
    }

    std::vector<std::uint8_t> bits(100000);
    for (auto& b : bits) b = static_cast<std::uint8_t>(rng.bit());
    ReconciledKey big{std::move(bits), 100000, 0, 0.0};
    const FinalKey fin = privacy_amplify(big, 0.0, 0, rng);
    std::size_t ones = 0;
    for (auto b : fin.bits) ones += b;
    const double freq = double(ones) / double(fin.n_fin);
    const double band = 4.0 * std::sqrt(0.25 / double(fin.n_fin));
    const bool freq_ok = std::abs(freq - 0.5) <= band;
    report(7, "privacy amplification", formula_ok && bound_ok && freq_ok,
           fmt("length formula exact on 1000 draws; bound matches log2(2^-nS+1) to 1e-12; "
               "frequency %.5f within 0.5 +- %.5f on 1e5 bits",
               freq, band));
}

void criterion_8() {
    const SessionRecord ideal = run_session(session(ProtocolId::Ekert, 30000, 81), {}, {});
    std::uint64_t mismatched = 0;
    for (const auto& row : ideal.rows)
        if (row.alice_direction_deg != row.bob_direction_deg) ++mismatched;
    const double s_ideal = chsh_statistic(ideal);
    const SessionRecord attacked =
        run_session(session(ProtocolId::Ekert, 30000, 82), {}, full_intercept(false));
    const double s_attacked = chsh_statistic(attacked);
    report(8, "CHSH",
           mismatched >= 10000 && s_ideal >= 2.75 && s_ideal <= 2.90 && s_attacked <= 2.05,
           fmt("ideal S %.4f in [2.75, 2.90] (%llu mismatched pairs), intercepted S %.4f <= "
               "2.05",
               s_ideal, static_cast<unsigned long long>(mismatched), s_attacked));
}

void criterion_9() {
    const SessionRecord rec = run_session(session(ProtocolId::B92, 1000000, 91), {}, {});
    const SiftResult s = sift(rec);
    std::uint64_t wrong = 0;
    for (std::size_t i = 0; i < s.alice.bits.size(); ++i)
        if (s.alice.bits[i] != s.bob.bits[i]) ++wrong;
    report(9, "B92 conclusive rate",
           std::abs(s.sifted_fraction - 0.293) <= 0.01 && wrong == 0,
           fmt("conclusive fraction %.4f within 0.293 +- 0.01; %llu conclusive-wrong events "
               "over 1e6 signals",
               s.sifted_fraction, static_cast<unsigned long long>(wrong)));
}

void criterion_10() {
    SessionConfig cfg = session(ProtocolId::BB84, 1000000, 1001);
    cfg.exact_single_photon = false;
    cfg.source_mu = 0.1;
    const SessionRecord rec = run_session(cfg, {}, {});
    const std::uint64_t multi = rec.multi_photon_sent;
    const bool ok = multi > 3000 &&
                    pns_insecurity_check(multi, multi - 1) == SecurityFlag::Insecure &&
                    pns_insecurity_check(multi, multi + 1) == SecurityFlag::NotDecided &&
                    pns_insecurity_check(0, 0) == SecurityFlag::NotDecided;
    report(10, "PNS insecurity flag", ok,
           fmt("mu=0.1, n=1e6: %llu multi-photon pulses; received=multi-1 -> INSECURE, "
               "received=multi+1 -> NOT-DECIDED; single-photon source -> NOT-DECIDED",
               static_cast<unsigned long long>(multi)));
}

void criterion_11() {
    // Matched-basis QBER of the depolarizing channel is d/2.
    const auto config_at = [](double depolarize, std::uint64_t seed) {
        std::string text = "[session]\nprotocol = bb84\nn_signals = 60000\nseed = " +
                           std::to_string(seed) + "\n[channel]\ndepolarize_prob = " +
                           std::to_string(depolarize) + "\n[attack]\nkind = none\n";
        return parse_config_text(text);
    };
    const PipelineResult good = run_pipeline(config_at(0.10, 111), std::nullopt, false);
    const PipelineResult bad = run_pipeline(config_at(0.26, 112), std::nullopt, false);
    const bool ok = good.exit_code == kExitOk && good.pa_performed &&
                    good.net_new_secret_bits > 0 && bad.exit_code == kExitInsecureAbort &&
                    bad.status == "aborted-insecure";
    report(11, "end-to-end consistency", ok,
           fmt("QBER %.4f -> net %+lld secret bits (exit %d); QBER %.4f -> %s (exit %d)",
               good.e_hat, good.net_new_secret_bits, good.exit_code, bad.e_hat,
               bad.status.c_str(), bad.exit_code));
}

}  // namespace

int main() {
    criterion_1_and_2();
    criterion_3();
    criterion_4();
    criterion_5();
    criterion_6();
    criterion_7();
    criterion_8();
    criterion_9();
    criterion_10();
    criterion_11();
    std::printf("%s: %d criterion failure(s)\n", g_failures == 0 ? "ACCEPTANCE PASS" : "ACCEPTANCE FAIL",
                g_failures);
    return g_failures;
}
