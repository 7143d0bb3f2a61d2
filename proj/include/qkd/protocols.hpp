#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <string>
#include <vector>

#include "qkd/channel.hpp"
#include "qkd/errors.hpp"
#include "qkd/qstate.hpp"
#include "qkd/rng.hpp"

namespace qkd {

enum class ProtocolId : std::uint8_t {
    BB84 = 0,
    B92 = 1,
    FourPlusTwo = 2,
    SixState = 3,
    Ekert = 4,
    GV = 5,
    KoashiImoto = 6,
};

inline const char* to_string(ProtocolId p) {
    switch (p) {
        case ProtocolId::BB84: return "bb84";
        case ProtocolId::B92: return "b92";
        case ProtocolId::FourPlusTwo: return "four-plus-two";
        case ProtocolId::SixState: return "six-state";
        case ProtocolId::Ekert: return "ekert";
        case ProtocolId::GV: return "gv";
        case ProtocolId::KoashiImoto: return "koashi-imoto";
    }
    return "?";
}

inline ProtocolId protocol_from_string(const std::string& s) {
    if (s == "bb84") return ProtocolId::BB84;
    if (s == "b92") return ProtocolId::B92;
    if (s == "four-plus-two" || s == "4+2") return ProtocolId::FourPlusTwo;
    if (s == "six-state") return ProtocolId::SixState;
    if (s == "ekert") return ProtocolId::Ekert;
    if (s == "gv") return ProtocolId::GV;
    if (s == "koashi-imoto" || s == "ki") return ProtocolId::KoashiImoto;
    throw config_error("unknown protocol: " + s);
}

struct SessionConfig {
    ProtocolId protocol = ProtocolId::BB84;
    std::uint64_t n_signals = 0;
    bool exact_single_photon = true;
    double source_mu = 0.1;           // Poisson mean, used when !exact_single_photon
    double b92_overlap = 1.0 / std::numbers::sqrt2;  // |<u0|u1>| for B92 / 4+2
    double ki_reflectivity = 0.5;     // R in (0,1); T = 1 - R
    bool random_send_times = true;    // GV only
    std::uint64_t seed = 0;

    void validate() const {
        if (n_signals < 1) throw config_error("SessionConfig: n_signals must be >= 1");
        if (!exact_single_photon && !(source_mu >= 0.0))
            throw config_error("SessionConfig: source_mu must be >= 0");
        if (protocol == ProtocolId::B92 || protocol == ProtocolId::FourPlusTwo) {
            if (!(b92_overlap >= 0.0 && b92_overlap < 1.0))
                throw config_error("SessionConfig: b92_overlap must lie in [0,1)");
        }
        if (protocol == ProtocolId::KoashiImoto) {
            if (!(ki_reflectivity > 0.0 && ki_reflectivity < 1.0))
                throw config_error(
                    "SessionConfig: ki_reflectivity must lie strictly in (0,1)");
        }
    }
};

enum class BobOutcome : std::uint8_t { Zero = 0, One = 1, Inconclusive = 2, NoDetection = 3 };

inline bool is_bit(BobOutcome o) { return o == BobOutcome::Zero || o == BobOutcome::One; }

inline const char* to_string(BobOutcome o) {
    switch (o) {
        case BobOutcome::Zero: return "0";
        case BobOutcome::One: return "1";
        case BobOutcome::Inconclusive: return "inc";
        case BobOutcome::NoDetection: return "nodet";
    }
    return "?";
}

// One transmitted signal, as recorded in the session transcript. Basis-coded
// protocols fill alice_basis/bob_basis; the Ekert rows carry Bloch directions
// in degrees instead; GV and Koashi/Imoto have a fixed encoding and use
// neither.
struct SignalRow {
    std::uint64_t index = 0;
    int alice_bit = 0;
    Basis alice_basis = Basis::Z;
    Basis bob_basis = Basis::Z;
    double alice_direction_deg = 0.0;
    double bob_direction_deg = 0.0;
    std::uint64_t photons_sent = 1;
    std::int64_t send_bin = 0;  // GV: randomized send slot; packet b lags one bin
    bool eve_attacked = false;
    int eve_basis = -1;    // static_cast<int>(Basis), -1 when not attacked
    int eve_outcome = -1;  // -1: none or PNS copy still unmeasured
    bool eve_split = false;
    ArrivalKind arrival = ArrivalKind::NoClick;
    BobOutcome outcome = BobOutcome::NoDetection;
};

// Complete transcript of one key-exchange run. Rows are append-only during
// the run and immutable afterwards.
struct SessionRecord {
    SessionConfig config;
    ChannelParams channel;
    AttackModel attack;  // with the resolved eve_basis_set
    std::vector<SignalRow> rows;
    EveTranscript eve;
    std::uint64_t multi_photon_sent = 0;
    std::uint64_t detected_count = 0;
};

struct SiftedKey {
    std::vector<std::uint8_t> bits;
    std::vector<std::uint64_t> positions;  // strictly increasing indices into rows
    double qber_truth = 0.0;  // oracle-only: Alice/Bob mismatch fraction
};

struct SiftResult {
    SiftedKey alice;
    SiftedKey bob;
    double sifted_fraction = 0.0;
};

// Two-time-bin signal state of the asymmetric-interferometer protocol over
// the wavepacket modes {|a>,|b>}: bit 0 -> -i sqrt(R)|a> + sqrt(T)|b>,
// bit 1 -> sqrt(T)|a> - i sqrt(R)|b>. Orthogonal for every R; R = T = 1/2
// reduces to the equal-amplitude states up to a global phase.
inline QubitState ki_prepare(int bit, double reflectivity) {
    if (bit != 0 && bit != 1) throw contract_error("ki_prepare: bit must be 0 or 1");
    if (!(reflectivity > 0.0 && reflectivity < 1.0))
        throw config_error("ki_prepare: reflectivity must lie strictly in (0,1)");
    const double r = std::sqrt(reflectivity);
    const double t = std::sqrt(1.0 - reflectivity);
    if (bit == 0) return QubitState(cplx(0.0, -r), cplx(t, 0.0));
    return QubitState(cplx(t, 0.0), cplx(0.0, -r));
}

// Equal-amplitude wavepacket superpositions (|a> +- |b>)/sqrt2.
inline QubitState gv_prepare(int bit) { return prepare(Basis::X, bit); }

namespace detail {

inline const std::array<double, 3> kEkertAliceDirs{0.0, 45.0, 90.0};
inline const std::array<double, 3> kEkertBobDirs{45.0, 90.0, 135.0};
inline constexpr int kGvTimingWindow = 16;

inline std::vector<Basis> default_eve_bases(ProtocolId p) {
    if (p == ProtocolId::SixState) return {Basis::Z, Basis::X, Basis::Y};
    return {Basis::Z, Basis::X};
}

inline double basis_direction_deg(Basis b) {
    switch (b) {
        case Basis::Z: return 0.0;
        case Basis::X: return 90.0;
        default:
            throw config_error("Ekert interception: Eve's basis set must avoid Y "
                               "(off the protocol's great circle)");
    }
}

// B92 / 4+2 signal pair with overlap s, centered on Bloch angle `center`:
// bit 0 at center+gamma, bit 1 at center-gamma, cos(gamma) = s.
struct UsdPair {
    QubitState u0;
    QubitState u1;
};

inline UsdPair usd_pair(double overlap_s, double center_deg) {
    const double gamma_deg = std::acos(overlap_s) * 180.0 / std::numbers::pi;
    return {direction_state({center_deg + gamma_deg}),
            direction_state({center_deg - gamma_deg})};
}

inline std::uint64_t draw_photons(const SessionConfig& cfg, Rng& rng) {
    return cfg.exact_single_photon ? 1 : sample_photon_number(cfg.source_mu, rng);
}

}  // namespace detail

// Run one complete key-exchange session. Alice's bits and encoding choices
// are uniform i.i.d., as are Bob's; every random draw comes from one stream
// seeded by config.seed, so transcripts are reproducible bit for bit.
inline SessionRecord run_session(const SessionConfig& config, const ChannelParams& channel,
                                 const AttackModel& attack) {
    config.validate();
    channel.validate();
    attack.validate();

    const ProtocolId proto = config.protocol;
    const bool prepare_and_send =
        proto == ProtocolId::BB84 || proto == ProtocolId::B92 ||
        proto == ProtocolId::FourPlusTwo || proto == ProtocolId::SixState;

    if (attack.kind == AttackKind::InterceptResend &&
        (proto == ProtocolId::GV || proto == ProtocolId::KoashiImoto)) {
        throw config_error("intercept-resend is not modeled for time-separated "
                           "protocols (gv, koashi-imoto)");
    }
    if (attack.kind == AttackKind::PnsSplit && !prepare_and_send) {
        throw config_error("pns-split applies only to prepare-and-send pulse protocols");
    }

    SessionRecord record;
    record.config = config;
    record.channel = channel;
    record.attack = attack;
    if (record.attack.eve_basis_set.empty())
        record.attack.eve_basis_set = detail::default_eve_bases(proto);
    if (attack.kind == AttackKind::InterceptResend && proto == ProtocolId::Ekert) {
        for (Basis b : record.attack.eve_basis_set) detail::basis_direction_deg(b);
    }
    record.rows.reserve(config.n_signals);

    Rng rng(config.seed);

    const std::vector<Basis> protocol_bases =
        proto == ProtocolId::SixState ? std::vector<Basis>{Basis::Z, Basis::X, Basis::Y}
                                      : std::vector<Basis>{Basis::Z, Basis::X};
    const detail::UsdPair b92_states = detail::usd_pair(config.b92_overlap, 0.0);
    const std::array<detail::UsdPair, 2> fpt_states{
        detail::usd_pair(config.b92_overlap, 0.0),
        detail::usd_pair(config.b92_overlap, 90.0)};
    const QubitState psi0 = proto == ProtocolId::KoashiImoto
                                ? ki_prepare(0, config.ki_reflectivity)
                                : gv_prepare(0);
    const QubitState psi1 = proto == ProtocolId::KoashiImoto
                                ? ki_prepare(1, config.ki_reflectivity)
                                : gv_prepare(1);

    for (std::uint64_t i = 0; i < config.n_signals; ++i) {
        SignalRow row;
        row.index = i;
        row.alice_bit = rng.bit();

        if (proto == ProtocolId::Ekert) {
            // Entangled pair; the channel and Eve act on Bob's half only.
            row.alice_direction_deg = detail::kEkertAliceDirs[rng.index(3)];
            row.bob_direction_deg = detail::kEkertBobDirs[rng.index(3)];
            row.photons_sent = 1;
            SingletPair pair;
            const bool attacked = attack.kind == AttackKind::InterceptResend &&
                                  rng.bernoulli(attack.fraction);
            if (attacked) {
                const Basis eb =
                    record.attack.eve_basis_set[rng.index(record.attack.eve_basis_set.size())];
                const BlochDirection eve_dir{detail::basis_direction_deg(eb)};
                auto [bit_a, bit_e] = measure_pair(pair, {row.alice_direction_deg},
                                                   eve_dir, rng);
                row.alice_bit = bit_a;
                row.eve_attacked = true;
                row.eve_basis = static_cast<int>(eb);
                row.eve_outcome = bit_e;
                record.eve.rows.push_back(EveRow{i, eb, bit_e, false});
                const QubitState resent =
                    direction_state({eve_dir.degrees + (bit_e == 0 ? 0.0 : 180.0)});
                const Arrival arr = transmit(SignalPulse{resent, 1, static_cast<std::int64_t>(i)},
                                             channel, rng);
                row.arrival = arr.kind;
                if (arr.kind == ArrivalKind::Signal) {
                    row.outcome = measure_direction(arr.state, {row.bob_direction_deg}, rng) == 0
                                      ? BobOutcome::Zero
                                      : BobOutcome::One;
                } else if (arr.kind == ArrivalKind::DarkCount) {
                    row.outcome = rng.bit() == 0 ? BobOutcome::Zero : BobOutcome::One;
                }
            } else {
                const bool survives = !rng.bernoulli(channel.loss_prob);
                if (!survives) {
                    row.alice_bit = rng.bit();  // Alice still reads her half
                    row.arrival = rng.bernoulli(channel.dark_count_prob)
                                      ? ArrivalKind::DarkCount
                                      : ArrivalKind::NoClick;
                    if (row.arrival == ArrivalKind::DarkCount)
                        row.outcome = rng.bit() == 0 ? BobOutcome::Zero : BobOutcome::One;
                } else if (rng.bernoulli(channel.depolarize_prob)) {
                    row.alice_bit = rng.bit();
                    row.arrival = ArrivalKind::Signal;
                    const int b =
                        measure_direction(haar_random_state(rng), {row.bob_direction_deg}, rng);
                    row.outcome = b == 0 ? BobOutcome::Zero : BobOutcome::One;
                } else {
                    auto [bit_a, bit_b] = measure_pair(pair, {row.alice_direction_deg},
                                                       {row.bob_direction_deg}, rng);
                    row.alice_bit = bit_a;
                    row.arrival = ArrivalKind::Signal;
                    row.outcome = bit_b == 0 ? BobOutcome::Zero : BobOutcome::One;
                }
            }
            if (row.arrival != ArrivalKind::NoClick) ++record.detected_count;
            record.rows.push_back(row);
            continue;
        }

        // Prepare-and-send protocols, including the time-separated pair.
        QubitState sent{1.0, 0.0};
        switch (proto) {
            case ProtocolId::BB84:
            case ProtocolId::SixState:
                row.alice_basis = protocol_bases[rng.index(protocol_bases.size())];
                sent = prepare(row.alice_basis, row.alice_bit);
                break;
            case ProtocolId::B92:
                sent = row.alice_bit == 0 ? b92_states.u0 : b92_states.u1;
                break;
            case ProtocolId::FourPlusTwo: {
                row.alice_basis = protocol_bases[rng.index(2)];
                const auto& pairset = fpt_states[row.alice_basis == Basis::Z ? 0 : 1];
                sent = row.alice_bit == 0 ? pairset.u0 : pairset.u1;
                break;
            }
            case ProtocolId::GV:
            case ProtocolId::KoashiImoto:
                sent = row.alice_bit == 0 ? psi0 : psi1;
                break;
            default:
                break;
        }

        SignalPulse pulse{sent, detail::draw_photons(config, rng),
                          static_cast<std::int64_t>(i)};
        if (proto == ProtocolId::GV && config.random_send_times) {
            row.send_bin = static_cast<std::int64_t>(rng.below(detail::kGvTimingWindow));
        }
        pulse.time_bin = row.send_bin;
        if (pulse.photon_count >= 2) ++record.multi_photon_sent;
        row.photons_sent = pulse.photon_count;

        if (attack.kind == AttackKind::InterceptResend) {
            auto [forwarded, eve_row] = intercept_resend(pulse, i, record.attack, rng);
            pulse = forwarded;
            if (eve_row) {
                row.eve_attacked = true;
                row.eve_basis = static_cast<int>(eve_row->basis);
                row.eve_outcome = eve_row->outcome;
                record.eve.rows.push_back(*eve_row);
            }
        } else if (attack.kind == AttackKind::PnsSplit) {
            auto [forwarded, eve_row] = pns_split(pulse, i, record.attack, rng);
            pulse = forwarded;
            if (eve_row) {
                row.eve_attacked = true;
                row.eve_split = true;
                record.eve.rows.push_back(*eve_row);
            }
        }

        const Arrival arr = transmit(pulse, channel, rng);
        row.arrival = arr.kind;
        if (arr.kind != ArrivalKind::NoClick) ++record.detected_count;

        switch (proto) {
            case ProtocolId::BB84:
            case ProtocolId::SixState:
                row.bob_basis = protocol_bases[rng.index(protocol_bases.size())];
                if (arr.kind == ArrivalKind::Signal) {
                    row.outcome = measure(arr.state, row.bob_basis, rng) == 0
                                      ? BobOutcome::Zero
                                      : BobOutcome::One;
                } else if (arr.kind == ArrivalKind::DarkCount) {
                    row.outcome = rng.bit() == 0 ? BobOutcome::Zero : BobOutcome::One;
                }
                break;
            case ProtocolId::B92:
                if (arr.kind == ArrivalKind::Signal) {
                    const B92Outcome o =
                        b92_discriminate(arr.state, b92_states.u0, b92_states.u1, rng);
                    row.outcome = o == B92Outcome::Inconclusive ? BobOutcome::Inconclusive
                                  : o == B92Outcome::Bit0       ? BobOutcome::Zero
                                                                : BobOutcome::One;
                } else if (arr.kind == ArrivalKind::DarkCount) {
                    row.outcome = rng.bit() == 0 ? BobOutcome::Zero : BobOutcome::One;
                }
                break;
            case ProtocolId::FourPlusTwo: {
                row.bob_basis = protocol_bases[rng.index(2)];
                const auto& pairset = fpt_states[row.bob_basis == Basis::Z ? 0 : 1];
                if (arr.kind == ArrivalKind::Signal) {
                    const B92Outcome o = b92_discriminate(arr.state, pairset.u0, pairset.u1, rng);
                    row.outcome = o == B92Outcome::Inconclusive ? BobOutcome::Inconclusive
                                  : o == B92Outcome::Bit0       ? BobOutcome::Zero
                                                                : BobOutcome::One;
                } else if (arr.kind == ArrivalKind::DarkCount) {
                    row.outcome = rng.bit() == 0 ? BobOutcome::Zero : BobOutcome::One;
                }
                break;
            }
            case ProtocolId::GV:
            case ProtocolId::KoashiImoto:
                // Readout is gated on receipt of both wavepackets
                // (send_bin and send_bin + 1).
                if (arr.kind == ArrivalKind::Signal) {
                    row.outcome = measure_in(arr.state, psi0, psi1, rng) == 0
                                      ? BobOutcome::Zero
                                      : BobOutcome::One;
                } else if (arr.kind == ArrivalKind::DarkCount) {
                    row.outcome = rng.bit() == 0 ? BobOutcome::Zero : BobOutcome::One;
                }
                break;
            default:
                break;
        }
        record.rows.push_back(row);
    }
    return record;
}

// Keep-rule per protocol family: matched bases and a detection (BB84,
// six-state), conclusive outcomes (B92; 4+2 also needs the matched basis),
// matched directions (Ekert, with Bob's bit flipped to undo the singlet
// anticorrelation), any detection (GV, Koashi/Imoto). Alice's and Bob's
// outputs always share one position list.
inline SiftResult sift(const SessionRecord& record) {
    SiftResult result;
    const ProtocolId proto = record.config.protocol;
    for (const SignalRow& row : record.rows) {
        if (!is_bit(row.outcome)) continue;
        int bob_bit = row.outcome == BobOutcome::Zero ? 0 : 1;
        switch (proto) {
            case ProtocolId::BB84:
            case ProtocolId::SixState:
                if (row.alice_basis != row.bob_basis) continue;
                break;
            case ProtocolId::FourPlusTwo:
                if (row.alice_basis != row.bob_basis) continue;
                break;
            case ProtocolId::B92:
                break;
            case ProtocolId::Ekert:
                if (row.alice_direction_deg != row.bob_direction_deg) continue;
                bob_bit = 1 - bob_bit;
                break;
            case ProtocolId::GV:
            case ProtocolId::KoashiImoto:
                break;
        }
        result.alice.bits.push_back(static_cast<std::uint8_t>(row.alice_bit));
        result.alice.positions.push_back(row.index);
        result.bob.bits.push_back(static_cast<std::uint8_t>(bob_bit));
        result.bob.positions.push_back(row.index);
    }
    std::uint64_t mismatches = 0;
    for (std::size_t i = 0; i < result.alice.bits.size(); ++i) {
        if (result.alice.bits[i] != result.bob.bits[i]) ++mismatches;
    }
    const double qber = result.alice.bits.empty()
                            ? 0.0
                            : static_cast<double>(mismatches) /
                                  static_cast<double>(result.alice.bits.size());
    result.alice.qber_truth = qber;
    result.bob.qber_truth = qber;
    result.sifted_fraction = record.rows.empty()
                                 ? 0.0
                                 : static_cast<double>(result.alice.bits.size()) /
                                       static_cast<double>(record.rows.size());
    return result;
}

inline constexpr std::uint64_t kChshMinSamples = 1000;

// CHSH estimate S = |E(a,b) - E(a,b') + E(a',b) + E(a',b')| from the
// mismatched-direction Ekert rows, with a=0, a'=90, b=45, b'=135 degrees.
inline double chsh_statistic(const SessionRecord& record) {
    if (record.config.protocol != ProtocolId::Ekert)
        throw contract_error("chsh_statistic: record is not from an Ekert session");
    double sums[2][2] = {{0.0, 0.0}, {0.0, 0.0}};
    std::uint64_t counts[2][2] = {{0, 0}, {0, 0}};
    std::uint64_t total = 0;
    for (const SignalRow& row : record.rows) {
        if (!is_bit(row.outcome)) continue;
        int ia, ib;
        if (row.alice_direction_deg == 0.0) ia = 0;
        else if (row.alice_direction_deg == 90.0) ia = 1;
        else continue;
        if (row.bob_direction_deg == 45.0) ib = 0;
        else if (row.bob_direction_deg == 135.0) ib = 1;
        else continue;
        const int oa = row.alice_bit == 0 ? 1 : -1;
        const int ob = row.outcome == BobOutcome::Zero ? 1 : -1;
        sums[ia][ib] += oa * ob;
        ++counts[ia][ib];
        ++total;
    }
    if (total < kChshMinSamples || counts[0][0] == 0 || counts[0][1] == 0 ||
        counts[1][0] == 0 || counts[1][1] == 0) {
        throw estimation_error("chsh_statistic: need at least " +
                               std::to_string(kChshMinSamples) +
                               " mismatched-direction pairs covering all four "
                               "settings, have " + std::to_string(total));
    }
    const double e_ab = sums[0][0] / static_cast<double>(counts[0][0]);
    const double e_abp = sums[0][1] / static_cast<double>(counts[0][1]);
    const double e_apb = sums[1][0] / static_cast<double>(counts[1][0]);
    const double e_apbp = sums[1][1] / static_cast<double>(counts[1][1]);
    return std::abs(e_ab - e_abp + e_apb + e_apbp);
}

// Eve's delayed-measurement accounting over the sifted positions. For
// intercept-resend her stored outcome becomes a certain guess wherever her
// basis matches the announced one (worth one bit there, nothing elsewhere).
// A split photon is read out in the announced basis and always yields the
// sent bit; for the USD protocols Eve discriminates her copy instead.
struct EveInfoSummary {
    std::uint64_t attacked_sifted = 0;
    std::uint64_t matched = 0;
    std::uint64_t matched_correct = 0;
    std::map<std::uint64_t, int> guesses;

    double matched_fraction() const {
        return attacked_sifted == 0
                   ? 0.0
                   : static_cast<double>(matched) / static_cast<double>(attacked_sifted);
    }
    double conditional_correctness() const {
        return matched == 0
                   ? 0.0
                   : static_cast<double>(matched_correct) / static_cast<double>(matched);
    }
    double bits_per_sifted_bit() const { return matched_fraction(); }
};

inline EveInfoSummary delayed_eve_summary(const SessionRecord& record,
                                          const SiftResult& sifted) {
    EveInfoSummary summary;
    Rng eve_rng = Rng(record.config.seed).child(0x45564531);  // Eve's private stream
    const ProtocolId proto = record.config.protocol;
    for (std::uint64_t pos : sifted.alice.positions) {
        const SignalRow& row = record.rows[pos];
        if (!row.eve_attacked) continue;
        ++summary.attacked_sifted;
        if (row.eve_split) {
            // Her photon is an exact copy of the signal state.
            if (proto == ProtocolId::BB84 || proto == ProtocolId::SixState) {
                summary.guesses[pos] = row.alice_bit;
                ++summary.matched;
                ++summary.matched_correct;
            } else {
                const double center =
                    proto == ProtocolId::FourPlusTwo && row.alice_basis == Basis::X ? 90.0
                                                                                    : 0.0;
                const detail::UsdPair usd =
                    detail::usd_pair(record.config.b92_overlap, center);
                const QubitState copy = row.alice_bit == 0 ? usd.u0 : usd.u1;
                const B92Outcome o = b92_discriminate(copy, usd.u0, usd.u1, eve_rng);
                if (o != B92Outcome::Inconclusive) {
                    summary.guesses[pos] = o == B92Outcome::Bit0 ? 0 : 1;
                    ++summary.matched;
                    if (summary.guesses[pos] == row.alice_bit) ++summary.matched_correct;
                }
            }
            continue;
        }
        summary.guesses[pos] = row.eve_outcome;
        // B92 announces conclusive positions, never an encoding basis, so no
        // announcement resolves Eve's projective outcome into certainty there.
        bool basis_matched = false;
        switch (proto) {
            case ProtocolId::BB84:
            case ProtocolId::SixState:
            case ProtocolId::FourPlusTwo:
                basis_matched = row.eve_basis == static_cast<int>(row.alice_basis);
                break;
            case ProtocolId::Ekert:
                basis_matched =
                    detail::basis_direction_deg(static_cast<Basis>(row.eve_basis)) ==
                    row.alice_direction_deg;
                break;
            default:
                break;
        }
        if (basis_matched) {
            ++summary.matched;
            if (row.eve_outcome == row.alice_bit) ++summary.matched_correct;
        }
    }
    return summary;
}

}  // namespace qkd
