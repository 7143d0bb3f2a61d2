#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qkd/errors.hpp"
#include "qkd/qstate.hpp"
#include "qkd/rng.hpp"

namespace qkd {

// Quantum channel model. Depolarization replaces a surviving signal by a
// uniformly random pure state, so a matched-basis BB84 signal picks up an
// error with probability depolarize_prob / 2.
struct ChannelParams {
    double depolarize_prob = 0.0;
    double loss_prob = 0.0;
    double dark_count_prob = 0.0;

    void validate() const {
        for (double p : {depolarize_prob, loss_prob, dark_count_prob}) {
            if (!(p >= 0.0 && p <= 1.0))
                throw config_error("ChannelParams: probabilities must lie in [0,1]");
        }
    }
};

enum class AttackKind : std::uint8_t { None = 0, InterceptResend = 1, PnsSplit = 2 };

inline const char* to_string(AttackKind k) {
    switch (k) {
        case AttackKind::None: return "none";
        case AttackKind::InterceptResend: return "intercept-resend";
        case AttackKind::PnsSplit: return "pns-split";
    }
    return "?";
}

struct AttackModel {
    AttackKind kind = AttackKind::None;
    double fraction = 0.0;                // proportion of signals attacked
    std::vector<Basis> eve_basis_set;     // empty = protocol's own bases
    bool delayed_readout = false;         // Eve stores results, consumes announcements

    void validate() const {
        if (!(fraction >= 0.0 && fraction <= 1.0))
            throw config_error("AttackModel: fraction must lie in [0,1]");
    }
};

// One row of Eve's private bookkeeping, recorded per attacked signal.
struct EveRow {
    std::uint64_t signal_index = 0;
    Basis basis = Basis::Z;
    int outcome = -1;    // measured bit; -1 for a PNS split held unmeasured
    bool split = false;  // true when a photon was split off rather than resent
};

// Eve's transcript: measurement rows during the quantum phase, plus guesses
// filled in per sifted position once she has consumed the public discussion
// (delayed-measurement bookkeeping).
struct EveTranscript {
    std::vector<EveRow> rows;
    std::map<std::uint64_t, int> guesses;  // sifted signal index -> guessed bit
};

enum class ArrivalKind : std::uint8_t { NoClick = 0, Signal = 1, DarkCount = 2 };

inline const char* to_string(ArrivalKind k) {
    switch (k) {
        case ArrivalKind::NoClick: return "none";
        case ArrivalKind::Signal: return "signal";
        case ArrivalKind::DarkCount: return "dark";
    }
    return "?";
}

// What reaches Bob's detectors for one pulse.
struct Arrival {
    ArrivalKind kind = ArrivalKind::NoClick;
    QubitState state{1.0, 0.0};  // meaningful only when kind == Signal
    std::uint64_t photons = 0;
    bool depolarized = false;
};

// Propagate one pulse: each photon survives independently with probability
// 1 - loss_prob; a surviving signal is depolarized with depolarize_prob; an
// empty arrival clicks with dark_count_prob and then reads out as a uniformly
// random bit.
inline Arrival transmit(const SignalPulse& pulse, const ChannelParams& params, Rng& rng) {
    params.validate();
    std::uint64_t surviving = 0;
    for (std::uint64_t i = 0; i < pulse.photon_count; ++i) {
        if (!rng.bernoulli(params.loss_prob)) ++surviving;
    }
    if (surviving > 0) {
        Arrival a;
        a.kind = ArrivalKind::Signal;
        a.photons = surviving;
        if (rng.bernoulli(params.depolarize_prob)) {
            a.state = haar_random_state(rng);
            a.depolarized = true;
        } else {
            a.state = pulse.state;
        }
        return a;
    }
    if (rng.bernoulli(params.dark_count_prob)) {
        Arrival a;
        a.kind = ArrivalKind::DarkCount;
        return a;
    }
    return Arrival{};
}

// Intercept-resend step for one pulse. With probability `fraction` Eve
// measures in a uniformly random basis from her set and forwards the matching
// eigenstate; otherwise the pulse passes untouched. Vacuum gives her nothing
// to measure.
inline std::pair<SignalPulse, std::optional<EveRow>> intercept_resend(
    const SignalPulse& pulse, std::uint64_t signal_index, const AttackModel& model,
    Rng& rng) {
    if (model.kind != AttackKind::InterceptResend)
        throw contract_error("intercept_resend: model kind mismatch");
    if (model.eve_basis_set.empty())
        throw config_error("intercept_resend: eve_basis_set must not be empty");
    if (pulse.photon_count == 0 || !rng.bernoulli(model.fraction))
        return {pulse, std::nullopt};
    const Basis basis = model.eve_basis_set[rng.index(model.eve_basis_set.size())];
    const int bit = measure(pulse.state, basis, rng);
    SignalPulse forwarded{prepare(basis, bit), pulse.photon_count, pulse.time_bin};
    return {forwarded, EveRow{signal_index, basis, bit, false}};
}

// Photon-number-splitting step: on a multi-photon pulse Eve keeps one photon
// (an exact copy of the signal state) and forwards the rest undisturbed. Her
// copy is read out later, after the public discussion.
inline std::pair<SignalPulse, std::optional<EveRow>> pns_split(
    const SignalPulse& pulse, std::uint64_t signal_index, const AttackModel& model,
    Rng& rng) {
    if (model.kind != AttackKind::PnsSplit)
        throw contract_error("pns_split: model kind mismatch");
    if (pulse.photon_count < 2 || !rng.bernoulli(model.fraction))
        return {pulse, std::nullopt};
    SignalPulse forwarded{pulse.state, pulse.photon_count - 1, pulse.time_bin};
    return {forwarded, EveRow{signal_index, Basis::Z, -1, true}};
}

enum class SecurityFlag : std::uint8_t { NotDecided = 0, Insecure = 1 };

inline const char* to_string(SecurityFlag f) {
    return f == SecurityFlag::Insecure ? "INSECURE" : "NOT-DECIDED";
}

// Necessary (not sufficient) multi-photon security condition: the exchange is
// totally insecure when fewer signals arrive than multi-photon pulses were
// sent, because Eve could have learned every received bit by splitting.
inline SecurityFlag pns_insecurity_check(std::uint64_t n_multiphoton_sent,
                                         std::uint64_t n_received) {
    return n_received < n_multiphoton_sent ? SecurityFlag::Insecure
                                           : SecurityFlag::NotDecided;
}

}  // namespace qkd
