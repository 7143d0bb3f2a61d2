#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "qkd/protocols.hpp"
#include "qkd/version.hpp"

namespace qkd {

inline std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

inline std::string to_hex(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

namespace detail {

// Shortest decimal form that round-trips a double; integral values print
// without an exponent.
inline std::string fmt_double(double v) {
    char buf[32];
    if (std::abs(v) < 1e15 && v == std::floor(v)) {
        std::snprintf(buf, sizeof buf, "%.0f", v);
        return buf;
    }
    for (int prec = 1; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof buf, "%.*g", prec, v);
        if (std::strtod(buf, nullptr) == v) break;
    }
    return buf;
}

inline std::string bases_to_string(const std::vector<Basis>& bases) {
    std::string s;
    for (Basis b : bases) s += to_string(b);
    return s.empty() ? "-" : s;
}

inline std::vector<Basis> bases_from_string(const std::string& s) {
    std::vector<Basis> out;
    if (s == "-") return out;
    for (char c : s) {
        switch (c) {
            case 'Z': out.push_back(Basis::Z); break;
            case 'X': out.push_back(Basis::X); break;
            case 'Y': out.push_back(Basis::Y); break;
            default: throw config_error(std::string("transcript: bad basis letter '") + c + "'");
        }
    }
    return out;
}

// Alice/Bob encoding column: basis letter, Ekert direction in degrees, or
// "-" for the fixed-encoding protocols.
inline std::string enc_field(ProtocolId proto, Basis basis, double direction_deg) {
    switch (proto) {
        case ProtocolId::BB84:
        case ProtocolId::SixState:
        case ProtocolId::FourPlusTwo:
            return to_string(basis);
        case ProtocolId::Ekert:
            return fmt_double(direction_deg);
        default:
            return "-";
    }
}

}  // namespace detail

// Canonical parameter block; the config hash embedded in every artifact is
// the FNV-1a of exactly these three lines.
inline std::string config_block(const SessionConfig& cfg, const ChannelParams& ch,
                                const AttackModel& atk) {
    std::ostringstream os;
    os << "#session protocol=" << to_string(cfg.protocol) << " n_signals=" << cfg.n_signals
       << " source=" << (cfg.exact_single_photon ? "single" : "poisson")
       << " mu=" << detail::fmt_double(cfg.source_mu)
       << " b92_overlap=" << detail::fmt_double(cfg.b92_overlap)
       << " ki_reflectivity=" << detail::fmt_double(cfg.ki_reflectivity)
       << " random_send_times=" << (cfg.random_send_times ? 1 : 0)
       << " seed=" << cfg.seed << "\n";
    os << "#channel depolarize_prob=" << detail::fmt_double(ch.depolarize_prob)
       << " loss_prob=" << detail::fmt_double(ch.loss_prob)
       << " dark_count_prob=" << detail::fmt_double(ch.dark_count_prob) << "\n";
    os << "#attack kind=" << to_string(atk.kind)
       << " fraction=" << detail::fmt_double(atk.fraction)
       << " bases=" << detail::bases_to_string(atk.eve_basis_set)
       << " delayed_readout=" << (atk.delayed_readout ? 1 : 0) << "\n";
    return os.str();
}

inline std::string config_hash(const SessionConfig& cfg, const ChannelParams& ch,
                               const AttackModel& atk) {
    return to_hex(fnv1a(config_block(cfg, ch, atk)));
}

// Line-delimited audit record: '#'-prefixed header, one signal per line,
// '#end' trailer with integrity counts. Deterministic byte-for-byte given
// (config, channel, adversary, seed).
inline void write_transcript(std::ostream& os, const SessionRecord& record) {
    const ProtocolId proto = record.config.protocol;
    os << "#qkdt 1\n";
    os << "#tool " << kToolName << " " << kToolVersion << "\n";
    os << "#seed " << record.config.seed << "\n";
    os << "#config-hash " << config_hash(record.config, record.channel, record.attack)
       << "\n";
    os << config_block(record.config, record.channel, record.attack);
    os << "#columns index alice_bit alice_enc photons send_bin eve arrival bob_enc outcome\n";
    for (const SignalRow& row : record.rows) {
        os << row.index << ' ' << row.alice_bit << ' '
           << detail::enc_field(proto, row.alice_basis, row.alice_direction_deg) << ' '
           << row.photons_sent << ' ' << row.send_bin << ' ';
        if (!row.eve_attacked) {
            os << '-';
        } else if (row.eve_split) {
            os << "split";
        } else {
            os << to_string(static_cast<Basis>(row.eve_basis)) << ':' << row.eve_outcome;
        }
        os << ' ';
        switch (row.arrival) {
            case ArrivalKind::NoClick: os << 'n'; break;
            case ArrivalKind::Signal: os << 's'; break;
            case ArrivalKind::DarkCount: os << 'd'; break;
        }
        os << ' ' << detail::enc_field(proto, row.bob_basis, row.bob_direction_deg) << ' '
           << to_string(row.outcome) << "\n";
    }
    os << "#end rows=" << record.rows.size() << " detected=" << record.detected_count
       << " multiphoton=" << record.multi_photon_sent << "\n";
}

inline std::string transcript_to_string(const SessionRecord& record) {
    std::ostringstream os;
    write_transcript(os, record);
    return os.str();
}

struct TranscriptHeader {
    SessionConfig config;
    ChannelParams channel;
    AttackModel attack;
    std::string tool_version;
    std::string config_hash_hex;
};

namespace detail {

inline std::string header_value(const std::string& token, const char* key) {
    const std::string prefix = std::string(key) + "=";
    if (token.rfind(prefix, 0) != 0) throw config_error("transcript: expected " + prefix);
    return token.substr(prefix.size());
}

inline std::vector<std::string> split_ws(const std::string& line) {
    std::istringstream is(line);
    std::vector<std::string> out;
    std::string tok;
    while (is >> tok) out.push_back(tok);
    return out;
}

}  // namespace detail

// Parses the '#'-header of a serialized transcript; row lines are not
// interpreted (replay regenerates them from the seed).
inline TranscriptHeader parse_transcript_header(std::istream& is) {
    TranscriptHeader hdr;
    std::string line;
    bool saw_magic = false, saw_session = false, saw_channel = false, saw_attack = false;
    while (std::getline(is, line)) {
        if (line.rfind("#qkdt", 0) == 0) {
            saw_magic = true;
            continue;
        }
        if (line.rfind("#tool ", 0) == 0) {
            hdr.tool_version = line.substr(6);
            continue;
        }
        if (line.rfind("#config-hash ", 0) == 0) {
            hdr.config_hash_hex = line.substr(13);
            continue;
        }
        if (line.rfind("#session ", 0) == 0) {
            const auto tok = detail::split_ws(line.substr(9));
            if (tok.size() != 8) throw config_error("transcript: malformed #session line");
            hdr.config.protocol = protocol_from_string(detail::header_value(tok[0], "protocol"));
            hdr.config.n_signals = std::stoull(detail::header_value(tok[1], "n_signals"));
            hdr.config.exact_single_photon =
                detail::header_value(tok[2], "source") == "single";
            hdr.config.source_mu = std::stod(detail::header_value(tok[3], "mu"));
            hdr.config.b92_overlap = std::stod(detail::header_value(tok[4], "b92_overlap"));
            hdr.config.ki_reflectivity =
                std::stod(detail::header_value(tok[5], "ki_reflectivity"));
            hdr.config.random_send_times =
                detail::header_value(tok[6], "random_send_times") == "1";
            hdr.config.seed = std::stoull(detail::header_value(tok[7], "seed"));
            saw_session = true;
            continue;
        }
        if (line.rfind("#channel ", 0) == 0) {
            const auto tok = detail::split_ws(line.substr(9));
            if (tok.size() != 3) throw config_error("transcript: malformed #channel line");
            hdr.channel.depolarize_prob =
                std::stod(detail::header_value(tok[0], "depolarize_prob"));
            hdr.channel.loss_prob = std::stod(detail::header_value(tok[1], "loss_prob"));
            hdr.channel.dark_count_prob =
                std::stod(detail::header_value(tok[2], "dark_count_prob"));
            saw_channel = true;
            continue;
        }
        if (line.rfind("#attack ", 0) == 0) {
            const auto tok = detail::split_ws(line.substr(8));
            if (tok.size() != 4) throw config_error("transcript: malformed #attack line");
            const std::string kind = detail::header_value(tok[0], "kind");
            if (kind == "none") hdr.attack.kind = AttackKind::None;
            else if (kind == "intercept-resend") hdr.attack.kind = AttackKind::InterceptResend;
            else if (kind == "pns-split") hdr.attack.kind = AttackKind::PnsSplit;
            else throw config_error("transcript: unknown attack kind " + kind);
            hdr.attack.fraction = std::stod(detail::header_value(tok[1], "fraction"));
            hdr.attack.eve_basis_set =
                detail::bases_from_string(detail::header_value(tok[2], "bases"));
            hdr.attack.delayed_readout =
                detail::header_value(tok[3], "delayed_readout") == "1";
            saw_attack = true;
            continue;
        }
        if (line.rfind("#columns", 0) == 0) break;
    }
    if (!saw_magic || !saw_session || !saw_channel || !saw_attack)
        throw config_error("transcript: missing or truncated header");
    return hdr;
}

struct VerifyResult {
    bool ok = false;
    std::string detail;
};

// Replay check: re-simulates from the embedded (config, seed) and compares
// the regenerated transcript byte for byte against the stored one.
inline VerifyResult verify_transcript_text(const std::string& original) {
    std::istringstream is(original);
    const TranscriptHeader hdr = parse_transcript_header(is);
    const SessionRecord replay = run_session(hdr.config, hdr.channel, hdr.attack);
    const std::string regenerated = transcript_to_string(replay);
    if (regenerated == original) return {true, "transcript verified: replay is byte-identical"};
    std::istringstream a(original), b(regenerated);
    std::string la, lb;
    std::size_t line_no = 0;
    while (true) {
        const bool ga = static_cast<bool>(std::getline(a, la));
        const bool gb = static_cast<bool>(std::getline(b, lb));
        ++line_no;
        if (!ga && !gb) break;
        if (!ga || !gb || la != lb) {
            return {false, "transcript mismatch at line " + std::to_string(line_no) +
                               ": stored '" + (ga ? la : "<eof>") + "' vs replay '" +
                               (gb ? lb : "<eof>") + "'"};
        }
    }
    return {false, "transcript mismatch (length)"};
}

}  // namespace qkd
