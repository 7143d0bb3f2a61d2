#pragma once

#include <cctype>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>

#include "qkd/channel.hpp"
#include "qkd/errors.hpp"
#include "qkd/protocols.hpp"
#include "qkd/transcript.hpp"

namespace qkd {

// Classical post-processing knobs; defaults are documented in the README and
// may be left implicit, unlike adversary settings.
struct PostprocConfig {
    double sample_fraction = 0.5;
    std::uint64_t n_s = 30;
    unsigned tag_width = 64;
    std::uint64_t preshared_bits = 4096;
    bool encrypt_parities = false;
    std::uint64_t verify_bits = 50;
};

struct RatesConfig {
    double grid_min = 0.0;
    double grid_max = 0.145;
    double grid_step = 0.005;
};

struct LabConfig {
    SessionConfig session;
    ChannelParams channel;
    AttackModel attack;
    PostprocConfig postproc;
    RatesConfig rates;
    bool seed_present = false;
};

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

class KeyValueConfig {
  public:
    void insert(const std::string& key, const std::string& value, int line_no) {
        if (values_.count(key))
            throw config_error("config line " + std::to_string(line_no) + ": duplicate key " +
                               key);
        values_[key] = value;
    }

    bool has(const std::string& key) const { return values_.count(key) != 0; }

    std::string require(const std::string& key) {
        const auto it = values_.find(key);
        if (it == values_.end()) throw config_error("config: missing required key " + key);
        used_.insert(key);
        return it->second;
    }

    std::optional<std::string> take(const std::string& key) {
        const auto it = values_.find(key);
        if (it == values_.end()) return std::nullopt;
        used_.insert(key);
        return it->second;
    }

    void reject_unknown() const {
        for (const auto& [key, value] : values_) {
            if (!used_.count(key))
                throw config_error("config: unknown key " + key);
        }
    }

  private:
    std::map<std::string, std::string> values_;
    std::set<std::string> used_;
};

inline double parse_double(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const double x = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw config_error("config: " + key + " expects a number, got '" + v + "'");
    }
}

inline std::uint64_t parse_u64(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const std::uint64_t x = std::stoull(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw config_error("config: " + key + " expects a non-negative integer, got '" + v +
                           "'");
    }
}

inline bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw config_error("config: " + key + " expects a boolean, got '" + v + "'");
}

}  // namespace detail

// Flat key-value text with [section] headers and '#' comments. Adversary
// settings must be spelled out: [attack] kind is always required, and an
// active attack additionally requires its own parameters, so a run can never
// be accidentally "secure" by omission.
inline LabConfig parse_config_text(const std::string& text) {
    detail::KeyValueConfig kv;
    std::istringstream is(text);
    std::string line, section;
    int line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw config_error("config line " + std::to_string(line_no) +
                                   ": malformed section header");
            section = detail::trim(line.substr(1, line.size() - 2));
            if (section.empty())
                throw config_error("config line " + std::to_string(line_no) + ": empty section");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw config_error("config line " + std::to_string(line_no) +
                               ": expected key = value");
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string value = detail::trim(line.substr(eq + 1));
        if (section.empty() || key.empty())
            throw config_error("config line " + std::to_string(line_no) +
                               ": key outside a section");
        kv.insert(section + "." + key, value, line_no);
    }

    LabConfig cfg;
    cfg.session.protocol = protocol_from_string(kv.require("session.protocol"));
    cfg.session.n_signals = detail::parse_u64("session.n_signals", kv.require("session.n_signals"));
    if (const auto v = kv.take("session.source")) {
        if (*v == "single") cfg.session.exact_single_photon = true;
        else if (*v == "poisson") cfg.session.exact_single_photon = false;
        else throw config_error("config: session.source must be 'single' or 'poisson'");
    }
    if (!cfg.session.exact_single_photon) {
        cfg.session.source_mu = detail::parse_double("session.mu", kv.require("session.mu"));
    } else if (const auto v = kv.take("session.mu")) {
        cfg.session.source_mu = detail::parse_double("session.mu", *v);
    }
    if (const auto v = kv.take("session.b92_overlap"))
        cfg.session.b92_overlap = detail::parse_double("session.b92_overlap", *v);
    if (const auto v = kv.take("session.ki_reflectivity"))
        cfg.session.ki_reflectivity = detail::parse_double("session.ki_reflectivity", *v);
    if (const auto v = kv.take("session.random_send_times"))
        cfg.session.random_send_times = detail::parse_bool("session.random_send_times", *v);
    if (const auto v = kv.take("session.seed")) {
        cfg.session.seed = detail::parse_u64("session.seed", *v);
        cfg.seed_present = true;
    }

    if (const auto v = kv.take("channel.depolarize_prob"))
        cfg.channel.depolarize_prob = detail::parse_double("channel.depolarize_prob", *v);
    if (const auto v = kv.take("channel.loss_prob"))
        cfg.channel.loss_prob = detail::parse_double("channel.loss_prob", *v);
    if (const auto v = kv.take("channel.dark_count_prob"))
        cfg.channel.dark_count_prob = detail::parse_double("channel.dark_count_prob", *v);

    const std::string kind = kv.require("attack.kind");
    if (kind == "none") {
        cfg.attack.kind = AttackKind::None;
    } else if (kind == "intercept-resend") {
        cfg.attack.kind = AttackKind::InterceptResend;
        cfg.attack.fraction =
            detail::parse_double("attack.fraction", kv.require("attack.fraction"));
        cfg.attack.delayed_readout =
            detail::parse_bool("attack.delayed_readout", kv.require("attack.delayed_readout"));
    } else if (kind == "pns-split") {
        cfg.attack.kind = AttackKind::PnsSplit;
        cfg.attack.fraction =
            detail::parse_double("attack.fraction", kv.require("attack.fraction"));
        if (const auto v = kv.take("attack.delayed_readout"))
            cfg.attack.delayed_readout = detail::parse_bool("attack.delayed_readout", *v);
    } else {
        throw config_error("config: attack.kind must be none, intercept-resend or pns-split");
    }
    if (const auto v = kv.take("attack.bases"))
        cfg.attack.eve_basis_set = detail::bases_from_string(*v);

    if (const auto v = kv.take("postproc.sample_fraction"))
        cfg.postproc.sample_fraction = detail::parse_double("postproc.sample_fraction", *v);
    if (const auto v = kv.take("postproc.n_s"))
        cfg.postproc.n_s = detail::parse_u64("postproc.n_s", *v);
    if (const auto v = kv.take("postproc.tag_width")) {
        const auto w = detail::parse_u64("postproc.tag_width", *v);
        if (w < 1 || w > 64) throw config_error("config: postproc.tag_width must lie in [1,64]");
        cfg.postproc.tag_width = static_cast<unsigned>(w);
    }
    if (const auto v = kv.take("postproc.preshared_bits"))
        cfg.postproc.preshared_bits = detail::parse_u64("postproc.preshared_bits", *v);
    if (const auto v = kv.take("postproc.encrypt_parities"))
        cfg.postproc.encrypt_parities = detail::parse_bool("postproc.encrypt_parities", *v);
    if (const auto v = kv.take("postproc.verify_bits"))
        cfg.postproc.verify_bits = detail::parse_u64("postproc.verify_bits", *v);

    if (const auto v = kv.take("rates.grid_min"))
        cfg.rates.grid_min = detail::parse_double("rates.grid_min", *v);
    if (const auto v = kv.take("rates.grid_max"))
        cfg.rates.grid_max = detail::parse_double("rates.grid_max", *v);
    if (const auto v = kv.take("rates.grid_step"))
        cfg.rates.grid_step = detail::parse_double("rates.grid_step", *v);

    kv.reject_unknown();
    cfg.session.validate();
    cfg.channel.validate();
    cfg.attack.validate();
    if (!(cfg.postproc.sample_fraction > 0.0 && cfg.postproc.sample_fraction < 1.0))
        throw config_error("config: postproc.sample_fraction must lie in (0,1)");
    return cfg;
}

inline LabConfig load_config_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw config_error("config: cannot open " + path);
    std::ostringstream buf;
    buf << f.rdbuf();
    return parse_config_text(buf.str());
}

}  // namespace qkd
