#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "qkd/entropy.hpp"
#include "qkd/errors.hpp"
#include "qkd/protocols.hpp"
#include "qkd/rng.hpp"

namespace qkd {

// Every publicly disclosed bit lands in exactly one counter, so the total
// disclosure of a session is reportable.
struct LeakageReport {
    std::uint64_t estimation_bits_disclosed = 0;
    std::uint64_t parity_bits_disclosed = 0;
    std::uint64_t verification_hash_bits = 0;
    std::uint64_t auth_tag_bits = 0;
    std::uint64_t auth_key_bits_consumed = 0;

    std::uint64_t total_disclosed() const {
        return estimation_bits_disclosed + parity_bits_disclosed + verification_hash_bits +
               auth_tag_bits;
    }
};

namespace detail {

// LSB-first packing; tail bits of the last word are zero.
inline std::vector<std::uint64_t> pack_bits(std::span<const std::uint8_t> bits) {
    std::vector<std::uint64_t> words((bits.size() + 63) / 64, 0);
    for (std::size_t i = 0; i < bits.size(); ++i) {
        if (bits[i]) words[i / 64] |= std::uint64_t{1} << (i % 64);
    }
    return words;
}

inline int subset_parity(const std::vector<std::uint64_t>& key_words,
                         const std::vector<std::uint64_t>& mask_words) {
    std::uint64_t acc = 0;
    for (std::size_t w = 0; w < key_words.size(); ++w) acc ^= key_words[w] & mask_words[w];
    return static_cast<int>(std::popcount(acc) & 1);
}

}  // namespace detail

// Minimum bits that must be disclosed to correct an error rate e on a sifted
// key of length n_sif: -n_sif * (e log2 e + (1-e) log2(1-e)), with 0 log 0 = 0.
inline double shannon_min_leakage(std::uint64_t n_sif, double e) {
    if (!(e >= 0.0 && e <= 1.0)) throw std::domain_error("shannon_min_leakage: e outside [0,1]");
    return -static_cast<double>(n_sif) * (detail::xlog2x(e) + detail::xlog2x(1.0 - e));
}

struct QberEstimate {
    double e_hat = 0.0;
    std::uint64_t sample_size = 0;
    std::uint64_t mismatches = 0;
    SiftedKey alice_remaining;
    SiftedKey bob_remaining;
    std::uint64_t disclosed_bits = 0;  // both parties announce their sample bits
};

// Publicly compare a uniform sample of positions and drop them from both
// keys. The remaining length is ceil((1 - sample_fraction) * n) exactly.
inline QberEstimate estimate_qber(const SiftedKey& alice, const SiftedKey& bob,
                                  double sample_fraction, Rng& rng) {
    const std::size_t n = alice.bits.size();
    if (n != bob.bits.size()) throw contract_error("estimate_qber: key lengths differ");
    if (n < 100) throw contract_error("estimate_qber: need at least 100 sifted bits");
    if (!(sample_fraction > 0.0 && sample_fraction < 1.0))
        throw config_error("estimate_qber: sample_fraction must lie in (0,1)");
    const auto remaining_target =
        static_cast<std::size_t>(std::ceil((1.0 - sample_fraction) * static_cast<double>(n)));
    const std::size_t sample_size = n - remaining_target;
    if (sample_size < 50)
        throw estimation_error("estimate_qber: sample of " + std::to_string(sample_size) +
                               " positions is below the minimum of 50");

    const std::vector<std::size_t> sample = rng.sample_without_replacement(n, sample_size);
    std::vector<std::uint8_t> in_sample(n, 0);
    for (std::size_t idx : sample) in_sample[idx] = 1;

    QberEstimate est;
    est.sample_size = sample_size;
    est.disclosed_bits = 2 * sample_size;
    for (std::size_t i = 0; i < n; ++i) {
        if (in_sample[i]) {
            if (alice.bits[i] != bob.bits[i]) ++est.mismatches;
        } else {
            est.alice_remaining.bits.push_back(alice.bits[i]);
            est.alice_remaining.positions.push_back(alice.positions[i]);
            est.bob_remaining.bits.push_back(bob.bits[i]);
            est.bob_remaining.positions.push_back(bob.positions[i]);
        }
    }
    est.e_hat = static_cast<double>(est.mismatches) / static_cast<double>(sample_size);
    return est;
}

struct ReconciledKey {
    std::vector<std::uint8_t> bits;
    std::uint64_t n_rec = 0;
    std::uint64_t leaked_bits = 0;  // disclosed parities, excluding the final hash
    double residual_mismatch_prob = 0.0;
};

struct ReconcileResult {
    ReconciledKey alice;
    ReconciledKey bob;
    LeakageReport leakage;
    std::uint64_t corrected_errors = 0;
};

struct CascadeOptions {
    int passes = 4;
    double k1_rate = 0.73;          // pass-1 block size = k1_rate / e_hat
    std::uint64_t verify_bits = 50;  // final random-subset verification hash
};

namespace detail {

// Interactive block-parity bisection with back-propagation between passes.
// Alice's bits are authoritative; Bob flips his copy. Every disclosed parity
// (top-level and bisection) increments `leaked`.
class CascadeSession {
  public:
    CascadeSession(const std::vector<std::uint8_t>& alice, std::vector<std::uint8_t>& bob,
                   Rng& rng)
        : alice_(alice), bob_(bob), rng_(rng), n_(alice.size()) {}

    std::uint64_t run(double e_hat, const CascadeOptions& opt, std::uint64_t& leaked) {
        std::size_t k1 = n_;
        if (e_hat > 0.0) {
            const double raw = std::ceil(opt.k1_rate / e_hat);
            if (raw < static_cast<double>(n_)) k1 = std::max<std::size_t>(1, static_cast<std::size_t>(raw));
        }
        std::uint64_t corrected = 0;
        for (int pass = 0; pass < opt.passes; ++pass) {
            const std::size_t k = std::min(n_, k1 << pass);
            begin_pass(pass, k, leaked);
            corrected += drain(leaked);
        }
        return corrected;
    }

  private:
    struct Pass {
        std::vector<std::uint32_t> perm;       // position in permuted order
        std::vector<std::uint32_t> pos_block;  // original index -> block id
        std::vector<std::uint8_t> alice_par;
        std::vector<std::uint8_t> bob_par;
        std::size_t block_size = 0;
        std::size_t block_count = 0;
        std::size_t block_begin(std::size_t b) const { return b * block_size; }
        std::size_t block_end(std::size_t b) const {
            return std::min(perm.size(), (b + 1) * block_size);
        }
    };

    void begin_pass(int pass, std::size_t k, std::uint64_t& leaked) {
        Pass p;
        p.perm.resize(n_);
        for (std::size_t i = 0; i < n_; ++i) p.perm[i] = static_cast<std::uint32_t>(i);
        if (pass > 0) rng_.shuffle(p.perm);
        p.block_size = k;
        p.block_count = (n_ + k - 1) / k;
        p.pos_block.resize(n_);
        p.alice_par.assign(p.block_count, 0);
        p.bob_par.assign(p.block_count, 0);
        for (std::size_t b = 0; b < p.block_count; ++b) {
            int pa = 0, pb = 0;
            for (std::size_t i = p.block_begin(b); i < p.block_end(b); ++i) {
                const std::uint32_t orig = p.perm[i];
                p.pos_block[orig] = static_cast<std::uint32_t>(b);
                pa ^= alice_[orig];
                pb ^= bob_[orig];
            }
            p.alice_par[b] = static_cast<std::uint8_t>(pa);
            p.bob_par[b] = static_cast<std::uint8_t>(pb);
        }
        passes_.push_back(std::move(p));
        const std::size_t idx = passes_.size() - 1;
        leaked += passes_[idx].block_count;  // Alice discloses every top-level parity
        for (std::size_t b = 0; b < passes_[idx].block_count; ++b) {
            if (passes_[idx].alice_par[b] != passes_[idx].bob_par[b])
                mismatched_.insert({idx, b});
        }
    }

    // Bisect mismatched blocks until none remain; each bisection locates one
    // error, whose flip re-exposes odd blocks in other passes.
    std::uint64_t drain(std::uint64_t& leaked) {
        std::uint64_t corrected = 0;
        while (!mismatched_.empty()) {
            const auto [pi, b] = *mismatched_.begin();
            mismatched_.erase(mismatched_.begin());
            const std::size_t err = bisect(passes_[pi], b, leaked);
            flip(err);
            ++corrected;
        }
        return corrected;
    }

    std::size_t bisect(const Pass& p, std::size_t b, std::uint64_t& leaked) {
        std::size_t lo = p.block_begin(b), hi = p.block_end(b);
        while (hi - lo > 1) {
            const std::size_t mid = lo + (hi - lo + 1) / 2;
            int pa = 0, pb = 0;
            for (std::size_t i = lo; i < mid; ++i) {
                pa ^= alice_[p.perm[i]];
                pb ^= bob_[p.perm[i]];
            }
            ++leaked;  // Alice discloses the first-half parity
            if (pa != pb) hi = mid; else lo = mid;
        }
        return p.perm[lo];
    }

    void flip(std::size_t orig) {
        bob_[orig] ^= 1;
        for (std::size_t q = 0; q < passes_.size(); ++q) {
            Pass& p = passes_[q];
            const std::size_t b = p.pos_block[orig];
            p.bob_par[b] ^= 1;
            if (p.bob_par[b] != p.alice_par[b]) mismatched_.insert({q, b});
            else mismatched_.erase({q, b});
        }
    }

    const std::vector<std::uint8_t>& alice_;
    std::vector<std::uint8_t>& bob_;
    Rng& rng_;
    std::size_t n_;
    std::vector<Pass> passes_;
    std::set<std::pair<std::size_t, std::size_t>> mismatched_;
};

}  // namespace detail

// Multi-pass shuffled block-parity reconciliation. Pass-1 blocks hold
// k1_rate / e_hat bits, doubling each pass; a final random-subset hash is
// compared, and any surviving mismatch discards the keys.
inline ReconcileResult error_correct(const std::vector<std::uint8_t>& alice_bits,
                                     const std::vector<std::uint8_t>& bob_bits, double e_hat,
                                     Rng& rng, const CascadeOptions& opt = {}) {
    if (alice_bits.size() != bob_bits.size())
        throw contract_error("error_correct: key lengths differ");
    if (alice_bits.empty()) throw contract_error("error_correct: empty keys");
    if (!(e_hat >= 0.0 && e_hat <= 0.25))
        throw config_error("error_correct: e_hat must lie in [0, 0.25]");

    ReconcileResult result;
    std::vector<std::uint8_t> bob = bob_bits;
    std::uint64_t leaked = 0;
    detail::CascadeSession session(alice_bits, bob, rng);
    result.corrected_errors = session.run(e_hat, opt, leaked);

    // Verification: both sides publish random-subset parities of the full key.
    const auto alice_words = detail::pack_bits(alice_bits);
    const auto bob_words = detail::pack_bits(bob);
    bool verified = true;
    for (std::uint64_t v = 0; v < opt.verify_bits; ++v) {
        std::vector<std::uint64_t> mask(alice_words.size());
        for (auto& w : mask) w = rng.next_u64();
        if (detail::subset_parity(alice_words, mask) != detail::subset_parity(bob_words, mask))
            verified = false;
    }
    result.leakage.parity_bits_disclosed = leaked;
    result.leakage.verification_hash_bits = opt.verify_bits;
    if (!verified)
        throw reconciliation_error("error_correct: verification hash mismatch; keys discarded");

    const double residual = std::exp2(-static_cast<double>(opt.verify_bits));
    result.alice = ReconciledKey{alice_bits, alice_bits.size(), leaked, residual};
    result.bob = ReconciledKey{std::move(bob), alice_bits.size(), leaked, residual};
    return result;
}

struct FinalKey {
    std::vector<std::uint8_t> bits;
    std::uint64_t n_fin = 0;
    std::uint64_t n_s = 0;
    double tau1 = 0.0;
    double eve_info_bound = 0.0;  // log2(2^-n_S + 1) bits
};

inline double eve_final_info_bound(std::uint64_t n_s) {
    return std::log1p(std::exp2(-static_cast<double>(n_s))) / std::numbers::ln2;
}

// Hash the reconciled key into n_fin = floor((1 - tau1) * n_rec) - n_S bits,
// each the parity of an independent random subset (membership i.i.d. 1/2).
inline FinalKey privacy_amplify(const ReconciledKey& key, double tau1, std::uint64_t n_s,
                                Rng& rng) {
    if (!(tau1 >= 0.0 && tau1 <= 1.0))
        throw std::domain_error("privacy_amplify: tau1 outside [0,1]");
    if (key.n_rec == 0 || key.bits.size() != key.n_rec)
        throw contract_error("privacy_amplify: inconsistent reconciled key");
    const double shrunk = std::floor((1.0 - tau1) * static_cast<double>(key.n_rec));
    if (shrunk - static_cast<double>(n_s) < 1.0)
        throw key_exhausted_error("privacy_amplify: final key length would be "
                                  "non-positive");
    FinalKey out;
    out.n_fin = static_cast<std::uint64_t>(shrunk) - n_s;
    out.n_s = n_s;
    out.tau1 = tau1;
    out.eve_info_bound = eve_final_info_bound(n_s);
    const auto key_words = detail::pack_bits(key.bits);
    out.bits.resize(out.n_fin);
    std::vector<std::uint64_t> mask(key_words.size());
    for (std::uint64_t j = 0; j < out.n_fin; ++j) {
        for (auto& w : mask) w = rng.next_u64();
        out.bits[j] = static_cast<std::uint8_t>(detail::subset_parity(key_words, mask));
    }
    return out;
}

// tau1 = 1 + log2(P_coll) / n_rec; P_coll is Eve's collision probability on
// the reconciled key.
inline double tau1_from_pcoll(double p_coll, std::uint64_t n_rec) {
    if (n_rec == 0) throw std::domain_error("tau1_from_pcoll: n_rec must be positive");
    if (!(p_coll > 0.0 && p_coll <= 1.0))
        throw std::domain_error("tau1_from_pcoll: p_coll outside (0,1]");
    const double log2p = std::log2(p_coll);
    if (log2p < -static_cast<double>(n_rec))
        throw std::domain_error("tau1_from_pcoll: p_coll below the uniform floor 2^-n_rec");
    return 1.0 + log2p / static_cast<double>(n_rec);
}

// One-time key material for authentication tags. Draws are never rewound.
class KeyReservoir {
  public:
    KeyReservoir() = default;
    explicit KeyReservoir(std::vector<std::uint8_t> bits) : bits_(std::move(bits)) {}

    static KeyReservoir random(std::size_t n_bits, Rng& rng) {
        std::vector<std::uint8_t> b(n_bits);
        for (auto& x : b) x = static_cast<std::uint8_t>(rng.bit());
        return KeyReservoir(std::move(b));
    }

    std::size_t remaining() const { return bits_.size() - pos_; }
    std::size_t consumed() const { return pos_; }

    std::span<const std::uint8_t> draw(std::size_t count) {
        if (count > remaining())
            throw auth_unavailable_error(
                "key reservoir exhausted: need " + std::to_string(count) + " bits, have " +
                std::to_string(remaining()) + "; session must abort");
        std::span<const std::uint8_t> out(bits_.data() + pos_, count);
        pos_ += count;
        return out;
    }

  private:
    std::vector<std::uint8_t> bits_;
    std::size_t pos_ = 0;
};

struct AuthTag {
    std::uint64_t tag = 0;
    unsigned width = 64;
    std::uint64_t key_bits_consumed = 0;
};

namespace detail {

// Shift-family (Toeplitz) universal hash: tag_j = XOR over set message bits i
// of key bit (i + j). The family is XOR-universal, so any modified message
// collides with probability exactly 2^-width under a one-time key.
inline std::uint64_t toeplitz_tag(std::span<const std::uint8_t> message,
                                  std::span<const std::uint8_t> key_bits, unsigned width) {
    std::vector<std::uint64_t> kw((key_bits.size() + 63) / 64 + 1, 0);
    for (std::size_t i = 0; i < key_bits.size(); ++i) {
        if (key_bits[i]) kw[i / 64] |= std::uint64_t{1} << (i % 64);
    }
    std::uint64_t tag = 0;
    for (std::size_t byte = 0; byte < message.size(); ++byte) {
        const std::uint8_t m = message[byte];
        if (!m) continue;
        for (int b = 0; b < 8; ++b) {
            if (!((m >> b) & 1)) continue;
            const std::size_t i = byte * 8 + static_cast<std::size_t>(b);
            const std::size_t q = i / 64, r = i % 64;
            std::uint64_t window = kw[q] >> r;
            if (r != 0) window |= kw[q + 1] << (64 - r);
            tag ^= window;
        }
    }
    if (width < 64) tag &= (std::uint64_t{1} << width) - 1;
    return tag;
}

}  // namespace detail

// Universal-hash message tag keyed by one-time reservoir bits; a message of m
// bits consumes m + width - 1 of them.
inline AuthTag authenticate(std::span<const std::uint8_t> message, KeyReservoir& secret,
                            unsigned tag_width = 64) {
    if (tag_width < 1 || tag_width > 64)
        throw config_error("authenticate: tag_width must lie in [1,64]");
    const std::size_t need = message.size() * 8 + tag_width - 1;
    const auto key_bits = secret.draw(need);
    AuthTag t;
    t.width = tag_width;
    t.key_bits_consumed = need;
    t.tag = detail::toeplitz_tag(message, key_bits, tag_width);
    return t;
}

// Recomputes the tag from the verifier's synchronized reservoir copy; accepts
// the genuine pair, rejects a modified message except with probability
// <= 2^-width.
inline bool verify(std::span<const std::uint8_t> message, const AuthTag& tag,
                   KeyReservoir& secret) {
    const std::size_t need = message.size() * 8 + tag.width - 1;
    const auto key_bits = secret.draw(need);
    return detail::toeplitz_tag(message, key_bits, tag.width) == tag.tag;
}

inline std::string bits_to_hex(std::span<const std::uint8_t> bits) {
    static const char* digits = "0123456789abcdef";
    std::string out;
    out.reserve((bits.size() + 3) / 4);
    for (std::size_t i = 0; i < bits.size(); i += 4) {
        int v = 0;
        for (std::size_t j = 0; j < 4 && i + j < bits.size(); ++j) {
            v = (v << 1) | bits[i + j];
        }
        if (bits.size() - i < 4) v <<= 4 - (bits.size() - i);  // pad the tail nibble
        out.push_back(digits[v]);
    }
    return out;
}

}  // namespace qkd
