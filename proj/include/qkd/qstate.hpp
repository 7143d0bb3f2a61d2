#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <string>

#include "qkd/errors.hpp"
#include "qkd/rng.hpp"

namespace qkd {

using cplx = std::complex<double>;

// Normalization slack for state constructors; far below any statistical
// resolution used elsewhere.
inline constexpr double kNormTolerance = 1e-12;

// Normalized two-component amplitude vector |psi> = amp0|0> + amp1|1>.
// Construction enforces |amp0|^2 + |amp1|^2 = 1.
class QubitState {
  public:
    QubitState(cplx a0, cplx a1) : amp0_(a0), amp1_(a1) {
        if (std::abs(squared_norm() - 1.0) > kNormTolerance)
            throw contract_error("QubitState: amplitudes are not normalized");
    }

    cplx amp0() const { return amp0_; }
    cplx amp1() const { return amp1_; }

    double squared_norm() const { return std::norm(amp0_) + std::norm(amp1_); }

    bool is_normalized() const { return std::abs(squared_norm() - 1.0) <= kNormTolerance; }

    // State orthogonal to this one (unique up to global phase in 2-D).
    QubitState orthogonal() const {
        return QubitState(-std::conj(amp1_), std::conj(amp0_));
    }

  private:
    cplx amp0_;
    cplx amp1_;
};

inline cplx inner(const QubitState& a, const QubitState& b) {
    return std::conj(a.amp0()) * b.amp0() + std::conj(a.amp1()) * b.amp1();
}

inline double overlap(const QubitState& a, const QubitState& b) {
    return std::abs(inner(a, b));
}

// Measurement axes. Z eigenstates are |0>,|1>; X are (|0>+-|1>)/sqrt2;
// Y are (|0>+-i|1>)/sqrt2.
enum class Basis : std::uint8_t { Z = 0, X = 1, Y = 2 };

inline const char* to_string(Basis b) {
    switch (b) {
        case Basis::Z: return "Z";
        case Basis::X: return "X";
        case Basis::Y: return "Y";
    }
    return "?";
}

// Eigenstate of `basis` encoding `bit`; bit 0 maps to the +direction
// eigenstate.
inline QubitState prepare(Basis basis, int bit) {
    if (bit != 0 && bit != 1) throw contract_error("prepare: bit must be 0 or 1");
    const double inv_sqrt2 = 1.0 / std::numbers::sqrt2;
    const double sign = bit == 0 ? 1.0 : -1.0;
    switch (basis) {
        case Basis::Z:
            return bit == 0 ? QubitState(1.0, 0.0) : QubitState(0.0, 1.0);
        case Basis::X:
            return QubitState(inv_sqrt2, sign * inv_sqrt2);
        case Basis::Y:
            return QubitState(inv_sqrt2, cplx(0.0, sign * inv_sqrt2));
    }
    throw contract_error("prepare: unknown basis");
}

// Projective measurement; returns b with probability |<eigenstate_b|state>|^2.
// The physical state is consumed by measurement: callers must not reuse it.
inline int measure(const QubitState& state, Basis basis, Rng& rng) {
    if (!state.is_normalized())
        throw contract_error("measure: state is not normalized");
    const double p0 = std::norm(inner(prepare(basis, 0), state));
    return rng.uniform() < p0 ? 0 : 1;
}

// Direction on the Bloch great circle through Z (0 deg) and X (90 deg).
// theta and theta+180 deg label orthogonal states.
struct BlochDirection {
    double degrees = 0.0;
};

inline bool operator==(BlochDirection a, BlochDirection b) { return a.degrees == b.degrees; }

// +direction eigenstate at Bloch angle theta: cos(theta/2)|0> + sin(theta/2)|1>.
inline QubitState direction_state(BlochDirection dir) {
    const double half = dir.degrees * std::numbers::pi / 360.0;
    return QubitState(std::cos(half), std::sin(half));
}

// Projective measurement along a Bloch direction; 0 is the +direction outcome.
inline int measure_direction(const QubitState& state, BlochDirection dir, Rng& rng) {
    if (!state.is_normalized())
        throw contract_error("measure_direction: state is not normalized");
    const double p0 = std::norm(inner(direction_state(dir), state));
    return rng.uniform() < p0 ? 0 : 1;
}

// Projective measurement in the orthonormal basis {b0, b1}.
inline int measure_in(const QubitState& state, const QubitState& b0, const QubitState& b1,
                      Rng& rng) {
    if (overlap(b0, b1) > 1e-9)
        throw contract_error("measure_in: basis states are not orthogonal");
    const double p0 = std::norm(inner(b0, state));
    (void)b1;
    return rng.uniform() < p0 ? 0 : 1;
}

// Uniformly random pure state (Haar measure on the Bloch sphere).
inline QubitState haar_random_state(Rng& rng) {
    const double cos_theta = 1.0 - 2.0 * rng.uniform();
    const double half = 0.5 * std::acos(cos_theta);
    const double phi = 2.0 * std::numbers::pi * rng.uniform();
    return QubitState(std::cos(half), std::polar(std::sin(half), phi));
}

// Two-qubit singlet (|01>-|10>)/sqrt2. Measuring both halves along the same
// direction anticorrelates with certainty; in general E(a,b) = -cos(a-b).
// The joint statistics are sampled analytically: bitA uniform, then bitB from
// the conditional law, which reproduces the state's observable distribution
// exactly.
class SingletPair {
  public:
    SingletPair() = default;

    bool consumed() const { return consumed_; }

    friend std::pair<int, int> measure_pair(SingletPair& pair, BlochDirection dirA,
                                            BlochDirection dirB, Rng& rng);

  private:
    bool consumed_ = false;
};

inline std::pair<int, int> measure_pair(SingletPair& pair, BlochDirection dirA,
                                        BlochDirection dirB, Rng& rng) {
    if (pair.consumed_)
        throw contract_error("measure_pair: pair has already been measured");
    pair.consumed_ = true;
    const double delta = (dirA.degrees - dirB.degrees) * std::numbers::pi / 180.0;
    const double corr = -std::cos(delta);  // E[oA*oB] for outcomes +-1
    const int oA = rng.bit() ? 1 : -1;
    const int oB = rng.uniform() < (1.0 + corr) / 2.0 ? oA : -oA;
    return {oA > 0 ? 0 : 1, oB > 0 ? 0 : 1};
}

enum class B92Outcome : std::uint8_t { Bit0 = 0, Bit1 = 1, Inconclusive = 2 };

// Optimal unambiguous discrimination between two non-orthogonal states with
// equal priors (three-outcome POVM). Conclusive outcomes never misidentify an
// exact u0/u1 input; on such inputs the conclusive probability is
// 1 - |<u0|u1>|. Degraded inputs are handled by the same POVM, so conclusive
// errors can then occur, exactly as in a physical receiver.
inline B92Outcome b92_discriminate(const QubitState& state, const QubitState& u0,
                                   const QubitState& u1, Rng& rng) {
    const double s = overlap(u0, u1);
    if (s >= 1.0 - kNormTolerance)
        throw config_error("b92_discriminate: signal states must be distinct (overlap < 1)");
    // E_b projects onto the complement of the other signal state, scaled by
    // 1/(1+s) so that E_inc = I - E0 - E1 stays positive.
    const double scale = 1.0 / (1.0 + s);
    const double q0 = scale * std::norm(inner(u1.orthogonal(), state));
    const double q1 = scale * std::norm(inner(u0.orthogonal(), state));
    const double u = rng.uniform();
    if (u < q0) return B92Outcome::Bit0;
    if (u < q0 + q1) return B92Outcome::Bit1;
    return B92Outcome::Inconclusive;
}

// Photon-number-annotated emission. photon_count = 0 is vacuum: nothing to
// detect except a dark count.
struct SignalPulse {
    QubitState state{1.0, 0.0};
    std::uint64_t photon_count = 1;
    std::int64_t time_bin = 0;
};

// Poisson photon statistics of a weak laser pulse with mean mu.
inline std::uint64_t sample_photon_number(double mu, Rng& rng) {
    return rng.poisson(mu);
}

}  // namespace qkd
