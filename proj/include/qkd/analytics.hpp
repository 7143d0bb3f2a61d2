#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "qkd/entropy.hpp"
#include "qkd/errors.hpp"
#include "qkd/protocols.hpp"

namespace qkd {

// Prior p(x), outcome weights q(M) and posterior family p(x|M) of a discrete
// measurement channel.
struct DiscreteChannelModel {
    std::vector<double> prior;
    std::vector<double> outcome_weights;
    std::vector<std::vector<double>> posteriors;  // one row per outcome M

    void validate() const {
        auto check_dist = [](const std::vector<double>& d, const char* name) {
            if (d.empty()) throw std::domain_error(std::string(name) + ": empty distribution");
            double sum = 0.0;
            for (double p : d) {
                if (!(p >= 0.0)) throw std::domain_error(std::string(name) + ": negative weight");
                sum += p;
            }
            if (std::abs(sum - 1.0) > 1e-9)
                throw std::domain_error(std::string(name) + ": not normalized within 1e-9");
        };
        check_dist(prior, "prior");
        check_dist(outcome_weights, "outcome_weights");
        if (posteriors.size() != outcome_weights.size())
            throw std::domain_error("DiscreteChannelModel: one posterior per outcome required");
        for (const auto& post : posteriors) {
            if (post.size() != prior.size())
                throw std::domain_error("DiscreteChannelModel: posterior arity mismatch");
            check_dist(post, "posterior");
        }
    }
};

// Expected entropy change between prior and posterior:
// I = -sum_x p(x) log2 p(x) + sum_M q(M) sum_x p(x|M) log2 p(x|M).
inline double shannon_information(const DiscreteChannelModel& model) {
    model.validate();
    double information = 0.0;
    for (double p : model.prior) information -= detail::xlog2x(p);
    for (std::size_t m = 0; m < model.outcome_weights.size(); ++m) {
        double post_term = 0.0;
        for (double p : model.posteriors[m]) post_term += detail::xlog2x(p);
        information += model.outcome_weights[m] * post_term;
    }
    return information;
}

// Binary-channel Shannon information I[e] = 1 + e log2 e + (1-e) log2(1-e);
// this is I_AB per sifted bit at error rate e.
inline double binary_information(double e) {
    if (!(e >= 0.0 && e <= 1.0)) throw std::domain_error("binary_information: e outside [0,1]");
    return 1.0 + detail::xlog2x(e) + detail::xlog2x(1.0 - e);
}

// Single-photon BB84 privacy-amplification shrinkage against individual
// attacks: tau1(e) = log2(1 + 4e - 4e^2). Its fitness here rests on
// reproducing the 10.5% tolerable-error cutoff (see find_tolerable_error).
inline double tau1_bb84(double e) {
    if (!(e >= 0.0 && e <= 0.5)) throw std::domain_error("tau1_bb84: e outside [0, 0.5]");
    return std::log2(1.0 + 4.0 * e * (1.0 - e));
}

enum class Tau1Source : std::uint8_t { ClosedFormBB84 = 0, TabulatedFile = 1 };

inline const char* to_string(Tau1Source s) {
    return s == Tau1Source::ClosedFormBB84 ? "closed-form-bb84" : "tabulated-file";
}

// Shrinkage curve e -> tau1: either the built-in BB84 closed form or a
// user-supplied table (linear interpolation between samples).
class Tau1Curve {
  public:
    static Tau1Curve closed_form_bb84() {
        Tau1Curve c;
        c.source_ = Tau1Source::ClosedFormBB84;
        return c;
    }

    static Tau1Curve from_table(std::vector<std::pair<double, double>> table) {
        if (table.size() < 2)
            throw config_error("tau1 table: need at least two (e, tau1) samples");
        for (std::size_t i = 0; i < table.size(); ++i) {
            const auto& [e, t] = table[i];
            if (!std::isfinite(e) || !std::isfinite(t))
                throw config_error("tau1 table: non-finite entry");
            if (!(e >= 0.0 && e < 1.0)) throw config_error("tau1 table: e outside [0,1)");
            if (!(t >= 0.0 && t <= 1.0)) throw config_error("tau1 table: tau1 outside [0,1]");
            if (i > 0 && !(e > table[i - 1].first))
                throw config_error("tau1 table: e column must increase strictly");
        }
        Tau1Curve c;
        c.source_ = Tau1Source::TabulatedFile;
        c.table_ = std::move(table);
        return c;
    }

    // Accepts "e,tau1" CSV rows; '#' comments and a header row are skipped.
    static Tau1Curve load(std::istream& is) {
        std::vector<std::pair<double, double>> table;
        std::string line;
        while (std::getline(is, line)) {
            if (line.empty() || line[0] == '#') continue;
            std::replace(line.begin(), line.end(), ',', ' ');
            std::istringstream row(line);
            double e, t;
            if (!(row >> e >> t)) {
                if (table.empty()) continue;  // header row
                throw config_error("tau1 table: malformed row '" + line + "'");
            }
            table.emplace_back(e, t);
        }
        return from_table(std::move(table));
    }

    Tau1Source source() const { return source_; }

    double e_min() const {
        return source_ == Tau1Source::ClosedFormBB84 ? 0.0 : table_.front().first;
    }
    double e_max() const {
        return source_ == Tau1Source::ClosedFormBB84 ? 0.5 : table_.back().first;
    }

    double operator()(double e) const {
        if (source_ == Tau1Source::ClosedFormBB84) return tau1_bb84(e);
        if (!(e >= e_min() && e <= e_max()))
            throw std::domain_error("tau1 curve: e outside the tabulated domain");
        const auto it = std::lower_bound(
            table_.begin(), table_.end(), e,
            [](const std::pair<double, double>& row, double v) { return row.first < v; });
        if (it == table_.begin()) return it->second;
        const auto [e1, t1] = *it;
        const auto [e0, t0] = *(it - 1);
        if (e1 == e) return t1;
        return t0 + (t1 - t0) * (e - e0) / (e1 - e0);
    }

  private:
    Tau1Source source_ = Tau1Source::ClosedFormBB84;
    std::vector<std::pair<double, double>> table_;
};

// Secure-bit creation rates per sifted bit: R_corr when errors are corrected
// (with encrypted redundancy), R_del when error positions are discarded.
inline double rate_corr(double e, const Tau1Curve& tau1) {
    return binary_information(e) - tau1(e);
}

inline double rate_del(double e, const Tau1Curve& tau1) {
    return binary_information(e) - tau1(e) * (1.0 - e) - e;
}

// Fraction of sent signals surviving sifting: 1/2 for the BB84-class pulse
// protocols, 1/3 for six-state, 2/9 for the Ekert direction sets used here,
// 1 for the orthogonal-state pair (no waste of photons).
inline double sift_factor(ProtocolId protocol) {
    switch (protocol) {
        case ProtocolId::BB84:
        case ProtocolId::B92:
        case ProtocolId::FourPlusTwo:
            return 0.5;
        case ProtocolId::SixState:
            return 1.0 / 3.0;
        case ProtocolId::Ekert:
            return 2.0 / 9.0;
        case ProtocolId::GV:
        case ProtocolId::KoashiImoto:
            return 1.0;
    }
    return 0.0;
}

// Guaranteed absolute accuracy of the root in e; the bisection itself runs
// to a much tighter interval so that |R_del| < 1e-5 holds at the returned
// point as well.
inline constexpr double kRootTolerance = 1e-5;

// Bisection root of R_del on the curve's admissible error range; the BB84
// closed form lands at the 10.5% tolerable error rate.
inline double find_tolerable_error(const Tau1Curve& tau1) {
    double lo = std::max(1e-6, tau1.e_min());
    double hi = std::min(0.499, tau1.e_max());
    if (!(lo < hi)) throw no_root_error("find_tolerable_error: empty bracket");
    double f_lo = rate_del(lo, tau1);
    double f_hi = rate_del(hi, tau1);
    if (f_lo == 0.0) return lo;
    if (f_hi == 0.0) return hi;
    if ((f_lo > 0.0) == (f_hi > 0.0))
        throw no_root_error("find_tolerable_error: R_del does not change sign on [" +
                            std::to_string(lo) + ", " + std::to_string(hi) + "]");
    while (hi - lo > 1e-10) {
        const double mid = 0.5 * (lo + hi);
        const double f_mid = rate_del(mid, tau1);
        if (f_mid == 0.0) return mid;
        if ((f_mid > 0.0) == (f_lo > 0.0)) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

inline double find_tolerable_error(ProtocolId, const Tau1Curve& tau1) {
    return find_tolerable_error(tau1);
}

struct RateCurve {
    struct Row {
        double e;
        double i_ab;
        double tau1;
        double r_corr;
        double r_del;
        double rate_per_signal;  // sift factor times R_del
    };
    ProtocolId protocol = ProtocolId::BB84;
    Tau1Source tau1_source = Tau1Source::ClosedFormBB84;
    std::vector<Row> rows;
};

inline RateCurve build_rate_curve(ProtocolId protocol, const Tau1Curve& tau1,
                                  const std::vector<double>& grid) {
    RateCurve curve;
    curve.protocol = protocol;
    curve.tau1_source = tau1.source();
    const double factor = sift_factor(protocol);
    double prev = -1.0;
    for (double e : grid) {
        if (e <= prev) throw config_error("rate curve: grid must increase strictly");
        prev = e;
        RateCurve::Row row;
        row.e = e;
        row.i_ab = binary_information(e);
        row.tau1 = tau1(e);
        row.r_corr = rate_corr(e, tau1);
        row.r_del = rate_del(e, tau1);
        row.rate_per_signal = factor * row.r_del;
        curve.rows.push_back(row);
    }
    return curve;
}

// Comma-separated table, one-line header, fixed column order.
inline void export_curve(const RateCurve& curve, std::ostream& os) {
    os << "e,I_AB,tau1,R_corr,R_del,rate_per_signal\n";
    char buf[160];
    for (const auto& r : curve.rows) {
        std::snprintf(buf, sizeof buf, "%.10g,%.10g,%.10g,%.10g,%.10g,%.10g\n", r.e, r.i_ab,
                      r.tau1, r.r_corr, r.r_del, r.rate_per_signal);
        os << buf;
    }
}

// What (i_e_tol, alpha, beta) an application actually requires is an open
// question; sessions report achieved values instead of prescribing
// thresholds.
struct SecurityStatement {
    double i_e_tol = 0.0;  // Eve's information bound on the final key, bits
    double alpha = 0.0;    // secrecy-failure probability within the attack model
    double beta = 0.0;     // probability the two final keys differ

    void validate() const {
        if (!(alpha >= 0.0 && alpha <= 1.0) || !(beta >= 0.0 && beta <= 1.0))
            throw std::domain_error("SecurityStatement: alpha, beta outside [0,1]");
    }
};

}  // namespace qkd
