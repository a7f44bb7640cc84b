#pragma once

// Independent oracles used by the test suites. Everything here recomputes
// expected values through a different route than the library (extended
// precision, brute-force pair loops, exhaustive threshold enumeration,
// quadrature) and must stay decoupled from the implementation under test.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <vector>

namespace oracle {

// ---------------------------------------------------------------------------
// Extended-precision score oracles
// ---------------------------------------------------------------------------

// 1 - max softmax evaluated as the non-max probability mass, in long double.
inline long double msp_long_double(const std::vector<double>& logits) {
    size_t argmax = 0;
    for (size_t i = 1; i < logits.size(); ++i) {
        if (logits[i] > logits[argmax]) argmax = i;
    }
    const long double m = logits[argmax];
    long double denom = 0.0L;
    long double others = 0.0L;
    for (size_t i = 0; i < logits.size(); ++i) {
        const long double e = expl(static_cast<long double>(logits[i]) - m);
        denom += e;
        if (i != argmax) others += e;
    }
    return others / denom;
}

// -T * logsumexp(z/T) evaluated in long double.
inline long double energy_oracle(const std::vector<double>& logits, long double t = 1.0L) {
    long double m = logits[0];
    for (double z : logits) m = std::max<long double>(m, z);
    long double s = 0.0L;
    for (double z : logits) s += expl((static_cast<long double>(z) - m) / t);
    return -(m + t * logl(s));
}

// ---------------------------------------------------------------------------
// Ranking-metric oracles (brute force)
// ---------------------------------------------------------------------------

// P(random unknown outranks random known), ties 0.5, by explicit pair loop.
inline double auroc_pairs(const std::vector<double>& scores, const std::vector<bool>& is_unknown) {
    double wins = 0.0;
    size_t n_pos = 0, n_neg = 0;
    for (size_t i = 0; i < scores.size(); ++i) {
        if (!is_unknown[i]) continue;
        ++n_pos;
        for (size_t j = 0; j < scores.size(); ++j) {
            if (is_unknown[j]) continue;
            if (scores[i] > scores[j]) wins += 1.0;
            else if (scores[i] == scores[j]) wins += 0.5;
        }
    }
    for (bool u : is_unknown) n_neg += u ? 0 : 1;
    return wins / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

// Step-sum area over distinct thresholds in descending order, every count
// recomputed by a full pass (predicted positive = score >= t).
inline double aupr_enumeration(const std::vector<double>& scores,
                               const std::vector<bool>& is_unknown) {
    std::vector<double> thresholds = scores;
    std::sort(thresholds.begin(), thresholds.end(), std::greater<>());
    thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());

    size_t total_pos = 0;
    for (bool u : is_unknown) total_pos += u ? 1 : 0;

    double area = 0.0;
    double prev_recall = 0.0;
    for (double t : thresholds) {
        size_t tp = 0, fp = 0;
        for (size_t i = 0; i < scores.size(); ++i) {
            if (scores[i] >= t) {
                if (is_unknown[i]) ++tp;
                else ++fp;
            }
        }
        const double recall = static_cast<double>(tp) / static_cast<double>(total_pos);
        const double precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
        area += (recall - prev_recall) * precision;
        prev_recall = recall;
    }
    return area;
}

struct FprOracle {
    double fpr = 0.0;
    double threshold = 0.0;
};

inline FprOracle fpr_at_recall_scan(const std::vector<double>& scores,
                                    const std::vector<bool>& is_unknown, double target) {
    std::vector<double> thresholds = scores;
    std::sort(thresholds.begin(), thresholds.end(), std::greater<>());
    thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());

    size_t total_pos = 0, total_neg = 0;
    for (bool u : is_unknown) ++(u ? total_pos : total_neg);

    for (double t : thresholds) {
        size_t tp = 0, fp = 0;
        for (size_t i = 0; i < scores.size(); ++i) {
            if (scores[i] >= t) {
                if (is_unknown[i]) ++tp;
                else ++fp;
            }
        }
        if (static_cast<double>(tp) / static_cast<double>(total_pos) >= target) {
            FprOracle out;
            out.threshold = t;
            out.fpr = total_neg == 0 ? 0.0
                                     : static_cast<double>(fp) / static_cast<double>(total_neg);
            return out;
        }
    }
    return {1.0, thresholds.back()};
}

// ---------------------------------------------------------------------------
// Statistics oracles
// ---------------------------------------------------------------------------

inline double t_density(double x, double dof) {
    // Gamma((v+1)/2) / (sqrt(v pi) Gamma(v/2)) (1 + x^2/v)^(-(v+1)/2)
    const double log_c = std::lgamma(0.5 * (dof + 1.0)) - std::lgamma(0.5 * dof) -
                         0.5 * std::log(dof * 3.14159265358979323846);
    return std::exp(log_c - 0.5 * (dof + 1.0) * std::log1p(x * x / dof));
}

// Adaptive Simpson integration of the t density.
inline double simpson_rec(double (*f)(double, double), double dof, double a, double b, double fa,
                          double fb, double fm, double eps, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm, dof);
    const double frm = f(rm, dof);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if (depth <= 0 || std::abs(left + right - whole) < 15.0 * eps) {
        return left + right + (left + right - whole) / 15.0;
    }
    return simpson_rec(f, dof, a, m, fa, fm, flm, 0.5 * eps, depth - 1) +
           simpson_rec(f, dof, m, b, fm, fb, frm, 0.5 * eps, depth - 1);
}

// F(t) for t >= 0 via quadrature of the density on [0, t].
inline double t_cdf_quadrature(double t, double dof) {
    if (t < 0.0) return 1.0 - t_cdf_quadrature(-t, dof);
    const double integral = simpson_rec(&t_density, dof, 0.0, t, t_density(0.0, dof),
                                        t_density(t, dof), t_density(0.5 * t, dof), 1e-12, 40);
    return 0.5 + integral;
}

// Two-sided paired-t p by quadrature.
inline double paired_p_quadrature(double t, double dof) {
    return 2.0 * (1.0 - t_cdf_quadrature(std::abs(t), dof));
}

// Tie-free Spearman via the classic d^2 formula.
inline double spearman_d2(const std::vector<double>& x, const std::vector<double>& y) {
    const size_t n = x.size();
    auto ranks = [&](const std::vector<double>& v) {
        std::vector<size_t> order(n);
        std::iota(order.begin(), order.end(), size_t{0});
        std::sort(order.begin(), order.end(), [&](size_t a, size_t b) { return v[a] < v[b]; });
        std::vector<double> r(n);
        for (size_t i = 0; i < n; ++i) r[order[i]] = static_cast<double>(i + 1);
        return r;
    };
    const std::vector<double> rx = ranks(x);
    const std::vector<double> ry = ranks(y);
    double d2 = 0.0;
    for (size_t i = 0; i < n; ++i) {
        const double d = rx[i] - ry[i];
        d2 += d * d;
    }
    const double dn = static_cast<double>(n);
    return 1.0 - 6.0 * d2 / (dn * (dn * dn - 1.0));
}

// Standard normal CDF.
inline double phi(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// Closed-form AUROC for two normal score populations.
inline double normal_overlap_auroc(double mu_known, double sd_known, double mu_unknown,
                                   double sd_unknown) {
    return phi((mu_unknown - mu_known) / std::sqrt(sd_known * sd_known + sd_unknown * sd_unknown));
}

// ---------------------------------------------------------------------------
// Small numeric helpers
// ---------------------------------------------------------------------------

inline long double shannon_long_double(const std::vector<double>& v) {
    long double h = 0.0L;
    for (double p : v) {
        if (p > 0.0) h -= static_cast<long double>(p) * logl(static_cast<long double>(p));
    }
    return h;
}

inline long double simpson_long_double(const std::vector<double>& v) {
    long double s = 0.0L;
    for (double p : v) s += static_cast<long double>(p) * static_cast<long double>(p);
    return 1.0L - s;
}

// Deterministic test-data generator, independent of the library RNG.
struct TestRand {
    uint64_t state;
    explicit TestRand(uint64_t seed) : state(seed) {}
    uint64_t next() {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        return state;
    }
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    size_t index(size_t n) { return static_cast<size_t>(next() % n); }
    double normal() {
        // Box-Muller on two uniforms.
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * uniform());
    }
};

} // namespace oracle
