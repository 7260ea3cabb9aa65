#pragma once

#include <algorithm>
#include <array>
#include <optional>

#include "speclab/symmetry.hpp"

namespace speclab {

namespace detail {

/// Gauss-Legendre nodes/weights on [0,1], cached per order.
inline const std::vector<std::pair<double, double>>& gauss_legendre_01(int n) {
    static std::map<int, std::vector<std::pair<double, double>>> cache;
    static std::mutex mu;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;
    std::vector<std::pair<double, double>> pts(n);
    for (int i = 0; i < n; ++i) {
        // Newton iteration from the Chebyshev initial guess, on [-1,1]
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = 0.0;
            for (int j = 0; j < n; ++j) {
                double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j + 1.0) * x * p1 - j * p2) / (j + 1.0);
            }
            pp = n * (x * p0 - p1) / (x * x - 1.0);
            double dx = p0 / pp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        pts[i] = {0.5 * (1.0 - x), 1.0 / ((1.0 - x * x) * pp * pp)};
    }
    std::sort(pts.begin(), pts.end());
    return cache.emplace(n, std::move(pts)).first->second;
}

/// Integer block index n with xi = k/lambda in I_n = [n - 1/2, n + 1/2).
inline std::int64_t block_index(std::int64_t k, std::int64_t lambda) {
    return floor_div(2 * k + lambda, 2 * lambda);
}

}  // namespace detail

/// Sobolev norm ( int <xi>^{2 theta} |u_hat|^2 (d xi)_lambda )^{1/2}.
inline double sobolev_norm(const SpectralField& f, double theta) {
    KahanSum s;
    const auto& lat = f.lattice;
    for (std::size_t i = 0; i < f.coeffs.size(); ++i)
        s.add(std::pow(jbracket(lat.mode(i)), 2.0 * theta) * std::norm(f.coeffs[i]));
    return std::sqrt(s.value() / lat.lambda);
}

/// Fourier-Lebesgue norm || <xi>^s u_hat ||_{L^p(Z_lambda, (d xi)_lambda)}.
inline double fourier_lebesgue_norm(const SpectralField& f, double s, double p) {
    require(p >= 2.0 && std::isfinite(p), "fourier_lebesgue_norm: p must lie in [2, inf)");
    require(s >= 0.0, "fourier_lebesgue_norm: s must be >= 0");
    KahanSum acc;
    const auto& lat = f.lattice;
    for (std::size_t i = 0; i < f.coeffs.size(); ++i) {
        double a = std::abs(f.coeffs[i]);
        if (a == 0.0) continue;
        acc.add(std::pow(jbracket(lat.mode(i)), s * p) * std::pow(a, p));
    }
    return std::pow(acc.value() / lat.lambda, 1.0 / p);
}

struct NormResult {
    double value = 0.0;
    double tail = 0.0;   // estimated contribution restored/neglected beyond the window
    bool complete = true;
};

/// Modulation norm with sharp windows I_n = [n-1/2, n+1/2):
/// || <n>^s || u_hat ||_{L^2(I_n cap Z_lambda, (d xi)_lambda)} ||_{l^p_n}.
/// The block sum is finite for band-limited fields; a window smaller than the
/// occupied block range is flagged, never silently truncated.
inline NormResult modulation_norm(const SpectralField& f, double s, double p,
                                  std::int64_t window_radius = 0) {
    require(p >= 2.0 && std::isfinite(p), "modulation_norm: p must lie in [2, inf)");
    require(s >= 0.0, "modulation_norm: s must be >= 0");
    const auto& lat = f.lattice;
    const std::int64_t lam = lat.lambda;
    const std::int64_t nmax = detail::block_index(lat.half_modes(), lam);
    const std::int64_t window = window_radius > 0 ? window_radius : nmax;
    std::map<std::int64_t, KahanSum> blocks;
    for (std::size_t i = 0; i < f.coeffs.size(); ++i) {
        double a2 = std::norm(f.coeffs[i]);
        if (a2 == 0.0) continue;
        blocks[detail::block_index(lat.index_of_slot(i), lam)].add(a2);
    }
    NormResult r;
    KahanSum acc, skipped;
    for (const auto& [n, mass] : blocks) {
        double term = std::pow(jbracket(static_cast<double>(n)), s * p) *
                      std::pow(mass.value() / lam, p / 2.0);
        if (std::llabs(n) <= window)
            acc.add(term);
        else
            skipped.add(term);
    }
    r.complete = (skipped.value() == 0.0);
    r.value = std::pow(acc.value(), 1.0 / p);
    r.tail = std::pow(acc.value() + skipped.value(), 1.0 / p) - r.value;
    return r;
}

namespace detail {

/// W(x) = int <xi - x>^{2 theta} |u_hat(xi)|^2 (d xi)_lambda and its x-derivative.
struct ModulatedWeight {
    const SpectralField& f;
    double theta;
    double operator()(double x) const {
        KahanSum s;
        const auto& lat = f.lattice;
        for (std::size_t i = 0; i < f.coeffs.size(); ++i) {
            double a2 = std::norm(f.coeffs[i]);
            if (a2 == 0.0) continue;
            double d = lat.mode(i) - x;
            s.add(std::pow(1.0 + d * d, theta) * a2);
        }
        return s.value() / lat.lambda;
    }
    double derivative(double x) const {
        KahanSum s;
        const auto& lat = f.lattice;
        for (std::size_t i = 0; i < f.coeffs.size(); ++i) {
            double a2 = std::norm(f.coeffs[i]);
            if (a2 == 0.0) continue;
            double d = lat.mode(i) - x;  // d/dx (1+d^2)^theta = -2 theta d (1+d^2)^{theta-1}
            s.add(-2.0 * theta * d * std::pow(1.0 + d * d, theta - 1.0) * a2);
        }
        return s.value() / lat.lambda;
    }
};

}  // namespace detail

/// Modulated Sobolev norm
///   ( sum_n <n>^{sp} || <xi - n>^theta u_hat ||_{L^2(Z_lambda)}^p )^{1/p}
/// over integer modulations n. The outer sum is evaluated exactly on
/// |n| <= N and completed by an integral-plus-correction tail estimate,
/// which is reported. Non-convergent configurations (theta >= 0 with a
/// nonzero field) are rejected; a window too small for the requested
/// tolerance shows up as a large reported tail, never a silent truncation.
inline NormResult modulated_sobolev_norm(const SpectralField& f, double theta, double p,
                                         double s = 0.0, std::int64_t window_radius = 0) {
    require(p >= 2.0 && std::isfinite(p), "modulated_sobolev_norm: p must lie in [2, inf)");
    require(s >= 0.0, "modulated_sobolev_norm: s must be >= 0");
    bool zero = true;
    for (const auto& c : f.coeffs)
        if (c != cplx(0.0)) {
            zero = false;
            break;
        }
    if (zero) return {0.0, 0.0, true};
    require(theta < 0.0, "modulated_sobolev_norm: theta must be negative for a nonzero field");
    if (p * (theta + s) >= -1.0)
        return {std::numeric_limits<double>::infinity(),
                std::numeric_limits<double>::infinity(), false};

    const auto& lat = f.lattice;
    const std::int64_t window =
        std::max<std::int64_t>(window_radius, std::max<std::int64_t>(lat.cutoff + 64, 512));
    detail::ModulatedWeight W{f, theta};
    auto g = [&](double x) {
        return std::pow(jbracket(x), s * p) * std::pow(W(x), p / 2.0);
    };
    KahanSum core;
    for (std::int64_t n = -window; n <= window; ++n) core.add(g(static_cast<double>(n)));

    // tail: sum_{n > window} g(n) = int_{window+1/2}^inf g + g'(window+1/2)/24 + ...
    auto g_deriv = [&](double x) {
        double w = W(x);
        double jb = jbracket(x);
        return s * p * x * std::pow(jb, s * p - 2.0) * std::pow(w, p / 2.0) +
               std::pow(jb, s * p) * (p / 2.0) * std::pow(w, p / 2.0 - 1.0) * W.derivative(x);
    };
    auto one_sided_tail = [&](double sign) {
        const double a = window + 0.5;
        KahanSum integ;
        for (const auto& [t, w] : detail::gauss_legendre_01(64)) {
            double x = a / (t * t);  // x = a/t^2 maps (0,1] onto [a, inf)
            integ.add(w * g(sign * x) * 2.0 * a / (t * t * t));
        }
        return integ.value() + sign * g_deriv(sign * a) / 24.0;
    };
    double tail = one_sided_tail(+1.0) + one_sided_tail(-1.0);
    NormResult r;
    double total = core.value() + tail;
    r.value = std::pow(total, 1.0 / p);
    r.tail = r.value - std::pow(core.value(), 1.0 / p);
    r.complete = true;
    return r;
}

// ---- relation reports -------------------------------------------------------

struct EquivalenceReport {
    double min_ratio = 0.0;
    double max_ratio = 0.0;
    double mean_ratio = 0.0;
    std::size_t skipped_zero = 0;
    std::vector<double> ratios;
    double spread() const { return min_ratio > 0.0 ? max_ratio / min_ratio : 0.0; }
    bool within(double lo, double hi) const { return min_ratio >= lo && max_ratio <= hi; }
};

/// Ratio statistics of ||f||_{MH^{theta,p}_s} / ||f||_{M^{2,p}_s} over a corpus.
/// Valid in the equivalence regime theta + s < -1/2.
inline EquivalenceReport equivalence_report(const std::vector<SpectralField>& corpus,
                                            double theta, double p, double s = 0.0) {
    require(theta + s < -0.5, "equivalence_report: requires theta + s < -1/2");
    EquivalenceReport rep;
    for (const auto& f : corpus) {
        double m = modulation_norm(f, s, p).value;
        if (m == 0.0) {
            ++rep.skipped_zero;
            continue;
        }
        rep.ratios.push_back(modulated_sobolev_norm(f, theta, p, s).value / m);
    }
    if (rep.ratios.empty()) return rep;
    rep.min_ratio = *std::min_element(rep.ratios.begin(), rep.ratios.end());
    rep.max_ratio = *std::max_element(rep.ratios.begin(), rep.ratios.end());
    KahanSum mean;
    for (double r : rep.ratios) mean.add(r);
    rep.mean_ratio = mean.value() / rep.ratios.size();
    return rep;
}

struct ScalingCheck {
    double fl_unit = 0.0;       // ||f||_{FL^{s,p}(T)}
    double mod_scaled = 0.0;    // ||f_lambda||_{M^{2,p}_s(T_lambda)}
    double c_lower = 0.0;       // measured constant in FL <= C sqrt(lambda) M
    double c_upper = 0.0;       // measured constant in M <= C lambda^{-1/p} FL
};

/// Measures the two scaling constants relating ||f||_{FL^p(T)} and
/// ||f_lambda||_{M^{2,p}(T_lambda)} for f_lambda(x) = lambda^{-1} f(x/lambda).
inline ScalingCheck scaling_check(const SpectralField& f, std::uint32_t lambda, double p,
                                  double s = 0.0) {
    require(f.lattice.lambda == 1, "scaling_check: field must live on the unit torus");
    ScalingCheck out;
    out.fl_unit = fourier_lebesgue_norm(f, s, p);
    SpectralField fl = rescale(f, lambda);
    out.mod_scaled = modulation_norm(fl, s, p).value;
    if (out.mod_scaled > 0.0) out.c_lower = out.fl_unit / (std::sqrt(double(lambda)) * out.mod_scaled);
    if (out.fl_unit > 0.0)
        out.c_upper = out.mod_scaled * std::pow(double(lambda), 1.0 / p) / out.fl_unit;
    return out;
}

// ---- named norm specifications (CSV reporting) ------------------------------

enum class NormKind { Sobolev, FourierLebesgue, Modulation, ModulatedSobolev };

struct NormSpec {
    NormKind kind = NormKind::Sobolev;
    double theta = 0.0;
    double s = 0.0;
    double p = 2.0;
    std::int64_t window_radius = 0;
};

inline NormResult evaluate_norm(const NormSpec& spec, const SpectralField& f) {
    switch (spec.kind) {
        case NormKind::Sobolev:
            return {sobolev_norm(f, spec.theta), 0.0, true};
        case NormKind::FourierLebesgue:
            return {fourier_lebesgue_norm(f, spec.s, spec.p), 0.0, true};
        case NormKind::Modulation:
            return modulation_norm(f, spec.s, spec.p, spec.window_radius);
        case NormKind::ModulatedSobolev:
            return modulated_sobolev_norm(f, spec.theta, spec.p, spec.s, spec.window_radius);
    }
    throw usage_error("evaluate_norm: unknown kind");
}

inline std::string norm_kind_name(NormKind k) {
    switch (k) {
        case NormKind::Sobolev: return "sobolev";
        case NormKind::FourierLebesgue: return "fourier_lebesgue";
        case NormKind::Modulation: return "modulation";
        case NormKind::ModulatedSobolev: return "modulated_sobolev";
    }
    return "?";
}

/// CSV row: field_id, kind, theta, s, p, value, tail_estimate
inline std::string norm_csv_row(const std::string& field_id, const NormSpec& spec,
                                const NormResult& res) {
    return field_id + "," + norm_kind_name(spec.kind) + "," + fmt_g17(spec.theta) + "," +
           fmt_g17(spec.s) + "," + fmt_g17(spec.p) + "," + fmt_g17(res.value) + "," +
           fmt_g17(res.tail);
}

}  // namespace speclab
