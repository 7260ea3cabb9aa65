#pragma once

#include "speclab/lattice.hpp"

namespace speclab {

/// L^2 mass (squared, in the (d xi)_lambda measure) dropped when a transform
/// pushes modes past the cutoff.
struct TruncationReport {
    double dropped_mass_sq = 0.0;
    std::int64_t dropped_modes = 0;
};

/// f_lambda(x) = lambda^{-1} f(lambda^{-1} x) as a field on T_lambda:
/// u_hat_lambda(xi) = u_hat(lambda xi). Exact; every source mode m lands on
/// the lattice point xi = m/lambda.
inline SpectralField rescale(const SpectralField& f, std::uint32_t lambda,
                             std::uint32_t target_cutoff = 0) {
    require(f.lattice.lambda == 1, "rescale: source field must live on the unit torus");
    require(lambda >= 1, "rescale: lambda must be a positive integer");
    std::uint32_t cutoff = target_cutoff;
    if (cutoff == 0)
        cutoff = static_cast<std::uint32_t>((f.lattice.cutoff + lambda - 1) / lambda);
    FrequencyLattice lat = make_lattice(lambda, cutoff);
    require(lat.half_modes() >= f.lattice.half_modes(),
            "rescale: target cutoff insufficient to hold the source band");
    SpectralField out(lat);
    for (std::int64_t m = -f.lattice.half_modes(); m <= f.lattice.half_modes(); ++m)
        out.at_index(m) = f.at_index(m);
    return out;
}

/// Inverse of rescale applied to an evolved field: v(x) = lambda u(lambda x)
/// on T with v_hat(m) = u_hat(m/lambda). Exact and total (the index map is
/// a bijection between the lattices).
inline SpectralField unscale(const SpectralField& f) {
    std::uint32_t cutoff =
        static_cast<std::uint32_t>(f.lattice.half_modes());
    SpectralField out(make_lattice(1, std::max<std::uint32_t>(cutoff, 1)));
    for (std::int64_t k = -f.lattice.half_modes(); k <= f.lattice.half_modes(); ++k)
        out.at_index(k) = f.at_index(k);
    return out;
}

namespace detail {
/// Shift u_hat(xi) -> phase(xi) * u_hat(xi + shift) with integer shift
/// (in frequency units), re-truncating to the lattice.
template <typename PhaseFn>
inline SpectralField shifted_transform(const SpectralField& f, std::int64_t shift,
                                       PhaseFn&& phase, TruncationReport* rep) {
    const auto& lat = f.lattice;
    const std::int64_t half = lat.half_modes();
    const std::int64_t shift_idx = shift * lat.lambda;
    SpectralField out(lat);
    double dropped = 0.0;
    std::int64_t ndrop = 0;
    for (std::int64_t k = -half; k <= half; ++k) {
        std::int64_t src = k + shift_idx;
        if (lat.holds_index(src)) {
            double xi = static_cast<double>(k) / lat.lambda;
            out.at_index(k) = phase(xi) * f.at_index(src);
        }
    }
    // occupied modes with no destination slot
    for (std::int64_t src = -half; src <= half; ++src) {
        std::int64_t k = src - shift_idx;
        if (!lat.holds_index(k) && f.at_index(src) != cplx(0.0)) {
            dropped += std::norm(f.at_index(src));
            ++ndrop;
        }
    }
    if (rep) {
        rep->dropped_mass_sq = dropped / lat.lambda;
        rep->dropped_modes = ndrop;
    }
    return out;
}
}  // namespace detail

/// Galilean boost of the cubic Schroedinger flow:
/// u^b(x,t) = e^{-i b x} e^{i b^2 t} u(x - 2 b t, t), i.e.
/// u_hat^b(xi) = e^{-i b^2 t} e^{-2 i b xi t} u_hat(xi + b).
/// Torus fields require integer beta.
inline SpectralField galilean_nls(const SpectralField& f, std::int64_t beta, double t,
                                  TruncationReport* rep = nullptr) {
    return detail::shifted_transform(
        f, beta,
        [beta, t](double xi) {
            double b = static_cast<double>(beta);
            return std::exp(cplx(0.0, -b * b * t - 2.0 * b * xi * t));
        },
        rep);
}

/// Modulation M_n f(x) = e^{-i n x} f(x): a pure frequency shift,
/// galilean_nls at t = 0.
inline SpectralField modulate(const SpectralField& f, std::int64_t n,
                              TruncationReport* rep = nullptr) {
    return detail::shifted_transform(
        f, n, [](double) { return cplx(1.0, 0.0); }, rep);
}

/// Gauge transform J(u) = e^{sgn * 4 i t mu} u with mu the mean intensity;
/// sign_exponent = -1 gives e^{-4 i t mu} (the top sign of the equation pair).
inline SpectralField gauge(const SpectralField& f, double mu, double t,
                           int sign_exponent = -1) {
    require(sign_exponent == 1 || sign_exponent == -1, "gauge: sign must be +-1");
    cplx phase = std::exp(cplx(0.0, 4.0 * sign_exponent * t * mu));
    SpectralField out = f;
    for (auto& c : out.coeffs) c *= phase;
    return out;
}

/// Mean intensity mu = avg_{T_lambda} |u|^2 dx (normalized average).
inline double mean_intensity(const SpectralField& f) {
    double l2 = spectral_l2_norm(f);
    return l2 * l2 / f.lattice.circumference();
}

/// Galilean transform of the mKdV flow:
/// G_b(u)(x,t) = e^{-i b x} e^{2 i b^3 t} u(x - 3 b^2 t, t), i.e.
/// u_hat^b(xi) = e^{-i b^3 t} e^{-3 i b^2 xi t} u_hat(xi + b).
/// Reduces to modulate(f, beta) at t = 0.
inline SpectralField galilean_mkdv(const SpectralField& f, std::int64_t beta, double t,
                                   TruncationReport* rep = nullptr) {
    return detail::shifted_transform(
        f, beta,
        [beta, t](double xi) {
            double b = static_cast<double>(beta);
            return std::exp(cplx(0.0, -b * b * b * t - 3.0 * b * b * xi * t));
        },
        rep);
}

}  // namespace speclab
