#pragma once

#include <nlohmann/json.hpp>

#include <bit>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <random>

#include "speclab/common.hpp"
#include "speclab/fft.hpp"

namespace speclab {

// Frequency lattice of the dilated torus T_lambda = R/(2 pi lambda Z).
// Dual lattice Z_lambda = lambda^{-1} Z truncated to |xi| <= cutoff, so the
// stored modes are xi = k/lambda for integer k with |k| <= cutoff*lambda.
// Integer lambda keeps Z inside Z_lambda (integer modulations stay on-lattice).
struct FrequencyLattice {
    std::uint32_t lambda = 1;
    std::uint32_t cutoff = 1;

    std::int64_t half_modes() const {
        return static_cast<std::int64_t>(lambda) * cutoff;
    }
    std::size_t mode_count() const {
        return static_cast<std::size_t>(2 * half_modes() + 1);
    }
    /// Frequency of storage slot i (ascending, i = 0 is xi = -cutoff).
    double mode(std::size_t i) const {
        return static_cast<double>(static_cast<std::int64_t>(i) - half_modes()) / lambda;
    }
    /// Integer lattice index k of slot i (xi = k/lambda).
    std::int64_t index_of_slot(std::size_t i) const {
        return static_cast<std::int64_t>(i) - half_modes();
    }
    bool holds_index(std::int64_t k) const {
        return k >= -half_modes() && k <= half_modes();
    }
    std::size_t slot_of_index(std::int64_t k) const {
        return static_cast<std::size_t>(k + half_modes());
    }
    double circumference() const { return 2.0 * std::numbers::pi * lambda; }

    bool operator==(const FrequencyLattice&) const = default;
};

inline FrequencyLattice make_lattice(std::uint32_t lambda, std::uint32_t cutoff) {
    require(lambda >= 1, "make_lattice: lambda must be a positive integer");
    require(cutoff >= 1, "make_lattice: cutoff must be a positive integer");
    return FrequencyLattice{lambda, cutoff};
}

// Function on T_lambda represented by Fourier coefficients u_hat(xi) under
//   f(x) = (2 pi)^{-1/2} lambda^{-1} sum_xi u_hat(xi) e^{i x xi}.
// Fields are complex-valued; no conjugate symmetry is imposed.
struct SpectralField {
    FrequencyLattice lattice;
    std::vector<cplx> coeffs;

    SpectralField() = default;
    explicit SpectralField(const FrequencyLattice& lat)
        : lattice(lat), coeffs(lat.mode_count(), cplx(0.0, 0.0)) {}

    cplx& at_index(std::int64_t k) { return coeffs[lattice.slot_of_index(k)]; }
    const cplx& at_index(std::int64_t k) const { return coeffs[lattice.slot_of_index(k)]; }

    /// Coefficient at integer lattice index, zero outside the cutoff.
    cplx value_at(std::int64_t k) const {
        return lattice.holds_index(k) ? coeffs[lattice.slot_of_index(k)] : cplx(0.0);
    }

    void validate() const {
        if (coeffs.size() != lattice.mode_count())
            throw usage_error("SpectralField: coefficient count does not match lattice");
        for (const auto& c : coeffs)
            if (!std::isfinite(c.real()) || !std::isfinite(c.imag()))
                throw guard_error("SpectralField: non-finite coefficient");
    }

    /// Largest |k| with u_hat(k/lambda) != 0 exactly (0 for the zero field).
    std::int64_t support_radius_index() const {
        std::int64_t r = 0;
        for (std::size_t i = 0; i < coeffs.size(); ++i)
            if (coeffs[i] != cplx(0.0))
                r = std::max<std::int64_t>(r, std::llabs(lattice.index_of_slot(i)));
        return r;
    }
};

/// Plancherel (Eq. over the normalized counting measure):
/// ||f||_{L^2(T_lambda)} = ( lambda^{-1} sum_xi |u_hat(xi)|^2 )^{1/2}.
inline double spectral_l2_norm(const SpectralField& f) {
    KahanSum s;
    for (const auto& c : f.coeffs) s.add(std::norm(c));
    return std::sqrt(s.value() / f.lattice.lambda);
}

/// Default physical grid: next power of two >= 2 * mode_count. Leaves alias
/// headroom for cubic products (band <= M/4 < M/3).
inline std::size_t default_grid_size(const FrequencyLattice& lat) {
    std::size_t m = 2 * lat.mode_count();
    return std::bit_ceil(m);
}

/// Physical samples f(x_j) at x_j = 2 pi lambda j / M, j = 0..M-1.
inline std::vector<cplx> synthesize(const SpectralField& f, std::size_t sample_count) {
    const auto& lat = f.lattice;
    require(sample_count >= lat.mode_count(),
            "synthesize: sample_count must be >= mode_count (undersampled grid)");
    std::vector<cplx> bins(sample_count, cplx(0.0));
    const std::int64_t half = lat.half_modes();
    const std::size_t m = sample_count;
    for (std::size_t i = 0; i < f.coeffs.size(); ++i) {
        std::int64_t k = static_cast<std::int64_t>(i) - half;
        std::size_t bin = static_cast<std::size_t>(k >= 0 ? k : static_cast<std::int64_t>(m) + k);
        bins[bin] = f.coeffs[i];
    }
    std::vector<cplx> out;
    Dft::backward(bins, out);
    const double scale = 1.0 / (std::sqrt(2.0 * std::numbers::pi) * lat.lambda);
    for (auto& v : out) v *= scale;
    return out;
}

/// Inverse of synthesize on band-limited data (equispaced samples on [0, 2 pi lambda)).
inline SpectralField analyze(const std::vector<cplx>& samples, const FrequencyLattice& lat) {
    require(samples.size() >= lat.mode_count(),
            "analyze: sample count must be >= mode_count for the declared lattice");
    std::vector<cplx> bins;
    Dft::forward(samples, bins);
    const std::size_t m = samples.size();
    const double scale = std::sqrt(2.0 * std::numbers::pi) * lat.lambda / static_cast<double>(m);
    SpectralField f(lat);
    const std::int64_t half = lat.half_modes();
    for (std::size_t i = 0; i < f.coeffs.size(); ++i) {
        std::int64_t k = static_cast<std::int64_t>(i) - half;
        std::size_t bin = static_cast<std::size_t>(k >= 0 ? k : static_cast<std::int64_t>(m) + k);
        f.coeffs[i] = bins[bin] * scale;
    }
    return f;
}

/// Spectral convolution (fg)^(xi) = (2 pi)^{-1/2} lambda^{-1} sum_eta
/// u_hat(eta) g_hat(xi - eta), truncated to the lattice cutoff.
inline SpectralField convolve(const SpectralField& f, const SpectralField& g) {
    require(f.lattice == g.lattice, "convolve: lattice mismatch");
    const auto& lat = f.lattice;
    const std::int64_t half = lat.half_modes();
    SpectralField out(lat);
    const double scale = 1.0 / (std::sqrt(2.0 * std::numbers::pi) * lat.lambda);
    for (std::int64_t k = -half; k <= half; ++k) {
        KahanSum re, im;
        for (std::int64_t j = -half; j <= half; ++j) {
            std::int64_t d = k - j;
            if (d < -half || d > half) continue;
            cplx t = f.at_index(j) * g.at_index(d);
            re.add(t.real());
            im.add(t.imag());
        }
        out.at_index(k) = scale * cplx(re.value(), im.value());
    }
    return out;
}

namespace detail {
/// Standard complex Gaussian (E|g|^2 = 1) from explicit Box-Muller so the
/// stream is bit-reproducible across platforms for a fixed seed.
inline cplx standard_complex_gaussian(std::mt19937_64& rng) {
    // map to (0,1]: (x + 1) * 2^-64
    auto unit = [&rng]() {
        return (static_cast<double>(rng() >> 11) + 1.0) * 0x1.0p-53;
    };
    double u1 = unit();
    double u2 = unit();
    double r = std::sqrt(-std::log(u1));
    double th = 2.0 * std::numbers::pi * u2;
    return cplx(r * std::cos(th), r * std::sin(th));
}
}  // namespace detail

/// Random data u_hat(n) = sqrt(2 pi) g_n / <n>^alpha with independent standard
/// complex Gaussians g_n, on the unit torus. Deterministic per seed.
inline SpectralField random_gaussian_data(const FrequencyLattice& lat, double alpha,
                                          std::uint64_t seed) {
    require(lat.lambda == 1, "random_gaussian_data: generator is defined on the unit torus");
    require(alpha >= 0.0, "random_gaussian_data: alpha must be >= 0");
    std::mt19937_64 rng(seed);
    SpectralField f(lat);
    const double root2pi = std::sqrt(2.0 * std::numbers::pi);
    const std::int64_t half = lat.half_modes();
    for (std::int64_t n = -half; n <= half; ++n) {
        cplx g = detail::standard_complex_gaussian(rng);
        f.at_index(n) = root2pi * g / std::pow(jbracket(static_cast<double>(n)), alpha);
    }
    return f;
}

/// Test-data generator: Gaussian coefficients with a polynomial decay
/// envelope on modes |xi| <= support_radius (frequency units), any lambda.
inline SpectralField random_band_limited(const FrequencyLattice& lat, double support_radius,
                                         double decay, std::uint64_t seed) {
    require(support_radius > 0.0, "random_band_limited: support radius must be positive");
    std::mt19937_64 rng(seed);
    SpectralField f(lat);
    const std::int64_t half = lat.half_modes();
    for (std::int64_t k = -half; k <= half; ++k) {
        double xi = static_cast<double>(k) / lat.lambda;
        if (std::abs(xi) > support_radius) continue;
        cplx g = detail::standard_complex_gaussian(rng);
        f.at_index(k) = g / std::pow(jbracket(xi), decay);
    }
    return f;
}

/// Rescale coefficients in place so that the given norm functional hits the target.
template <typename NormFn>
inline void normalize_to(SpectralField& f, double target, NormFn&& norm) {
    double cur = norm(f);
    require(cur > 0.0, "normalize_to: zero field");
    double s = target / cur;
    for (auto& c : f.coeffs) c *= s;
}

// ---- serialization ---------------------------------------------------------

inline nlohmann::json field_to_json(const SpectralField& f) {
    nlohmann::json j;
    j["lambda"] = f.lattice.lambda;
    j["cutoff"] = f.lattice.cutoff;
    auto coeffs = nlohmann::json::array();
    for (const auto& c : f.coeffs) coeffs.push_back({c.real(), c.imag()});
    j["coeffs"] = std::move(coeffs);
    return j;
}

inline SpectralField field_from_json(const nlohmann::json& j) {
    FrequencyLattice lat = make_lattice(j.at("lambda").get<std::uint32_t>(),
                                        j.at("cutoff").get<std::uint32_t>());
    SpectralField f(lat);
    const auto& coeffs = j.at("coeffs");
    require(coeffs.size() == f.coeffs.size(), "field_from_json: coefficient count mismatch");
    for (std::size_t i = 0; i < f.coeffs.size(); ++i)
        f.coeffs[i] = cplx(coeffs[i][0].get<double>(), coeffs[i][1].get<double>());
    f.validate();
    return f;
}

static_assert(std::endian::native == std::endian::little,
              "binary field dumps assume a little-endian host");

/// Binary dump: u32 lambda, u32 cutoff, then mode_count little-endian f64
/// (re, im) pairs in ascending mode order.
inline void field_to_binary(const SpectralField& f, std::ostream& os) {
    std::uint32_t hdr[2] = {f.lattice.lambda, f.lattice.cutoff};
    os.write(reinterpret_cast<const char*>(hdr), sizeof(hdr));
    os.write(reinterpret_cast<const char*>(f.coeffs.data()),
             static_cast<std::streamsize>(f.coeffs.size() * sizeof(cplx)));
}

inline SpectralField field_from_binary(std::istream& is) {
    std::uint32_t hdr[2];
    is.read(reinterpret_cast<char*>(hdr), sizeof(hdr));
    require(is.good(), "field_from_binary: truncated header");
    SpectralField f(make_lattice(hdr[0], hdr[1]));
    is.read(reinterpret_cast<char*>(f.coeffs.data()),
            static_cast<std::streamsize>(f.coeffs.size() * sizeof(cplx)));
    require(is.good(), "field_from_binary: truncated payload");
    f.validate();
    return f;
}

inline void save_field(const SpectralField& f, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    require(os.good(), "save_field: cannot open " + path);
    if (path.size() >= 5 && path.substr(path.size() - 5) == ".json")
        os << field_to_json(f).dump(2) << "\n";
    else
        field_to_binary(f, os);
}

inline SpectralField load_field(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    require(is.good(), "load_field: cannot open " + path);
    if (path.size() >= 5 && path.substr(path.size() - 5) == ".json") {
        nlohmann::json j;
        is >> j;
        return field_from_json(j);
    }
    return field_from_binary(is);
}

}  // namespace speclab
