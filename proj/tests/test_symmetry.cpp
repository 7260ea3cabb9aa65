#include <catch2/catch_amalgamated.hpp>

#include <numbers>

#include "speclab/spaces.hpp"
#include "speclab/symmetry.hpp"

using namespace speclab;
using Catch::Approx;

namespace {
// direct evaluation of the synthesis sum at an arbitrary point
cplx eval_at(const SpectralField& f, double x) {
    cplx acc(0.0);
    for (std::size_t i = 0; i < f.coeffs.size(); ++i)
        acc += f.coeffs[i] * std::exp(cplx(0.0, x * f.lattice.mode(i)));
    return acc / (std::sqrt(2.0 * std::numbers::pi) * double(f.lattice.lambda));
}

double max_abs_diff(const SpectralField& a, const SpectralField& b) {
    REQUIRE(a.lattice == b.lattice);
    double m = 0.0;
    for (std::size_t i = 0; i < a.coeffs.size(); ++i)
        m = std::max(m, std::abs(a.coeffs[i] - b.coeffs[i]));
    return m;
}
}  // namespace

TEST_CASE("rescale basics") {
    auto lat = make_lattice(1, 6);
    auto f = random_band_limited(lat, 6.0, 0.3, 4);

    auto same = rescale(f, 1, 6);
    REQUIRE(max_abs_diff(same, f) == 0.0);

    // single mode m on T -> amplitude-preserved mode at xi = m/lambda
    SpectralField mono(lat);
    mono.at_index(3) = cplx(0.5, 1.0);
    auto ml = rescale(mono, 4, 2);
    REQUIRE(ml.at_index(3) == mono.at_index(3));  // lattice index 3 <-> xi = 3/4
    REQUIRE(spectral_l2_norm(ml) == Approx(spectral_l2_norm(mono) / 2.0).epsilon(1e-14));

    // physical-space change of variables: f_lambda(x) = f(x/lambda)/lambda
    auto fl = rescale(f, 3, 2);
    for (double x : {0.1, 1.7, 4.0}) {
        REQUIRE(std::abs(eval_at(fl, x) - eval_at(f, x / 3.0) / 3.0) < 1e-13);
    }
    // discrete L^2 oracle on the sampling grids
    std::size_t m = 64;
    auto su = synthesize(f, m);
    auto sl = synthesize(fl, 3 * m);
    KahanSum pu, pl;
    for (auto& v : su) pu.add(std::norm(v));
    for (auto& v : sl) pl.add(std::norm(v));
    double l2u = std::sqrt(pu.value() * lat.circumference() / double(m));
    double l2l = std::sqrt(pl.value() * fl.lattice.circumference() / double(3 * m));
    REQUIRE(l2l == Approx(l2u / std::sqrt(3.0)).epsilon(1e-12));

    REQUIRE_THROWS_AS(rescale(rescale(f, 2), 2), usage_error);     // source not on T
    REQUIRE_THROWS_AS(rescale(f, 2, 1), usage_error);              // cutoff too small
}

TEST_CASE("galilean boost of the schroedinger flow") {
    auto lat = make_lattice(1, 16);
    auto f = random_band_limited(lat, 6.0, 0.4, 8);

    auto id = galilean_nls(f, 0, 0.7);
    REQUIRE(max_abs_diff(id, f) < 1e-15);

    // t = 0: pure modulation, |u_hat^b(xi)| = |u_hat(xi + b)|
    auto b2 = galilean_nls(f, 2, 0.0);
    for (std::int64_t k = -16; k <= 16; ++k) {
        cplx expect = (k + 2 <= 16) ? f.value_at(k + 2) : cplx(0.0);
        REQUIRE(std::abs(b2.at_index(k) - expect) < 1e-15);
    }
    REQUIRE(max_abs_diff(b2, modulate(f, 2)) == 0.0);

    // double boost composes additively at t = 0
    auto twice = galilean_nls(galilean_nls(f, 1, 0.0), 2, 0.0);
    auto once = galilean_nls(f, 3, 0.0);
    REQUIRE(max_abs_diff(twice, once) < 1e-15);

    // physical-space oracle: u^b(x,t) = e^{-i b x} e^{i b^2 t} u(x - 2 b t)
    double t = 0.31;
    std::int64_t beta = 3;
    auto ub = galilean_nls(f, beta, t);
    for (double x : {0.0, 0.9, 2.2, 5.5}) {
        cplx expect = std::exp(cplx(0.0, -double(beta) * x + double(beta * beta) * t)) *
                      eval_at(f, x - 2.0 * beta * t);
        REQUIRE(std::abs(eval_at(ub, x) - expect) < 1e-12);
    }

    // magnitude spectrum is a pure shift for all t
    for (std::int64_t k = -16; k <= 13; ++k)
        REQUIRE(std::abs(std::abs(ub.at_index(k)) - std::abs(f.at_index(k + beta))) < 1e-15);
}

TEST_CASE("modulation operator") {
    auto lat = make_lattice(2, 8);
    auto f = random_band_limited(lat, 4.0, 0.2, 13);

    REQUIRE(max_abs_diff(modulate(f, 0), f) == 0.0);
    REQUIRE(max_abs_diff(modulate(modulate(f, 3), -3), f) == 0.0);  // support margin: no loss
    REQUIRE(sobolev_norm(modulate(f, 3), 0.0) == Approx(sobolev_norm(f, 0.0)).epsilon(1e-14));

    // truncation loss is reported, not silent
    SpectralField edge(lat);
    edge.at_index(-15) = 2.0;  // xi = -7.5
    TruncationReport rep;
    auto shifted = modulate(edge, 2, &rep);  // source would land at xi = -9.5
    REQUIRE(rep.dropped_modes == 1);
    REQUIRE(rep.dropped_mass_sq == Approx(4.0 / 2.0).epsilon(1e-14));
    REQUIRE(spectral_l2_norm(shifted) == 0.0);
}

TEST_CASE("gauge transform") {
    auto lat = make_lattice(1, 8);
    auto f = random_band_limited(lat, 8.0, 0.3, 77);
    double mu = mean_intensity(f);

    REQUIRE(max_abs_diff(gauge(f, mu, 0.0), f) == 0.0);

    auto g = gauge(f, mu, 1.3);
    REQUIRE(sobolev_norm(g, -0.7) == Approx(sobolev_norm(f, -0.7)).epsilon(1e-14));
    REQUIRE(fourier_lebesgue_norm(g, 0.5, 4.0) ==
            Approx(fourier_lebesgue_norm(f, 0.5, 4.0)).epsilon(1e-14));
    REQUIRE(modulation_norm(g, 0.0, 4.0).value ==
            Approx(modulation_norm(f, 0.0, 4.0).value).epsilon(1e-14));

    auto back = gauge(gauge(f, mu, 1.3, -1), -mu, 1.3, -1);
    REQUIRE(max_abs_diff(back, f) < 1e-15);

    REQUIRE_THROWS_AS(gauge(f, mu, 1.0, 2), usage_error);
}

TEST_CASE("galilean transform of the mkdv flow") {
    auto lat = make_lattice(1, 16);
    auto f = random_band_limited(lat, 5.0, 0.4, 23);

    REQUIRE(max_abs_diff(galilean_mkdv(f, 0, 0.9), f) < 1e-15);
    REQUIRE(max_abs_diff(galilean_mkdv(f, 2, 0.0), modulate(f, 2)) == 0.0);

    double t = 0.17;
    std::int64_t beta = 2;
    auto v = galilean_mkdv(f, beta, t);
    // physical-space oracle: e^{-i b x} e^{2 i b^3 t} u(x - 3 b^2 t)
    for (double x : {0.4, 1.9, 3.3}) {
        cplx expect =
            std::exp(cplx(0.0, -double(beta) * x + 2.0 * double(beta * beta * beta) * t)) *
            eval_at(f, x - 3.0 * double(beta * beta) * t);
        REQUIRE(std::abs(eval_at(v, x) - expect) < 1e-12);
    }
    for (std::int64_t k = -16; k <= 14; ++k)
        REQUIRE(std::abs(std::abs(v.at_index(k)) - std::abs(f.at_index(k + beta))) < 1e-15);
}
