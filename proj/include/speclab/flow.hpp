#pragma once

#include <filesystem>
#include <map>

#include "speclab/spaces.hpp"

namespace speclab {

enum class Equation { NLS, NLSRenorm, MKdV, MKdVRenorm, MKdVNLS };
enum class Sign { Defocusing, Focusing };
enum class Integrator { StrangSplit, IntegratingFactorRK4 };

inline std::string equation_name(Equation e) {
    switch (e) {
        case Equation::NLS: return "nls";
        case Equation::NLSRenorm: return "nls_renorm";
        case Equation::MKdV: return "mkdv";
        case Equation::MKdVRenorm: return "mkdv_renorm";
        case Equation::MKdVNLS: return "mkdv_nls";
    }
    return "?";
}

inline Equation equation_from_name(const std::string& s) {
    if (s == "nls") return Equation::NLS;
    if (s == "nls_renorm") return Equation::NLSRenorm;
    if (s == "mkdv") return Equation::MKdV;
    if (s == "mkdv_renorm") return Equation::MKdVRenorm;
    if (s == "mkdv_nls") return Equation::MKdVNLS;
    throw usage_error("unknown equation: " + s);
}

// Sign::Defocusing selects the top symbol of each equation pair:
//   i du/dt = dxx u - 2 |u|^2 u          (Schroedinger family)
//   du/dt = -dxxx u + 6 |u|^2 dx u       (KdV family)
// Focusing selects the bottom symbol.
struct FlowSpec {
    Equation equation = Equation::NLS;
    Sign sign = Sign::Defocusing;
    double beta = 0.0;  // MKdVNLS drift coefficient, present only there
    double dt = 1e-3;
    Integrator integrator = Integrator::StrangSplit;
    bool dealias = true;
    double nonlinear_coupling = 1.0;  // 0 isolates the linear flow
    double blowup_factor = 1.1;       // abort if L^2 grows by more per step

    bool mkdv_family() const {
        return equation == Equation::MKdV || equation == Equation::MKdVRenorm ||
               equation == Equation::MKdVNLS;
    }
    double sigma() const { return sign == Sign::Defocusing ? 1.0 : -1.0; }

    void validate() const {
        require(dt > 0.0, "FlowSpec: dt must be positive");
        if (mkdv_family())
            require(integrator == Integrator::IntegratingFactorRK4,
                    "FlowSpec: derivative nonlinearity requires the integrating-factor RK4");
        if (equation == Equation::MKdVNLS)
            require(beta != 0.0, "FlowSpec: mkdv_nls requires a nonzero beta");
        else
            require(beta == 0.0, "FlowSpec: beta is only meaningful for mkdv_nls");
        require(blowup_factor > 1.0, "FlowSpec: blowup factor must exceed 1");
    }
};

namespace detail {

/// Symbol of the linear part in du/dt = L u + N(u).
inline cplx linear_symbol(const FlowSpec& spec, double xi) {
    switch (spec.equation) {
        case Equation::NLS:
        case Equation::NLSRenorm:
            return cplx(0.0, xi * xi);  // du/dt = -i dxx u
        case Equation::MKdV:
        case Equation::MKdVRenorm:
            return cplx(0.0, xi * xi * xi);  // du/dt = -dxxx u
        case Equation::MKdVNLS:
            return cplx(0.0, xi * xi * xi + 3.0 * spec.beta * xi * xi);
    }
    return cplx(0.0);
}

struct GridWork {
    std::size_t m = 0;
    std::vector<cplx> u;
    std::vector<cplx> ux;
    std::vector<cplx> prod;
};

inline std::size_t flow_grid_size(const FrequencyLattice& lat, bool dealias) {
    std::size_t m = dealias ? default_grid_size(lat) : std::bit_ceil(lat.mode_count());
    return m;
}

/// 2/3-rule guard: retained band must not exceed a third of the grid.
inline void check_dealias_margin(const FrequencyLattice& lat, std::size_t m, bool dealias) {
    if (dealias)
        require(3 * static_cast<std::size_t>(lat.half_modes()) <= m,
                "flow: dealiasing margin violated (cutoff > 2/3 of grid Nyquist)");
}

/// Nonlinear term N(u) of du/dt = L u + N(u), evaluated pseudospectrally.
inline SpectralField nonlinear_term(const SpectralField& f, const FlowSpec& spec) {
    const auto& lat = f.lattice;
    const double c = spec.nonlinear_coupling;
    if (c == 0.0) return SpectralField(lat);
    const double sg = spec.sigma();
    std::size_t m = flow_grid_size(lat, spec.dealias);
    check_dealias_margin(lat, m, spec.dealias);

    double mu = 0.0;
    if (spec.equation == Equation::NLSRenorm) {
        mu = 2.0 * mean_intensity(f);
    } else if (spec.equation == Equation::MKdVRenorm) {
        mu = mean_intensity(f);
    }

    auto grid = synthesize(f, m);
    if (spec.mkdv_family()) {
        SpectralField dx(lat);
        for (std::size_t i = 0; i < f.coeffs.size(); ++i)
            dx.coeffs[i] = cplx(0.0, lat.mode(i)) * f.coeffs[i];
        auto gridx = synthesize(dx, m);
        const bool drift = spec.equation == Equation::MKdVNLS;
        for (std::size_t j = 0; j < m; ++j) {
            double i2 = std::norm(grid[j]);
            cplx v = 6.0 * sg * c * (i2 - mu) * gridx[j];
            if (drift) v += cplx(0.0, 6.0 * spec.beta * sg * c * i2) * grid[j];
            grid[j] = v;
        }
    } else {
        for (std::size_t j = 0; j < m; ++j) {
            double i2 = std::norm(grid[j]);
            grid[j] *= cplx(0.0, 2.0 * sg * c * (i2 - mu));
        }
    }
    return analyze(grid, lat);
}

inline void apply_phase(SpectralField& f, const FlowSpec& spec, double factor) {
    const auto& lat = f.lattice;
    for (std::size_t i = 0; i < f.coeffs.size(); ++i)
        f.coeffs[i] *= std::exp(linear_symbol(spec, lat.mode(i)) * factor);
}

inline SpectralField strang_step(const SpectralField& f, const FlowSpec& spec) {
    SpectralField u = f;
    apply_phase(u, spec, 0.5 * spec.dt);

    // exact pointwise rotation: |u| is conserved by the nonlinear substep
    const double c = spec.nonlinear_coupling;
    if (c != 0.0) {
        const double sg = spec.sigma();
        double mu = spec.equation == Equation::NLSRenorm ? 2.0 * mean_intensity(u) : 0.0;
        std::size_t m = flow_grid_size(u.lattice, spec.dealias);
        check_dealias_margin(u.lattice, m, spec.dealias);
        auto grid = synthesize(u, m);
        for (auto& v : grid)
            v *= std::exp(cplx(0.0, 2.0 * sg * c * (std::norm(v) - mu) * spec.dt));
        u = analyze(grid, u.lattice);
    }

    apply_phase(u, spec, 0.5 * spec.dt);
    return u;
}

inline SpectralField ifrk4_step(const SpectralField& f, const FlowSpec& spec) {
    const auto& lat = f.lattice;
    const std::size_t n = f.coeffs.size();
    std::vector<cplx> e_half(n), e_full(n);
    for (std::size_t i = 0; i < n; ++i) {
        cplx L = linear_symbol(spec, lat.mode(i));
        e_half[i] = std::exp(L * (0.5 * spec.dt));
        e_full[i] = e_half[i] * e_half[i];
    }
    auto scaled = [&](const SpectralField& a, const std::vector<cplx>& e) {
        SpectralField out = a;
        for (std::size_t i = 0; i < n; ++i) out.coeffs[i] *= e[i];
        return out;
    };
    auto axpy = [&](const SpectralField& a, double h, const SpectralField& b) {
        SpectralField out = a;
        for (std::size_t i = 0; i < n; ++i) out.coeffs[i] += h * b.coeffs[i];
        return out;
    };

    const double dt = spec.dt;
    SpectralField n1 = nonlinear_term(f, spec);
    SpectralField n2 = nonlinear_term(scaled(axpy(f, 0.5 * dt, n1), e_half), spec);
    SpectralField n3 = nonlinear_term(axpy(scaled(f, e_half), 0.5 * dt, n2), spec);
    SpectralField n4 =
        nonlinear_term(axpy(scaled(f, e_full), dt, scaled(n3, e_half)), spec);

    SpectralField out = scaled(f, e_full);
    for (std::size_t i = 0; i < n; ++i)
        out.coeffs[i] += (dt / 6.0) * (e_full[i] * n1.coeffs[i] +
                                       2.0 * e_half[i] * (n2.coeffs[i] + n3.coeffs[i]) +
                                       n4.coeffs[i]);
    return out;
}

}  // namespace detail

/// Advance one time step. The Schroedinger family uses Strang splitting with
/// exactly unitary substeps; the KdV family uses the integrating-factor RK4
/// (the stiff dispersion is handled exactly).
inline SpectralField step(const SpectralField& state, const FlowSpec& spec) {
    spec.validate();
    double before = spectral_l2_norm(state);
    SpectralField next = spec.integrator == Integrator::StrangSplit
                             ? detail::strang_step(state, spec)
                             : detail::ifrk4_step(state, spec);
    double after = spectral_l2_norm(next);
    if (after > spec.blowup_factor * before + 1e-300)
        throw guard_error("flow: blowup guard tripped (L^2 grew by more than " +
                          fmt_g17((spec.blowup_factor - 1.0) * 100.0) + "% in one step)");
    return next;
}

struct Snapshot {
    double t = 0.0;
    SpectralField field;
    std::map<std::string, double> diagnostics;
};

struct Trajectory {
    FlowSpec spec;
    std::vector<Snapshot> snapshots;

    void validate() const {
        require(!snapshots.empty(), "Trajectory: no snapshots");
        for (std::size_t i = 1; i < snapshots.size(); ++i) {
            require(snapshots[i].t > snapshots[i - 1].t,
                    "Trajectory: snapshot times must be strictly increasing");
            require(snapshots[i].field.lattice == snapshots[0].field.lattice,
                    "Trajectory: all snapshots must share one lattice");
        }
    }
};

/// Evolve u0 up to time T, recording the requested snapshot times (each must
/// be a step multiple). Deterministic; diagnostics carry the L^2 norm.
inline Trajectory evolve(const SpectralField& u0, const FlowSpec& spec, double T,
                         const std::vector<double>& snap_times) {
    spec.validate();
    require(T >= 0.0, "evolve: horizon must be nonnegative");
    Trajectory traj;
    traj.spec = spec;

    auto record = [&](double t, const SpectralField& f) {
        Snapshot s;
        s.t = t;
        s.field = f;
        s.diagnostics["l2"] = spectral_l2_norm(f);
        traj.snapshots.push_back(std::move(s));
    };

    std::vector<std::int64_t> snap_steps;
    for (double t : snap_times) {
        require(t >= 0.0 && t <= T + 1e-9, "evolve: snapshot times must lie in [0, T]");
        double ratio = t / spec.dt;
        std::int64_t k = std::llround(ratio);
        require(std::abs(ratio - double(k)) < 1e-6,
                "evolve: snapshot times must be multiples of dt");
        snap_steps.push_back(k);
    }

    std::int64_t total = std::llround(T / spec.dt);
    require(std::abs(T / spec.dt - double(total)) < 1e-6,
            "evolve: horizon must be a multiple of dt");

    SpectralField u = u0;
    std::size_t next_snap = 0;
    if (total == 0) {
        record(0.0, u);
        return traj;
    }
    for (std::int64_t k = 0; k <= total; ++k) {
        if (next_snap < snap_steps.size() && snap_steps[next_snap] == k) {
            record(double(k) * spec.dt, u);
            ++next_snap;
        }
        if (k < total) u = step(u, spec);
    }
    if (traj.snapshots.empty()) record(double(total) * spec.dt, u);
    traj.validate();
    return traj;
}

/// Right-hand side L u + N(u) of du/dt = RHS(u), spectrally.
inline SpectralField flow_rhs(const SpectralField& f, const FlowSpec& spec) {
    SpectralField out = detail::nonlinear_term(f, spec);
    for (std::size_t i = 0; i < f.coeffs.size(); ++i)
        out.coeffs[i] += detail::linear_symbol(spec, f.lattice.mode(i)) * f.coeffs[i];
    return out;
}

/// L^2 norms of du/dt - RHS(u) with second-order centered time differencing,
/// one value per interior snapshot. Certifies that a (possibly transformed)
/// trajectory satisfies the given equation.
inline std::vector<double> residual(const Trajectory& traj, const FlowSpec& equation) {
    traj.validate();
    const auto& snaps = traj.snapshots;
    require(snaps.size() >= 3, "residual: need at least 3 consecutive snapshots");
    double h = snaps[1].t - snaps[0].t;
    for (std::size_t i = 1; i < snaps.size(); ++i)
        require(std::abs((snaps[i].t - snaps[i - 1].t) - h) < 1e-9 * std::max(1.0, h),
                "residual: snapshots not equispaced in time");

    std::vector<double> out;
    for (std::size_t i = 1; i + 1 < snaps.size(); ++i) {
        SpectralField rhs = flow_rhs(snaps[i].field, equation);
        SpectralField diff(snaps[i].field.lattice);
        for (std::size_t j = 0; j < diff.coeffs.size(); ++j)
            diff.coeffs[j] = (snaps[i + 1].field.coeffs[j] - snaps[i - 1].field.coeffs[j]) /
                                 (2.0 * h) -
                             rhs.coeffs[j];
        out.push_back(spectral_l2_norm(diff));
    }
    return out;
}

// ---- persistence ------------------------------------------------------------

inline nlohmann::json flowspec_to_json(const FlowSpec& s) {
    return nlohmann::json{{"equation", equation_name(s.equation)},
                          {"sign", s.sign == Sign::Defocusing ? "defocusing" : "focusing"},
                          {"beta", s.beta},
                          {"dt", s.dt},
                          {"integrator", s.integrator == Integrator::StrangSplit
                                             ? "strang"
                                             : "ifrk4"},
                          {"dealias", s.dealias},
                          {"nonlinear_coupling", s.nonlinear_coupling},
                          {"blowup_factor", s.blowup_factor}};
}

inline FlowSpec flowspec_from_json(const nlohmann::json& j) {
    FlowSpec s;
    s.equation = equation_from_name(j.at("equation").get<std::string>());
    s.sign = j.at("sign").get<std::string>() == "focusing" ? Sign::Focusing : Sign::Defocusing;
    s.beta = j.at("beta").get<double>();
    s.dt = j.at("dt").get<double>();
    s.integrator = j.at("integrator").get<std::string>() == "ifrk4"
                       ? Integrator::IntegratingFactorRK4
                       : Integrator::StrangSplit;
    s.dealias = j.at("dealias").get<bool>();
    s.nonlinear_coupling = j.value("nonlinear_coupling", 1.0);
    s.blowup_factor = j.value("blowup_factor", 1.1);
    return s;
}

/// Directory layout: manifest.json (spec, times, diagnostics),
/// snap_NNNN.bin field dumps, diagnostics.csv stream.
inline void save_trajectory(const Trajectory& traj, const std::string& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    nlohmann::json manifest;
    manifest["spec"] = flowspec_to_json(traj.spec);
    auto times = nlohmann::json::array();
    auto diags = nlohmann::json::array();
    for (const auto& s : traj.snapshots) {
        times.push_back(s.t);
        diags.push_back(s.diagnostics);
    }
    manifest["times"] = times;
    manifest["diagnostics"] = diags;
    std::ofstream(fs::path(dir) / "manifest.json") << manifest.dump(2) << "\n";

    std::ofstream csv(fs::path(dir) / "diagnostics.csv");
    csv << "t,l2\n";
    for (const auto& s : traj.snapshots)
        csv << fmt_g17(s.t) << "," << fmt_g17(s.diagnostics.count("l2") ? s.diagnostics.at("l2") : 0.0)
            << "\n";

    char name[32];
    for (std::size_t i = 0; i < traj.snapshots.size(); ++i) {
        std::snprintf(name, sizeof(name), "snap_%04zu.bin", i);
        save_field(traj.snapshots[i].field, (fs::path(dir) / name).string());
    }
}

inline Trajectory load_trajectory(const std::string& dir) {
    namespace fs = std::filesystem;
    nlohmann::json manifest;
    std::ifstream in(fs::path(dir) / "manifest.json");
    require(in.good(), "load_trajectory: missing manifest in " + dir);
    in >> manifest;
    Trajectory traj;
    traj.spec = flowspec_from_json(manifest.at("spec"));
    const auto& times = manifest.at("times");
    char name[32];
    for (std::size_t i = 0; i < times.size(); ++i) {
        std::snprintf(name, sizeof(name), "snap_%04zu.bin", i);
        Snapshot s;
        s.t = times[i].get<double>();
        s.field = load_field((fs::path(dir) / name).string());
        for (auto& [k, v] : manifest.at("diagnostics")[i].items())
            s.diagnostics[k] = v.get<double>();
        traj.snapshots.push_back(std::move(s));
    }
    traj.validate();
    return traj;
}

}  // namespace speclab
