#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace speclab {

using cplx = std::complex<double>;

/// Base class for all speclab errors.
struct error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Invalid arguments / precondition violations (maps to CLI usage errors).
struct usage_error : error {
    using error::error;
};

/// Numerical guard tripped (blowup, divergent series, non-finite data).
struct guard_error : error {
    using error::error;
};

inline void require(bool cond, const std::string& what) {
    if (!cond) throw usage_error(what);
}

/// <x> = (1 + x^2)^{1/2}
inline double jbracket(double x) { return std::sqrt(1.0 + x * x); }

/// Compensated (Kahan) accumulator for long double-precision sums.
class KahanSum {
  public:
    void add(double x) {
        double y = x - carry_;
        double t = sum_ + y;
        carry_ = (t - sum_) - y;
        sum_ = t;
    }
    double value() const { return sum_; }

  private:
    double sum_ = 0.0;
    double carry_ = 0.0;
};

/// Deterministic parallel map: fn(i) for i in [0, n), each i writing only
/// its own slot. Reduction order is up to the caller and stays sequential.
inline void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn,
                         unsigned max_threads = 0) {
    unsigned hw = std::thread::hardware_concurrency();
    if (hw == 0) hw = 1;
    if (max_threads != 0 && max_threads < hw) hw = max_threads;
    if (hw <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> workers;
    std::size_t chunk = (n + hw - 1) / hw;
    for (unsigned t = 0; t < hw; ++t) {
        std::size_t lo = t * chunk;
        std::size_t hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        workers.emplace_back([lo, hi, &fn] {
            for (std::size_t i = lo; i < hi; ++i) fn(i);
        });
    }
    for (auto& w : workers) w.join();
}

/// Floor division for integers (rounds toward -inf).
inline std::int64_t floor_div(std::int64_t a, std::int64_t b) {
    std::int64_t q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
}

/// Fixed %.17g formatting, enough digits to round-trip a double exactly.
inline std::string fmt_g17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

}  // namespace speclab
