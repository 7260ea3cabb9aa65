#pragma once

#include <fftw3.h>

#include <map>
#include <mutex>

#include "speclab/common.hpp"

namespace speclab {

// Thin wrapper around FFTW complex-to-complex transforms. Plans are cached
// per (size, direction) and created with FFTW_UNALIGNED so they can execute
// on any std::vector storage via the new-array interface. Plan creation is
// serialized (the FFTW planner is not thread-safe); execution is not.
class Dft {
  public:
    // out[j] = sum_k in[k] e^{+2 pi i jk/n}  (unnormalized)
    static void backward(const std::vector<cplx>& in, std::vector<cplx>& out) {
        run(in, out, FFTW_BACKWARD);
    }
    // out[k] = sum_j in[j] e^{-2 pi i jk/n}  (unnormalized)
    static void forward(const std::vector<cplx>& in, std::vector<cplx>& out) {
        run(in, out, FFTW_FORWARD);
    }

  private:
    static void run(const std::vector<cplx>& in, std::vector<cplx>& out, int sign) {
        const std::size_t n = in.size();
        out.resize(n);
        fftw_plan plan = acquire(n, sign);
        // new-array execute; input is const under FFTW's contract for c2c
        fftw_execute_dft(plan,
                         reinterpret_cast<fftw_complex*>(const_cast<cplx*>(in.data())),
                         reinterpret_cast<fftw_complex*>(out.data()));
    }

    static fftw_plan acquire(std::size_t n, int sign) {
        static std::mutex mu;
        static std::map<std::pair<std::size_t, int>, fftw_plan> cache;
        std::lock_guard<std::mutex> lock(mu);
        auto key = std::make_pair(n, sign);
        auto it = cache.find(key);
        if (it != cache.end()) return it->second;
        fftw_complex* scratch = fftw_alloc_complex(n);
        fftw_plan plan = fftw_plan_dft_1d(static_cast<int>(n), scratch, scratch, sign,
                                          FFTW_ESTIMATE | FFTW_UNALIGNED);
        fftw_free(scratch);
        cache.emplace(key, plan);
        return plan;
    }
};

}  // namespace speclab
