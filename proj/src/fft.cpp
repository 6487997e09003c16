#include "fft.hpp"

#include <fftw3.h>

#include <algorithm>
#include <memory>
#include <mutex>

namespace hydrofeat::detail {

namespace {

std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

struct PlanDeleter {
    void operator()(fftw_plan_s* plan) const {
        std::lock_guard lock(planner_mutex());
        fftw_destroy_plan(plan);
    }
};
using Plan = std::unique_ptr<fftw_plan_s, PlanDeleter>;

struct FftwFree {
    void operator()(void* p) const { fftw_free(p); }
};
template <typename T>
using FftwBuffer = std::unique_ptr<T[], FftwFree>;

template <typename T>
FftwBuffer<T> allocate(std::size_t count) {
    return FftwBuffer<T>(static_cast<T*>(fftw_malloc(sizeof(T) * std::max<std::size_t>(count, 1))));
}

} // namespace

std::vector<std::complex<double>> real_fft(std::span<const double> input) {
    const auto n = input.size();
    auto in = allocate<double>(n);
    auto out = allocate<fftw_complex>(n / 2 + 1);
    Plan plan;
    {
        std::lock_guard lock(planner_mutex());
        plan.reset(fftw_plan_dft_r2c_1d(static_cast<int>(n), in.get(), out.get(), FFTW_ESTIMATE));
    }
    std::copy(input.begin(), input.end(), in.get());
    fftw_execute(plan.get());

    std::vector<std::complex<double>> bins(n / 2 + 1);
    for (std::size_t k = 0; k < bins.size(); ++k) {
        bins[k] = {out[k][0], out[k][1]};
    }
    return bins;
}

std::vector<double> inverse_real_fft(std::span<const std::complex<double>> bins, std::size_t n) {
    auto in = allocate<fftw_complex>(n / 2 + 1);
    auto out = allocate<double>(n);
    Plan plan;
    {
        std::lock_guard lock(planner_mutex());
        plan.reset(fftw_plan_dft_c2r_1d(static_cast<int>(n), in.get(), out.get(), FFTW_ESTIMATE));
    }
    // c2r planning may clobber the input array, so fill after planning.
    for (std::size_t k = 0; k < n / 2 + 1; ++k) {
        in[k][0] = bins[k].real();
        in[k][1] = bins[k].imag();
    }
    fftw_execute(plan.get());
    return std::vector<double>(out.get(), out.get() + n);
}

} // namespace hydrofeat::detail
