#include "ddqkd/dsp/fft.hpp"

#include <fftw3.h>

#include <map>
#include <stdexcept>
#include <mutex>
#include <utility>

#include "ddqkd/simd/kernels.hpp"

namespace ddqkd::dsp {
namespace {

enum class Kind { forward, backward, forward_out, r2c, c2r };

// FFTW planning is not thread-safe; execution with new-array execute is.
class PlanCache {
public:
    ~PlanCache() {
        for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
    }

    fftw_plan get(std::size_t n, Kind kind) {
        std::lock_guard lock(mutex_);
        const auto key = std::make_pair(n, kind);
        if (auto it = plans_.find(key); it != plans_.end()) return it->second;
        const int len = static_cast<int>(n);
        const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
        fftw_complex* a = fftw_alloc_complex(n + 1);
        fftw_complex* b = fftw_alloc_complex(n + 1);
        double* r = fftw_alloc_real(n);
        fftw_plan plan = nullptr;
        switch (kind) {
            case Kind::forward: plan = fftw_plan_dft_1d(len, a, a, FFTW_FORWARD, flags); break;
            case Kind::backward: plan = fftw_plan_dft_1d(len, a, a, FFTW_BACKWARD, flags); break;
            case Kind::forward_out: plan = fftw_plan_dft_1d(len, a, b, FFTW_FORWARD, flags); break;
            case Kind::r2c: plan = fftw_plan_dft_r2c_1d(len, r, a, flags); break;
            case Kind::c2r: plan = fftw_plan_dft_c2r_1d(len, a, r, flags); break;
        }
        fftw_free(a);
        fftw_free(b);
        fftw_free(r);
        plans_.emplace(key, plan);
        return plan;
    }

private:
    std::mutex mutex_;
    std::map<std::pair<std::size_t, Kind>, fftw_plan> plans_;
};

PlanCache& plan_cache() {
    static PlanCache cache;
    return cache;
}

fftw_complex* as_fftw(cplx* p) { return reinterpret_cast<fftw_complex*>(p); }

void execute(std::span<cplx> data, Kind kind) {
    if (data.empty()) return;
    fftw_plan plan = plan_cache().get(data.size(), kind);
    fftw_execute_dft(plan, as_fftw(data.data()), as_fftw(data.data()));
}

}  // namespace

void fft(std::span<cplx> data) { execute(data, Kind::forward); }

void fft(std::span<const cplx> in, std::span<cplx> out) {
    if (in.size() != out.size()) throw std::invalid_argument("fft: length mismatch");
    if (in.empty()) return;
    fftw_plan plan = plan_cache().get(in.size(), Kind::forward_out);
    // Out-of-place execution does not modify the input.
    fftw_execute_dft(plan, as_fftw(const_cast<cplx*>(in.data())), as_fftw(out.data()));
}

std::vector<cplx> rfft(std::span<const double> x) {
    std::vector<cplx> out(x.size() / 2 + 1);
    if (x.empty()) return {};
    fftw_plan plan = plan_cache().get(x.size(), Kind::r2c);
    fftw_execute_dft_r2c(plan, const_cast<double*>(x.data()), as_fftw(out.data()));
    return out;
}

std::vector<double> irfft(std::vector<cplx>&& half, std::size_t n) {
    if (half.size() != n / 2 + 1) throw std::invalid_argument("irfft: half spectrum must hold n/2 + 1 bins");
    std::vector<double> out(n);
    if (n == 0) return out;
    fftw_plan plan = plan_cache().get(n, Kind::c2r);
    fftw_execute_dft_c2r(plan, as_fftw(half.data()), out.data());
    const double s = 1.0 / static_cast<double>(n);
    for (double& v : out) v *= s;
    return out;
}

void ifft(std::span<cplx> data) {
    execute(data, Kind::backward);
    if (!data.empty()) {
        simd::kernels().scale(data.data(), 1.0 / static_cast<double>(data.size()), data.size());
    }
}

std::vector<cplx> fft_of_real(std::span<const double> x) {
    std::vector<cplx> out(x.begin(), x.end());
    fft(out);
    return out;
}

double bin_frequency(std::size_t k, std::size_t n, double sample_rate) {
    const auto kk = static_cast<double>(k);
    const auto nn = static_cast<double>(n);
    return (2 * k <= n ? kk : kk - nn) * sample_rate / nn;
}

std::vector<cplx> resample_spectrum(std::span<const cplx> spectrum, std::size_t new_length) {
    const std::size_t n = spectrum.size();
    std::vector<cplx> out(new_length, cplx(0.0, 0.0));
    if (n == 0 || new_length == 0) return out;
    const double gain = static_cast<double>(new_length) / static_cast<double>(n);
    const std::size_t m = std::min(n, new_length);
    // Strictly positive and strictly negative halves that fit in both lengths.
    const std::size_t half = (m - 1) / 2;
    out[0] = spectrum[0] * gain;
    for (std::size_t k = 1; k <= half; ++k) {
        out[k] = spectrum[k] * gain;
        out[new_length - k] = spectrum[n - k] * gain;
    }
    if (m % 2 == 0) {
        const std::size_t nyq = m / 2;
        if (new_length > n) {
            // Upsampling an even-length signal: split its Nyquist bin.
            out[nyq] = spectrum[nyq] * (0.5 * gain);
            out[new_length - nyq] = spectrum[nyq] * (0.5 * gain);
        } else if (new_length < n) {
            // Downsampling to even length: fold both images into the new Nyquist bin.
            out[nyq] = (spectrum[nyq] + spectrum[n - nyq]) * gain;
        } else {
            out[nyq] = spectrum[nyq] * gain;
        }
    }
    return out;
}

}  // namespace ddqkd::dsp
